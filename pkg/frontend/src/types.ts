/** Wire types for the classification service's JSON API. */

export type NoiseClass = 'aircraft' | 'community';

export interface QueueEntry {
  event_id: string;
  probabilities: [number, number];
  entropy: number;
  model_version: string;
  enqueued_at: string;
  status: 'pending' | 'labeled' | 'skipped';
}

export interface QueueResponse {
  entries: QueueEntry[];
  pending_count: number;
  new_labels_since_retrain: number;
  retrain_min_new_labels: number;
}

export interface MatrixResponse {
  event_id: string;
  width: number;
  raw_frames: number[][];
  matrix: number[][];
  raw_matrix: number[][];
  duration_seconds: number;
  duration_feature: number | null;
  band_centers_hz: number[];
  label: NoiseClass | null;
}

export interface LabelResponse {
  event_id: string;
  class: NoiseClass;
  provenance: string;
  labeler: string | null;
  labeled_at: string;
}

export interface ModelsResponse {
  active_version: string | null;
  versions: { version: string; created_at: string; summary: Record<string, unknown> }[];
}

export interface RetrainAccepted {
  version: string;
  trained_on: number;
  activated: boolean;
}

export interface HealthResponse {
  status: string;
  active_version: string | null;
  events_stored: number;
  queue_pending: number;
  new_labels_since_retrain: number;
  retrain_min_new_labels: number;
}

export interface ApiError {
  error: {
    code: string;
    message: string;
    details?: { required: number; have: number; remaining: number };
  };
}

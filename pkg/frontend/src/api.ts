/** Thin typed client over the service's HTTP API.
 *
 * The console performs no classification or preprocessing math of its
 * own; every method maps to exactly one documented endpoint.
 */

import type {
  ApiError,
  HealthResponse,
  LabelResponse,
  MatrixResponse,
  ModelsResponse,
  NoiseClass,
  QueueResponse,
  RetrainAccepted,
} from './types.js';

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details?: ApiError['error']['details'],
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const err = (body as ApiError | null)?.error;
      throw new ApiRequestError(
        response.status,
        err?.code ?? `HTTP${response.status}`,
        err?.message ?? `request failed with status ${response.status}`,
        err?.details,
      );
    }
    return body as T;
  }

  queue(limit = 50): Promise<QueueResponse> {
    return this.request<QueueResponse>(`/v1/queue?limit=${limit}`);
  }

  matrix(eventId: string): Promise<MatrixResponse> {
    return this.request<MatrixResponse>(`/v1/events/${encodeURIComponent(eventId)}/matrix`);
  }

  label(eventId: string, cls: NoiseClass, labeler: string): Promise<LabelResponse> {
    return this.request<LabelResponse>(`/v1/queue/${encodeURIComponent(eventId)}/label`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ class: cls, labeler }),
    });
  }

  retrain(force = false): Promise<RetrainAccepted> {
    return this.request<RetrainAccepted>('/v1/models/retrain', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ force }),
    });
  }

  activate(version: string): Promise<ModelsResponse> {
    return this.request<ModelsResponse>(
      `/v1/models/${encodeURIComponent(version)}/activate`,
      { method: 'POST' },
    );
  }

  models(): Promise<ModelsResponse> {
    return this.request<ModelsResponse>('/v1/models');
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>('/v1/health');
  }
}

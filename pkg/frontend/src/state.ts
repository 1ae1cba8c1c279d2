/** Console state: the queue view, focus, and guarded mutations.
 *
 * All server responses flow through here; no label state survives a
 * refresh unsubmitted. Submission is de-duplicated per event so a
 * double-click (or repeated keypress) produces exactly one request.
 */

import { ApiClient, ApiRequestError } from './api.js';
import type { MatrixResponse, NoiseClass, QueueEntry, QueueResponse } from './types.js';

export interface ConsoleView {
  entries: QueueEntry[];
  focusedId: string | null;
  pendingCount: number;
  newLabels: number;
  retrainMin: number;
  activeVersion: string | null;
  statusMessage: string;
  matrix: MatrixResponse | null;
  matrixError: string | null;
  displayMode: 'raw' | 'normalized';
}

type Listener = (view: ConsoleView) => void;

export class ConsoleController {
  private entries: QueueEntry[] = [];
  private focusedId: string | null = null;
  private pendingCount = 0;
  private newLabels = 0;
  private retrainMin = 0;
  private activeVersion: string | null = null;
  private statusMessage = '';
  private matrix: MatrixResponse | null = null;
  private matrixError: string | null = null;
  private displayMode: 'raw' | 'normalized' = 'raw';
  private inFlight = new Set<string>();
  private retrainInFlight = false;
  private listeners: Listener[] = [];

  constructor(
    private readonly api: ApiClient,
    readonly labeler: string,
  ) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  view(): ConsoleView {
    return {
      entries: [...this.entries],
      focusedId: this.focusedId,
      pendingCount: this.pendingCount,
      newLabels: this.newLabels,
      retrainMin: this.retrainMin,
      activeVersion: this.activeVersion,
      statusMessage: this.statusMessage,
      matrix: this.matrix,
      matrixError: this.matrixError,
      displayMode: this.displayMode,
    };
  }

  private emit(): void {
    const snapshot = this.view();
    for (const listener of this.listeners) listener(snapshot);
  }

  private applyQueue(queue: QueueResponse): void {
    // server already orders by entropy descending; keep it that way
    this.entries = queue.entries.filter((e) => e.status === 'pending');
    this.pendingCount = queue.pending_count;
    this.newLabels = queue.new_labels_since_retrain;
    this.retrainMin = queue.retrain_min_new_labels;
    if (!this.entries.some((e) => e.event_id === this.focusedId)) {
      this.focusedId = this.entries[0]?.event_id ?? null;
    }
  }

  async refresh(): Promise<void> {
    const [queue, health] = await Promise.all([this.api.queue(), this.api.health()]);
    this.applyQueue(queue);
    this.activeVersion = health.active_version;
    this.emit();
    await this.loadFocusedMatrix();
  }

  async loadFocusedMatrix(): Promise<void> {
    if (this.focusedId === null) {
      this.matrix = null;
      this.matrixError = null;
      this.emit();
      return;
    }
    const wanted = this.focusedId;
    try {
      const matrix = await this.api.matrix(wanted);
      if (this.focusedId === wanted) {
        this.matrix = matrix;
        this.matrixError = null;
      }
    } catch (err) {
      if (this.focusedId === wanted) {
        this.matrix = null;
        this.matrixError = err instanceof Error ? err.message : String(err);
      }
    }
    this.emit();
  }

  focus(eventId: string): void {
    if (this.entries.some((e) => e.event_id === eventId)) {
      this.focusedId = eventId;
      this.emit();
      void this.loadFocusedMatrix();
    }
  }

  /** Advance focus to the next-highest-entropy pending entry. */
  nextEntry(): void {
    if (this.focusedId === null) return;
    const idx = this.entries.findIndex((e) => e.event_id === this.focusedId);
    const next = this.entries[idx + 1] ?? this.entries[0];
    if (next !== undefined && next.event_id !== this.focusedId) {
      this.focusedId = next.event_id;
      this.emit();
      void this.loadFocusedMatrix();
    }
  }

  /** Skip is a pure navigation action; the entry stays pending. */
  skip(): void {
    this.nextEntry();
  }

  toggleDisplayMode(): void {
    this.displayMode = this.displayMode === 'raw' ? 'normalized' : 'raw';
    this.emit();
  }

  /** Submit a label for the focused entry; exactly one request per event. */
  async labelFocused(cls: NoiseClass): Promise<boolean> {
    const eventId = this.focusedId;
    if (eventId === null || this.inFlight.has(eventId)) return false;
    this.inFlight.add(eventId);
    try {
      await this.api.label(eventId, cls, this.labeler);
      this.statusMessage = `labeled ${eventId} as ${cls}`;
      this.entries = this.entries.filter((e) => e.event_id !== eventId);
      this.pendingCount = Math.max(0, this.pendingCount - 1);
      this.newLabels += 1;
      this.focusedId = this.entries[0]?.event_id ?? null;
      this.emit();
      await this.loadFocusedMatrix();
      return true;
    } catch (err) {
      if (err instanceof ApiRequestError && err.code === 'AlreadyLabeled') {
        this.statusMessage = `${eventId} was already labeled; refreshing`;
        await this.refresh();
      } else {
        // network error: keep the entry and re-enable the buttons
        this.statusMessage = err instanceof Error ? err.message : String(err);
        this.emit();
      }
      return false;
    } finally {
      this.inFlight.delete(eventId);
    }
  }

  /** How many labels remain before retraining is allowed. */
  remainingForRetrain(): number {
    return Math.max(0, this.retrainMin - this.newLabels);
  }

  async requestRetrain(force = false): Promise<string | null> {
    if (this.retrainInFlight) return null;
    this.retrainInFlight = true;
    try {
      const accepted = await this.api.retrain(force);
      this.statusMessage = `retrained: ${accepted.version} on ${accepted.trained_on} events (not yet active)`;
      await this.refresh();
      return accepted.version;
    } catch (err) {
      if (err instanceof ApiRequestError && err.code === 'NotEnoughNewLabels') {
        const remaining = err.details?.remaining ?? this.remainingForRetrain();
        this.statusMessage = `${remaining} more label${remaining === 1 ? '' : 's'} needed before retraining`;
      } else {
        this.statusMessage = err instanceof Error ? err.message : String(err);
      }
      this.emit();
      return null;
    } finally {
      this.retrainInFlight = false;
    }
  }
}

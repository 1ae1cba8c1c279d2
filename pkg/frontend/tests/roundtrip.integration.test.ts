/**
 * Live round-trip against a running service; the console acceptance
 * check. Orchestrated by scripts/roundtrip.py, which seeds the service
 * with 5 queued events, sets retrain_min_new_labels=5, and provides:
 *
 *   CONSOLE_API_URL      base URL of the live service
 *   NOISENET_LABELS_PATH path of the server's label log (read-only here)
 *
 * Labeling all 5 via the console controller must empty the queue, the
 * server label log must contain exactly 5 manual-provenance records,
 * and the retrain button must report the correct remaining count until
 * the threshold is met.
 */

import { readFileSync } from 'node:fs';

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { ConsoleController } from '../src/state';

const API_URL = process.env.CONSOLE_API_URL;
const LABELS_PATH = process.env.NOISENET_LABELS_PATH;

describe.skipIf(!API_URL)('console round-trip against a live service', () => {
  it('labels five queued events, tracks the retrain countdown, then retrains', async () => {
    const api = new ApiClient(API_URL!);
    const controller = new ConsoleController(api, 'roundtrip-analyst');

    await controller.refresh();
    expect(controller.view().entries).toHaveLength(5);
    expect(controller.view().pendingCount).toBe(5);
    expect(controller.view().activeVersion).toBe('v1');

    const classes = ['aircraft', 'community', 'community', 'aircraft', 'community'] as const;
    for (let i = 0; i < 5; i++) {
      const focused = controller.view().focusedId;
      expect(focused).not.toBeNull();
      const ok = await controller.labelFocused(classes[i]);
      expect(ok).toBe(true);

      if (i < 4) {
        // the retrain button must report how many labels remain
        const version = await controller.requestRetrain(false);
        expect(version).toBeNull();
        const remaining = 5 - (i + 1);
        expect(controller.view().statusMessage).toBe(
          `${remaining} more label${remaining === 1 ? '' : 's'} needed before retraining`,
        );
      }
    }

    // queue is empty on the console and on the server
    expect(controller.view().entries).toHaveLength(0);
    expect(controller.view().pendingCount).toBe(0);
    const queue = await api.queue();
    expect(queue.entries).toHaveLength(0);
    expect(queue.pending_count).toBe(0);
    expect(queue.new_labels_since_retrain).toBe(5);

    // exactly 5 manual-provenance records in the server label log
    const log = readFileSync(LABELS_PATH!, 'utf-8')
      .split('\n')
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line));
    const manual = log.filter((record) => record.provenance === 'manual');
    expect(manual).toHaveLength(5);
    expect(new Set(manual.map((r) => r.labeler))).toEqual(new Set(['roundtrip-analyst']));

    // threshold met: the retrain button now works without force
    const version = await controller.requestRetrain(false);
    expect(version).toBe('v2');
    const models = await api.models();
    expect(models.versions.map((v) => v.version)).toContain('v2');
    expect(models.active_version).toBe('v1'); // never auto-activated
  });
});

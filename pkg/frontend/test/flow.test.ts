/**
 * End-to-end flow against the real service: landing, reader, export, and
 * the review queue, all through the HTTP API.
 *
 * The service is booted with a hand-labeled fixture as its only bundled
 * sample and an accept bar so high that every boundary lands in the
 * review queue.
 */

import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import { ApiClient, type FilingRecord } from '../src/api.js';
import { LandingModel } from '../src/landing.js';
import {
  ReaderModel,
  serializeJsonExport,
  serializeTextExport,
  type ExportRecord,
} from '../src/reader.js';
import { ReviewModel, splitExcerpt } from '../src/review.js';
import { FIXTURE_DIR, startService, type LiveService } from './helpers.js';

const SERIAL = '0000950170-23-027948';

interface GoldLabels {
  serial: string;
  items: Array<{ item: string }>;
}

describe('review client against a live service', () => {
  let service: LiveService;
  let api: ApiClient;
  let filing: FilingRecord;
  let reader: ReaderModel;
  let acceptedItem: string;
  let acceptedTaskId: string;

  const gold = JSON.parse(
    readFileSync(join(FIXTURE_DIR, `${SERIAL}.gold.json`), 'utf-8'),
  ) as GoldLabels;

  beforeAll(async () => {
    service = await startService({ fixtures: [`${SERIAL}.htm`], threshold: '0.9999' });
    api = new ApiClient(service.base);
  });

  afterAll(async () => {
    await service?.stop();
  });

  it('serves the single-page client as static files', async () => {
    const page = await fetch(`${service.base}/ui/`);
    expect(page.status).toBe(200);
    expect(page.headers.get('content-type')).toContain('text/html');
    expect(await page.text()).toContain('js/app.js');
    const script = await fetch(`${service.base}/ui/js/app.js`);
    expect(script.status).toBe(200);
  });

  it('lands, lists the bundled fixture, and itemizes it', async () => {
    const landing = new LandingModel(api);
    await landing.loadSamples();
    expect(landing.samples.map((s) => s.serial)).toContain(SERIAL);

    const opened = await landing.submitSample(SERIAL);
    expect(landing.error).toBeNull();
    expect(opened).not.toBeNull();
    filing = opened!;
    expect(filing.serial).toBe(SERIAL);
  });

  it('reader lists exactly the hand-labeled item set', () => {
    reader = new ReaderModel(api, filing);
    expect(reader.items.map((entry) => entry.item)).toEqual(gold.items.map((g) => g.item));
    // the accept bar is unreachable, so every boundary waits for review
    expect(reader.needsReview).toBe(true);
    expect(reader.pendingTasks).toHaveLength(gold.items.length);
  });

  it('shows a selected item exactly as the API serves it', async () => {
    for (const label of ['1', '7A', '16']) {
      await reader.select(label);
      expect(reader.stale).toBe(false);
      const entry = reader.entryFor(label)!;
      const direct = await fetch(
        `${service.base}/items/${encodeURIComponent(entry.key)}`,
      ).then((r) => r.json());
      expect(reader.content).toBe(direct.value);
    }
  });

  it('export files byte-equal the records the API serves', async () => {
    const independent: ExportRecord[] = [];
    for (const entry of filing.items) {
      const direct = await fetch(
        `${service.base}/items/${encodeURIComponent(entry.key)}`,
      ).then((r) => r.json());
      independent.push({
        key: entry.key,
        item: entry.item,
        part: entry.part,
        title: entry.title,
        value: direct.value,
      });
    }

    const json = await reader.exportFile('json');
    const expectedJson = serializeJsonExport(SERIAL, independent);
    expect(Buffer.from(json.content, 'utf-8').equals(Buffer.from(expectedJson, 'utf-8'))).toBe(
      true,
    );

    const text = await reader.exportFile('text');
    const expectedText = serializeTextExport(SERIAL, independent);
    expect(Buffer.from(text.content, 'utf-8').equals(Buffer.from(expectedText, 'utf-8'))).toBe(
      true,
    );
    for (const record of independent) {
      expect(text.content).toContain(record.value);
    }
  });

  it('accept clears the flag and appends exactly one labeled sample', async () => {
    const review = new ReviewModel(api, SERIAL);
    await review.load();
    expect(review.tasks.length).toBeGreaterThan(0);

    const task = review.tasks[0];
    acceptedItem = task.item;
    acceptedTaskId = task.task_id;
    const parts = splitExcerpt(task);
    expect(parts.candidate.length).toBeGreaterThan(0);
    expect(parts.before + parts.candidate + parts.after).toBe(task.excerpt);

    const before = await fetch(`${service.base}/metrics`).then((r) => r.json());
    const updated = await review.submit(task.task_id, 'accept', 'flow-test');
    expect(review.conflict).toBeNull();
    expect(review.tasks.some((t) => t.task_id === task.task_id)).toBe(false);
    expect(updated).not.toBeNull();

    const after = await fetch(`${service.base}/metrics`).then((r) => r.json());
    const delta =
      (after.counters.labels_appended ?? 0) - (before.counters.labels_appended ?? 0);
    expect(delta).toBe(1);

    // the reader picks the change up from the server, not from local edits
    await reader.refresh();
    expect(reader.entryFor(acceptedItem)?.flagged).toBe(false);
    expect(reader.pendingTasks).toHaveLength(gold.items.length - 1);

    const pending = await api.reviewTasks({ status: 'pending', serial: SERIAL });
    expect(pending.some((t) => t.task_id === task.task_id)).toBe(false);
  });

  it('a second verdict on the same task conflicts and drops the stale copy', async () => {
    const staleQueue = new ReviewModel(api, SERIAL);
    await staleQueue.load();
    const ghost = { ...staleQueue.tasks[0], task_id: acceptedTaskId, item: acceptedItem };
    staleQueue.tasks = [ghost, ...staleQueue.tasks];

    const outcome = await staleQueue.submit(acceptedTaskId, 'reject', 'other-session');
    expect(outcome).toBeNull();
    expect(staleQueue.conflict).toMatch(/already resolved/i);
    expect(staleQueue.tasks.some((t) => t.task_id === acceptedTaskId)).toBe(false);

    // the earlier verdict stands server-side
    const record = await fetch(`${service.base}/review/${acceptedTaskId}`).then((r) => r.json());
    expect(record.status).toBe('accepted');
    expect(record.reviewer).toBe('flow-test');
  });
});

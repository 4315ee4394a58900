/**
 * Test support: a recording fake fetch for the unit suites, small payload
 * builders, and a launcher that boots the real service for the flow suite.
 */

import { spawn, type ChildProcess } from 'node:child_process';
import { cp, mkdir, mkdtemp, rm } from 'node:fs/promises';
import { createServer } from 'node:net';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import type { FetchLike, FilingRecord, ItemEntry, ReviewTaskRecord } from '../src/api.js';

export interface RecordedCall {
  path: string;
  method: string;
  body: unknown;
}

export type RouteHandler = (call: RecordedCall) => { status: number; body: unknown } | undefined;

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

/** fetch stand-in that records every call and answers from a routing function. */
export function fakeFetch(route: RouteHandler): { impl: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const impl: FetchLike = async (input, init) => {
    const call: RecordedCall = {
      path: input,
      method: init?.method ?? 'GET',
      body: init?.body === undefined ? null : JSON.parse(String(init.body)),
    };
    calls.push(call);
    const answer = route(call);
    if (answer === undefined) {
      throw new Error(`unrouted request: ${call.method} ${call.path}`);
    }
    return jsonResponse(answer.status, answer.body);
  };
  return { impl, calls };
}

export function makeItem(overrides: Partial<ItemEntry> & { item: string; key: string }): ItemEntry {
  return {
    part: 1,
    title: 'Business',
    offset: 0,
    end_offset: 100,
    probability: 0.98,
    flagged: false,
    ...overrides,
  };
}

export function makeFiling(
  serial: string,
  items: ItemEntry[],
  extra: Partial<FilingRecord> = {},
): FilingRecord {
  return {
    serial,
    pipeline_version: '1.0.0',
    format: 'html',
    processed_at: 1,
    needs_review: items.some((entry) => entry.flagged),
    score: 10.0,
    items,
    skipped: [],
    review_tasks: [],
    ...extra,
  };
}

export function makeTask(
  overrides: Partial<ReviewTaskRecord> & { task_id: string },
): ReviewTaskRecord {
  return {
    serial: 'S',
    item: '1',
    offset: 40,
    probability: 0.31,
    excerpt: 'before text Item 1. Business after text',
    highlight_start: 12,
    highlight_end: 29,
    status: 'pending',
    created_at: 1,
    resolved_at: null,
    reviewer: null,
    verdict: null,
    ...overrides,
  };
}

const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), '..', '..');
export const FIXTURE_DIR = join(REPO_ROOT, 'tests', 'fixtures');

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once('error', reject);
    probe.listen(0, '127.0.0.1', () => {
      const address = probe.address();
      probe.close(() => {
        if (address !== null && typeof address === 'object') {
          resolve(address.port);
        } else {
          reject(new Error('could not allocate a port'));
        }
      });
    });
  });
}

export interface LiveService {
  base: string;
  stop: () => Promise<void>;
}

/**
 * Boot the real HTTP service with fixture filings bundled as samples.
 * The first boot trains a scorer, so startup can take a while.
 */
export async function startService(options: {
  fixtures: string[];
  threshold?: string;
}): Promise<LiveService> {
  const root = await mkdtemp(join(tmpdir(), 'tenk-ui-'));
  const samples = join(root, 'samples');
  await mkdir(samples);
  for (const name of options.fixtures) {
    await cp(join(FIXTURE_DIR, name), join(samples, name));
  }
  const port = await freePort();
  const env: NodeJS.ProcessEnv = {
    ...process.env,
    PYTHONUNBUFFERED: '1',
    TENK_STORE_PATH: join(root, 'store.db'),
    TENK_CACHE_DIR: join(root, 'cache'),
    TENK_MODEL_PATH: join(root, 'model.json'),
    TENK_SAMPLES_DIR: samples,
    TENK_STATIC_DIR: join(REPO_ROOT, 'frontend', 'app'),
    TENK_HOST: '127.0.0.1',
    TENK_PORT: String(port),
  };
  if (options.threshold !== undefined) {
    env.TENK_THRESHOLD = options.threshold;
  }
  const proc: ChildProcess = spawn('python3', ['-m', 'tenk.cli', 'serve'], {
    cwd: REPO_ROOT,
    env,
    stdio: ['ignore', 'pipe', 'pipe'],
  });
  let output = '';
  proc.stdout?.on('data', (chunk) => {
    output += String(chunk);
  });
  proc.stderr?.on('data', (chunk) => {
    output += String(chunk);
  });

  const base = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 150_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early (code ${proc.exitCode}):\n${output}`);
    }
    try {
      const probe = await fetch(`${base}/healthz`);
      if (probe.ok) {
        break;
      }
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      proc.kill('SIGKILL');
      throw new Error(`service did not come up in time:\n${output}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }

  return {
    base,
    stop: async () => {
      proc.kill('SIGTERM');
      await new Promise<void>((resolve) => {
        const force = setTimeout(() => {
          proc.kill('SIGKILL');
          resolve();
        }, 5_000);
        proc.once('exit', () => {
          clearTimeout(force);
          resolve();
        });
      });
      await rm(root, { recursive: true, force: true });
    },
  };
}

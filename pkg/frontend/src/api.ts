/**
 * Typed client for the itemization service HTTP API.
 *
 * Every call resolves with parsed JSON on success and throws ApiError
 * otherwise, so screens can branch on the status code without touching
 * Response objects. The client never rewrites server payloads.
 */

export interface SampleEntry {
  serial: string;
  name: string;
  size: number;
}

export interface ItemEntry {
  item: string;
  part: number;
  key: string;
  title: string;
  offset: number;
  end_offset: number;
  probability: number;
  flagged: boolean;
}

export interface FilingRecord {
  serial: string;
  pipeline_version: string;
  format: string;
  processed_at: number;
  needs_review: boolean;
  score: number;
  items: ItemEntry[];
  skipped: string[];
  review_tasks: string[];
  detail?: string;
}

export interface ItemRecord {
  key: string;
  serial: string;
  value: string;
  stored_at: number;
  pipeline_version: string;
}

export interface ReviewTaskRecord {
  task_id: string;
  serial: string;
  item: string;
  offset: number;
  probability: number;
  excerpt: string;
  highlight_start: number;
  highlight_end: number;
  status: string;
  created_at: number;
  resolved_at: number | null;
  reviewer: string | null;
  verdict: string | null;
}

export interface VerdictResponse {
  task: ReviewTaskRecord;
  filing: FilingRecord | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
    readonly body: unknown = null,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = 'ApiError';
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === 'object' && 'detail' in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText || `status ${response.status}`;
      throw new ApiError(response.status, detail, body);
    }
    return body as T;
  }

  private postJson<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  async samples(): Promise<SampleEntry[]> {
    const body = await this.request<{ samples: SampleEntry[] }>('/samples');
    return body.samples;
  }

  itemize(ref: { serial?: string; url?: string }): Promise<FilingRecord> {
    return this.postJson<FilingRecord>('/itemize', ref);
  }

  filing(serial: string): Promise<FilingRecord> {
    return this.request<FilingRecord>(`/filings/${encodeURIComponent(serial)}`);
  }

  // keys contain '#', which must not reach the server as a fragment marker
  item(key: string): Promise<ItemRecord> {
    return this.request<ItemRecord>(`/items/${encodeURIComponent(key)}`);
  }

  async reviewTasks(
    filter: { serial?: string; status?: string } = {},
  ): Promise<ReviewTaskRecord[]> {
    const params = new URLSearchParams();
    if (filter.status) params.set('status', filter.status);
    if (filter.serial) params.set('serial', filter.serial);
    const query = params.toString();
    const body = await this.request<{ tasks: ReviewTaskRecord[] }>(
      query ? `/review?${query}` : '/review',
    );
    return body.tasks;
  }

  submitVerdict(
    taskId: string,
    verdict: 'accept' | 'reject',
    reviewer: string,
  ): Promise<VerdictResponse> {
    return this.postJson<VerdictResponse>(
      `/review/${encodeURIComponent(taskId)}`,
      { verdict, reviewer },
    );
  }
}

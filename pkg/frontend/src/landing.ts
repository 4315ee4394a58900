/**
 * Landing screen state: pick a bundled sample or paste a filing link.
 *
 * Input that does not even parse as a URL is rejected locally and never
 * produces a request. Server rejections keep their status so the screen
 * can word 400, 404, and 422 differently.
 */

import { ApiClient, ApiError, FilingRecord, SampleEntry } from './api.js';

export type LandingErrorKind =
  | 'validation'
  | 'rejected'
  | 'not-found'
  | 'structureless'
  | 'failure';

export interface LandingError {
  kind: LandingErrorKind;
  message: string;
  // set for structureless filings so the screen can link to the review queue
  reviewSerial?: string;
}

/** Local check for pasted links. Returns a message for bad input, null when ok. */
export function validateFilingUrl(raw: string): string | null {
  const trimmed = raw.trim();
  if (!trimmed) {
    return 'Enter a filing link first.';
  }
  let parsed: URL;
  try {
    parsed = new URL(trimmed);
  } catch {
    return 'That does not parse as a URL. Paste a full link, e.g. https://www.sec.gov/Archives/...';
  }
  if (parsed.protocol !== 'http:' && parsed.protocol !== 'https:') {
    return 'Only http(s) links are supported.';
  }
  return null;
}

export function describeItemizeError(err: unknown): LandingError {
  if (!(err instanceof ApiError)) {
    return { kind: 'failure', message: 'The itemization service could not be reached.' };
  }
  switch (err.status) {
    case 400:
      return { kind: 'rejected', message: `The service rejected that reference: ${err.detail}.` };
    case 404:
      return { kind: 'not-found', message: `Nothing was found at that reference: ${err.detail}.` };
    case 422: {
      const body = err.body as { serial?: string } | null;
      return {
        kind: 'structureless',
        message:
          'The filing was fetched but no item structure could be found in it. ' +
          'It is waiting in the review queue.',
        reviewSerial: body?.serial,
      };
    }
    default:
      return { kind: 'failure', message: `Unexpected error (${err.status}): ${err.detail}.` };
  }
}

export class LandingModel {
  samples: SampleEntry[] = [];
  error: LandingError | null = null;
  busy = false;

  constructor(private readonly api: ApiClient) {}

  async loadSamples(): Promise<void> {
    this.samples = await this.api.samples();
  }

  /** Itemize one of the bundled samples. Returns the filing, or null on error. */
  submitSample(serial: string): Promise<FilingRecord | null> {
    return this.submit({ serial });
  }

  /** Validate a pasted link, then itemize it. Garbage never leaves the browser. */
  async submitUrl(raw: string): Promise<FilingRecord | null> {
    const problem = validateFilingUrl(raw);
    if (problem !== null) {
      this.error = { kind: 'validation', message: problem };
      return null;
    }
    return this.submit({ url: raw.trim() });
  }

  private async submit(ref: { serial?: string; url?: string }): Promise<FilingRecord | null> {
    this.error = null;
    this.busy = true;
    try {
      return await this.api.itemize(ref);
    } catch (err) {
      this.error = describeItemizeError(err);
      return null;
    } finally {
      this.busy = false;
    }
  }
}

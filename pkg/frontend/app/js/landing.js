/**
 * Landing screen state: pick a bundled sample or paste a filing link.
 *
 * Input that does not even parse as a URL is rejected locally and never
 * produces a request. Server rejections keep their status so the screen
 * can word 400, 404, and 422 differently.
 */
import { ApiError } from './api.js';
/** Local check for pasted links. Returns a message for bad input, null when ok. */
export function validateFilingUrl(raw) {
    const trimmed = raw.trim();
    if (!trimmed) {
        return 'Enter a filing link first.';
    }
    let parsed;
    try {
        parsed = new URL(trimmed);
    }
    catch {
        return 'That does not parse as a URL. Paste a full link, e.g. https://www.sec.gov/Archives/...';
    }
    if (parsed.protocol !== 'http:' && parsed.protocol !== 'https:') {
        return 'Only http(s) links are supported.';
    }
    return null;
}
export function describeItemizeError(err) {
    if (!(err instanceof ApiError)) {
        return { kind: 'failure', message: 'The itemization service could not be reached.' };
    }
    switch (err.status) {
        case 400:
            return { kind: 'rejected', message: `The service rejected that reference: ${err.detail}.` };
        case 404:
            return { kind: 'not-found', message: `Nothing was found at that reference: ${err.detail}.` };
        case 422: {
            const body = err.body;
            return {
                kind: 'structureless',
                message: 'The filing was fetched but no item structure could be found in it. ' +
                    'It is waiting in the review queue.',
                reviewSerial: body?.serial,
            };
        }
        default:
            return { kind: 'failure', message: `Unexpected error (${err.status}): ${err.detail}.` };
    }
}
export class LandingModel {
    api;
    samples = [];
    error = null;
    busy = false;
    constructor(api) {
        this.api = api;
    }
    async loadSamples() {
        this.samples = await this.api.samples();
    }
    /** Itemize one of the bundled samples. Returns the filing, or null on error. */
    submitSample(serial) {
        return this.submit({ serial });
    }
    /** Validate a pasted link, then itemize it. Garbage never leaves the browser. */
    async submitUrl(raw) {
        const problem = validateFilingUrl(raw);
        if (problem !== null) {
            this.error = { kind: 'validation', message: problem };
            return null;
        }
        return this.submit({ url: raw.trim() });
    }
    async submit(ref) {
        this.error = null;
        this.busy = true;
        try {
            return await this.api.itemize(ref);
        }
        catch (err) {
            this.error = describeItemizeError(err);
            return null;
        }
        finally {
            this.busy = false;
        }
    }
}

/**
 * Typed client for the itemization service HTTP API.
 *
 * Every call resolves with parsed JSON on success and throws ApiError
 * otherwise, so screens can branch on the status code without touching
 * Response objects. The client never rewrites server payloads.
 */
export class ApiError extends Error {
    status;
    detail;
    body;
    constructor(status, detail, body = null) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
        this.detail = detail;
        this.body = body;
        this.name = 'ApiError';
    }
}
export class ApiClient {
    base;
    fetchImpl;
    constructor(base = '', fetchImpl = (input, init) => fetch(input, init)) {
        this.base = base;
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        const response = await this.fetchImpl(this.base + path, init);
        let body = null;
        try {
            body = await response.json();
        }
        catch {
            body = null;
        }
        if (!response.ok) {
            const detail = body !== null && typeof body === 'object' && 'detail' in body
                ? String(body.detail)
                : response.statusText || `status ${response.status}`;
            throw new ApiError(response.status, detail, body);
        }
        return body;
    }
    postJson(path, payload) {
        return this.request(path, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(payload),
        });
    }
    async samples() {
        const body = await this.request('/samples');
        return body.samples;
    }
    itemize(ref) {
        return this.postJson('/itemize', ref);
    }
    filing(serial) {
        return this.request(`/filings/${encodeURIComponent(serial)}`);
    }
    // keys contain '#', which must not reach the server as a fragment marker
    item(key) {
        return this.request(`/items/${encodeURIComponent(key)}`);
    }
    async reviewTasks(filter = {}) {
        const params = new URLSearchParams();
        if (filter.status)
            params.set('status', filter.status);
        if (filter.serial)
            params.set('serial', filter.serial);
        const query = params.toString();
        const body = await this.request(query ? `/review?${query}` : '/review');
        return body.tasks;
    }
    submitVerdict(taskId, verdict, reviewer) {
        return this.postJson(`/review/${encodeURIComponent(taskId)}`, { verdict, reviewer });
    }
}

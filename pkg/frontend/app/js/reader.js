/**
 * Reader screen state: the item list of one filing, the selected item's
 * text, and client-side export of the fetched records.
 *
 * Everything shown or exported is exactly what the API served. The reader
 * keeps fetched values verbatim and never edits them; refresh() re-reads
 * the filing so flags and keys mirror the server again after verdicts.
 */
import { ApiError } from './api.js';
/** JSON export: the fetched records verbatim under a stable envelope. */
export function serializeJsonExport(serial, records) {
    return JSON.stringify({ serial, items: records }, null, 2) + '\n';
}
/** Text export: one banner line per item, then its text exactly as served. */
export function serializeTextExport(serial, records) {
    const parts = [`Filing ${serial}`];
    for (const record of records) {
        parts.push(`\n===== ${record.key} | Item ${record.item}. ${record.title} =====\n${record.value}`);
    }
    return parts.join('\n') + '\n';
}
export class ReaderModel {
    api;
    serial;
    items = [];
    skipped = [];
    needsReview = false;
    pendingTasks = [];
    selected = null;
    content = null;
    // a selected key vanished server-side; the user should reload the filing
    stale = false;
    values = new Map();
    constructor(api, filing) {
        this.api = api;
        this.serial = filing.serial;
        this.apply(filing);
    }
    entryFor(label) {
        return this.items.find((entry) => entry.item === label);
    }
    apply(filing) {
        this.items = filing.items;
        this.skipped = filing.skipped;
        this.needsReview = filing.needs_review;
        this.pendingTasks = filing.review_tasks;
        // verdicts re-segment the filing; drop copies whose key no longer exists
        const live = new Set(filing.items.map((entry) => entry.key));
        for (const key of [...this.values.keys()]) {
            if (!live.has(key)) {
                this.values.delete(key);
            }
        }
        if (this.selected !== null && this.entryFor(this.selected) === undefined) {
            this.selected = null;
            this.content = null;
        }
    }
    /** Re-read the filing so the view mirrors the server again. */
    async refresh() {
        // verdicts can regrow a span under an unchanged key; trust nothing cached
        this.values.clear();
        this.apply(await this.api.filing(this.serial));
        this.stale = false;
        if (this.selected !== null) {
            await this.select(this.selected);
        }
    }
    /** Show one item's text, fetching it on first view. */
    async select(label) {
        const entry = this.entryFor(label);
        if (entry === undefined) {
            throw new Error(`item ${label} is not part of this filing`);
        }
        this.selected = label;
        const cached = this.values.get(entry.key);
        if (cached !== undefined) {
            this.content = cached;
            return;
        }
        try {
            const record = await this.api.item(entry.key);
            this.values.set(entry.key, record.value);
            this.content = record.value;
        }
        catch (err) {
            if (err instanceof ApiError && err.status === 404) {
                this.stale = true;
                this.content = null;
                return;
            }
            throw err;
        }
    }
    /** Fetch any records not viewed yet, then return all of them in item order. */
    async collectRecords() {
        const records = [];
        for (const entry of this.items) {
            let value = this.values.get(entry.key);
            if (value === undefined) {
                value = (await this.api.item(entry.key)).value;
                this.values.set(entry.key, value);
            }
            records.push({
                key: entry.key,
                item: entry.item,
                part: entry.part,
                title: entry.title,
                value,
            });
        }
        return records;
    }
    /** Serialize the fetched records into a downloadable file. */
    async exportFile(format) {
        const records = await this.collectRecords();
        if (format === 'json') {
            return {
                filename: `${this.serial}.items.json`,
                mimeType: 'application/json',
                content: serializeJsonExport(this.serial, records),
            };
        }
        return {
            filename: `${this.serial}.items.txt`,
            mimeType: 'text/plain',
            content: serializeTextExport(this.serial, records),
        };
    }
}

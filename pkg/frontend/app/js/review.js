/**
 * Review queue state: pending low-confidence boundaries and verdict
 * submission, including the stale-task path when two sessions race.
 */
import { ApiError } from './api.js';
/** Cut the excerpt at the offsets the server sent; nothing is re-derived. */
export function splitExcerpt(task) {
    return {
        before: task.excerpt.slice(0, task.highlight_start),
        candidate: task.excerpt.slice(task.highlight_start, task.highlight_end),
        after: task.excerpt.slice(task.highlight_end),
    };
}
export class ReviewModel {
    api;
    serial;
    tasks = [];
    // message shown when another session resolved a task first
    conflict = null;
    busy = false;
    constructor(api, serial) {
        this.api = api;
        this.serial = serial;
    }
    async load() {
        this.tasks = await this.api.reviewTasks({ status: 'pending', serial: this.serial });
    }
    /**
     * Post a verdict. On success or conflict the task leaves the local list;
     * a conflict additionally sets the notice. Returns the re-rendered filing
     * when there is one, so the reader can pick up the new flags.
     */
    async submit(taskId, verdict, reviewer) {
        this.conflict = null;
        this.busy = true;
        try {
            const outcome = await this.api.submitVerdict(taskId, verdict, reviewer);
            this.tasks = this.tasks.filter((task) => task.task_id !== taskId);
            return outcome.filing;
        }
        catch (err) {
            if (err instanceof ApiError && err.status === 409) {
                this.tasks = this.tasks.filter((task) => task.task_id !== taskId);
                this.conflict =
                    'Another session already resolved that boundary; the task was removed from this queue.';
                return null;
            }
            throw err;
        }
        finally {
            this.busy = false;
        }
    }
}

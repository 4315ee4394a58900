/**
 * Review queue state: pending low-confidence boundaries and verdict
 * submission, including the stale-task path when two sessions race.
 */

import { ApiClient, ApiError, FilingRecord, ReviewTaskRecord } from './api.js';

export interface ExcerptParts {
  before: string;
  candidate: string;
  after: string;
}

/** Cut the excerpt at the offsets the server sent; nothing is re-derived. */
export function splitExcerpt(task: ReviewTaskRecord): ExcerptParts {
  return {
    before: task.excerpt.slice(0, task.highlight_start),
    candidate: task.excerpt.slice(task.highlight_start, task.highlight_end),
    after: task.excerpt.slice(task.highlight_end),
  };
}

export class ReviewModel {
  tasks: ReviewTaskRecord[] = [];
  // message shown when another session resolved a task first
  conflict: string | null = null;
  busy = false;

  constructor(
    private readonly api: ApiClient,
    readonly serial?: string,
  ) {}

  async load(): Promise<void> {
    this.tasks = await this.api.reviewTasks({ status: 'pending', serial: this.serial });
  }

  /**
   * Post a verdict. On success or conflict the task leaves the local list;
   * a conflict additionally sets the notice. Returns the re-rendered filing
   * when there is one, so the reader can pick up the new flags.
   */
  async submit(
    taskId: string,
    verdict: 'accept' | 'reject',
    reviewer: string,
  ): Promise<FilingRecord | null> {
    this.conflict = null;
    this.busy = true;
    try {
      const outcome = await this.api.submitVerdict(taskId, verdict, reviewer);
      this.tasks = this.tasks.filter((task) => task.task_id !== taskId);
      return outcome.filing;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.tasks = this.tasks.filter((task) => task.task_id !== taskId);
        this.conflict =
          'Another session already resolved that boundary; the task was removed from this queue.';
        return null;
      }
      throw err;
    } finally {
      this.busy = false;
    }
  }
}

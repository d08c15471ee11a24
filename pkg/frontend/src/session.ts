// Review session state: load an arbitration task, pick one submission as
// the starting point, edit the draft ground truth, tag rubric categories,
// and submit with a stable request id (so a double-click or retry records
// exactly one review).

import { ApiClient, ApiError } from "./api.js";
import { segmentText, sliceByScalars, type Segment } from "./offsets.js";
import { validateDraft, type Violation } from "./validate.js";
import type {
  AnnotationPayload,
  ReviewResponse,
  RubricCategory,
  TaskDetail,
} from "./types.js";

export type SessionStatus =
  | "idle"
  | "loading"
  | "ready"
  | "submitting"
  | "submitted"
  | "conflict"
  | "error";

let requestCounter = 0;

function newRequestId(): string {
  requestCounter += 1;
  return `rc-${Date.now().toString(36)}-${Math.random().toString(36).slice(2, 10)}-${requestCounter}`;
}

function cloneAnnotations(annotations: AnnotationPayload[]): AnnotationPayload[] {
  return annotations.map((a) => ({ ...a }));
}

function sameAnnotations(a: AnnotationPayload[], b: AnnotationPayload[]): boolean {
  if (a.length !== b.length) return false;
  const key = (x: AnnotationPayload) => `${x.start}:${x.end}:${x.type}:${x.text}`;
  const left = a.map(key).sort();
  const right = b.map(key).sort();
  return left.every((k, i) => k === right[i]);
}

export class ReviewSession {
  status: SessionStatus = "idle";
  task: TaskDetail | null = null;
  chosenSubmissionId: string | null = null;
  draftGt: AnnotationPayload[] = [];
  categories = new Set<RubricCategory>();
  rejected = false;
  error: string | null = null;
  private requestId: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly reviewerId: string,
  ) {}

  async load(taskId: string): Promise<void> {
    this.status = "loading";
    this.error = null;
    try {
      this.task = await this.api.task(taskId);
    } catch (err) {
      this.status = "error";
      this.error = err instanceof Error ? err.message : String(err);
      throw err;
    }
    this.chosenSubmissionId = null;
    this.draftGt = [];
    this.categories.clear();
    this.rejected = false;
    this.requestId = newRequestId(); // one id per loaded task: retries replay
    this.status = "ready";
  }

  /** Highlight segments for one submission (or the draft), scalar-safe. */
  segmentsFor(annotations: AnnotationPayload[]): Segment[] {
    if (!this.task) return [];
    return segmentText(this.task.prompt, annotations);
  }

  chooseSubmission(submissionId: string): void {
    const task = this.requireTask();
    const submission = task.submissions.find((s) => s.id === submissionId);
    if (!submission) throw new Error(`no submission ${submissionId} on ${task.id}`);
    this.chosenSubmissionId = submissionId;
    this.draftGt = cloneAnnotations(submission.annotations);
  }

  /** Move a span boundary; text is re-derived from the prompt slice. */
  editSpan(index: number, start: number, end: number): void {
    const task = this.requireTask();
    const ann = this.draftGt[index];
    if (!ann) throw new Error(`no draft annotation at ${index}`);
    this.draftGt[index] = {
      ...ann,
      start,
      end,
      text: sliceByScalars(task.prompt, start, end),
    };
  }

  addSpan(start: number, end: number, type: string): void {
    const task = this.requireTask();
    this.draftGt.push({
      start,
      end,
      type,
      text: sliceByScalars(task.prompt, start, end),
    });
  }

  removeSpan(index: number): void {
    this.draftGt.splice(index, 1);
  }

  setType(index: number, type: string): void {
    const ann = this.draftGt[index];
    if (!ann) throw new Error(`no draft annotation at ${index}`);
    this.draftGt[index] = { ...ann, type };
  }

  toggleCategory(category: RubricCategory): void {
    if (this.categories.has(category)) {
      this.categories.delete(category);
    } else {
      this.categories.add(category);
    }
  }

  /** Draft differs from the chosen submission's annotations. */
  get edited(): boolean {
    if (!this.task || this.chosenSubmissionId === null) return false;
    const chosen = this.task.submissions.find((s) => s.id === this.chosenSubmissionId);
    if (!chosen) return false;
    return !sameAnnotations(this.draftGt, chosen.annotations);
  }

  get verdict(): "accepted_as_is" | "corrected" | "rejected" {
    if (this.rejected) return "rejected";
    return this.edited ? "corrected" : "accepted_as_is";
  }

  get violations(): Violation[] {
    if (!this.task) return [];
    return validateDraft(this.task.prompt, this.draftGt);
  }

  /**
   * Submit is enabled only when a submission was chosen (or the draft was
   * edited from one), the draft passes the client-side validation mirror,
   * and the rubric matches the verdict (categories required exactly when
   * not accepting as-is).
   */
  get canSubmit(): boolean {
    if (!this.task || this.status !== "ready") return false;
    if (this.chosenSubmissionId === null) return false;
    if (this.violations.length > 0) return false;
    const needsCategories = this.verdict !== "accepted_as_is";
    if (needsCategories !== (this.categories.size > 0)) return false;
    return true;
  }

  /** Compare the draft against the chosen submission and pre-tick rubric
   * categories (the reviewer can still adjust before submitting). */
  suggestCategories(): Set<RubricCategory> {
    const suggested = new Set<RubricCategory>();
    const task = this.task;
    const chosen = task?.submissions.find((s) => s.id === this.chosenSubmissionId);
    if (!task || !chosen) return suggested;
    const submitted = chosen.annotations;
    const draft = this.draftGt;
    const spanKey = (a: AnnotationPayload) => `${a.start}:${a.end}`;
    const submittedSpans = new Map(submitted.map((a) => [spanKey(a), a]));
    const draftSpans = new Map(draft.map((a) => [spanKey(a), a]));
    for (const [key, ann] of draftSpans) {
      const match = submittedSpans.get(key);
      if (match === undefined) {
        const overlapping = submitted.find((s) => s.start < ann.end && ann.start < s.end);
        suggested.add(overlapping ? "incorrect_span" : "missing_labels");
      } else if (match.type !== ann.type) {
        suggested.add("wrong_labels_added");
      }
    }
    for (const [key, ann] of submittedSpans) {
      if (draftSpans.has(key)) continue;
      const overlapping = draft.find((d) => d.start < ann.end && ann.start < d.end);
      if (!overlapping) suggested.add("wrong_labels_added");
    }
    return suggested;
  }

  async submit(): Promise<ReviewResponse> {
    const task = this.requireTask();
    if (!this.canSubmit || !this.chosenSubmissionId || !this.requestId) {
      throw new Error("submit gated: choose a submission and fix violations first");
    }
    this.status = "submitting";
    try {
      const response = await this.api.submitReview(task.id, {
        request_id: this.requestId,
        reviewer_id: this.reviewerId,
        chosen_submission_id: this.chosenSubmissionId,
        verdict: this.verdict,
        error_categories: [...this.categories].sort() as RubricCategory[],
        ground_truth: this.draftGt,
      });
      this.status = "submitted";
      return response;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone reviewed it first: surface a refresh prompt, keep draft
        this.status = "conflict";
      } else {
        this.status = "ready"; // validation errors render inline; retry allowed
      }
      this.error = err instanceof Error ? err.message : String(err);
      throw err;
    }
  }

  /** After a successful submit: load the next queued task, if any. */
  async nextTask(locale?: string, phase?: string): Promise<string | null> {
    const page = await this.api.queue({ locale, phase, pageSize: 1 });
    const next = page.items[0];
    if (!next) return null;
    await this.load(next.task_id);
    return next.task_id;
  }

  private requireTask(): TaskDetail {
    if (!this.task) throw new Error("no task loaded");
    return this.task;
  }
}

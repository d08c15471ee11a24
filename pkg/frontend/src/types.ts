// Wire types for the /v1 API (field names match the service exactly).

export interface AnnotationPayload {
  start: number; // Unicode scalar offsets, end-exclusive
  end: number;
  type: string;
  text: string;
}

export interface QueueItem {
  task_id: string;
  locale: string;
  phase: string;
  domain: string;
  ira: number | null;
  entered_at: number;
  submissions: number;
}

export interface QueuePage {
  total: number;
  page: number;
  page_size: number;
  items: QueueItem[];
}

export interface SubmissionPayload {
  id: string;
  annotator_id: string;
  annotations: AnnotationPayload[];
}

export interface AgreementBreakdownPayload {
  submission_a: string;
  submission_b: string;
  span_score: number;
  type_score: number;
  text_score: number;
  overall: number;
}

export interface ReviewPayload {
  reviewer_id: string;
  chosen_submission_id: string;
  verdict: string;
  error_categories: string[];
}

export interface TaskDetail {
  id: string;
  locale: string;
  phase: string;
  domain: string;
  prompt: string;
  status: string;
  ira: number | null;
  submissions: SubmissionPayload[];
  agreement: AgreementBreakdownPayload[];
  ground_truth: AnnotationPayload[] | null;
  review: ReviewPayload | null;
}

export type RubricCategory = "missing_labels" | "wrong_labels_added" | "incorrect_span";

export const RUBRIC_CATEGORIES: RubricCategory[] = [
  "missing_labels",
  "wrong_labels_added",
  "incorrect_span",
];

export interface ReviewRequest {
  request_id: string;
  reviewer_id: string;
  chosen_submission_id: string;
  verdict: "accepted_as_is" | "corrected" | "rejected";
  error_categories: RubricCategory[];
  ground_truth: AnnotationPayload[];
}

export interface ReviewResponse {
  task_id: string;
  status: string;
  replayed: boolean;
  review: ReviewPayload;
}

export interface QualityRow {
  annotator_id: string;
  score: number | null;
  reviewed_count: number;
  qualified: boolean;
}

export interface QualityDashboard {
  threshold: number;
  annotators: QualityRow[];
}

export interface PhaseErrors {
  reviewed_tasks: number;
  verdicts: Record<string, Record<string, number>>;
  categories: Record<string, number>;
}

export type ErrorsDashboard = Record<string, PhaseErrors>;

export interface ApiErrorBody {
  error: { code: string; message: string };
}

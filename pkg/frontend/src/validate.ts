// Client-side mirror of the service's annotation validation, used to gate
// the submit button and render inline errors. The service stays
// authoritative; this mirror covers what the client can know without the
// locale registry (bounds, text/slice equality, non-empty type).

import { scalarLength, sliceByScalars } from "./offsets.js";
import type { AnnotationPayload } from "./types.js";

export type ViolationCode = "SpanOutOfBounds" | "TextMismatch" | "EmptyType";

export interface Violation {
  index: number; // position in the draft list
  code: ViolationCode;
  message: string;
}

export function validateAnnotation(
  prompt: string,
  ann: AnnotationPayload,
): ViolationCode | null {
  if (ann.start < 0 || ann.start >= ann.end || ann.end > scalarLength(prompt)) {
    return "SpanOutOfBounds";
  }
  if (sliceByScalars(prompt, ann.start, ann.end) !== ann.text) {
    return "TextMismatch";
  }
  if (!ann.type.trim()) {
    return "EmptyType";
  }
  return null;
}

export function validateDraft(prompt: string, draft: AnnotationPayload[]): Violation[] {
  const violations: Violation[] = [];
  draft.forEach((ann, index) => {
    const code = validateAnnotation(prompt, ann);
    if (code !== null) {
      violations.push({
        index,
        code,
        message: `${code} at span [${ann.start}, ${ann.end})`,
      });
    }
  });
  return violations;
}

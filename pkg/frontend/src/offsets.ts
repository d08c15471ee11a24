// Span offsets on the wire count Unicode scalar values; JS strings are
// UTF-16. All conversion between the two conventions happens here, at the
// rendering boundary, so the rest of the console can treat offsets as
// opaque scalar positions.

import type { AnnotationPayload } from "./types.js";

/** UTF-16 index corresponding to a scalar-value offset. */
export function scalarToUtf16(text: string, scalarOffset: number): number {
  if (scalarOffset <= 0) return 0;
  let scalars = 0;
  let units = 0;
  for (const ch of text) {
    scalars += 1;
    units += ch.length;
    if (scalars >= scalarOffset) break;
  }
  return units;
}

/** Number of Unicode scalar values in the string. */
export function scalarLength(text: string): number {
  let n = 0;
  for (const _ of text) n += 1;
  return n;
}

/** Slice by scalar-value offsets (end-exclusive), mirroring the service. */
export function sliceByScalars(text: string, start: number, end: number): string {
  return text.slice(scalarToUtf16(text, start), scalarToUtf16(text, end));
}

/** One run of prompt text with the annotations covering it. */
export interface Segment {
  start: number; // scalar offsets of the run
  end: number;
  text: string;
  annotations: AnnotationPayload[];
}

/**
 * Cut the prompt at every span boundary. Each returned segment carries the
 * annotations covering it (possibly several when spans overlap), so the
 * renderer can highlight without re-deriving offsets.
 */
export function segmentText(prompt: string, annotations: AnnotationPayload[]): Segment[] {
  const total = scalarLength(prompt);
  const cuts = new Set<number>([0, total]);
  for (const ann of annotations) {
    cuts.add(Math.max(0, Math.min(ann.start, total)));
    cuts.add(Math.max(0, Math.min(ann.end, total)));
  }
  const ordered = [...cuts].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < ordered.length; i++) {
    const start = ordered[i]!;
    const end = ordered[i + 1]!;
    if (start >= end) continue;
    segments.push({
      start,
      end,
      text: sliceByScalars(prompt, start, end),
      annotations: annotations.filter((a) => a.start <= start && end <= a.end),
    });
  }
  return segments;
}

// DOM helpers. Only this module and main.ts touch the document; the view
// models stay testable without a browser.

import { segmentText } from "./offsets.js";
import type { AnnotationPayload } from "./types.js";
import type { Violation } from "./validate.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const PALETTE = [
  "#ffd9a8", "#b5e2c7", "#c7d6ff", "#f5c2d5", "#e3d3a3",
  "#bfe3e0", "#e0c7f0", "#f0d0c0",
];

export function colorForType(type: string): string {
  let hash = 0;
  for (const ch of type) hash = (hash * 31 + ch.codePointAt(0)!) >>> 0;
  return PALETTE[hash % PALETTE.length]!;
}

/** Prompt with highlighted spans; offsets converted once in segmentText. */
export function renderPrompt(prompt: string, annotations: AnnotationPayload[]): HTMLElement {
  const container = el("div", "prompt");
  for (const segment of segmentText(prompt, annotations)) {
    if (segment.annotations.length === 0) {
      container.append(segment.text);
      continue;
    }
    const mark = el("mark", "pii-span", segment.text);
    const first = segment.annotations[0]!;
    mark.style.backgroundColor = colorForType(first.type);
    mark.title = segment.annotations
      .map((a) => `${a.type} [${a.start}, ${a.end})`)
      .join(" + ");
    container.append(mark);
  }
  return container;
}

export function renderViolations(violations: Violation[]): HTMLElement {
  const list = el("ul", "violations");
  for (const violation of violations) {
    list.append(el("li", "violation", `span #${violation.index + 1}: ${violation.message}`));
  }
  return list;
}

export function renderTable(
  headers: string[],
  rows: Array<Array<string | number | null>>,
  className = "table",
): HTMLTableElement {
  const table = el("table", className);
  const head = table.createTHead().insertRow();
  for (const header of headers) {
    head.append(el("th", undefined, header));
  }
  const body = table.createTBody();
  for (const row of rows) {
    const tr = body.insertRow();
    for (const cell of row) {
      tr.insertCell().textContent = cell === null ? "–" : String(cell);
    }
  }
  return table;
}

export function banner(kind: "error" | "stale" | "info", message: string): HTMLElement {
  return el("div", `banner banner-${kind}`, message);
}

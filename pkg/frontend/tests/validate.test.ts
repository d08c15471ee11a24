import { describe, expect, it } from "vitest";

import { validateAnnotation, validateDraft } from "../src/validate.js";

const prompt = "Jan Kowalski called about account 12345678";

describe("validateAnnotation mirror", () => {
  it("accepts an exact slice", () => {
    expect(
      validateAnnotation(prompt, { start: 0, end: 12, type: "NAME", text: "Jan Kowalski" }),
    ).toBeNull();
  });

  it("rejects inverted and out-of-range spans", () => {
    expect(validateAnnotation(prompt, { start: 5, end: 3, type: "NAME", text: "x" }))
      .toBe("SpanOutOfBounds");
    expect(validateAnnotation(prompt, { start: 0, end: 999, type: "NAME", text: "x" }))
      .toBe("SpanOutOfBounds");
  });

  it("rejects text that does not match the slice", () => {
    expect(validateAnnotation(prompt, { start: 0, end: 12, type: "NAME", text: "Jan" }))
      .toBe("TextMismatch");
  });

  it("rejects empty types", () => {
    expect(validateAnnotation(prompt, { start: 0, end: 12, type: " ", text: "Jan Kowalski" }))
      .toBe("EmptyType");
  });

  it("uses scalar offsets on multi-script prompts", () => {
    const zh = "用户 王小明 登录";
    expect(validateAnnotation(zh, { start: 3, end: 6, type: "NAME", text: "王小明" }))
      .toBeNull();
  });
});

describe("validateDraft", () => {
  it("reports one violation per bad span with its index", () => {
    const violations = validateDraft(prompt, [
      { start: 0, end: 12, type: "NAME", text: "Jan Kowalski" },
      { start: 0, end: 12, type: "NAME", text: "nope" },
      { start: 50, end: 60, type: "NAME", text: "x" },
    ]);
    expect(violations.map((v) => [v.index, v.code])).toEqual([
      [1, "TextMismatch"],
      [2, "SpanOutOfBounds"],
    ]);
  });
});

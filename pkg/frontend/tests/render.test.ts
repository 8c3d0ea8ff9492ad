import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderBanner,
  renderHintHistory,
  renderTaskOptions,
  renderVerdict,
} from "../src/render.js";
import { initialState } from "../src/state.js";
import type { ExecuteResponse } from "../src/api.js";

describe("renderVerdict", () => {
  const verdict: ExecuteResponse = {
    all_passed: false,
    failing_ids: ["c1", "c3"],
    results: [
      { case_id: "c1", status: "fail", actual: [5, 2], expected: [5, 2, 1], stderr_excerpt: "", duration_ms: 2 },
      { case_id: "c2", status: "pass", actual: [], expected: [], stderr_excerpt: "", duration_ms: 1 },
      { case_id: "c3", status: "timeout", actual: null, expected: 1, stderr_excerpt: "", duration_ms: 500 },
      { case_id: "c4", status: "error", actual: null, expected: 0, stderr_excerpt: "ZeroDivisionError: division by zero", duration_ms: 2 },
    ],
  };

  it("shows expected vs actual for failing cases", () => {
    const html = renderVerdict(verdict);
    expect(html).toContain("expected [5,2,1], got [5,2]");
    expect(html).toContain("2 of 4 tests failing");
  });

  it("marks timeouts and errors distinctly", () => {
    const html = renderVerdict(verdict);
    expect(html).toContain("timed out");
    expect(html).toContain("ZeroDivisionError");
  });

  it("celebrates a clean run", () => {
    const html = renderVerdict({ all_passed: true, failing_ids: [], results: [] });
    expect(html).toContain("All tests passed");
  });

  it("renders nothing before the first run", () => {
    expect(renderVerdict(null)).toBe("");
  });
});

describe("renderHintHistory", () => {
  it("shows hint text with privacy badge and latency", () => {
    const html = renderHintHistory([
      { hint: "Check your loop.", timestamp: 1, latency_ms: 1234, backend_class: "local" },
    ]);
    expect(html).toContain("Check your loop.");
    expect(html).toContain("local backend");
    expect(html).toContain("1.2s");
  });

  it("labels external backends", () => {
    const html = renderHintHistory([
      { hint: "h", timestamp: 1, latency_ms: 100, backend_class: "external" },
    ]);
    expect(html).toContain("external backend");
    expect(html).toContain("badge-external");
  });

  it("numbers successive hints", () => {
    const html = renderHintHistory([
      { hint: "a", timestamp: 1, latency_ms: 1, backend_class: "local" },
      { hint: "b", timestamp: 2, latency_ms: 1, backend_class: "local" },
    ]);
    expect(html).toContain("#1");
    expect(html).toContain("#2");
  });
});

describe("escaping", () => {
  it("escapes html in every surface", () => {
    expect(escapeHtml("<script>alert(1)</script>")).not.toContain("<script>");
    const html = renderHintHistory([
      { hint: "<img src=x onerror=alert(1)>", timestamp: 1, latency_ms: 1, backend_class: "local" },
    ]);
    expect(html).not.toContain("<img");
    const options = renderTaskOptions(
      [{ id: "a<b", title: "T<b>", description: "d", difficulty: "easy" }],
      null,
    );
    expect(options).not.toContain("<b>");
  });
});

describe("renderBanner", () => {
  it("prefers the error banner over the notice", () => {
    const state = { ...initialState(), banner: "down", notice: "hmm" };
    expect(renderBanner(state)).toContain("down");
  });

  it("renders the notice when no banner", () => {
    const state = { ...initialState(), notice: "run your tests" };
    expect(renderBanner(state)).toContain("run your tests");
  });

  it("empty when healthy", () => {
    expect(renderBanner(initialState())).toBe("");
  });
});

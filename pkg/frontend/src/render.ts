/** HTML renderers: pure string builders over session state, escaped throughout. */

import type { CaseResult, ExecuteResponse, TaskDetail, TaskSummary } from "./api.js";
import type { HintEntry, SessionState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

function show(value: unknown): string {
  return escapeHtml(JSON.stringify(value));
}

export function renderTaskOptions(tasks: TaskSummary[], selectedId: string | null): string {
  const placeholder = `<option value="" disabled ${selectedId === null ? "selected" : ""}>pick a task…</option>`;
  const options = tasks
    .map(
      (task) =>
        `<option value="${escapeHtml(task.id)}" ${task.id === selectedId ? "selected" : ""}>` +
        `${escapeHtml(task.title)} (${escapeHtml(task.difficulty)})</option>`,
    )
    .join("");
  return placeholder + options;
}

export function renderTaskDescription(task: TaskDetail | null): string {
  if (!task) return "";
  return (
    `<h2>${escapeHtml(task.title)}</h2>` +
    `<p class="description">${escapeHtml(task.description)}</p>` +
    `<p class="meta">function <code>${escapeHtml(task.entry_function)}</code> · ` +
    `${task.test_count} tests · ${escapeHtml(task.difficulty)}</p>`
  );
}

function caseRow(result: CaseResult): string {
  const status = escapeHtml(result.status);
  let detail = "";
  if (result.status === "pass") {
    detail = "ok";
  } else if (result.status === "timeout") {
    detail = "timed out";
  } else if (result.status === "error") {
    detail = `expected ${show(result.expected)}, raised an error` +
      (result.stderr_excerpt
        ? ` <span class="stderr">${escapeHtml(result.stderr_excerpt.split("\n")[0])}</span>`
        : "");
  } else {
    detail = `expected ${show(result.expected)}, got ${show(result.actual)}`;
  }
  return (
    `<tr class="case ${status}">` +
    `<td>${escapeHtml(result.case_id)}</td>` +
    `<td class="status">${status}</td>` +
    `<td>${detail}</td></tr>`
  );
}

export function renderVerdict(verdict: ExecuteResponse | null): string {
  if (!verdict) return "";
  const summary = verdict.all_passed
    ? `<p class="verdict-summary all-passed">All tests passed 🎉</p>`
    : `<p class="verdict-summary has-failures">${verdict.failing_ids.length} of ${verdict.results.length} tests failing</p>`;
  const rows = verdict.results.map(caseRow).join("");
  return `${summary}<table class="cases"><tbody>${rows}</tbody></table>`;
}

export function renderHintHistory(history: HintEntry[]): string {
  if (history.length === 0) return `<p class="no-hints">No hints requested yet.</p>`;
  const items = history
    .map((entry, index) => {
      const seconds = (entry.latency_ms / 1000).toFixed(1);
      const badgeClass = entry.backend_class === "local" ? "badge-local" : "badge-external";
      const badgeText = entry.backend_class === "local" ? "local backend" : "external backend";
      return (
        `<li class="hint-entry">` +
        `<span class="hint-number">#${index + 1}</span> ` +
        `<span class="hint-text">${escapeHtml(entry.hint)}</span> ` +
        `<span class="badge ${badgeClass}">${badgeText}</span>` +
        `<span class="hint-latency">${seconds}s</span></li>`
      );
    })
    .join("");
  return `<ol class="hint-list">${items}</ol>`;
}

export function renderBanner(state: SessionState): string {
  if (state.banner) {
    return `<div class="banner error">${escapeHtml(state.banner)}</div>`;
  }
  if (state.notice) {
    return `<div class="banner notice">${escapeHtml(state.notice)}</div>`;
  }
  return "";
}

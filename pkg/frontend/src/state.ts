/** Session state and pure transition functions (the UI's single source of truth). */

import type { ExecuteResponse, HintTelemetry, TaskSummary } from "./api.js";

export interface HintEntry {
  hint: string;
  timestamp: number;
  latency_ms: number;
  backend_class: HintTelemetry["backend_class"];
}

export interface SessionState {
  tasks: TaskSummary[];
  selectedTaskId: string | null;
  /** Editor buffers are kept per task so switching never loses work. */
  buffers: Record<string, string>;
  verdict: ExecuteResponse | null;
  /** Append-only within a session. */
  hintHistory: HintEntry[];
  runInFlight: boolean;
  hintInFlight: boolean;
  /** Connection-level problem banner; null when the service is reachable. */
  banner: string | null;
  /** Transient guidance, e.g. "run your tests first". */
  notice: string | null;
}

export function initialState(): SessionState {
  return {
    tasks: [],
    selectedTaskId: null,
    buffers: {},
    verdict: null,
    hintHistory: [],
    runInFlight: false,
    hintInFlight: false,
    banner: null,
    notice: null,
  };
}

export function starterBuffer(entryFunction: string): string {
  return `def ${entryFunction}():\n    pass\n`;
}

export function withTasks(state: SessionState, tasks: TaskSummary[]): SessionState {
  return { ...state, tasks, banner: null };
}

export function currentBuffer(state: SessionState): string {
  if (state.selectedTaskId === null) return "";
  return state.buffers[state.selectedTaskId] ?? "";
}

export function selectTask(
  state: SessionState,
  taskId: string,
  starter: string,
): SessionState {
  const buffers = { ...state.buffers };
  if (!(taskId in buffers)) {
    buffers[taskId] = starter;
  }
  return {
    ...state,
    selectedTaskId: taskId,
    buffers,
    verdict: null,
    notice: null,
  };
}

export function editBuffer(state: SessionState, text: string): SessionState {
  if (state.selectedTaskId === null) return state;
  return {
    ...state,
    buffers: { ...state.buffers, [state.selectedTaskId]: text },
  };
}

export function startRun(state: SessionState): SessionState {
  return { ...state, runInFlight: true, notice: null };
}

export function finishRun(state: SessionState, verdict: ExecuteResponse): SessionState {
  return { ...state, runInFlight: false, verdict, banner: null };
}

export function failRun(state: SessionState, banner: string): SessionState {
  // The verdict panel and editor buffer survive a failed run untouched.
  return { ...state, runInFlight: false, banner };
}

export function startHint(state: SessionState): SessionState {
  return { ...state, hintInFlight: true, notice: null };
}

export function finishHint(state: SessionState, entry: HintEntry): SessionState {
  return {
    ...state,
    hintInFlight: false,
    hintHistory: [...state.hintHistory, entry],
    banner: null,
  };
}

export function failHint(
  state: SessionState,
  problem: { banner?: string; notice?: string },
): SessionState {
  return {
    ...state,
    hintInFlight: false,
    banner: problem.banner ?? state.banner,
    notice: problem.notice ?? null,
  };
}

export function clearBanner(state: SessionState): SessionState {
  return { ...state, banner: null };
}

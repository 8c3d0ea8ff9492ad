/** DOM wiring: builds the page, binds handlers, keeps state and DOM in sync. */

import { ApiClient, ApiError, ServiceUnreachableError, type TaskDetail } from "./api.js";
import {
  currentBuffer,
  editBuffer,
  failHint,
  failRun,
  finishHint,
  finishRun,
  initialState,
  selectTask,
  starterBuffer,
  startHint,
  startRun,
  withTasks,
  type SessionState,
} from "./state.js";
import {
  renderBanner,
  renderHintHistory,
  renderTaskDescription,
  renderTaskOptions,
  renderVerdict,
} from "./render.js";

const UNREACHABLE_MESSAGE =
  "Cannot reach the feedback service. Your code is safe in the editor; retry when the service is back.";

const PAGE = `
  <header>
    <h1>Programming practice</h1>
    <div id="banner-slot"></div>
  </header>
  <main>
    <section class="left">
      <label for="task-select">Task</label>
      <select id="task-select"></select>
      <div id="task-description"></div>
      <textarea id="editor" spellcheck="false" placeholder="Write your program here"></textarea>
      <div class="actions">
        <button id="run-button">Run tests</button>
        <button id="hint-button">Get a hint</button>
        <span id="hint-spinner" class="spinner hidden">thinking… <span id="hint-elapsed">0</span>s</span>
      </div>
      <div id="verdict-panel"></div>
    </section>
    <section class="right">
      <h2>Hints</h2>
      <div id="hint-panel"></div>
    </section>
  </main>
`;

export interface App {
  state: () => SessionState;
  ready: Promise<void>;
}

export function initApp(root: HTMLElement, client: ApiClient, tickMs = 250): App {
  let state = initialState();
  let taskDetail: TaskDetail | null = null;
  let elapsedTimer: ReturnType<typeof setInterval> | null = null;

  root.innerHTML = PAGE;
  const bannerSlot = root.querySelector<HTMLElement>("#banner-slot")!;
  const select = root.querySelector<HTMLSelectElement>("#task-select")!;
  const description = root.querySelector<HTMLElement>("#task-description")!;
  const editor = root.querySelector<HTMLTextAreaElement>("#editor")!;
  const runButton = root.querySelector<HTMLButtonElement>("#run-button")!;
  const hintButton = root.querySelector<HTMLButtonElement>("#hint-button")!;
  const spinner = root.querySelector<HTMLElement>("#hint-spinner")!;
  const elapsed = root.querySelector<HTMLElement>("#hint-elapsed")!;
  const verdictPanel = root.querySelector<HTMLElement>("#verdict-panel")!;
  const hintPanel = root.querySelector<HTMLElement>("#hint-panel")!;

  function sync(): void {
    bannerSlot.innerHTML = renderBanner(state);
    select.innerHTML = renderTaskOptions(state.tasks, state.selectedTaskId);
    description.innerHTML = renderTaskDescription(taskDetail);
    if (editor.value !== currentBuffer(state)) {
      editor.value = currentBuffer(state);
    }
    verdictPanel.innerHTML = renderVerdict(state.verdict);
    hintPanel.innerHTML = renderHintHistory(state.hintHistory);
    const busy = state.runInFlight || state.hintInFlight;
    runButton.disabled = busy || state.selectedTaskId === null;
    hintButton.disabled = busy || state.selectedTaskId === null;
    spinner.classList.toggle("hidden", !state.hintInFlight);
  }

  function update(next: SessionState): void {
    state = next;
    sync();
  }

  function startTicker(): void {
    const startedAt = Date.now();
    elapsed.textContent = "0";
    elapsedTimer = setInterval(() => {
      elapsed.textContent = String(Math.floor((Date.now() - startedAt) / 1000));
    }, tickMs);
  }

  function stopTicker(): void {
    if (elapsedTimer !== null) {
      clearInterval(elapsedTimer);
      elapsedTimer = null;
    }
  }

  select.addEventListener("change", () => {
    void (async () => {
      const taskId = select.value;
      try {
        taskDetail = await client.getTask(taskId);
        update(selectTask(state, taskId, starterBuffer(taskDetail.entry_function)));
      } catch {
        update(failRun(state, UNREACHABLE_MESSAGE));
      }
    })();
  });

  editor.addEventListener("input", () => {
    state = editBuffer(state, editor.value); // no re-render: keep cursor stable
  });

  editor.addEventListener("keydown", (event: KeyboardEvent) => {
    if (event.key === "Tab") {
      event.preventDefault();
      const start = editor.selectionStart;
      const end = editor.selectionEnd;
      editor.value = editor.value.slice(0, start) + "    " + editor.value.slice(end);
      editor.selectionStart = editor.selectionEnd = start + 4;
      state = editBuffer(state, editor.value);
    }
  });

  runButton.addEventListener("click", () => {
    void (async () => {
      if (state.selectedTaskId === null) return;
      update(startRun(state));
      try {
        const verdict = await client.execute(state.selectedTaskId, currentBuffer(state));
        update(finishRun(state, verdict));
      } catch (error) {
        if (error instanceof ApiError) {
          update(failRun(state, `Run failed: ${error.detail}`));
        } else {
          update(failRun(state, UNREACHABLE_MESSAGE));
        }
      }
    })();
  });

  hintButton.addEventListener("click", () => {
    void (async () => {
      if (state.selectedTaskId === null || state.hintInFlight) return;
      update(startHint(state));
      startTicker();
      try {
        const response = await client.hint(state.selectedTaskId, currentBuffer(state));
        update(
          finishHint(state, {
            hint: response.hint,
            timestamp: Date.now(),
            latency_ms: response.telemetry.latency_ms,
            backend_class: response.telemetry.backend_class,
          }),
        );
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          update(
            failHint(state, {
              notice: "Your program already passes all tests. Run the tests to double-check!",
            }),
          );
        } else if (error instanceof ApiError) {
          const suffix = error.retriable ? " You can try again." : "";
          update(failHint(state, { banner: `Hint failed: ${error.detail}.${suffix}` }));
        } else if (error instanceof ServiceUnreachableError) {
          update(failHint(state, { banner: UNREACHABLE_MESSAGE }));
        } else {
          update(failHint(state, { banner: String(error) }));
        }
      } finally {
        stopTicker();
      }
    })();
  });

  const ready = (async () => {
    try {
      update(withTasks(state, await client.listTasks()));
    } catch {
      update(failRun(state, UNREACHABLE_MESSAGE));
    }
  })();

  sync();
  return { state: () => state, ready };
}

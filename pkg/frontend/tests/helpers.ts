export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 20_000,
  intervalMs = 25,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
  throw new Error("condition not met in time");
}

export function setSelect(select: HTMLSelectElement, value: string): void {
  select.value = value;
  select.dispatchEvent(new Event("change", { bubbles: true }));
}

export function setEditor(editor: HTMLTextAreaElement, value: string): void {
  editor.value = value;
  editor.dispatchEvent(new Event("input", { bubbles: true }));
}

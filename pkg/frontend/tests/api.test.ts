import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, ServiceUnreachableError } from "../src/api.js";

function fakeFetch(status: number, body: unknown): typeof fetch {
  return async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
}

describe("ApiClient", () => {
  it("returns parsed JSON on success", async () => {
    const client = new ApiClient("", fakeFetch(200, [{ id: "t", title: "T", description: "d", difficulty: "easy" }]));
    const tasks = await client.listTasks();
    expect(tasks[0].id).toBe("t");
  });

  it("wraps 409 into ApiError with detail", async () => {
    const client = new ApiClient("", fakeFetch(409, { detail: "not buggy: run your tests" }));
    await expect(client.hint("t", "code")).rejects.toMatchObject({
      status: 409,
      detail: expect.stringContaining("not buggy"),
    });
  });

  it("carries the retriable flag from 502 bodies", async () => {
    const client = new ApiClient("", fakeFetch(502, { detail: "backend down", retriable: true }));
    const error = await client.hint("t", "code").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.retriable).toBe(true);
  });

  it("maps network failures to ServiceUnreachableError", async () => {
    const failing: typeof fetch = async () => {
      throw new TypeError("fetch failed");
    };
    const client = new ApiClient("", failing);
    await expect(client.listTasks()).rejects.toBeInstanceOf(ServiceUnreachableError);
  });

  it("posts the program body to /execute", async () => {
    let captured: { url: string; body: string } | null = null;
    const spying: typeof fetch = async (url, init) => {
      captured = { url: String(url), body: String(init?.body) };
      return new Response(JSON.stringify({ all_passed: true, failing_ids: [], results: [] }), { status: 200 });
    };
    const client = new ApiClient("http://svc", spying);
    await client.execute("task-1", "def f(): pass");
    expect(captured!.url).toBe("http://svc/execute");
    expect(JSON.parse(captured!.body)).toEqual({ task_id: "task-1", program: "def f(): pass" });
  });
});

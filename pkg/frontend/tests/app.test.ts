import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, type FetchLike } from "../src/api.js";
import { mountApp, sessionId } from "../src/app.js";

function jsonResponse(body: unknown): Response {
  return {
    ok: true, status: 200, statusText: "200",
    json: async () => body, text: async () => JSON.stringify(body),
  } as unknown as Response;
}

function appClient(): { client: ApiClient; deletes: string[] } {
  const deletes: string[] = [];
  const fetcher: FetchLike = async (url, init) => {
    if ((init?.method ?? "GET") === "DELETE") {
      deletes.push(url);
      return jsonResponse({ removed: 2 });
    }
    if (url.endsWith("/api/runs")) return jsonResponse({ runs: [] });
    return jsonResponse({});
  };
  return { client: new ApiClient("", fetcher), deletes };
}

function flush(): Promise<void> {
  return new Promise(resolve => setTimeout(resolve, 0));
}

beforeEach(() => {
  document.body.replaceChildren();
  localStorage.clear();
});

describe("sessionId", () => {
  it("creates once and then sticks", () => {
    const first = sessionId();
    expect(first).toMatch(/^[0-9a-f]{24}$/);
    expect(sessionId()).toBe(first);
  });
});

describe("mountApp", () => {
  it("opens on the submit tab and switches tabs on click", () => {
    const { client } = appClient();
    const root = document.createElement("div");
    document.body.appendChild(root);
    mountApp(root, client);

    expect(root.querySelector(".tab-bar button.active")!.textContent).toBe("submit");
    expect(root.querySelector(".submit-workflow")).not.toBeNull();

    root.querySelector<HTMLButtonElement>('button[data-tab="dashboard"]')!.click();
    expect(root.querySelector(".dashboard-tab")).not.toBeNull();
    expect(root.querySelector(".submit-workflow")).toBeNull();

    root.querySelector<HTMLButtonElement>('button[data-tab="analyze"]')!.click();
    expect(root.querySelector(".search-view")).not.toBeNull();
  });

  it("revokes this session's feedback from the header button", async () => {
    const { client, deletes } = appClient();
    const root = document.createElement("div");
    document.body.appendChild(root);
    mountApp(root, client);

    root.querySelector<HTMLButtonElement>(".revoke-feedback")!.click();
    await flush();

    expect(deletes).toEqual([`/api/feedback/${sessionId()}`]);
    expect(root.querySelector("header .form-status")!.textContent).toBe("removed 2 ranking(s)");
  });
});

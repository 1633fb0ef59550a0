import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, type FetchLike } from "../src/api.js";

interface Captured {
  url: string;
  init?: RequestInit;
}

function capture(status = 200, body: unknown = {}): { calls: Captured[]; fetch: FetchLike } {
  const calls: Captured[] = [];
  const fetcher: FetchLike = async (url, init) => {
    calls.push({ url, init });
    return {
      ok: status < 400,
      status,
      statusText: String(status),
      json: async () => body,
      text: async () => (typeof body === "string" ? body : JSON.stringify(body)),
    } as unknown as Response;
  };
  return { calls, fetch: fetcher };
}

describe("ApiClient", () => {
  it("posts run creation as json", async () => {
    const { calls, fetch } = capture(201, { id: "r1" });
    const client = new ApiClient("", fetch);
    await client.createRun({ name: "sys", source_lang: "en", target_lang: "de", metrics: ["bleu"] });

    expect(calls[0].url).toBe("/api/runs");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      name: "sys", source_lang: "en", target_lang: "de", metrics: ["bleu"],
    });
  });

  it("prefixes a base url", async () => {
    const { calls, fetch } = capture(200, { runs: [] });
    await new ApiClient("http://host:1234/", fetch).listRuns();
    expect(calls[0].url).toBe("http://host:1234/api/runs");
  });

  it("wraps instance batches", async () => {
    const { calls, fetch } = capture(200, { added: 1 });
    await new ApiClient("", fetch).addInstances("r1", [
      { source: "s", prediction: "p", reference: null },
    ]);
    expect(calls[0].url).toBe("/api/runs/r1/instances");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      instances: [{ source: "s", prediction: "p", reference: null }],
    });
  });

  it("sends ingest uploads as multipart with the spec alongside", async () => {
    const { calls, fetch } = capture(200, { dry_run: true, extracted: 2, preview: [] });
    const file = new File(["{}"], "data.jsonl", { type: "application/json" });
    await new ApiClient("", fetch).ingest("r1", [file], { mode: "jsonl_fields", fields: {} }, true);

    const form = calls[0].init?.body as FormData;
    expect(form).toBeInstanceOf(FormData);
    expect(form.get("spec")).toBe('{"mode":"jsonl_fields","fields":{}}');
    expect(form.get("dry_run")).toBe("true");
    expect(form.get("files")).toBeInstanceOf(File);
    // no content-type header: the browser supplies the multipart boundary
    expect(calls[0].init?.headers).toBeUndefined();
  });

  it("omits the dry_run field for a real ingest", async () => {
    const { calls, fetch } = capture(200, { added: 2 });
    const file = new File(["x"], "a.txt");
    await new ApiClient("", fetch).ingest("r1", [file], { mode: "tsv_columns", fields: {} }, false);
    const form = calls[0].init?.body as FormData;
    expect(form.get("dry_run")).toBeNull();
  });

  it("sends evaluation options only when present", async () => {
    const { calls, fetch } = capture(200, { id: "j1" });
    const client = new ApiClient("", fetch);
    await client.evaluate("r1");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({});
    await client.evaluate("r1", ["comet"], ["cuda:0"]);
    expect(JSON.parse(String(calls[1].init?.body))).toEqual({
      metrics: ["comet"], device_hints: ["cuda:0"],
    });
  });

  it("builds the groups query string", async () => {
    const { calls, fetch } = capture(200, { groups: [] });
    await new ApiClient("", fetch).groups(["r1", "r2"], 2, 5);
    expect(calls[0].url).toBe("/api/groups?runs=r1%2Cr2&page=2&page_size=5");
  });

  it("parses ndjson feedback exports", async () => {
    const { fetch } = capture(200, '{"ranking":["a"]}\n{"ranking":["b"]}\n');
    const rows = await new ApiClient("", fetch).exportFeedback();
    expect(rows).toEqual([{ ranking: ["a"] }, { ranking: ["b"] }]);
  });

  it("returns an empty export for an empty body", async () => {
    const { fetch } = capture(200, "");
    expect(await new ApiClient("", fetch).exportFeedback()).toEqual([]);
  });

  it("raises ApiError with the envelope fields", async () => {
    const { fetch } = capture(404, {
      error: { code: "UnknownRun", message: "no run x", details: { run_id: "x" } },
    });
    const err = await new ApiClient("", fetch).jobStatus("x").catch(e => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("UnknownRun");
    expect(err.status).toBe(404);
    expect(err.message).toBe("no run x");
    expect(err.details).toEqual({ run_id: "x" });
  });

  it("degrades to the status line when the error body is not json", async () => {
    const broken: FetchLike = async () => ({
      ok: false, status: 502, statusText: "Bad Gateway",
      json: async () => { throw new Error("not json"); },
      text: async () => "oops",
    }) as unknown as Response;
    const err = await new ApiClient("", broken).health().catch(e => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("HTTPError");
    expect(err.message).toBe("Bad Gateway");
  });
});

import { readFileSync } from "node:fs";
import { join } from "node:path";

export function fixture<T>(name: string): T {
  const path = join(__dirname, "fixtures", `${name}.json`);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/**
 * A fetch stub driven by a route table: exact `METHOD path` keys map to
 * response payloads (or `{status, body}` for errors). Records every call.
 */
export function stubFetch(
  routes: Record<string, unknown | { __status: number; body: unknown }>,
): { fetchFn: typeof fetch; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    calls.push({ url, method, body });
    const key = `${method} ${url.split("?")[0]}`;
    const route = routes[key];
    if (route === undefined) {
      return new Response(JSON.stringify({ detail: `no route for ${key}` }), {
        status: 404,
        headers: { "content-type": "application/json" },
      });
    }
    const wrapped = route as { __status?: number; body?: unknown };
    const status = wrapped.__status ?? 200;
    const payload = wrapped.__status !== undefined ? wrapped.body : route;
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
  return { fetchFn, calls };
}

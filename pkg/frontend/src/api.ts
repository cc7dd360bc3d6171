/** Thin fetch client for the diagnosis service. No inference logic lives
 * here or anywhere else in the console: the UI is a pure view over service
 * responses. */

import type {
  DiagnosisResponse,
  EvalResultDoc,
  KbDocument,
  PatientBody,
  RuleTraceResponse,
} from "./types";

/** Per-field messages extracted from a 422 body. */
export class ValidationError extends Error {
  readonly fieldErrors: Record<string, string>;

  constructor(fieldErrors: Record<string, string>, message: string) {
    super(message);
    this.fieldErrors = fieldErrors;
  }
}

export class ServiceError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

function fieldErrorsFromDetail(detail: unknown): Record<string, string> {
  const out: Record<string, string> = {};
  if (Array.isArray(detail)) {
    for (const item of detail) {
      const loc = (item as { loc?: unknown[] }).loc;
      const msg = (item as { msg?: string }).msg ?? "invalid value";
      const field = Array.isArray(loc) ? String(loc[loc.length - 1]) : "body";
      out[field] = msg;
    }
  }
  return out;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.url(path), init);
    } catch (e) {
      throw new ServiceError(0, `service unreachable: ${String(e)}`);
    }
    if (response.status === 422) {
      const body = (await response.json()) as { detail?: unknown };
      const fields = fieldErrorsFromDetail(body.detail);
      throw new ValidationError(fields, "validation failed");
    }
    if (!response.ok) {
      throw new ServiceError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  diagnose(body: PatientBody): Promise<DiagnosisResponse> {
    return this.request("/v1/diagnose", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  kb(): Promise<KbDocument> {
    return this.request("/v1/kb");
  }

  evalCohort(csv: string): Promise<EvalResultDoc> {
    return this.request("/v1/eval", {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  ruleTrace(diagnosisId: string): Promise<RuleTraceResponse> {
    return this.request(`/v1/rules?fired_for=${encodeURIComponent(diagnosisId)}`);
  }

  health(): Promise<{ status: string; kb_version: string }> {
    return this.request("/healthz");
  }
}

/** Service URL: ?api=... wins, then a global injected at deploy time, then
 * same-origin. */
export function resolveApiBase(win?: {
  location?: { search?: string; origin?: string };
  __FUZZCARE_API__?: string;
}): string {
  const w = win ?? (globalThis as never);
  const search = w.location?.search ?? "";
  const fromQuery = new URLSearchParams(search).get("api");
  if (fromQuery) return fromQuery;
  if (w.__FUZZCARE_API__) return w.__FUZZCARE_API__;
  return w.location?.origin ?? "http://127.0.0.1:8571";
}

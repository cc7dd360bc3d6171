/** Form state: field validation against the knowledge base's universes,
 * sequence-numbered response reconciliation, and the what-if baseline delta.
 *
 * The displayed report always belongs to the most recently *issued* request
 * that has completed; anything older is dropped by sequence number, so fast
 * slider scrubbing can never leave a stale label on screen. */

import { ApiClient, ServiceError, ValidationError } from "./api";
import type {
  DiagnosisResponse,
  FieldName,
  KbDocument,
  PatientBody,
} from "./types";
import { FIELD_NAMES } from "./types";

export interface FieldSpec {
  name: FieldName;
  units: string;
  lo: number;
  hi: number;
}

export interface FieldValidity {
  ok: boolean;
  message: string;
}

export interface WhatIfDelta {
  baselineLabel: string;
  currentLabel: string;
  labelChanged: boolean;
  scoreDelta: number;
}

export function specsFromKb(kb: KbDocument): FieldSpec[] {
  return kb.variables.map((v) => ({
    name: v.name as FieldName,
    units: v.units,
    lo: v.universe[0],
    hi: v.universe[1],
  }));
}

export function validateField(spec: FieldSpec, raw: string): FieldValidity {
  const trimmed = raw.trim();
  if (trimmed === "") {
    return { ok: false, message: "required" };
  }
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    return { ok: false, message: "not a number" };
  }
  if (value < spec.lo || value > spec.hi) {
    return {
      ok: false,
      message: `outside ${spec.lo}–${spec.hi} ${spec.units}`,
    };
  }
  if (spec.name === "age" && value <= 0) {
    return { ok: false, message: "must be positive" };
  }
  return { ok: true, message: "" };
}

export class FormStore {
  readonly specs: Map<FieldName, FieldSpec>;
  fields: Record<FieldName, string>;
  validity: Record<FieldName, FieldValidity>;
  fieldErrors: Partial<Record<FieldName, string>> = {};
  banner: string | null = null;
  lastReport: DiagnosisResponse | null = null;
  baseline: DiagnosisResponse | null = null;
  private issued = 0;
  private applied = 0;

  constructor(specs: FieldSpec[]) {
    this.specs = new Map(specs.map((s) => [s.name, s]));
    this.fields = Object.fromEntries(
      FIELD_NAMES.map((n) => [n, ""]),
    ) as Record<FieldName, string>;
    this.validity = Object.fromEntries(
      FIELD_NAMES.map((n) => [n, { ok: false, message: "required" }]),
    ) as Record<FieldName, FieldValidity>;
  }

  setField(name: FieldName, raw: string): FieldValidity {
    const spec = this.specs.get(name);
    if (!spec) throw new Error(`unknown field ${name}`);
    this.fields[name] = raw;
    this.validity[name] = validateField(spec, raw);
    delete this.fieldErrors[name];
    return this.validity[name];
  }

  loadPatient(values: Record<FieldName, number>): void {
    for (const name of FIELD_NAMES) {
      this.setField(name, String(values[name]));
    }
  }

  /** Submit stays disabled until every field validates. */
  canSubmit(): boolean {
    return FIELD_NAMES.every((n) => this.validity[n].ok);
  }

  get pending(): boolean {
    return this.issued > this.applied;
  }

  record(): PatientBody {
    if (!this.canSubmit()) throw new Error("form is not valid");
    return Object.fromEntries(
      FIELD_NAMES.map((n) => [n, Number(this.fields[n])]),
    ) as unknown as PatientBody;
  }

  beginRequest(): number {
    return ++this.issued;
  }

  /** Returns false when the response lost to a newer one (stale). */
  applyResponse(token: number, response: DiagnosisResponse): boolean {
    if (token <= this.applied) return false;
    this.applied = token;
    this.lastReport = response;
    this.banner = null;
    this.fieldErrors = {};
    return true;
  }

  applyFailure(token: number, error: unknown): boolean {
    if (token <= this.applied) return false;
    this.applied = token;
    if (error instanceof ValidationError) {
      for (const [field, message] of Object.entries(error.fieldErrors)) {
        this.fieldErrors[field as FieldName] = message;
      }
      this.banner = null;
    } else if (error instanceof ServiceError) {
      this.banner = error.status
        ? `service error ${error.status}`
        : "service unreachable";
    } else {
      this.banner = String(error);
    }
    return true;
  }

  setBaseline(report: DiagnosisResponse | null): void {
    this.baseline = report;
  }

  /** Delta row vs the what-if baseline; null until both sides exist. */
  delta(): WhatIfDelta | null {
    if (!this.baseline || !this.lastReport) return null;
    return {
      baselineLabel: this.baseline.label,
      currentLabel: this.lastReport.label,
      labelChanged: this.baseline.label !== this.lastReport.label,
      scoreDelta: this.lastReport.score - this.baseline.score,
    };
  }
}

/** One submission through the store: validation gate, sequence token,
 * stale-response discard. Returns the applied response or null. */
export async function submitDiagnosis(
  store: FormStore,
  api: ApiClient,
): Promise<DiagnosisResponse | null> {
  if (!store.canSubmit()) return null;
  const body = store.record();
  const token = store.beginRequest();
  try {
    const response = await api.diagnose(body);
    return store.applyResponse(token, response) ? response : null;
  } catch (error) {
    store.applyFailure(token, error);
    return null;
  }
}

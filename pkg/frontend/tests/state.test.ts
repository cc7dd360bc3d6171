import { describe, expect, it } from "vitest";

import { ValidationError } from "../src/api";
import {
  FormStore,
  specsFromKb,
  submitDiagnosis,
  validateField,
  type FieldSpec,
} from "../src/state";
import type { DiagnosisResponse, KbDocument } from "../src/types";
import { FIELD_NAMES } from "../src/types";

const SPECS: FieldSpec[] = [
  { name: "ecg", units: "mm/sec", lo: 0, hi: 4 },
  { name: "chest_pain", units: "ETT", lo: 0, hi: 4 },
  { name: "blood_sugar", units: "mmol/L", lo: 40, hi: 400 },
  { name: "cholesterol", units: "mg/dL", lo: 50, hi: 400 },
  { name: "blood_pressure", units: "mmHg", lo: 50, hi: 220 },
  { name: "age", units: "year", lo: 0, hi: 120 },
  { name: "heart_rate", units: "bpm", lo: 30, hi: 220 },
];

const GOOD: Record<(typeof FIELD_NAMES)[number], number> = {
  ecg: 1.2,
  chest_pain: 1.1,
  blood_sugar: 96,
  cholesterol: 160,
  blood_pressure: 110,
  age: 33,
  heart_rate: 131,
};

function fakeReport(label: "Low" | "Medium" | "High", score: number): DiagnosisResponse {
  return {
    id: `id-${label}-${score}`,
    result: true,
    label,
    score,
    kb_version: "1.0.0",
    dosage: { level: label, guidance: "g", disclaimer: "d" },
    trace: { fired: [], aggregated: [], score, label },
  };
}

describe("validateField", () => {
  const bp = SPECS[4];

  it("accepts in-universe numbers", () => {
    expect(validateField(bp, "110").ok).toBe(true);
  });

  it("rejects blanks, text, and out-of-universe values", () => {
    expect(validateField(bp, "").ok).toBe(false);
    expect(validateField(bp, "abc").ok).toBe(false);
    expect(validateField(bp, "999").ok).toBe(false);
    expect(validateField(bp, "999").message).toContain("50");
    expect(validateField(bp, "-5").ok).toBe(false);
  });

  it("requires a positive age even though the universe starts at 0", () => {
    const age = SPECS[5];
    expect(validateField(age, "0").ok).toBe(false);
    expect(validateField(age, "33").ok).toBe(true);
  });
});

describe("FormStore", () => {
  it("disables submit until every field validates", () => {
    const store = new FormStore(SPECS);
    expect(store.canSubmit()).toBe(false);
    for (const name of FIELD_NAMES.slice(0, -1)) {
      store.setField(name, String(GOOD[name]));
    }
    expect(store.canSubmit()).toBe(false);
    store.setField("heart_rate", "131");
    expect(store.canSubmit()).toBe(true);
  });

  it("drops stale responses by sequence number", () => {
    const store = new FormStore(SPECS);
    const first = store.beginRequest();
    const second = store.beginRequest();
    expect(store.applyResponse(second, fakeReport("High", 7))).toBe(true);
    expect(store.applyResponse(first, fakeReport("Low", 2))).toBe(false);
    expect(store.lastReport?.label).toBe("High");
    expect(store.pending).toBe(false);
  });

  it("tracks pending across in-flight requests", () => {
    const store = new FormStore(SPECS);
    const token = store.beginRequest();
    expect(store.pending).toBe(true);
    store.applyResponse(token, fakeReport("Low", 2));
    expect(store.pending).toBe(false);
  });

  it("maps 422 field errors onto the offending input", () => {
    const store = new FormStore(SPECS);
    const token = store.beginRequest();
    store.applyFailure(
      token,
      new ValidationError({ blood_pressure: "outside universe" }, "bad"),
    );
    expect(store.fieldErrors.blood_pressure).toContain("outside");
    expect(store.banner).toBeNull();
  });

  it("computes the what-if delta against the baseline", () => {
    const store = new FormStore(SPECS);
    const baseline = fakeReport("Medium", 5);
    store.applyResponse(store.beginRequest(), baseline);
    store.setBaseline(store.lastReport);
    store.applyResponse(store.beginRequest(), fakeReport("High", 7.5));
    const delta = store.delta();
    expect(delta).not.toBeNull();
    expect(delta?.labelChanged).toBe(true);
    expect(delta?.scoreDelta).toBeCloseTo(2.5, 9);
  });

  it("builds specs from a kb document", () => {
    const kb = {
      variables: SPECS.map((s) => ({
        name: s.name,
        units: s.units,
        universe: [s.lo, s.hi],
        terms: [],
      })),
    } as unknown as KbDocument;
    expect(specsFromKb(kb)).toEqual(SPECS);
  });
});

describe("submitDiagnosis", () => {
  it("never issues a request while the form is invalid", async () => {
    const store = new FormStore(SPECS);
    store.loadPatient(GOOD);
    store.setField("blood_pressure", "999"); // out-of-universe extreme
    let calls = 0;
    const api = {
      diagnose: async () => {
        calls += 1;
        return fakeReport("Low", 2);
      },
    };
    const result = await submitDiagnosis(store, api as never);
    expect(result).toBeNull();
    expect(calls).toBe(0);
  });

  it("applies the response on success", async () => {
    const store = new FormStore(SPECS);
    store.loadPatient(GOOD);
    const api = { diagnose: async () => fakeReport("Low", 2.2) };
    const result = await submitDiagnosis(store, api as never);
    expect(result?.label).toBe("Low");
    expect(store.lastReport?.score).toBe(2.2);
  });

  it("surfaces network failure as a banner, not a crash", async () => {
    const store = new FormStore(SPECS);
    store.loadPatient(GOOD);
    const api = {
      diagnose: async () => {
        throw new Error("boom");
      },
    };
    const result = await submitDiagnosis(store, api as never);
    expect(result).toBeNull();
    expect(store.banner).toContain("boom");
  });
});

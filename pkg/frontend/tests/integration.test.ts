/** Integration against the real diagnosis service (spawned by globalSetup).
 * Covers the console's two release criteria: rendered labels match direct
 * API calls for the whole demo cohort, and scrubbing a what-if slider back
 * to its baseline value restores exactly the baseline report. */

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { cohortEvalCsv, DEMO_COHORT } from "../src/cohort";
import { renderReport } from "../src/render";
import {
  FormStore,
  specsFromKb,
  submitDiagnosis,
  type FieldSpec,
} from "../src/state";
import type { DiagnosisResponse } from "../src/types";

const BASE = process.env.FUZZCARE_TEST_URL ?? "";

let api: ApiClient;
let specs: FieldSpec[];

/** The diagnosis content, minus persistence identity. */
function diagnosisContent(report: DiagnosisResponse) {
  const { id: _id, ...rest } = report;
  return rest;
}

beforeAll(async () => {
  expect(BASE, "globalSetup must provide FUZZCARE_TEST_URL").not.toBe("");
  api = new ApiClient(BASE);
  specs = specsFromKb(await api.kb());
});

describe("ui consistency", () => {
  it("renders the same label a direct API call yields, for all 10 demo patients", async () => {
    let agreements = 0;
    for (const patient of DEMO_COHORT) {
      const store = new FormStore(specs);
      store.loadPatient(patient.values);
      const viaUi = await submitDiagnosis(store, api);
      expect(viaUi).not.toBeNull();

      const direct = await fetch(`${BASE}/v1/diagnose`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(patient.values),
      }).then((r) => r.json() as Promise<DiagnosisResponse>);

      if (viaUi!.label === direct.label) agreements += 1;
      // the rendered view carries exactly the service's label
      expect(renderReport(store.lastReport!)).toContain(`>${direct.label}</div>`);
      expect(diagnosisContent(viaUi!)).toEqual(diagnosisContent(direct));
    }
    expect(agreements).toBe(10);
  });

  it("matches the expected label column for the shipped kb", async () => {
    const labels: string[] = [];
    for (const patient of DEMO_COHORT) {
      const store = new FormStore(specs);
      store.loadPatient(patient.values);
      const report = await submitDiagnosis(store, api);
      labels.push(report!.label);
    }
    const expected = DEMO_COHORT.map((p) => p.expected);
    const matches = labels.filter((l, i) => l === expected[i]).length;
    expect(matches).toBeGreaterThanOrEqual(9);
  });
});

describe("what-if loop", () => {
  it("scrubbing a slider back to its baseline value restores the baseline report", async () => {
    const patient = DEMO_COHORT[3]; // the High-risk reference patient
    const store = new FormStore(specs);
    store.loadPatient(patient.values);

    const baseline = await submitDiagnosis(store, api);
    expect(baseline).not.toBeNull();
    store.setBaseline(store.lastReport);

    // scrub cholesterol away from baseline: live re-diagnosis
    store.setField("cholesterol", "110");
    const moved = await submitDiagnosis(store, api);
    expect(moved).not.toBeNull();
    const delta = store.delta();
    expect(delta).not.toBeNull();
    expect(store.lastReport!.score).not.toBe(baseline!.score);

    // scrub back to the original value: identical report (determinism)
    store.setField("cholesterol", String(patient.values.cholesterol));
    const restored = await submitDiagnosis(store, api);
    expect(restored).not.toBeNull();
    expect(diagnosisContent(restored!)).toEqual(diagnosisContent(baseline!));
    expect(store.delta()?.labelChanged).toBe(false);
    expect(store.delta()?.scoreDelta).toBe(0);
  });

  it("out-of-universe extremes never reach the service", async () => {
    const store = new FormStore(specs);
    store.loadPatient(DEMO_COHORT[0].values);
    store.setField("blood_pressure", "999");
    expect(store.canSubmit()).toBe(false);
    const result = await submitDiagnosis(store, api);
    expect(result).toBeNull();
  });
});

describe("demo cohort view", () => {
  it("eval over the bundled cohort reports mean probability 0.955", async () => {
    const result = await api.evalCohort(cohortEvalCsv());
    expect(result.summary.n).toBe(10);
    expect(result.summary.mean_probability).toBeCloseTo(0.955, 9);
    expect(result.summary.matches).toBeGreaterThanOrEqual(9);
  });

  it("rule traces replay from the store for fresh diagnoses", async () => {
    const store = new FormStore(specs);
    store.loadPatient(DEMO_COHORT[0].values);
    const report = await submitDiagnosis(store, api);
    const trace = await api.ruleTrace(report!.id);
    expect(trace.trace).toEqual(report!.trace);
    expect(trace.trace.fired.length).toBeGreaterThanOrEqual(1);
    expect(trace.trace.fired[0].consequent).toBe("Low");
    expect(trace.trace.fired.every((f) => f.strength > 0 && f.strength <= 1)).toBe(true);
  });

  it("slider bounds come from the knowledge base document", async () => {
    const byName = Object.fromEntries(specs.map((s) => [s.name, s]));
    expect(byName.blood_pressure.lo).toBe(50);
    expect(byName.blood_pressure.hi).toBe(220);
    expect(byName.ecg.hi).toBe(4);
    expect(byName.age.hi).toBe(120);
  });
});

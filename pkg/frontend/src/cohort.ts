/** The bundled 10-patient demo cohort (mirrors the service's reference
 * cohort file) and the CSV builder for POST /v1/eval. */

import type { FieldName, RiskLabel } from "./types";
import { FIELD_NAMES } from "./types";

export interface DemoPatient {
  values: Record<FieldName, number>;
  expected: RiskLabel;
  probability: number;
}

const ROWS: [number, number, number, number, number, number, number, RiskLabel, number][] = [
  [1.2, 1.1, 96, 160, 110, 33, 131, "Low", 0.95],
  [1, 1, 102, 130, 115, 30, 136, "Low", 0.96],
  [1.5, 2, 140, 140, 140, 40, 140, "Medium", 0.94],
  [2.2, 2.4, 200, 170, 160, 48, 160, "High", 0.97],
  [1.3, 1.2, 110, 133, 125, 25, 131, "Low", 0.95],
  [1.4, 1, 109, 117, 126, 23, 127, "Low", 0.96],
  [1.9, 2.2, 118, 170, 149, 36, 137, "Medium", 0.94],
  [2.3, 2.4, 190, 160, 150, 38, 180, "High", 0.97],
  [1.1, 1.1, 112, 120, 131, 29, 128, "Low", 0.95],
  [1.3, 1, 115, 109, 121, 35, 119, "Low", 0.96],
];

export const DEMO_COHORT: DemoPatient[] = ROWS.map((row) => ({
  values: Object.fromEntries(
    FIELD_NAMES.map((name, i) => [name, row[i] as number]),
  ) as Record<FieldName, number>,
  expected: row[7],
  probability: row[8],
}));

export function cohortEvalCsv(patients: DemoPatient[] = DEMO_COHORT): string {
  const header = [...FIELD_NAMES, "expected_label", "probability"].join(",");
  const lines = patients.map((p) =>
    [
      ...FIELD_NAMES.map((name) => String(p.values[name])),
      p.expected,
      String(p.probability),
    ].join(","),
  );
  return [header, ...lines].join("\n") + "\n";
}

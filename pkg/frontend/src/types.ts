/** Wire types for the diagnosis service (JSON bodies, verbatim shapes). */

export const FIELD_NAMES = [
  "ecg",
  "chest_pain",
  "blood_sugar",
  "cholesterol",
  "blood_pressure",
  "age",
  "heart_rate",
] as const;

export type FieldName = (typeof FIELD_NAMES)[number];

export type RiskLabel = "Low" | "Medium" | "High";

export type PatientBody = Record<FieldName, number> & { gender?: string };

export interface FiredRuleDoc {
  id: string;
  text: string;
  strength: number;
  consequent: string;
  pinned: boolean;
}

export interface TraceDoc {
  fired: FiredRuleDoc[];
  aggregated: { term: string; height: number }[];
  score: number;
  label: RiskLabel;
}

export interface DiagnosisResponse {
  id: string;
  result: boolean;
  label: RiskLabel;
  score: number;
  kb_version: string;
  dosage: { level: RiskLabel; guidance: string; disclaimer: string };
  trace: TraceDoc;
}

export interface KbTermDoc {
  label: string;
  kind: string;
  params: number[];
}

export interface KbVariableDoc {
  name: string;
  units: string;
  universe: [number, number];
  terms: KbTermDoc[];
}

export interface KbDocument {
  version: string;
  provenance: string;
  variables: KbVariableDoc[];
  output: KbVariableDoc;
  pinned_rules: string;
  policy: { id: string; weights: string[]; thresholds: string[] };
}

export interface EvalRowDoc {
  row: number;
  record: Record<string, number | string>;
  expected: RiskLabel;
  produced: RiskLabel;
  match: boolean;
  probability: number | null;
}

export interface EvalResultDoc {
  rows: EvalRowDoc[];
  summary: {
    n: number;
    matches: number;
    agreement: number | null;
    mean_probability: number | null;
    binary_matches: number;
    binary_agreement: number | null;
  };
}

export interface RuleTraceResponse {
  fired_for: string;
  kb_version: string;
  trace: TraceDoc;
}

/** HTML-string renderers. Pure functions of service responses: every label,
 * score, and strength shown here came from the wire, never from client-side
 * computation. */

import type { WhatIfDelta } from "./state";
import type {
  DiagnosisResponse,
  EvalResultDoc,
  FiredRuleDoc,
  RiskLabel,
} from "./types";

export function esc(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export const SEVERITY_CLASS: Record<RiskLabel, string> = {
  Low: "severity-low",
  Medium: "severity-medium",
  High: "severity-high",
};

/** 0-10 risk gauge with a marker at the crisp score. */
export function renderGauge(score: number): string {
  const clamped = Math.min(10, Math.max(0, score));
  const pct = (clamped / 10) * 100;
  return `
    <div class="gauge" role="meter" aria-valuemin="0" aria-valuemax="10"
         aria-valuenow="${clamped.toFixed(2)}">
      <div class="gauge-track">
        <div class="gauge-marker" style="left: ${pct.toFixed(1)}%"></div>
      </div>
      <div class="gauge-caption">${clamped.toFixed(2)} / 10</div>
    </div>`;
}

/** Fired rules as strength bars; pinned rules carry a badge. Zero-strength
 * rules never reach the trace, so every bar has positive width. */
export function renderTrace(fired: FiredRuleDoc[]): string {
  const rows = fired
    .map((f) => {
      const width = Math.max(1, Math.round(f.strength * 100));
      const badge = f.pinned ? '<span class="badge-pinned">pinned</span>' : "";
      return `
      <li class="trace-row">
        <div class="trace-bar" style="width: ${width}%"></div>
        <code class="trace-strength">${f.strength.toFixed(4)}</code>
        ${badge}
        <code class="trace-text">${esc(f.text)}</code>
      </li>`;
    })
    .join("");
  return `<ol class="trace">${rows}</ol>`;
}

export function renderReport(report: DiagnosisResponse): string {
  return `
    <div class="report">
      <div class="report-label ${SEVERITY_CLASS[report.label]}">${report.label}</div>
      ${renderGauge(report.score)}
      <div class="dosage">
        <strong>dosage level ${esc(report.dosage.level)}</strong>
        <p>${esc(report.dosage.guidance)}</p>
        <p class="disclaimer">${esc(report.dosage.disclaimer)}</p>
      </div>
      <h3>fired rules (${report.trace.fired.length})</h3>
      ${renderTrace(report.trace.fired)}
    </div>`;
}

export function renderDelta(delta: WhatIfDelta | null): string {
  if (!delta) return "";
  const sign = delta.scoreDelta >= 0 ? "+" : "";
  const change = delta.labelChanged
    ? `label ${esc(delta.baselineLabel)} → ${esc(delta.currentLabel)}`
    : `label unchanged (${esc(delta.currentLabel)})`;
  return `
    <div class="delta ${delta.labelChanged ? "delta-changed" : ""}">
      what-if vs baseline: ${change}, score ${sign}${delta.scoreDelta.toFixed(3)}
    </div>`;
}

export function renderCohortTable(result: EvalResultDoc): string {
  const rows = result.rows
    .map(
      (r) => `
      <tr data-row="${r.row}" class="${r.match ? "match" : "mismatch"}">
        <td>${r.row}</td>
        <td>${esc(r.expected)}</td>
        <td>${esc(r.produced)}</td>
        <td>${r.match ? "yes" : "no"}</td>
        <td>${r.probability === null ? "" : r.probability.toFixed(2)}</td>
      </tr>`,
    )
    .join("");
  const s = result.summary;
  const agreement = s.agreement === null ? "n/a" : s.agreement.toFixed(3);
  const meanP =
    s.mean_probability === null ? "n/a" : s.mean_probability.toFixed(4);
  return `
    <table class="cohort">
      <thead>
        <tr><th>#</th><th>expected</th><th>produced</th><th>match</th><th>p</th></tr>
      </thead>
      <tbody>${rows}</tbody>
    </table>
    <p class="cohort-summary">
      n=${s.n} matches=${s.matches} agreement=${agreement}
      mean probability=${meanP}
    </p>`;
}

export function renderBanner(message: string | null): string {
  return message ? `<div class="banner">${esc(message)}</div>` : "";
}

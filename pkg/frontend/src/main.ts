/** Bootstrap: build the form from the service's knowledge-base document so
 * input and slider bounds always match the loaded kb, then wire the submit,
 * what-if, and demo-cohort flows. */

import { ApiClient, resolveApiBase } from "./api";
import { cohortEvalCsv, DEMO_COHORT } from "./cohort";
import { debounce } from "./debounce";
import {
  renderBanner,
  renderCohortTable,
  renderDelta,
  renderReport,
} from "./render";
import { FormStore, specsFromKb, submitDiagnosis } from "./state";
import type { FieldName } from "./types";
import { FIELD_NAMES } from "./types";

const SLIDER_DEBOUNCE_MS = 250;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot() {
  const api = new ApiClient(resolveApiBase(window as never));
  const formHost = el<HTMLDivElement>("form-host");
  const reportHost = el<HTMLDivElement>("report-host");
  const deltaHost = el<HTMLDivElement>("delta-host");
  const bannerHost = el<HTMLDivElement>("banner-host");
  const cohortHost = el<HTMLDivElement>("cohort-host");
  const submitButton = el<HTMLButtonElement>("submit");
  const baselineButton = el<HTMLButtonElement>("set-baseline");
  const demoButton = el<HTMLButtonElement>("load-cohort");

  let kb;
  try {
    kb = await api.kb();
  } catch (e) {
    bannerHost.innerHTML = renderBanner(`cannot load knowledge base: ${e}`);
    return;
  }
  const specs = specsFromKb(kb);
  const store = new FormStore(specs);

  formHost.innerHTML = specs
    .map(
      (s) => `
      <label class="field" data-field="${s.name}">
        <span class="field-name">${s.name} <small>(${s.lo}–${s.hi} ${s.units})</small></span>
        <input type="number" step="any" id="in-${s.name}" min="${s.lo}" max="${s.hi}">
        <input type="range" step="${(s.hi - s.lo) / 200}" id="slider-${s.name}"
               min="${s.lo}" max="${s.hi}" value="${(s.lo + s.hi) / 2}">
        <span class="field-error" id="err-${s.name}"></span>
      </label>`,
    )
    .join("");

  const refresh = () => {
    submitButton.disabled = !store.canSubmit();
    bannerHost.innerHTML = renderBanner(store.banner);
    for (const name of FIELD_NAMES) {
      const validity = store.validity[name];
      const serverError = store.fieldErrors[name];
      el<HTMLSpanElement>(`err-${name}`).textContent = serverError
        ? serverError
        : validity.ok
          ? ""
          : store.fields[name] === "" // untouched fields stay quiet
            ? ""
            : validity.message;
    }
    reportHost.innerHTML = store.lastReport
      ? renderReport(store.lastReport)
      : "<p>enter all seven measurements and diagnose.</p>";
    deltaHost.innerHTML = renderDelta(store.delta());
    baselineButton.disabled = store.lastReport === null;
  };

  const submit = async () => {
    await submitDiagnosis(store, api);
    refresh();
  };
  const debouncedSubmit = debounce(() => void submit(), SLIDER_DEBOUNCE_MS);

  for (const name of FIELD_NAMES) {
    const input = el<HTMLInputElement>(`in-${name}`);
    const slider = el<HTMLInputElement>(`slider-${name}`);
    input.addEventListener("input", () => {
      store.setField(name as FieldName, input.value);
      slider.value = input.value || slider.value;
      refresh();
    });
    slider.addEventListener("input", () => {
      // live what-if: debounced re-diagnosis while scrubbing
      input.value = slider.value;
      store.setField(name as FieldName, slider.value);
      refresh();
      if (store.canSubmit()) debouncedSubmit();
    });
  }

  submitButton.addEventListener("click", () => void submit());
  baselineButton.addEventListener("click", () => {
    store.setBaseline(store.lastReport);
    refresh();
  });

  demoButton.addEventListener("click", async () => {
    try {
      const result = await api.evalCohort(cohortEvalCsv());
      cohortHost.innerHTML = renderCohortTable(result);
      cohortHost.querySelectorAll("tr[data-row]").forEach((tr) => {
        tr.addEventListener("click", () => {
          const index = Number((tr as HTMLElement).dataset.row) - 1;
          const patient = DEMO_COHORT[index];
          if (!patient) return;
          store.loadPatient(patient.values);
          for (const name of FIELD_NAMES) {
            el<HTMLInputElement>(`in-${name}`).value = String(
              patient.values[name],
            );
            el<HTMLInputElement>(`slider-${name}`).value = String(
              patient.values[name],
            );
          }
          refresh();
        });
      });
    } catch (e) {
      bannerHost.innerHTML = renderBanner(`cohort evaluation failed: ${e}`);
    }
  });

  refresh();
}

void boot();

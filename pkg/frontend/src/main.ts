import { fetchCurve, submitForm, curveRange, fieldForPath, ApiError } from "./api.js";
import { renderCurveSvg } from "./chart.js";
import {
  DEFAULT_FORM,
  formToConfig,
  isValid,
  parseShareLink,
  shareLink,
  validateForm,
} from "./state.js";
import type { FormState } from "./types.js";

const NUMBER_FIELDS: (keyof FormState)[] = [
  "days", "occPerDay", "levelsInitial", "levelsAdded", "additionDay",
  "interventionProb", "tauMean", "tauInitial", "tauPeakDay",
  "betaInitial", "betaMean", "betaRampDays", "sampleSize", "power", "sigLevel",
];

let requestToken = 0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): FormState {
  const form: FormState = { ...DEFAULT_FORM };
  for (const key of NUMBER_FIELDS) {
    const input = el<HTMLInputElement>(key);
    (form as unknown as Record<string, unknown>)[key] = input.value === "" ? NaN : Number(input.value);
  }
  form.tauShape = el<HTMLSelectElement>("tauShape").value as FormState["tauShape"];
  form.betaShape = el<HTMLSelectElement>("betaShape").value as FormState["betaShape"];
  form.method = el<HTMLSelectElement>("method").value as FormState["method"];
  form.test = el<HTMLSelectElement>("test").value as FormState["test"];
  form.resultMode = el<HTMLSelectElement>("resultMode").value as FormState["resultMode"];
  return form;
}

function writeForm(form: FormState): void {
  for (const key of NUMBER_FIELDS) {
    el<HTMLInputElement>(key).value = String(form[key]);
  }
  el<HTMLSelectElement>("tauShape").value = form.tauShape;
  el<HTMLSelectElement>("betaShape").value = form.betaShape;
  el<HTMLSelectElement>("method").value = form.method;
  el<HTMLSelectElement>("test").value = form.test;
  el<HTMLSelectElement>("resultMode").value = form.resultMode;
}

function syncResultModeToMethod(changed: "method" | "resultMode"): void {
  const method = el<HTMLSelectElement>("method");
  const mode = el<HTMLSelectElement>("resultMode");
  if (changed === "method") {
    if (method.value === "power" && mode.value === "coverage") mode.value = "sample_size";
    if (method.value === "confidence interval" && mode.value === "power") mode.value = "sample_size";
  } else {
    if (mode.value === "power") method.value = "power";
    if (mode.value === "coverage") method.value = "confidence interval";
  }
}

function showErrors(form: FormState): boolean {
  const errors = validateForm(form);
  for (const key of Object.keys(DEFAULT_FORM) as (keyof FormState)[]) {
    const span = document.getElementById(`err-${key}`);
    if (span) span.textContent = errors[key] ?? "";
  }
  const panelToggles: [string, boolean][] = [
    ["row-additionDay", form.levelsAdded > 0],
    ["row-tauInitial", form.tauShape !== "constant"],
    ["row-tauPeakDay", form.tauShape === "linear and constant" || form.tauShape === "quadratic"],
    ["row-betaInitial", form.betaShape !== "constant"],
    ["row-betaRampDays", form.betaShape === "linear and constant" || form.betaShape === "quadratic"],
    ["row-sampleSize", form.resultMode !== "sample_size"],
  ];
  for (const [id, visible] of panelToggles) {
    el(id).style.display = visible ? "" : "none";
  }
  const ok = Object.keys(errors).length === 0;
  el<HTMLButtonElement>("submit").disabled = !ok;
  return ok;
}

function setStatus(text: string, isError = false): void {
  const node = el("status");
  node.textContent = text;
  node.className = isError ? "status error" : "status";
}

async function runQuery(): Promise<void> {
  const form = readForm();
  if (!showErrors(form)) return;
  const token = ++requestToken;
  setStatus("computing...");
  el("result-card").textContent = "";
  try {
    const response = await submitForm(fetch.bind(window), form);
    if (token !== requestToken) return; // a newer request superseded this one
    el("result-card").textContent = response.message;
    setStatus(`engine ${response.engine_version}`);
    const chosenN = response.result.N ?? (form.resultMode !== "sample_size" ? form.sampleSize : null);
    if (chosenN != null) {
      const { nMin, nMax } = curveRange(chosenN);
      const curve = await fetchCurve(fetch.bind(window), form, nMin, nMax);
      if (token !== requestToken) return;
      el("chart").innerHTML = renderCurveSvg(curve.points, {
        metric: curve.metric,
        chosenN,
        target: form.method === "power" ? form.power : 1 - form.sigLevel,
      });
    }
  } catch (err) {
    if (token !== requestToken) return;
    if (err instanceof ApiError) {
      const field = fieldForPath(err.path);
      if (field) {
        const span = document.getElementById(`err-${field}`);
        if (span) span.textContent = err.message;
      }
      setStatus(err.path ? `${err.path}: ${err.message}` : err.message, true);
    } else {
      setStatus(`service unreachable: ${String(err)}`, true);
    }
  }
}

function updateShareLink(): void {
  const form = readForm();
  const url = shareLink(form, window.location.href);
  history.replaceState(null, "", url);
  el<HTMLAnchorElement>("share").setAttribute("href", url);
}

function boot(): void {
  const fromUrl = parseShareLink(window.location.href);
  writeForm(fromUrl ?? DEFAULT_FORM);
  showErrors(readForm());
  el("config-preview").textContent = JSON.stringify(formToConfig(readForm()), null, 2);

  document.querySelectorAll("input, select").forEach((node) => {
    node.addEventListener("input", () => {
      if (node.id === "method" || node.id === "resultMode") {
        syncResultModeToMethod(node.id as "method" | "resultMode");
      }
      const form = readForm();
      showErrors(form);
      el("config-preview").textContent = JSON.stringify(formToConfig(form), null, 2);
      updateShareLink();
    });
  });
  el<HTMLButtonElement>("submit").addEventListener("click", (ev) => {
    ev.preventDefault();
    void runQuery();
  });
  el<HTMLAnchorElement>("share").addEventListener("click", () => {
    void navigator.clipboard?.writeText(window.location.href).catch(() => undefined);
  });
  if (fromUrl && isValid(fromUrl)) void runQuery();
}

document.addEventListener("DOMContentLoaded", boot);

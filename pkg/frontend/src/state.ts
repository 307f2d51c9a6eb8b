import type { FormState, RunConfig, ResultMode } from "./types.js";

/** The prefilled demo design: 180 days, 2 + 2 levels, Hotelling N, 80% power. */
export const DEFAULT_FORM: FormState = {
  days: 180,
  occPerDay: 1,
  levelsInitial: 2,
  levelsAdded: 2,
  additionDay: 91,
  interventionProb: 0.4,
  tauShape: "constant",
  tauMean: 1.0,
  tauInitial: 1.0,
  tauPeakDay: 28,
  method: "power",
  test: "hotelling N",
  betaShape: "linear and constant",
  betaInitial: 0.02,
  betaMean: 0.2,
  betaRampDays: 28,
  resultMode: "sample_size",
  sampleSize: 17,
  power: 0.8,
  sigLevel: 0.05,
};

export type FieldErrors = Partial<Record<keyof FormState, string>>;

const isInt = (v: number) => Number.isFinite(v) && Math.floor(v) === v;

/** Client-side mirror of the service's design validation. */
export function validateForm(f: FormState): FieldErrors {
  const errors: FieldErrors = {};
  if (!isInt(f.days) || f.days < 1) errors.days = "study length must be a positive whole number of days";
  if (!isInt(f.occPerDay) || f.occPerDay < 1) errors.occPerDay = "need at least one decision time per day";
  if (!isInt(f.levelsInitial) || f.levelsInitial < 1)
    errors.levelsInitial = "at least one level must start on day 1";
  if (!isInt(f.levelsAdded) || f.levelsAdded < 0) errors.levelsAdded = "added levels cannot be negative";
  if (f.levelsAdded > 0) {
    if (!isInt(f.additionDay) || f.additionDay <= 1 || f.additionDay > f.days)
      errors.additionDay = `addition day must lie in 2..${f.days}`;
  }
  if (!(f.interventionProb > 0)) {
    errors.interventionProb = "the active levels need positive total probability";
  } else if (f.interventionProb >= 1) {
    errors.interventionProb =
      `the intervention levels alone sum to ${f.interventionProb.toFixed(2)}, ` +
      "leaving the control level no probability";
  }
  if (!(f.tauMean >= 0 && f.tauMean <= 1)) errors.tauMean = "availability must lie in [0, 1]";
  if (f.tauShape !== "constant" && !(f.tauInitial >= 0 && f.tauInitial <= 1))
    errors.tauInitial = "availability must lie in [0, 1]";
  if ((f.tauShape === "linear and constant" || f.tauShape === "quadratic") && !(f.tauPeakDay >= 1))
    errors.tauPeakDay = "peak day must be at least 1";
  if (!Number.isFinite(f.betaMean)) errors.betaMean = "enter an average standardized effect";
  if (f.betaShape !== "constant" && !Number.isFinite(f.betaInitial))
    errors.betaInitial = "enter an initial standardized effect";
  if (
    (f.betaShape === "linear and constant" || f.betaShape === "quadratic") &&
    (!isInt(f.betaRampDays) || f.betaRampDays < 2)
  )
    errors.betaRampDays = "the effect needs at least 2 days to reach its peak";
  if (f.resultMode !== "sample_size" && (!isInt(f.sampleSize) || f.sampleSize < 1))
    errors.sampleSize = "enter the number of participants to evaluate";
  if (!(f.power > 0 && f.power < 1)) errors.power = "power must lie strictly between 0 and 1";
  if (!(f.sigLevel > 0 && f.sigLevel < 1)) errors.sigLevel = "significance level must lie in (0, 1)";
  if (f.resultMode === "power" && f.method !== "power")
    errors.resultMode = "power output needs the power method";
  if (f.resultMode === "coverage" && f.method !== "confidence interval")
    errors.resultMode = "coverage output needs the confidence interval method";
  return errors;
}

export function isValid(f: FormState): boolean {
  return Object.keys(validateForm(f)).length === 0;
}

function additionDays(f: FormState): number[] {
  const days = new Array<number>(f.levelsInitial).fill(1);
  for (let i = 0; i < f.levelsAdded; i++) days.push(f.additionDay);
  return days;
}

const RESULT_KEY: Record<ResultMode, RunConfig["result"]> = {
  sample_size: "choice_sample_size",
  power: "choice_power",
  coverage: "choice_coverage_probability",
};

/** Form to run-config document. Inverse of configToForm on valid states. */
export function formToConfig(f: FormState): RunConfig {
  const aa = additionDays(f);
  const config: RunConfig = {
    days: f.days,
    occ_per_day: f.occPerDay,
    aa_day_aa: aa,
    control_prob: round(1 - f.interventionProb),
    beta_shape: f.betaShape,
    beta_mean: f.betaMean,
    tau_shape: f.tauShape,
    tau_mean: f.tauMean,
    sigma: 1.0,
    rho: 0.0,
    pow: f.power,
    sigLev: f.sigLevel,
    method: f.method,
    test: f.test,
    result: RESULT_KEY[f.resultMode],
  };
  if (f.betaShape !== "constant") config.beta_initial = f.betaInitial;
  if (f.betaShape === "linear and constant" || f.betaShape === "quadratic") {
    config.beta_quadratic_max = aa.map((a) => a - 1 + f.betaRampDays);
  }
  if (f.tauShape !== "constant") config.tau_initial = f.tauInitial;
  if (f.tauShape === "linear and constant" || f.tauShape === "quadratic") {
    config.tau_quadratic_max = f.tauPeakDay;
  }
  if (f.resultMode !== "sample_size") config.SS = f.sampleSize;
  return config;
}

/** Rebuild the form from a config this UI produced. */
export function configToForm(config: RunConfig): FormState {
  const f: FormState = { ...DEFAULT_FORM };
  f.days = config.days;
  f.occPerDay = config.occ_per_day;
  const aa = config.aa_day_aa;
  f.levelsInitial = aa.filter((d) => d === 1).length;
  f.levelsAdded = aa.length - f.levelsInitial;
  f.additionDay = f.levelsAdded > 0 ? aa[aa.length - 1] : DEFAULT_FORM.additionDay;
  f.interventionProb = round(1 - config.control_prob);
  f.betaShape = config.beta_shape;
  f.betaMean = config.beta_mean;
  f.betaInitial = config.beta_initial ?? DEFAULT_FORM.betaInitial;
  f.betaRampDays = config.beta_quadratic_max
    ? config.beta_quadratic_max[0] - (aa[0] - 1)
    : DEFAULT_FORM.betaRampDays;
  f.tauShape = config.tau_shape;
  f.tauMean = config.tau_mean;
  f.tauInitial = config.tau_initial ?? DEFAULT_FORM.tauInitial;
  f.tauPeakDay = config.tau_quadratic_max ?? DEFAULT_FORM.tauPeakDay;
  f.method = config.method;
  f.test = config.test;
  f.resultMode = (Object.entries(RESULT_KEY).find(([, v]) => v === config.result)?.[0] ??
    "sample_size") as ResultMode;
  f.sampleSize = config.SS ?? DEFAULT_FORM.sampleSize;
  f.power = config.pow;
  f.sigLevel = config.sigLev;
  return f;
}

function round(x: number): number {
  return Math.round(x * 1e12) / 1e12;
}

/** Encode the form in a URL; the default form maps to the bare URL. */
export function shareLink(f: FormState, baseUrl: string): string {
  const base = baseUrl.split("#")[0];
  if (JSON.stringify(f) === JSON.stringify(DEFAULT_FORM)) return base;
  return `${base}#s=${encodeURIComponent(JSON.stringify(f))}`;
}

/** Decode a share link; returns null when no usable state is embedded. */
export function parseShareLink(url: string): FormState | null {
  const hash = url.split("#")[1];
  if (!hash || !hash.startsWith("s=")) return null;
  let raw: unknown;
  try {
    raw = JSON.parse(decodeURIComponent(hash.slice(2)));
  } catch {
    return null;
  }
  // Unknown or missing keys fall back to defaults; validation then surfaces
  // anything out of range just like hand-entered values.
  const form: FormState = { ...DEFAULT_FORM };
  for (const key of Object.keys(DEFAULT_FORM) as (keyof FormState)[]) {
    if (raw != null && typeof raw === "object" && key in raw) {
      (form as unknown as Record<string, unknown>)[key] = (raw as Record<string, unknown>)[key];
    }
  }
  return form;
}

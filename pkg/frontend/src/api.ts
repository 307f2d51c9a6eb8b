import type { CurveResponse, FormState, QueryResponse, ServiceError } from "./types.js";
import { formToConfig } from "./state.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

const ENDPOINT: Record<FormState["resultMode"], string> = {
  sample_size: "/api/samplesize",
  power: "/api/power",
  coverage: "/api/coverage",
};

export class ApiError extends Error {
  readonly path?: string;

  constructor(message: string, path?: string) {
    super(message);
    this.path = path;
  }
}

async function postJson<T>(fetchFn: FetchLike, url: string, body: unknown): Promise<T> {
  const response = await fetchFn(url, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = await response.json();
  if (!response.ok) {
    const err = payload as ServiceError;
    throw new ApiError(err.error ?? `request failed (${response.status})`, err.path);
  }
  return payload as T;
}

/** Run the configured query. All numbers come back from the service. */
export function submitForm(fetchFn: FetchLike, form: FormState): Promise<QueryResponse> {
  return postJson<QueryResponse>(fetchFn, ENDPOINT[form.resultMode], formToConfig(form));
}

/** Power (or coverage) against N for the chart. */
export function fetchCurve(
  fetchFn: FetchLike,
  form: FormState,
  nMin: number,
  nMax: number,
): Promise<CurveResponse> {
  const url = `/api/power-curve?nmin=${nMin}&nmax=${nMax}`;
  return postJson<CurveResponse>(fetchFn, url, formToConfig(form));
}

/** Range of N worth plotting around a chosen sample size. */
export function curveRange(chosenN: number): { nMin: number; nMax: number } {
  const nMin = Math.max(1, Math.floor(chosenN * 0.4));
  const nMax = Math.min(chosenN + 400, Math.max(chosenN + 10, Math.ceil(chosenN * 1.8)));
  return { nMin, nMax };
}

/** Maps a service field path like "beta_mean" onto the owning form field. */
export function fieldForPath(path: string | undefined): keyof FormState | null {
  if (!path) return null;
  const key = path.split(/[.[]/, 1)[0];
  const table: Record<string, keyof FormState> = {
    days: "days",
    occ_per_day: "occPerDay",
    aa_day_aa: "additionDay",
    control_prob: "interventionProb",
    prob: "interventionProb",
    beta_shape: "betaShape",
    beta_mean: "betaMean",
    beta_initial: "betaInitial",
    beta_quadratic_max: "betaRampDays",
    tau_shape: "tauShape",
    tau_mean: "tauMean",
    tau_initial: "tauInitial",
    tau_quadratic_max: "tauPeakDay",
    pow: "power",
    sigLev: "sigLevel",
    method: "method",
    test: "test",
    result: "resultMode",
    SS: "sampleSize",
  };
  return table[key] ?? null;
}

export type TrendShape = "constant" | "linear" | "linear and constant" | "quadratic";
export type Method = "power" | "confidence interval";
export type TestVariant = "chi" | "hotelling N-q-1" | "hotelling N-1" | "hotelling N";
export type ResultMode = "sample_size" | "power" | "coverage";

/** Everything the eight form panels capture. */
export interface FormState {
  // a) decision time points
  days: number;
  occPerDay: number;
  // b) intervention levels
  levelsInitial: number;
  levelsAdded: number;
  additionDay: number; // used when levelsAdded > 0
  // c) randomization probability (total mass over the active levels)
  interventionProb: number;
  // d) expected availability
  tauShape: TrendShape;
  tauMean: number;
  tauInitial: number;
  tauPeakDay: number;
  // e) calculation method
  method: Method;
  // f) test statistic reference
  test: TestVariant;
  // g) proximal effect
  betaShape: TrendShape;
  betaInitial: number;
  betaMean: number;
  betaRampDays: number; // days from a level's start until its effect peaks
  // h) result
  resultMode: ResultMode;
  sampleSize: number; // used when resultMode is power or coverage
  power: number;
  sigLevel: number;
}

/** The run-config document shared with the service (R-style key names). */
export interface RunConfig {
  days: number;
  occ_per_day: number;
  aa_day_aa: number[];
  control_prob: number;
  beta_shape: TrendShape;
  beta_mean: number;
  beta_initial?: number;
  beta_quadratic_max?: number[];
  tau_shape: TrendShape;
  tau_mean: number;
  tau_initial?: number;
  tau_quadratic_max?: number;
  sigma: number;
  rho: number;
  pow: number;
  sigLev: number;
  method: Method;
  test: TestVariant;
  result: "choice_sample_size" | "choice_power" | "choice_coverage_probability";
  SS?: number;
}

export interface QueryResponse {
  config: Record<string, unknown>;
  result: { N?: number; P?: number; CP?: number };
  message: string;
  engine_version: string;
}

export interface CurvePoint {
  n: number;
  value: number;
}

export interface CurveResponse {
  metric: "power" | "coverage";
  points: CurvePoint[];
  engine_version: string;
}

export interface ServiceError {
  error: string;
  path?: string;
}

import { describe, expect, it } from "vitest";

import demoConfig from "../fixtures/demo-config.json";
import {
  DEFAULT_FORM,
  configToForm,
  formToConfig,
  isValid,
  parseShareLink,
  shareLink,
  validateForm,
} from "../src/state.js";
import type { FormState, RunConfig } from "../src/types.js";

const BASE = "https://calc.example/app/";

describe("form to config mapping", () => {
  it("maps the default form to the vendored demo fixture", () => {
    expect(formToConfig(DEFAULT_FORM)).toEqual(demoConfig);
  });

  it("is a bijection on valid states", () => {
    const variants: Partial<FormState>[] = [
      {},
      { levelsAdded: 0, levelsInitial: 3 },
      { betaShape: "constant" },
      { betaShape: "linear" },
      { betaShape: "quadratic", betaRampDays: 20 },
      { tauShape: "linear", tauMean: 0.7, tauInitial: 0.5 },
      { tauShape: "quadratic", tauMean: 0.7, tauInitial: 0.5, tauPeakDay: 40 },
      { method: "confidence interval", resultMode: "coverage", sampleSize: 25 },
      { resultMode: "power", sampleSize: 17 },
      { days: 45, levelsInitial: 3, levelsAdded: 0, interventionProb: 0.75, test: "chi" },
    ];
    for (const patch of variants) {
      const form: FormState = { ...DEFAULT_FORM, ...patch };
      expect(isValid(form), JSON.stringify(patch)).toBe(true);
      const roundTripped = configToForm(formToConfig(form));
      expect(formToConfig(roundTripped)).toEqual(formToConfig(form));
      // Fields that feed the request survive exactly; hidden fields may
      // fall back to defaults, which map to the same request.
      expect(roundTripped.days).toBe(form.days);
      expect(roundTripped.interventionProb).toBeCloseTo(form.interventionProb, 12);
      expect(roundTripped.test).toBe(form.test);
      expect(roundTripped.resultMode).toBe(form.resultMode);
    }
  });

  it("emits per-level peak days offset by each level's start", () => {
    const config = formToConfig({ ...DEFAULT_FORM, betaRampDays: 28 });
    expect(config.beta_quadratic_max).toEqual([28, 28, 118, 118]);
  });

  it("never computes statistics client-side (no result fields in the mapping)", () => {
    const config = formToConfig(DEFAULT_FORM) as unknown as Record<string, unknown>;
    expect(Object.keys(config)).not.toContain("N");
    expect(Object.keys(config)).not.toContain("P");
  });
});

describe("validation", () => {
  it("accepts the default form", () => {
    expect(validateForm(DEFAULT_FORM)).toEqual({});
  });

  it("rejects probabilities that crowd out the control level", () => {
    const errors = validateForm({ ...DEFAULT_FORM, interventionProb: 1.1 });
    expect(errors.interventionProb).toMatch(/sum to 1.10/);
  });

  it("rejects bad addition days", () => {
    expect(validateForm({ ...DEFAULT_FORM, additionDay: 1 }).additionDay).toBeTruthy();
    expect(validateForm({ ...DEFAULT_FORM, additionDay: 400 }).additionDay).toBeTruthy();
    expect(validateForm({ ...DEFAULT_FORM, levelsAdded: 0, additionDay: 400 })).toEqual({});
  });

  it("requires N when evaluating power or coverage", () => {
    const errors = validateForm({ ...DEFAULT_FORM, resultMode: "power", sampleSize: NaN });
    expect(errors.sampleSize).toBeTruthy();
  });

  it("ties the result mode to the method", () => {
    expect(validateForm({ ...DEFAULT_FORM, resultMode: "coverage" }).resultMode).toBeTruthy();
    expect(
      validateForm({
        ...DEFAULT_FORM,
        method: "confidence interval",
        resultMode: "coverage",
        sampleSize: 20,
      }),
    ).toEqual({});
  });

  it("requires a ramp of at least two days for peaked shapes", () => {
    expect(validateForm({ ...DEFAULT_FORM, betaRampDays: 1 }).betaRampDays).toBeTruthy();
    expect(validateForm({ ...DEFAULT_FORM, betaShape: "linear", betaRampDays: 1 })).toEqual({});
  });
});

describe("share links", () => {
  it("round-trips an edited form exactly", () => {
    const form: FormState = {
      ...DEFAULT_FORM,
      days: 84,
      interventionProb: 0.45,
      betaMean: 0.13,
      test: "chi",
      resultMode: "power",
      sampleSize: 23,
    };
    const url = shareLink(form, BASE);
    expect(parseShareLink(url)).toEqual(form);
  });

  it("maps the default form to the bare app url", () => {
    expect(shareLink(DEFAULT_FORM, BASE)).toBe(BASE);
    expect(shareLink(DEFAULT_FORM, `${BASE}#s=old`)).toBe(BASE);
    expect(parseShareLink(BASE)).toBeNull();
  });

  it("surfaces tampered values through normal validation", () => {
    const url = shareLink({ ...DEFAULT_FORM, days: 84 }, BASE);
    const tampered = url.replace("84", "-3");
    const form = parseShareLink(tampered);
    expect(form).not.toBeNull();
    expect(validateForm(form as FormState).days).toBeTruthy();
  });

  it("ignores unknown keys in the fragment", () => {
    const payload = encodeURIComponent(JSON.stringify({ days: 84, nonsense: true }));
    const form = parseShareLink(`${BASE}#s=${payload}`) as FormState;
    expect(form.days).toBe(84);
    expect("nonsense" in form).toBe(false);
    expect(form.test).toBe(DEFAULT_FORM.test);
  });

  it("treats undecodable fragments as no state at all", () => {
    expect(parseShareLink(`${BASE}#s=%7Bnot-json`)).toBeNull();
    expect(parseShareLink(`${BASE}#other=1`)).toBeNull();
  });
});

describe("config round trip through the service schema", () => {
  it("keeps every request key the python side understands", () => {
    const config: RunConfig = formToConfig(DEFAULT_FORM);
    const allowed = new Set([
      "days", "occ_per_day", "aa_day_aa", "prob", "control_prob",
      "beta_shape", "beta_mean", "beta_initial", "beta_quadratic_max",
      "tau_shape", "tau_mean", "tau_initial", "tau_quadratic_max",
      "sigma", "rho", "pow", "sigLev", "method", "test", "result", "SS",
      "q", "replicates", "seed",
    ]);
    for (const key of Object.keys(config)) {
      expect(allowed.has(key), key).toBe(true);
    }
  });
});

/**
 * Client-side form validation mirroring the service's session invariants, so
 * obviously invalid configurations are flagged before any request is made.
 * The service remains the authority; these checks only mirror its rules.
 */

import type { SessionConfig } from "./api.js";

export interface FormState {
  direction: "upper" | "lower" | "point";
  mu: string;
  alpha: string;
  tau: string;
  policyKind: "fixed" | "grid";
  c: string;
  gridLo: string;
  gridHi: string;
  trackBounds: boolean;
  populationCsv: string;
  withReplacement: boolean;
}

export const AUDIT_PRESET: FormState = {
  direction: "lower",
  mu: "0.05",
  alpha: "0.05",
  tau: "1",
  policyKind: "grid",
  c: "0.6",
  gridLo: "0",
  gridHi: "1",
  trackBounds: true,
  populationCsv: "",
  withReplacement: true,
};

export interface ValidationResult {
  errors: string[];
  config?: SessionConfig;
}

function num(raw: string, name: string, errors: string[]): number {
  const v = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(v)) {
    errors.push(`${name} must be a number`);
    return NaN;
  }
  return v;
}

export function validateForm(form: FormState): ValidationResult {
  const errors: string[] = [];
  const mu = num(form.mu, "mu", errors);
  const alpha = num(form.alpha, "alpha", errors);

  if (Number.isFinite(mu) && mu <= 0) errors.push("mu must be > 0");
  if (Number.isFinite(alpha) && (alpha <= 0 || alpha >= 1)) {
    errors.push("alpha must be strictly between 0 and 1");
  }

  let tau: number | null = null;
  const needsTau = form.direction !== "upper";
  if (form.tau.trim() !== "") {
    tau = num(form.tau, "tau", errors);
    if (Number.isFinite(tau as number) && Number.isFinite(mu) && (tau as number) <= mu) {
      errors.push("tau must exceed mu");
    }
  } else if (needsTau) {
    errors.push(`${form.direction} null requires the support bound tau`);
  }

  let policy: SessionConfig["policy"];
  if (form.policyKind === "fixed") {
    const c = num(form.c, "c", errors);
    if (Number.isFinite(c) && (c < 0 || c > 1)) errors.push("c must be in [0, 1]");
    policy = { kind: "fixed", c };
  } else {
    const lo = num(form.gridLo, "grid lower end", errors);
    const hi = num(form.gridHi, "grid upper end", errors);
    if (Number.isFinite(lo) && Number.isFinite(hi)) {
      if (lo < 0 || hi > 1) errors.push("grid must lie within [0, 1]");
      if (lo >= hi) errors.push("grid lower end must be below the upper end");
    }
    policy = { kind: "grid", lo, hi };
  }

  if (form.populationCsv.trim() !== "") {
    const header = form.populationCsv.trim().split("\n", 1)[0];
    const cols = header.split(",").map((s) => s.trim());
    if (cols[0] !== "id" || cols[1] !== "book_value") {
      errors.push("population CSV must start with header id,book_value[,audited_value]");
    }
    if (!form.withReplacement && form.policyKind !== "fixed") {
      errors.push("without-replacement sampling requires a fixed bet size");
    }
  }

  if (errors.length > 0) return { errors };
  return {
    errors: [],
    config: {
      direction: form.direction,
      mu,
      alpha,
      tau,
      policy,
      track_bounds: form.trackBounds,
      population_csv: form.populationCsv.trim() === "" ? null : form.populationCsv,
      with_replacement: form.withReplacement,
    },
  };
}

/** Observed taints/values must lie in [0, tau] (tau defaults to 1). */
export function validateObservation(raw: string, tau: number | null): string | null {
  const v = Number(raw);
  if (raw.trim() === "" || !Number.isFinite(v)) return "enter a number";
  if (v < 0) return "observation must be >= 0";
  const bound = tau ?? 1;
  if (v > bound) return `observation must be <= ${bound}`;
  return null;
}

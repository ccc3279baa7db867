// Display formatting. This is the only transformation the UI applies to
// API numbers, and parity tests compare these exact strings against the
// CLI's output on the same state.

export function pct(value: number): string {
  return value.toFixed(1);
}

export function tail(value: number): string {
  return value.toFixed(4);
}

export function rate(value: number | null): string {
  return value === null ? "—" : value.toFixed(3);
}

export function exposure(value: number | null): string {
  return value === null ? "—" : value.toFixed(0);
}

export function months(value: number): string {
  return value.toFixed(1);
}

export function doseLabel(dose: number | null): string {
  return dose === null ? "—" : String(dose);
}

export function eliminationBadges(row: {
  eliminated_safety: boolean;
  eliminated_efficacy: boolean;
  eliminated_pk: boolean;
}): string {
  const badges: string[] = [];
  if (row.eliminated_safety) badges.push("safety");
  if (row.eliminated_efficacy) badges.push("efficacy");
  if (row.eliminated_pk) badges.push("pk");
  return badges.join("+");
}

// The decision panel's one-line account of what fired, built only from
// API-provided diagnostics.
export function ruleSummary(decision: {
  action: string;
  dose: number | null;
  rule: string;
  diagnostics: Record<string, unknown>;
}): string {
  if (decision.action === "suspend") {
    const frac = decision.diagnostics["pending_fraction"];
    const shown = typeof frac === "number" ? ` (${pct(100 * frac)}% pending)` : "";
    return `accrual suspended${shown}`;
  }
  if (decision.action === "terminate_early") {
    return `terminate: ${decision.rule}`;
  }
  const admissible = decision.diagnostics["admissible"];
  const inSet = Array.isArray(admissible) && admissible.length ? ` from {${admissible.join(", ")}}` : "";
  return `treat at dose ${decision.dose}${inSet} [${decision.rule}]`;
}

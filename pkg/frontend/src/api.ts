// Typed client for the conduct service. All statistics arrive from the API;
// the UI never computes any.

export interface DesignParamsIn {
  kind: string;
  num_doses?: number;
  max_tox_prob?: number;
  min_eff_prob?: number;
  utilities?: number[];
  cohort_size?: number;
  max_patients?: number;
  start_dose?: number;
  tox_window_days?: number;
  eff_window_days?: number;
  pk?: { target?: number; ineffective?: number; prior_sd?: number };
}

export interface Decision {
  action: "treat_at_dose" | "suspend" | "terminate_early";
  dose: number | null;
  rule: string;
  diagnostics: Record<string, unknown>;
}

export interface DoseRow {
  dose: number;
  n: number;
  n_tox: number;
  n_eff: number;
  tox_rate: number | null;
  eff_rate: number | null;
  pk_mean: number | null;
  desirability: number;
  eliminated_safety: boolean;
  eliminated_efficacy: boolean;
  eliminated_pk: boolean;
}

export interface TrialView {
  id: string;
  status: string;
  design: Record<string, unknown>;
  derived: { boundaries: number[]; benchmark: number; pk_cutoff: number };
  enrolled: number;
  current_dose: number;
  time_days: number;
  doses: DoseRow[];
  decision_log: Array<Record<string, unknown>>;
  recommendation: Decision;
}

export interface PatientIn {
  tox: boolean | null;
  eff: boolean | null;
  pk_value: number;
  enroll_day?: number;
}

export interface ObdResult {
  selected: number | null;
  mtd: number | null;
  pk_floor: number | null;
  iso_tox: Record<string, number>;
  iso_pk: Record<string, number>;
  utilities: Record<string, number>;
  candidates: number[];
  reason: string;
}

export interface OcRow {
  design: string;
  scenario: string;
  reps: number;
  seed: number;
  selection_pct: number[];
  early_termination_pct: number;
  mean_patients: number[];
  mean_duration_months: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class Client {
  constructor(private base: string = "") {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await res.json().catch(() => ({}));
    if (!res.ok) {
      const detail = (payload as { detail?: unknown }).detail;
      throw new ApiError(res.status, typeof detail === "string" ? detail : JSON.stringify(detail ?? payload));
    }
    return payload as T;
  }

  createTrial(design: DesignParamsIn): Promise<TrialView> {
    return this.call("POST", "/api/v1/trials", { design });
  }

  getTrial(id: string): Promise<TrialView> {
    return this.call("GET", `/api/v1/trials/${id}`);
  }

  submitCohort(
    id: string,
    patients: PatientIn[],
    timeDays?: number,
  ): Promise<{ id: string; status: string; decision: Decision; doses: DoseRow[]; enrolled: number }> {
    return this.call("POST", `/api/v1/trials/${id}/cohorts`, {
      patients,
      time_days: timeDays ?? null,
    });
  }

  recommendation(id: string, atTime?: number): Promise<{ decision: Decision }> {
    const query = atTime === undefined ? "" : `?at_time=${atTime}`;
    return this.call("GET", `/api/v1/trials/${id}/recommendation${query}`);
  }

  finalize(id: string, force = false, atTime?: number): Promise<{ status: string; result: ObdResult }> {
    return this.call("POST", `/api/v1/trials/${id}/finalize`, {
      force,
      at_time: atTime ?? null,
    });
  }

  createSimulation(config: Record<string, unknown>): Promise<{ id: string; progress: number }> {
    return this.call("POST", "/api/v1/simulations", { config });
  }

  getSimulation(id: string): Promise<{ progress: number; result?: { results: OcRow[] }; error?: string }> {
    return this.call("GET", `/api/v1/simulations/${id}`);
  }

  scenarios(): Promise<{ scenarios: Array<Record<string, unknown>> }> {
    return this.call("GET", "/api/v1/scenarios");
  }
}

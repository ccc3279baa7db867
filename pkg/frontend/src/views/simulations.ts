// Simulation dashboard: submit a replication job, poll progress, render the
// operating-characteristics table in the usual selection/allocation layout.

import { Client, OcRow, ApiError } from "../api.js";
import { clear, el, table } from "../dom.js";
import { months, pct } from "../format.js";

export function ocTable(rows: OcRow[]): HTMLTableElement {
  const doses = rows.length ? rows[0].selection_pct.length : 6;
  const headers = [
    "design", "scenario",
    ...Array.from({ length: doses }, (_, d) => `sel ${d + 1}`),
    "ET",
    ...Array.from({ length: doses }, (_, d) => `n ${d + 1}`),
    "months",
  ];
  return table(
    headers,
    rows.map((r) => [
      r.design,
      r.scenario,
      ...r.selection_pct.map(pct),
      pct(r.early_termination_pct),
      ...r.mean_patients.map(pct),
      months(r.mean_duration_months),
    ]),
    "grid oc-table",
  );
}

export function renderSimulations(root: HTMLElement, client: Client, pollMs = 500): void {
  clear(root);
  const form = el("form", { class: "sim" });
  const scenario = el("input", { value: "1", size: "4", "data-role": "scenario" });
  const designs = el("input", { value: "all", size: "30", "data-role": "designs" });
  const reps = el("input", { value: "2000", size: "8", "data-role": "reps" });
  const seed = el("input", { value: "1729", size: "8", "data-role": "seed" });
  const error = el("p", { class: "error", role: "alert" });
  form.append(
    el("label", {}, ["scenario ", scenario]),
    el("label", {}, ["designs ", designs]),
    el("label", {}, ["replications ", reps]),
    el("label", {}, ["seed ", seed]),
    error,
    el("button", { type: "submit" }, ["Run study"]),
  );
  const progress = el("progress", { max: "1", value: "0", "data-role": "job-progress" });
  const status = el("span", { "data-role": "job-status" }, ["idle"]);
  const results = el("div", { "data-role": "results" });
  root.append(el("h2", {}, ["Simulation studies"]), form,
              el("p", {}, [progress, " ", status]), results);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    error.textContent = "";
    const nreps = parseInt(reps.value, 10);
    if (!(nreps >= 1)) {
      error.textContent = "replications must be at least 1";
      return;
    }
    const config = {
      design: designs.value.trim(),
      scenario: Number.isNaN(parseInt(scenario.value, 10)) ? scenario.value : parseInt(scenario.value, 10),
      reps: nreps,
      seed: parseInt(seed.value, 10) || 0,
    };
    clear(results);
    try {
      const job = await client.createSimulation(config);
      status.textContent = "running";
      await poll(job.id);
    } catch (exc) {
      status.textContent = "failed";
      error.textContent = exc instanceof ApiError ? exc.message : String(exc);
    }
  });

  async function poll(jobId: string): Promise<void> {
    for (;;) {
      const body = await client.getSimulation(jobId);
      progress.value = body.progress;
      if (body.error) {
        status.textContent = `failed: ${body.error}`;
        return;
      }
      if (body.progress >= 1 && body.result) {
        status.textContent = "done";
        clear(results);
        results.append(ocTable(body.result.results));
        return;
      }
      // no stale numbers while running: the table appears only once complete
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }
}

// Live trial view: per-dose evidence table, cohort entry, decision panel
// with the engine's rationale, and the finalization result.

import { Client, Decision, DoseRow, TrialView, ApiError } from "../api.js";
import { clear, el, table } from "../dom.js";
import { doseLabel, eliminationBadges, exposure, rate, ruleSummary, tail } from "../format.js";

function doseTable(rows: DoseRow[]): HTMLTableElement {
  return table(
    ["dose", "n", "DLTs", "responses", "DLT rate", "response rate", "mean exposure",
     "desirability", "eliminated"],
    rows.map((r) => [
      String(r.dose),
      String(r.n),
      String(r.n_tox),
      String(r.n_eff),
      rate(r.tox_rate),
      rate(r.eff_rate),
      exposure(r.pk_mean),
      tail(r.desirability),
      eliminationBadges(r),
    ]),
    "grid dose-table",
  );
}

function decisionPanel(decision: Decision): HTMLElement {
  const panel = el("div", { class: `decision ${decision.action}` });
  panel.append(el("p", { class: "headline", "data-role": "decision-headline" }, [ruleSummary(decision)]));
  const tails = decision.diagnostics["desirability"] as Record<string, number> | undefined;
  if (tails && Object.keys(tails).length) {
    const entries = Object.entries(tails).sort(([a], [b]) => Number(a) - Number(b));
    panel.append(
      el("p", { "data-role": "decision-tails" }, [
        "admissible desirability: " + entries.map(([d, v]) => `d${d}=${tail(v)}`).join("  "),
      ]),
    );
  }
  const eliminated = decision.diagnostics["eliminated"] as Record<string, string[]> | undefined;
  if (eliminated && Object.keys(eliminated).length) {
    const entries = Object.entries(eliminated).sort(([a], [b]) => Number(a) - Number(b));
    panel.append(
      el("p", { "data-role": "decision-eliminated" }, [
        "eliminated: " + entries.map(([d, why]) => `d${d}(${why.join("+")})`).join("  "),
      ]),
    );
  }
  return panel;
}

function cohortForm(view: TrialView, onSubmit: (patients: Array<Record<string, unknown>>, timeDays?: number) => void): HTMLElement {
  const tite = String(view.design["kind"]).startsWith("TITE");
  const size = Number(view.design["cohort_size"]);
  const form = el("form", { class: "cohort" });
  const rows: Array<{ tox: HTMLSelectElement; eff: HTMLSelectElement; pk: HTMLInputElement; enroll: HTMLInputElement }> = [];
  const outcomeOptions = tite ? ["no", "yes", "pending"] : ["no", "yes"];
  for (let i = 0; i < size; i++) {
    const tox = el("select", { "data-role": `tox-${i}` });
    const eff = el("select", { "data-role": `eff-${i}` });
    for (const opt of outcomeOptions) {
      tox.append(el("option", { value: opt }, [opt]));
      eff.append(el("option", { value: opt }, [opt]));
    }
    const pk = el("input", { value: "", placeholder: "exposure", "data-role": `pk-${i}` });
    const enroll = el("input", { value: "0", size: "6", "data-role": `enroll-${i}` });
    rows.push({ tox, eff, pk, enroll });
    const line = el("div", { class: "patient" }, [
      `patient ${i + 1}: `, "DLT ", tox, " response ", eff, " exposure ", pk,
    ]);
    if (tite) line.append(" enrolled on day ", enroll);
    form.append(line);
  }
  let timeInput: HTMLInputElement | null = null;
  if (tite) {
    timeInput = el("input", { value: "0", size: "6", "data-role": "decision-time" });
    form.append(el("div", {}, ["decision time (day) ", timeInput]));
  }
  const error = el("p", { class: "error", role: "alert" });
  form.append(error, el("button", { type: "submit" }, [`Submit cohort of ${size}`]));
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    error.textContent = "";
    const patients = [];
    for (const row of rows) {
      const pk = parseFloat(row.pk.value);
      if (Number.isNaN(pk) || pk <= 0) {
        error.textContent = "exposure values must be positive numbers";
        return;
      }
      const decode = (v: string) => (v === "pending" ? null : v === "yes");
      patients.push({
        tox: decode(row.tox.value),
        eff: decode(row.eff.value),
        pk_value: pk,
        enroll_day: tite ? parseFloat(row.enroll.value) || 0 : undefined,
      });
    }
    onSubmit(patients, timeInput ? parseFloat(timeInput.value) || 0 : undefined);
  });
  return form;
}

export function renderTrial(root: HTMLElement, client: Client, id: string): Promise<void> {
  return refresh();

  async function refresh(): Promise<void> {
    const view = await client.getTrial(id);
    clear(root);
    root.append(
      el("h2", {}, [`Trial ${view.id} — ${String(view.design["kind"])}`]),
      el("p", { "data-role": "status" }, [
        `status: ${view.status}; enrolled ${view.enrolled}/${String(view.design["max_patients"])}; ` +
        `current dose ${view.current_dose}`,
      ]),
      doseTable(view.doses),
      el("h3", {}, ["Latest recommendation"]),
      decisionPanel(view.recommendation),
    );

    if (view.status === "suspended") {
      root.append(el("p", { class: "banner" }, [
        "accrual suspended — query the recommendation later, once more outcomes are ascertained",
      ]));
    }

    if (view.status === "accruing" || view.status === "suspended") {
      root.append(el("h3", {}, ["Enter a cohort"]));
      root.append(
        cohortForm(view, async (patients, timeDays) => {
          try {
            await client.submitCohort(id, patients as never, timeDays);
            await refresh();
          } catch (exc) {
            root.append(el("p", { class: "error", role: "alert" }, [
              exc instanceof ApiError ? `rejected: ${exc.message}` : String(exc),
            ]));
          }
        }),
      );
    }

    const finalize = el("button", { "data-role": "finalize" }, ["Finalize trial"]);
    finalize.addEventListener("click", async () => {
      try {
        const out = await client.finalize(id);
        const result = out.result;
        const summary = el("div", { class: "finalize" });
        summary.append(
          el("p", { "data-role": "obd" }, [`selected dose: ${doseLabel(result.selected)}`]),
          el("p", { "data-role": "obd-detail" }, [
            `MTD ${doseLabel(result.mtd)}; exposure floor ${doseLabel(result.pk_floor)}; ` +
            `candidates {${result.candidates.join(", ")}}`,
          ]),
        );
        const utilities = Object.entries(result.utilities).sort(([a], [b]) => Number(a) - Number(b));
        if (utilities.length) {
          summary.append(el("p", { "data-role": "obd-utilities" }, [
            "posterior mean utilities: " + utilities.map(([d, v]) => `d${d}=${v.toFixed(1)}`).join("  "),
          ]));
        }
        root.append(summary);
      } catch (exc) {
        root.append(el("p", { class: "error", role: "alert" }, [
          exc instanceof ApiError ? `cannot finalize: ${exc.message}` : String(exc),
        ]));
      }
    });
    root.append(finalize);

    if (view.decision_log.length) {
      root.append(el("h3", {}, ["Decision history"]));
      const rows = view.decision_log.map((entry, i) => {
        const decision = entry["decision"] as Decision | undefined;
        const what = decision
          ? ruleSummary(decision)
          : `finalized: dose ${doseLabel((entry["finalize"] as { selected: number | null }).selected)}`;
        return [String(i + 1), `day ${Number(entry["time_days"]).toFixed(1)}`, what];
      });
      root.append(table(["step", "when", "decision"], rows, "grid history"));
    }
  }
}

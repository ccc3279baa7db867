// Design configuration wizard: collect parameters, create the trial, and
// show the derived constants the API returns for confirmation.

import { Client, DesignParamsIn, ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import { tail } from "../format.js";

const KINDS = ["BOIN12", "PKBOIN-12", "TITE-BOIN12", "TITE-PKBOIN-12"];

interface Field {
  name: string;
  label: string;
  value: string;
  parse: (raw: string) => number | number[];
}

const FIELDS: Field[] = [
  { name: "num_doses", label: "Number of doses", value: "6", parse: (v) => parseInt(v, 10) },
  { name: "max_tox_prob", label: "Max acceptable DLT probability", value: "0.35", parse: parseFloat },
  { name: "min_eff_prob", label: "Min acceptable response probability", value: "0.25", parse: parseFloat },
  {
    name: "utilities", label: "Utilities (4 scores)", value: "100, 40, 60, 0",
    parse: (v) => v.split(",").map((x) => parseFloat(x.trim())),
  },
  { name: "cohort_size", label: "Cohort size", value: "3", parse: (v) => parseInt(v, 10) },
  { name: "max_patients", label: "Maximum patients", value: "45", parse: (v) => parseInt(v, 10) },
  { name: "start_dose", label: "Starting dose", value: "1", parse: (v) => parseInt(v, 10) },
  { name: "pk_target", label: "Target exposure", value: "6000", parse: parseFloat },
  { name: "tox_window_days", label: "Toxicity window (days)", value: "30", parse: parseFloat },
  { name: "eff_window_days", label: "Efficacy window (days)", value: "60", parse: parseFloat },
];

export function renderWizard(
  root: HTMLElement,
  client: Client,
  onCreated: (id: string) => void,
): void {
  clear(root);
  const form = el("form", { class: "wizard" });
  const kindSelect = el("select", { name: "kind" });
  for (const kind of KINDS) {
    kindSelect.append(el("option", { value: kind }, [kind]));
  }
  kindSelect.value = "PKBOIN-12";
  form.append(el("label", {}, ["Design", kindSelect]));

  const inputs = new Map<string, HTMLInputElement>();
  for (const field of FIELDS) {
    const input = el("input", { name: field.name, value: field.value });
    inputs.set(field.name, input);
    form.append(el("label", {}, [field.label, input]));
  }

  const error = el("p", { class: "error", role: "alert" });
  const preview = el("div", { class: "preview" });
  const submit = el("button", { type: "submit" }, ["Create trial"]);
  form.append(error, submit);
  root.append(el("h2", {}, ["Configure a trial"]), form, preview);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    error.textContent = "";
    const design: DesignParamsIn = { kind: kindSelect.value };
    try {
      for (const field of FIELDS) {
        const raw = inputs.get(field.name)!.value;
        const parsed = field.parse(raw);
        const bad =
          typeof parsed === "number" ? Number.isNaN(parsed) : parsed.some((x) => Number.isNaN(x));
        if (bad) throw new Error(`${field.label}: not a number`);
        if (field.name === "pk_target") design.pk = { target: parsed as number };
        else (design as unknown as Record<string, unknown>)[field.name] = parsed;
      }
      const probFields: Array<keyof DesignParamsIn> = ["max_tox_prob", "min_eff_prob"];
      for (const name of probFields) {
        const v = design[name] as number;
        if (!(v > 0 && v < 1)) throw new Error(`${name} must lie strictly between 0 and 1`);
      }
    } catch (exc) {
      error.textContent = String(exc instanceof Error ? exc.message : exc);
      return;
    }
    try {
      const view = await client.createTrial(design);
      clear(preview);
      preview.append(
        el("h3", {}, ["Derived constants"]),
        el("p", {}, [
          `interval boundaries ${tail(view.derived.boundaries[0])} / ${tail(view.derived.boundaries[1])}`,
        ]),
        el("p", {}, [`utility benchmark ${view.derived.benchmark}`]),
        el("p", {}, [`exposure cutoff ${view.derived.pk_cutoff}`]),
        el("p", {}, [`session ${view.id}; first cohort at dose ${view.recommendation.dose}`]),
      );
      onCreated(view.id);
    } catch (exc) {
      error.textContent = exc instanceof ApiError ? exc.message : String(exc);
    }
  });
}

// Scripted conduct session: create a PKBOIN-12 trial through the wizard,
// submit the 15 recorded cohorts, finalize, and require the displayed dose,
// desirability tails, and eliminations to equal the recorded
// `decide`/`finalize` CLI outputs on the same fixture, string for string
// after the documented display formatting.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client, Decision, ObdResult } from "../src/api.js";
import { doseLabel, ruleSummary, tail } from "../src/format.js";
import { Service, TESTS_DIR, startService, text, waitFor } from "./helpers.js";

interface FixtureStep {
  dose: number;
  cohort: Array<{ tox: boolean; eff: boolean; pk_value: number }>;
  decide: string;
}

interface Fixture {
  design: Record<string, unknown>;
  steps: FixtureStep[];
  finalize: string;
}

const fixture: Fixture = JSON.parse(
  readFileSync(join(TESTS_DIR, "fixtures", "conduct_fixture.json"), "utf-8"),
);

let service: Service;
let unmount: () => void;

beforeAll(async () => {
  service = await startService();
  window.__pkboin12_test = true;
  const { mountApp } = await import("../src/main.js");
  const root = document.createElement("div");
  document.body.append(root);
  unmount = mountApp(root, new Client(service.base));
});

afterAll(() => {
  unmount?.();
  service?.stop();
});

function expectedDecisionStrings(decision: Decision) {
  const headline = ruleSummary(decision);
  const tails = decision.diagnostics["desirability"] as Record<string, number> | undefined;
  const tailsLine = tails && Object.keys(tails).length
    ? "admissible desirability: " +
      Object.entries(tails)
        .sort(([a], [b]) => Number(a) - Number(b))
        .map(([d, v]) => `d${d}=${tail(v)}`)
        .join("  ")
    : null;
  const eliminated = decision.diagnostics["eliminated"] as Record<string, string[]> | undefined;
  const eliminatedLine = eliminated && Object.keys(eliminated).length
    ? "eliminated: " +
      Object.entries(eliminated)
        .sort(([a], [b]) => Number(a) - Number(b))
        .map(([d, why]) => `d${d}(${why.join("+")})`)
        .join("  ")
    : null;
  return { headline, tailsLine, eliminatedLine };
}

describe("conduct session parity with the CLI", () => {
  it("walks the recorded fixture and displays exactly what the engine decided", async () => {
    // wizard: defaults are the fixture's design; just pick the design kind
    const form = await waitFor(() => document.querySelector("form.wizard"), "wizard form");
    (form.querySelector("select[name=kind]") as HTMLSelectElement).value = "PKBOIN-12";
    (form.querySelector("button") as HTMLButtonElement).click();
    await waitFor(() => window.location.hash.startsWith("#/trial/"), "trial route");
    await waitFor(() => document.querySelector("[data-role=status]"), "trial view");

    for (const [index, step] of fixture.steps.entries()) {
      // the view must be asking to treat at the fixture's dose
      await waitFor(
        () => text(document, "[data-role=status]").includes(`current dose ${step.dose}`),
        `status shows dose ${step.dose} at step ${index + 1}`,
      );
      const cohortForm = await waitFor(
        () => document.querySelector("form.cohort"),
        `cohort form at step ${index + 1}`,
      );
      step.cohort.forEach((patient, i) => {
        (cohortForm.querySelector(`[data-role=tox-${i}]`) as HTMLSelectElement).value =
          patient.tox ? "yes" : "no";
        (cohortForm.querySelector(`[data-role=eff-${i}]`) as HTMLSelectElement).value =
          patient.eff ? "yes" : "no";
        (cohortForm.querySelector(`[data-role=pk-${i}]`) as HTMLInputElement).value =
          String(patient.pk_value);
      });
      (cohortForm.querySelector("button[type=submit]") as HTMLButtonElement).click();
      const enrolled = 3 * (index + 1);
      await waitFor(
        () => text(document, "[data-role=status]").includes(`enrolled ${enrolled}/`),
        `refresh after cohort ${index + 1}`,
      );

      const decision: Decision = JSON.parse(step.decide);
      const expected = expectedDecisionStrings(decision);
      expect(text(document, "[data-role=decision-headline]")).toBe(expected.headline);
      if (expected.tailsLine) {
        expect(text(document, "[data-role=decision-tails]")).toBe(expected.tailsLine);
      }
      if (expected.eliminatedLine) {
        expect(text(document, "[data-role=decision-eliminated]")).toBe(expected.eliminatedLine);
      }
    }

    await waitFor(() => text(document, "[data-role=status]").includes("status: complete"),
                  "session complete");
    (document.querySelector("[data-role=finalize]") as HTMLButtonElement).click();
    await waitFor(() => document.querySelector("[data-role=obd]"), "finalize result");

    const result: ObdResult = JSON.parse(fixture.finalize);
    expect(text(document, "[data-role=obd]")).toBe(`selected dose: ${doseLabel(result.selected)}`);
    expect(text(document, "[data-role=obd-detail]")).toBe(
      `MTD ${doseLabel(result.mtd)}; exposure floor ${doseLabel(result.pk_floor)}; ` +
      `candidates {${result.candidates.join(", ")}}`,
    );
    const utilities = Object.entries(result.utilities).sort(([a], [b]) => Number(a) - Number(b));
    expect(text(document, "[data-role=obd-utilities]")).toBe(
      "posterior mean utilities: " + utilities.map(([d, v]) => `d${d}=${v.toFixed(1)}`).join("  "),
    );
  });
});

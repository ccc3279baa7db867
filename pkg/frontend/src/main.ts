// App shell: hash routing between the wizard, a trial session, and the
// simulation dashboard.

import { Client } from "./api.js";
import { clear, el } from "./dom.js";
import { renderSimulations } from "./views/simulations.js";
import { renderTrial } from "./views/trial.js";
import { renderWizard } from "./views/wizard.js";

export function mountApp(root: HTMLElement, client: Client = new Client()): () => void {
  const nav = el("nav", {}, []);
  const newTrial = el("a", { href: "#/wizard" }, ["New trial"]);
  const sims = el("a", { href: "#/simulations" }, ["Simulations"]);
  nav.append(newTrial, " | ", sims);
  const outlet = el("main", {});
  clear(root);
  root.append(el("h1", {}, ["Dose-finding conduct console"]), nav, outlet);

  const route = () => {
    const hash = window.location.hash || "#/wizard";
    const trialMatch = /^#\/trial\/(.+)$/.exec(hash);
    if (trialMatch) {
      renderTrial(outlet, client, trialMatch[1]).catch((exc) => {
        clear(outlet);
        outlet.append(el("p", { class: "error" }, [String(exc)]));
      });
    } else if (hash.startsWith("#/simulations")) {
      renderSimulations(outlet, client);
    } else {
      renderWizard(outlet, client, (id) => {
        window.location.hash = `#/trial/${id}`;
      });
    }
  };
  window.addEventListener("hashchange", route);
  route();
  return () => window.removeEventListener("hashchange", route);
}

declare global {
  interface Window {
    __pkboin12_test?: boolean;
  }
}

if (typeof document !== "undefined" && !window.__pkboin12_test) {
  const root = document.getElementById("app");
  if (root) mountApp(root);
}

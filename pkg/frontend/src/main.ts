/** Entry point: hash routing between the project, alignment and pair screens. */

import { ReviewApi } from "./api.js";
import { AlignView } from "./alignview.js";
import { clear, el } from "./dom.js";
import { PairView } from "./pairview.js";

const api = new ReviewApi();
const root = document.getElementById("app") as HTMLElement;
let activeAlign: AlignView | null = null;

async function renderProject(): Promise<void> {
  const project = await api.getProject();
  clear(root);
  root.append(el("h1", {}, ["nomina review"]));
  root.append(
    el("p", { class: "muted" }, [
      `pivot: ${project.pivot.lang} (${project.pivot.path}) — stages run: ${project.stages.join(", ")}`,
    ]),
  );
  const table = el("table", { class: "targets" });
  table.append(
    el("tr", {}, [
      el("th", {}, ["bitext"]),
      el("th", {}, ["lang"]),
      el("th", {}, ["revision"]),
      el("th", {}, ["state"]),
      el("th", {}, ["screens"]),
    ]),
  );
  for (const target of project.targets) {
    table.append(
      el("tr", {}, [
        el("td", {}, [el("strong", {}, [target.label])]),
        el("td", {}, [`${target.lang} (${target.script})`]),
        el("td", {}, [String(target.revision)]),
        el("td", {}, [target.approved ? "approved" : "open"]),
        el("td", {}, [
          el("a", { href: `#/align/${target.label}` }, ["alignment"]),
          " · ",
          el("a", { href: `#/pairs/${target.label}` }, ["name pairs"]),
        ]),
      ]),
    );
  }
  root.append(table);
}

async function route(): Promise<void> {
  activeAlign = null;
  const hash = window.location.hash;
  const alignMatch = hash.match(/^#\/align\/(.+)$/);
  const pairsMatch = hash.match(/^#\/pairs\/(.+)$/);
  try {
    if (alignMatch) {
      clear(root);
      root.append(backlink());
      const host = el("div");
      root.append(host);
      activeAlign = new AlignView(host, api, decodeURIComponent(alignMatch[1]));
      await activeAlign.load();
    } else if (pairsMatch) {
      clear(root);
      root.append(backlink());
      const host = el("div");
      root.append(host);
      await new PairView(host, api, decodeURIComponent(pairsMatch[1])).load();
    } else {
      await renderProject();
    }
  } catch (err) {
    clear(root);
    root.append(el("div", { class: "error" }, [String(err)]));
  }
}

function backlink(): HTMLElement {
  return el("p", {}, [el("a", { href: "#" }, ["← project"])]);
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("keydown", (event) => activeAlign?.onKey(event));
void route();

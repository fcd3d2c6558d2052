/** Browser bootstrap: mounts the controller onto the page and wires event
 * delegation for the data-action attributes the views emit. */

import { ApiClient } from "./api.js";
import { PlannerController, ViewName } from "./controller.js";
import type { MetricKey } from "./types.js";

const PANEL_IDS: Record<ViewName, string> = {
  clustering: "panel-clustering",
  map: "panel-map",
  ranking: "panel-ranking",
  radar: "panel-radar",
  timetable: "panel-timetable",
  histogram: "panel-histogram",
  notices: "panel-notices",
};

export function mount(baseUrl: string, root: Document = document): PlannerController {
  const api = new ApiClient(baseUrl);
  const controller = new PlannerController(api, (view, html) => {
    const el = root.getElementById(PANEL_IDS[view]);
    if (el) el.innerHTML = html;
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as Element | null)?.closest("[data-action]");
    if (!target) return;
    const action = target.getAttribute("data-action");
    const num = (attr: string) => Number(target.getAttribute(attr));
    if (action === "set-k") void controller.setK(num("data-k"));
    else if (action === "select-direction") void controller.selectDirection(num("data-direction"));
    else if (action === "override-stop") {
      const region = target.getAttribute("data-region");
      void controller.overrideStop(num("data-spot"), region === null ? undefined : Number(region));
    } else if (action === "add-candidate") {
      void controller.addCandidate(target.getAttribute("data-depart") ?? "");
    } else if (action === "dismiss-notice") {
      controller.dismissNotice(num("data-index"));
    }
  });

  const metricSelect = root.getElementById("metric-select") as HTMLSelectElement | null;
  metricSelect?.addEventListener("change", () => {
    void controller.selectMetric(metricSelect.value as MetricKey);
  });
  const regionsButton = root.getElementById("build-regions");
  regionsButton?.addEventListener("click", () => void controller.buildRegions(null));

  return controller;
}

declare global {
  interface Window {
    shuttleplanMount: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.shuttleplanMount = mount;
}

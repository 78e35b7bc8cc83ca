import { runColor } from "./table";
import type { ViewStore } from "../state";
import type { RunInfo } from "../types";

/** Checkbox list of runs; unchecking a run deactivates it everywhere. */
export class RunSelector {
  constructor(
    private readonly root: HTMLElement,
    private readonly store: ViewStore,
    private readonly runs: RunInfo[],
  ) {
    this.render();
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    const active = new Set(
      this.store.get().activeRuns ?? this.runs.map((r) => r.run_name),
    );
    for (const run of this.runs) {
      const label = doc.createElement("label");
      label.className = "run-toggle";
      const box = doc.createElement("input");
      box.type = "checkbox";
      box.checked = active.has(run.run_name);
      box.dataset.run = run.run_name;
      box.addEventListener("change", () => this.toggle(run.run_name, box.checked));
      const swatch = doc.createElement("span");
      swatch.className = "swatch";
      swatch.style.backgroundColor = runColor(run.color_index);
      const text = doc.createElement("span");
      text.textContent = `${run.run_name} (${run.total_points})`;
      label.append(box, swatch, text);
      this.root.append(label);
    }
  }

  toggle(runName: string, checked: boolean): void {
    const all = this.runs.map((r) => r.run_name);
    const active = new Set(this.store.get().activeRuns ?? all);
    if (checked) active.add(runName);
    else active.delete(runName);
    const next = all.filter((r) => active.has(r));
    this.store.update({
      activeRuns: next.length === all.length ? null : next,
      offset: 0,
    });
    this.render();
  }
}

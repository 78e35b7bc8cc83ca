import type { AnnotationRow, MetricCell } from "../types";

export interface TableCallbacks {
  onFlag(label: string, flagged: boolean): void;
  onHide(label: string, hidden: boolean): void;
}

export interface TableOptions {
  /** run -> color index, for the per-run value bars */
  runColors: Record<string, number>;
  /** selector keys to show as columns, in order */
  columns: string[];
}

const RUN_PALETTE = ["#4c78a8", "#f58518", "#54a24b", "#b279a2", "#e45756"];

export function runColor(colorIndex: number): string {
  return RUN_PALETTE[colorIndex % RUN_PALETTE.length];
}

export function formatValue(value: number | null): string {
  return value === null ? "—" : value.toFixed(3);
}

function barWidth(value: number): number {
  // metric domains are within [-1, 1] except PMI; clamp for display
  return Math.min(Math.abs(value), 1) * 50;
}

function renderCell(
  document: Document,
  cell: MetricCell | undefined,
  color: string,
): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "cell";
  if (!cell || cell.value === null) {
    wrap.classList.add("absent");
    wrap.textContent = "—";
    return wrap;
  }
  const bar = document.createElement("span");
  bar.className = "bar " + (cell.value < 0 ? "neg" : "pos");
  bar.style.width = `${barWidth(cell.value).toFixed(1)}px`;
  bar.style.backgroundColor = color;
  const text = document.createElement("span");
  text.className = "value";
  text.textContent = formatValue(cell.value);
  if (cell.joint_count !== undefined) {
    const dot = document.createElement("span");
    dot.className = "count";
    dot.textContent = `n=${cell.joint_count}`;
    wrap.append(bar, text, dot);
  } else {
    wrap.append(bar, text);
  }
  return wrap;
}

/** The triage table: one row per label, per-run bar cells, flag/hide buttons. */
export class AnnotationTable {
  constructor(
    private readonly root: HTMLElement,
    private readonly callbacks: TableCallbacks,
  ) {}

  render(rows: AnnotationRow[], options: TableOptions): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    const table = doc.createElement("table");
    table.className = "annotations";

    const head = doc.createElement("tr");
    for (const title of ["", "label", ...options.columns, ""]) {
      const th = doc.createElement("th");
      th.textContent = title;
      head.append(th);
    }
    table.append(head);

    for (const row of rows) {
      const tr = doc.createElement("tr");
      tr.dataset.label = row.label;
      if (row.flagged) tr.classList.add("flagged");
      if (row.hidden) tr.classList.add("hidden-label");

      const flagTd = doc.createElement("td");
      const flagButton = doc.createElement("button");
      flagButton.className = "flag-toggle";
      flagButton.textContent = row.flagged ? "★" : "☆";
      flagButton.title = row.flagged ? "unflag" : "flag";
      flagButton.addEventListener("click", () =>
        this.callbacks.onFlag(row.label, !row.flagged),
      );
      flagTd.append(flagButton);
      tr.append(flagTd);

      const labelTd = doc.createElement("td");
      labelTd.className = "label";
      labelTd.textContent = row.label;
      tr.append(labelTd);

      for (const key of options.columns) {
        const td = doc.createElement("td");
        for (const [run, cells] of Object.entries(row.cells)) {
          const cell = renderCell(
            doc,
            cells[key],
            runColor(options.runColors[run] ?? 0),
          );
          cell.dataset.run = run;
          td.append(cell);
        }
        tr.append(td);
      }

      const hideTd = doc.createElement("td");
      const hideButton = doc.createElement("button");
      hideButton.className = "hide-toggle";
      hideButton.textContent = row.hidden ? "unhide" : "hide";
      hideButton.addEventListener("click", () =>
        this.callbacks.onHide(row.label, !row.hidden),
      );
      hideTd.append(hideButton);
      tr.append(hideTd);

      table.append(tr);
    }
    this.root.append(table);
  }
}

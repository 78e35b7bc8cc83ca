import { runColor } from "./table";
import { brushToRange, violinGeometry, type ViolinGeometry } from "../violin";
import type { ViewStore } from "../state";
import type { DistributionResponse, Selector } from "../types";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 360;
const ROW_HEIGHT = 48;

/**
 * One violin row per run for a single selector; a horizontal brush over the
 * shared value axis writes the brushed interval into the selector's filter.
 */
export class ViolinPanel {
  private geometry: ViolinGeometry | null = null;
  private domain: [number, number] = [-1, 1];
  private brushStart: number | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ViewStore,
    private readonly selector: Selector,
    private readonly runColors: Record<string, number>,
  ) {}

  render(distribution: DistributionResponse): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    this.domain = [distribution.domain[0], distribution.domain[1]];
    const peak = Math.max(
      ...distribution.curves.flatMap((curve) => curve.densities),
      1e-12,
    );

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("width", String(WIDTH));
    svg.setAttribute(
      "height",
      String(ROW_HEIGHT * Math.max(distribution.curves.length, 1)),
    );
    svg.setAttribute("class", "violins");

    distribution.curves.forEach((curve, i) => {
      const geometry = violinGeometry(
        curve,
        this.domain,
        WIDTH,
        ROW_HEIGHT,
        peak,
      );
      this.geometry = geometry; // shared axis: any row maps x <-> value
      const group = doc.createElementNS(SVG_NS, "g");
      group.setAttribute("transform", `translate(0,${i * ROW_HEIGHT})`);
      const path = doc.createElementNS(SVG_NS, "path");
      path.setAttribute("d", geometry.path);
      path.setAttribute("fill", runColor(this.runColors[curve.run] ?? 0));
      path.setAttribute("fill-opacity", "0.6");
      path.setAttribute("data-run", curve.run);
      group.append(path);
      svg.append(group);
    });

    svg.addEventListener("pointerdown", (event) => {
      this.brushStart = (event as PointerEvent).offsetX;
    });
    svg.addEventListener("pointerup", (event) => {
      if (this.brushStart === null || this.geometry === null) return;
      const end = (event as PointerEvent).offsetX;
      if (Math.abs(end - this.brushStart) >= 3) {
        const [low, high] = brushToRange(
          this.geometry,
          this.brushStart,
          end,
          this.domain,
        );
        this.store.setFilterBounds(this.selector, low, high);
      }
      this.brushStart = null;
    });

    this.root.append(svg);
  }

  /** Apply a brush given in pixel coordinates; exposed for tests. */
  brush(x0: number, x1: number): void {
    if (this.geometry === null) return;
    const [low, high] = brushToRange(this.geometry, x0, x1, this.domain);
    this.store.setFilterBounds(this.selector, low, high);
  }
}

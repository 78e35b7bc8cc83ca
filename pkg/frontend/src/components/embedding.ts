import { intensitiesToRgba, labelsInLasso, type Point } from "../geometry";
import type { ViewStore } from "../state";
import type { ProjectionReady } from "../types";

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 360;

/**
 * Embedding scatter over the heatmap. Drag to lasso; the lassoed labels are
 * written to the view state's `embeddingSelection`, which the query engine
 * treats as an additional conjunctive constraint.
 */
export class EmbeddingPanel {
  private projection: ProjectionReady | null = null;
  private lasso: Point[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly store: ViewStore,
  ) {}

  render(projection: ProjectionReady): void {
    this.projection = projection;
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    const canvas = doc.createElement("canvas");
    canvas.width = projection.heatmap.width;
    canvas.height = projection.heatmap.height;
    canvas.className = "heatmap";
    canvas.style.width = `${SIZE}px`;
    canvas.style.height = `${SIZE}px`;
    const context = canvas.getContext?.("2d");
    if (context) {
      const pixels = intensitiesToRgba(
        projection.heatmap.intensities,
        projection.heatmap.width,
        projection.heatmap.height,
      );
      const image = new ImageData(
        pixels,
        projection.heatmap.width,
        projection.heatmap.height,
      );
      context.putImageData(image, 0, 0);
    }

    const svg = doc.createElementNS(SVG_NS, "svg");
    svg.setAttribute("width", String(SIZE));
    svg.setAttribute("height", String(SIZE));
    svg.setAttribute("class", "scatter");

    const selection = new Set(this.store.get().embeddingSelection ?? []);
    for (const [label, [x, y]] of Object.entries(projection.projection.points)) {
      const circle = doc.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", (x * SIZE).toFixed(1));
      // y grows upward in the projection, downward on screen
      circle.setAttribute("cy", ((1 - y) * SIZE).toFixed(1));
      circle.setAttribute("r", "3");
      circle.setAttribute("data-label", label);
      circle.setAttribute(
        "class",
        selection.size === 0 || selection.has(label)
          ? "dot"
          : "dot unselected",
      );
      const title = doc.createElementNS(SVG_NS, "title");
      title.textContent = `${label}: ${projection.values[label]?.toFixed(3) ?? "—"}`;
      circle.append(title);
      svg.append(circle);
    }

    svg.addEventListener("pointerdown", (event) => {
      this.lasso = [this.eventPoint(event as PointerEvent)];
    });
    svg.addEventListener("pointermove", (event) => {
      if (this.lasso.length) {
        this.lasso.push(this.eventPoint(event as PointerEvent));
      }
    });
    svg.addEventListener("pointerup", () => {
      if (this.lasso.length >= 3) this.applyLasso(this.lasso);
      this.lasso = [];
    });

    this.root.append(canvas, svg);
  }

  private eventPoint(event: PointerEvent): Point {
    return { x: event.offsetX / SIZE, y: 1 - event.offsetY / SIZE };
  }

  /** Apply a lasso polygon in unit-square coordinates; exposed for tests. */
  applyLasso(polygon: Point[]): void {
    if (!this.projection) return;
    const labels = labelsInLasso(this.projection.projection.points, polygon);
    this.store.update({
      embeddingSelection: labels.length ? labels : null,
      offset: 0,
    });
  }
}

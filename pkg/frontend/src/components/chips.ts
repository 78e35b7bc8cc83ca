import { selectorTitle, type ViewStore } from "../state";

/** Active-filter chips: each shows its selector and bounds, with a remove ×. */
export class FilterChips {
  constructor(
    private readonly root: HTMLElement,
    private readonly store: ViewStore,
  ) {
    store.subscribe(() => this.render());
    this.render();
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    for (const filter of this.store.get().filters) {
      const chip = doc.createElement("span");
      chip.className = "chip";
      const text = doc.createElement("span");
      text.className = "chip-text";
      text.textContent =
        `${selectorTitle(filter.selector)} ∈ ` +
        `[${filter.low.toFixed(3)}, ${filter.high.toFixed(3)}]`;
      const remove = doc.createElement("button");
      remove.className = "chip-remove";
      remove.textContent = "×";
      remove.addEventListener("click", () =>
        this.store.removeFilter(filter.selector),
      );
      chip.append(text, remove);
      this.root.append(chip);
    }
    if (this.store.get().embeddingSelection) {
      const chip = doc.createElement("span");
      chip.className = "chip lasso-chip";
      const text = doc.createElement("span");
      text.className = "chip-text";
      text.textContent = `lasso: ${this.store.get().embeddingSelection!.length} labels`;
      const remove = doc.createElement("button");
      remove.className = "chip-remove";
      remove.textContent = "×";
      remove.addEventListener("click", () =>
        this.store.update({ embeddingSelection: null, offset: 0 }),
      );
      chip.append(text, remove);
      this.root.append(chip);
    }
  }
}

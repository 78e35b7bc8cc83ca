import type { MetricFilter, Selector, SortSpec } from "./types";

/**
 * Everything that defines what the user is looking at, serializable into the
 * URL fragment so views can be bookmarked and shared.
 */
export interface ViewState {
  filters: MetricFilter[];
  sort: SortSpec | null;
  activeRuns: string[] | null; // null = all runs
  embeddingSelection: string[] | null; // lassoed labels, null = no lasso
  includeHidden: boolean;
  offset: number;
  limit: number;
}

export function defaultViewState(): ViewState {
  return {
    filters: [],
    sort: null,
    activeRuns: null,
    embeddingSelection: null,
    includeHidden: false,
    offset: 0,
    limit: 50,
  };
}

/** Canonical key for a selector, matching the server's column naming. */
export function selectorKey(selector: Selector): string {
  if (selector.type === "direction") {
    return `${selector.metric_kind}:${selector.attribute}:${selector.direction}`;
  }
  return (
    `${selector.metric_kind}:${selector.attribute}:` +
    `${selector.positive_direction}-${selector.negative_direction}`
  );
}

/** Human-readable label for chips and axis titles. */
export function selectorTitle(selector: Selector): string {
  if (selector.type === "direction") {
    return `${selector.metric_kind}(${selector.direction})`;
  }
  return (
    `${selector.metric_kind}(${selector.positive_direction}` +
    ` − ${selector.negative_direction})`
  );
}

export function selectorsEqual(a: Selector, b: Selector): boolean {
  return selectorKey(a) === selectorKey(b);
}

/**
 * Encode a view state into a URL fragment. The JSON payload is stable-keyed
 * so identical states produce identical fragments.
 */
export function encodeFragment(state: ViewState): string {
  const compact: Record<string, unknown> = {};
  if (state.filters.length) compact.f = state.filters;
  if (state.sort) compact.s = state.sort;
  if (state.activeRuns) compact.r = state.activeRuns;
  if (state.embeddingSelection) compact.e = state.embeddingSelection;
  if (state.includeHidden) compact.h = 1;
  if (state.offset) compact.o = state.offset;
  if (state.limit !== 50) compact.l = state.limit;
  const keys = Object.keys(compact).sort();
  if (!keys.length) return "";
  const ordered: Record<string, unknown> = {};
  for (const key of keys) ordered[key] = compact[key];
  return "#view=" + encodeURIComponent(JSON.stringify(ordered));
}

/** Decode a fragment produced by {@link encodeFragment}; invalid input falls back to defaults. */
export function decodeFragment(fragment: string): ViewState {
  const state = defaultViewState();
  const match = /^#?view=(.+)$/.exec(fragment);
  if (!match) return state;
  let parsed: Record<string, unknown>;
  try {
    parsed = JSON.parse(decodeURIComponent(match[1])) as Record<string, unknown>;
  } catch {
    return state;
  }
  if (Array.isArray(parsed.f)) state.filters = parsed.f as MetricFilter[];
  if (parsed.s && typeof parsed.s === "object") state.sort = parsed.s as SortSpec;
  if (Array.isArray(parsed.r)) state.activeRuns = parsed.r as string[];
  if (Array.isArray(parsed.e)) state.embeddingSelection = parsed.e as string[];
  if (parsed.h) state.includeHidden = true;
  if (typeof parsed.o === "number" && parsed.o >= 0) state.offset = parsed.o;
  if (typeof parsed.l === "number" && parsed.l > 0) state.limit = parsed.l;
  return state;
}

export type StateListener = (state: ViewState) => void;

/** Small observable store; every update re-notifies all subscribers. */
export class ViewStore {
  private state: ViewState;
  private readonly listeners = new Set<StateListener>();

  constructor(initial: ViewState = defaultViewState()) {
    this.state = initial;
  }

  get(): ViewState {
    return this.state;
  }

  subscribe(listener: StateListener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Replace or add the filter for `selector`, resetting paging. */
  setFilterBounds(selector: Selector, low: number, high: number): void {
    const filters = this.state.filters.filter(
      (f) => !selectorsEqual(f.selector, selector),
    );
    filters.push({ selector, low, high });
    this.update({ filters, offset: 0 });
  }

  removeFilter(selector: Selector): void {
    this.update({
      filters: this.state.filters.filter(
        (f) => !selectorsEqual(f.selector, selector),
      ),
      offset: 0,
    });
  }
}

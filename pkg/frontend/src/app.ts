import { ApiClient, ApiError } from "./api";
import { FilterChips } from "./components/chips";
import { EmbeddingPanel } from "./components/embedding";
import { RunSelector } from "./components/runs";
import { AnnotationTable } from "./components/table";
import { ViolinPanel } from "./components/violins";
import {
  decodeFragment,
  encodeFragment,
  selectorKey,
  ViewStore,
  type ViewState,
} from "./state";
import type {
  DirectionSelector,
  QueryRequest,
  Selector,
  WorkspaceInfo,
} from "./types";

export interface AppElements {
  chips: HTMLElement;
  runs: HTMLElement;
  violins: HTMLElement;
  table: HTMLElement;
  embedding: HTMLElement;
  status: HTMLElement;
  exportLink: HTMLAnchorElement;
}

/** Wires the workbench together: one store, one API client, five panels. */
export class App {
  readonly store: ViewStore;
  private workspace: WorkspaceInfo | null = null;
  private revision = 0;
  private table: AnnotationTable;
  private embeddingPanel: EmbeddingPanel;
  private violinPanels: ViolinPanel[] = [];
  private refreshTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly elements: AppElements,
    private readonly window_: Pick<Window, "location" | "history"> | null = null,
  ) {
    const fragment = window_?.location.hash ?? "";
    this.store = new ViewStore(decodeFragment(fragment));
    this.table = new AnnotationTable(elements.table, {
      onFlag: (label, flagged) =>
        void this.mutate(flagged ? "flag" : "unflag", label),
      onHide: (label, hidden) =>
        void this.mutate(hidden ? "hide" : "unhide", label),
    });
    this.embeddingPanel = new EmbeddingPanel(elements.embedding, this.store);
    new FilterChips(elements.chips, this.store);
    this.store.subscribe((state) => this.onStateChange(state));
  }

  async start(): Promise<void> {
    this.workspace = await this.api.workspace();
    this.revision = this.workspace.revision;
    this.elements.exportLink.href = this.api.exportUrl("tsv");
    new RunSelector(this.elements.runs, this.store, this.workspace.runs);
    this.buildViolins();
    await Promise.all([this.refreshTable(), this.refreshViolins()]);
    if (this.workspace.embedding_available) {
      await this.refreshEmbedding();
    }
  }

  /** The direction selectors shown as violin rows and table columns. */
  defaultSelectors(): DirectionSelector[] {
    if (!this.workspace) return [];
    const kind = this.workspace.metric_kinds[0];
    const selectors: DirectionSelector[] = [];
    for (const attribute of this.workspace.attributes) {
      for (const direction of attribute.directions) {
        selectors.push({
          type: "direction",
          attribute: attribute.name,
          direction,
          metric_kind: kind,
        });
      }
    }
    return selectors;
  }

  private runColors(): Record<string, number> {
    const colors: Record<string, number> = {};
    for (const run of this.workspace?.runs ?? []) {
      colors[run.run_name] = run.color_index;
    }
    return colors;
  }

  private buildViolins(): void {
    const doc = this.elements.violins.ownerDocument;
    this.elements.violins.textContent = "";
    this.violinPanels = [];
    for (const selector of this.defaultSelectors()) {
      const section = doc.createElement("section");
      const heading = doc.createElement("h3");
      heading.textContent = selectorKey(selector);
      const body = doc.createElement("div");
      section.append(heading, body);
      this.elements.violins.append(section);
      this.violinPanels.push(
        new ViolinPanel(body, this.store, selector, this.runColors()),
      );
    }
  }

  buildQuery(state: ViewState): QueryRequest {
    const columns: Selector[] = [...this.defaultSelectors()];
    for (const filter of state.filters) {
      if (!columns.some((c) => selectorKey(c) === selectorKey(filter.selector))) {
        columns.push(filter.selector);
      }
    }
    return {
      filters: state.filters,
      sort: state.sort,
      include_hidden: state.includeHidden,
      embedding_selection: state.embeddingSelection,
      active_runs: state.activeRuns,
      columns,
      offset: state.offset,
      limit: state.limit,
    };
  }

  async refreshTable(): Promise<void> {
    if (!this.workspace) return;
    const state = this.store.get();
    const response = await this.api.query(this.buildQuery(state));
    this.revision = response.revision;
    this.table.render(response.rows, {
      runColors: this.runColors(),
      columns: this.buildQuery(state).columns!.map((c) => selectorKey(c)),
    });
    this.elements.status.textContent =
      `${response.total_matching} matching label(s), ` +
      `showing ${response.rows.length} from ${state.offset}`;
  }

  async refreshViolins(): Promise<void> {
    const runs = this.store.get().activeRuns ?? [];
    await Promise.all(
      this.defaultSelectors().map(async (selector, i) => {
        const distribution = await this.api.distribution(selector, runs);
        this.violinPanels[i]?.render(distribution);
      }),
    );
  }

  async refreshEmbedding(): Promise<void> {
    const state = this.store.get();
    try {
      const ready = await this.api.projectionReady({
        filters: state.filters,
        active_runs: state.activeRuns,
        seed: 0,
      });
      this.embeddingPanel.render(ready);
    } catch (error) {
      if (error instanceof ApiError && (error.status === 409 || error.status === 422)) {
        this.elements.embedding.textContent = String(error.message);
        return;
      }
      throw error;
    }
  }

  /** Session mutation with one stale-revision retry. */
  async mutate(
    action: "flag" | "unflag" | "hide" | "unhide",
    label: string,
  ): Promise<void> {
    try {
      const state = await this.api.mutateSession(action, [label], this.revision);
      this.revision = state.revision;
    } catch (error) {
      if (error instanceof ApiError && error.stale) {
        const current = (error.detail as { current?: { revision?: number } })
          ?.current;
        this.revision = current?.revision ?? this.revision;
        const state = await this.api.mutateSession(action, [label], this.revision);
        this.revision = state.revision;
      } else {
        throw error;
      }
    }
    await this.refreshTable();
  }

  private onStateChange(state: ViewState): void {
    if (this.window_) {
      this.window_.history.replaceState(null, "", encodeFragment(state) || "#");
    }
    if (this.refreshTimer) clearTimeout(this.refreshTimer);
    this.refreshTimer = setTimeout(() => {
      void this.refreshTable();
      void this.refreshViolins();
      if (this.workspace?.embedding_available) void this.refreshEmbedding();
    }, 50);
  }
}

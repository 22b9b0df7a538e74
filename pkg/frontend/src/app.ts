/**
 * Analyst workbench: linked histogram pairs with error bars, remeasure
 * controls, a pinned budget progress bar, previous-error overlays with a
 * recenter toggle, a y-axis rescale toggle, hover tooltips that pin on
 * click, brushing-and-linking filters, and a sum-of-selection readout.
 *
 * The budget bar always re-renders from the latest API snapshot, never from
 * client-side arithmetic, so it cannot drift from the server ledger.
 * Remeasure clicks are pessimistic: nothing redraws until the server
 * responds, at most one request is in flight per query, and a 409 disables
 * every remeasure button.
 */

import { ApiError, SessionApi } from './api.js';
import type { BudgetSnapshot, QueryView } from './api.js';
import { panelData, panelRange, sumSelected } from './model.js';
import { renderPanelSvg, tooltipText } from './charts.js';

const RESCALE_MARGIN = 1.05;

interface QueryUiState {
  view: QueryView;
  selections: [Set<number>, Set<number>];
  recenterPrevious: boolean;
  rescaleY: boolean;
  /** frozen at first render so consecutive remeasures share one scale */
  defaultRange: { min: number; max: number };
  inFlight: boolean;
}

export class Workbench {
  private sessionId = '';
  private budget: BudgetSnapshot | null = null;
  private readonly queries = new Map<string, QueryUiState>();
  private budgetExhausted = false;
  private pinnedTooltip: { queryId: string; axis: number; bin: number } | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: SessionApi,
  ) {
    this.root.innerHTML =
      '<div class="budget-bar" role="status"></div>' +
      '<div class="banner" hidden></div>' +
      '<div class="queries"></div>' +
      '<div class="tooltip" hidden></div>';
    this.root.addEventListener('click', (event) => this.onClick(event));
    this.root.addEventListener('mouseover', (event) => this.onHover(event));
    this.root.addEventListener('mouseout', () => this.hideTooltip(false));
  }

  async start(datasetId: string, config: Record<string, unknown> = {}): Promise<void> {
    const created = await this.api.createSession(datasetId, config);
    this.sessionId = created.sessionId;
    this.budget = created.budget;
    this.renderBudget();
  }

  async addQuery(attributes: string[], filter?: Record<string, string[]>): Promise<string> {
    const response = await this.api.addQuery(this.sessionId, attributes, filter);
    const state: QueryUiState = {
      view: response.query,
      selections: [new Set(), new Set()],
      recenterPrevious: false,
      rescaleY: false,
      defaultRange: { min: 0, max: 0 },
      inFlight: false,
    };
    state.defaultRange = this.fullRange(state);
    this.queries.set(response.query.queryId, state);
    this.budget = response.budget;
    this.appendQueryRow(response.query.queryId);
    this.renderQuery(response.query.queryId);
    this.renderBudget();
    return response.query.queryId;
  }

  async clickRemeasure(queryId: string): Promise<void> {
    const state = this.queries.get(queryId);
    if (!state || state.inFlight || this.budgetExhausted) return;
    if (this.budget && this.budget.used >= this.budget.total) return;
    state.inFlight = true;
    this.renderQuery(queryId);
    try {
      const response = await this.api.remeasure(this.sessionId, queryId);
      state.view = response.query;
      this.budget = response.budget;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.budgetExhausted = true;
        this.budget = await this.api.getBudget(this.sessionId);
      } else {
        this.showBanner(`remeasure failed: ${(error as Error).message}`, queryId);
      }
    } finally {
      state.inFlight = false;
    }
    this.renderAll();
  }

  toggleRecenter(queryId: string): void {
    const state = this.queries.get(queryId);
    if (!state) return;
    state.recenterPrevious = !state.recenterPrevious;
    this.renderQuery(queryId);
  }

  toggleRescale(queryId: string): void {
    const state = this.queries.get(queryId);
    if (!state) return;
    state.rescaleY = !state.rescaleY;
    this.renderQuery(queryId);
  }

  brush(queryId: string, axis: 0 | 1, bin: number): void {
    const state = this.queries.get(queryId);
    if (!state) return;
    const selection = state.selections[axis];
    if (selection.has(bin)) {
      selection.delete(bin);
    } else {
      selection.add(bin);
    }
    this.renderQuery(queryId);
  }

  clearSelection(queryId: string, axis: 0 | 1): void {
    const state = this.queries.get(queryId);
    if (!state) return;
    state.selections[axis].clear();
    this.renderQuery(queryId);
  }

  queryIds(): string[] {
    return [...this.queries.keys()];
  }

  budgetSnapshot(): BudgetSnapshot | null {
    return this.budget;
  }

  // -- rendering -------------------------------------------------------------

  private fullRange(state: QueryUiState) {
    const panels = [
      panelData(state.view, 0, new Set()),
      panelData(state.view, 1, new Set()),
    ];
    const range = panelRange(panels);
    return { min: Math.min(0, range.min), max: range.max * RESCALE_MARGIN };
  }

  private renderBudget(): void {
    const bar = this.root.querySelector('.budget-bar') as HTMLElement;
    if (!this.budget) {
      bar.textContent = '';
      return;
    }
    const { used, total } = this.budget;
    const percent = total > 0 ? Math.round((100 * used) / total) : 100;
    bar.innerHTML =
      `<span class="budget-text">Remeasures used: ${used} of ${total}</span>` +
      `<progress class="budget-progress" max="${total}" value="${used}"></progress>` +
      `<span class="budget-percent">${percent}%</span>`;
    if (this.budget.used >= this.budget.total) {
      this.budgetExhausted = true;
    }
  }

  private appendQueryRow(queryId: string): void {
    const row = document.createElement('section');
    row.className = 'query-row';
    row.dataset.query = queryId;
    (this.root.querySelector('.queries') as HTMLElement).appendChild(row);
  }

  private renderQuery(queryId: string): void {
    const state = this.queries.get(queryId);
    const row = this.root.querySelector(`[data-query="${queryId}"]`) as HTMLElement | null;
    if (!state || !row) return;

    const panels = [0, 1].map((axis) =>
      panelData(state.view, axis as 0 | 1, state.selections[axis === 0 ? 1 : 0]),
    );
    const range = state.rescaleY
      ? (() => {
          const r = panelRange(panels);
          return { min: Math.min(0, r.min), max: r.max * RESCALE_MARGIN };
        })()
      : state.defaultRange;

    const panelHtml = panels
      .map((panel, axis) => {
        const selection = state.selections[axis];
        const readout = sumSelected(
          state.view,
          axis as 0 | 1,
          selection,
          state.selections[axis === 0 ? 1 : 0],
        );
        const readoutHtml = readout
          ? `<div class="sum-readout">selected ${readout.count} bins: ` +
            `${readout.sum.toFixed(2)} &#177; ${readout.rmse.toFixed(2)} ` +
            `<button class="clear-selection" data-axis="${axis}">clear</button></div>`
          : '<div class="sum-readout empty"></div>';
        return (
          `<div class="panel" data-axis="${axis}">` +
          `<div class="panel-title">${panel.attribute}${panel.filtered ? ' (filtered)' : ''}</div>` +
          renderPanelSvg(panel, {
            yMin: range.min,
            yMax: range.max,
            recenterPrevious: state.recenterPrevious,
            selection,
          }) +
          readoutHtml +
          '</div>'
        );
      })
      .join('');

    const remeasureDisabled =
      state.inFlight || this.budgetExhausted || (this.budget !== null && this.budget.used >= this.budget.total);
    row.innerHTML =
      panelHtml +
      '<div class="controls">' +
      `<button class="remeasure"${remeasureDisabled ? ' disabled' : ''}>` +
      `Remeasure (${state.view.remeasuresUsed} used)</button>` +
      `<label><input type="checkbox" class="recenter"${state.recenterPrevious ? ' checked' : ''}>` +
      ' previous errors at previous estimates</label>' +
      `<label><input type="checkbox" class="rescale"${state.rescaleY ? ' checked' : ''}>` +
      ' rescale y-axis</label>' +
      '</div>';
  }

  private renderAll(): void {
    this.renderBudget();
    for (const queryId of this.queries.keys()) {
      this.renderQuery(queryId);
    }
  }

  private showBanner(message: string, retryQueryId?: string): void {
    const banner = this.root.querySelector('.banner') as HTMLElement;
    banner.hidden = false;
    banner.innerHTML =
      `<span>${message}</span>` +
      (retryQueryId ? `<button class="retry" data-query="${retryQueryId}">retry</button>` : '') +
      '<button class="dismiss">dismiss</button>';
  }

  // -- events ------------------------------------------------------------------

  private onClick(event: Event): void {
    const target = event.target as HTMLElement;
    const row = target.closest('[data-query]') as HTMLElement | null;
    if (target.classList.contains('dismiss')) {
      (this.root.querySelector('.banner') as HTMLElement).hidden = true;
      return;
    }
    if (target.classList.contains('retry')) {
      (this.root.querySelector('.banner') as HTMLElement).hidden = true;
      void this.clickRemeasure(target.dataset.query as string);
      return;
    }
    if (!row) return;
    const queryId = row.dataset.query as string;
    if (target.classList.contains('remeasure')) {
      void this.clickRemeasure(queryId);
      return;
    }
    if (target.classList.contains('recenter')) {
      this.toggleRecenter(queryId);
      return;
    }
    if (target.classList.contains('rescale')) {
      this.toggleRescale(queryId);
      return;
    }
    if (target.classList.contains('clear-selection')) {
      const panel = target.closest('.panel') as HTMLElement;
      this.clearSelection(queryId, Number(panel.dataset.axis) as 0 | 1);
      return;
    }
    if (target.classList.contains('bar')) {
      const group = target.closest('.bar-group') as HTMLElement;
      const panel = target.closest('.panel') as HTMLElement;
      this.brush(queryId, Number(panel.dataset.axis) as 0 | 1, Number(group.dataset.bin));
      return;
    }
    if (target.classList.contains('point')) {
      const group = target.closest('.bar-group') as HTMLElement;
      const panel = target.closest('.panel') as HTMLElement;
      const pin = {
        queryId,
        axis: Number(panel.dataset.axis),
        bin: Number(group.dataset.bin),
      };
      if (
        this.pinnedTooltip &&
        this.pinnedTooltip.queryId === pin.queryId &&
        this.pinnedTooltip.axis === pin.axis &&
        this.pinnedTooltip.bin === pin.bin
      ) {
        this.pinnedTooltip = null;
        this.hideTooltip(true);
      } else {
        this.pinnedTooltip = pin;
        this.showTooltipFor(group);
      }
    }
  }

  private onHover(event: Event): void {
    if (this.pinnedTooltip) return;
    const target = event.target as HTMLElement;
    const group = target.closest?.('.bar-group') as HTMLElement | null;
    if (group) {
      this.showTooltipFor(group);
    }
  }

  private showTooltipFor(group: HTMLElement): void {
    const tooltip = this.root.querySelector('.tooltip') as HTMLElement;
    tooltip.hidden = false;
    tooltip.textContent = tooltipText(
      Number(group.dataset.estimate),
      Number(group.dataset.rmse),
    );
  }

  private hideTooltip(force: boolean): void {
    if (this.pinnedTooltip && !force) return;
    const tooltip = this.root.querySelector('.tooltip') as HTMLElement;
    tooltip.hidden = true;
    tooltip.textContent = '';
  }
}

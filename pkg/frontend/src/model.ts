/**
 * Derivations from a query view into drawable panel data.
 *
 * A query over two attributes renders as two linked histogram panels.
 * Selecting bins on one panel restricts the other panel to the selected
 * slice: restricted bin estimates are sums of the joint cell estimates, and
 * their error bars come from the cell covariance (cells are enumerated
 * row-major: cell = i0 * n1 + i1).
 *
 * Previous-measurement overlays are only derivable for the unfiltered view
 * (the API exposes previous errors per bin, not per cell), so panels hide
 * the dashed overlay while a sibling selection filters them.
 */

import type { QueryView } from './api.js';

export interface PanelData {
  attribute: string;
  bins: string[];
  estimates: number[];
  rmse: number[];
  /** dashed overlay from the immediately-preceding measurement, if any */
  previousEstimates: number[] | null;
  previousRmse: number[] | null;
  /** true when a sibling selection restricts this panel's data */
  filtered: boolean;
}

export interface SumReadout {
  sum: number;
  rmse: number;
  count: number;
}

function binCounts(view: QueryView): [number, number] {
  const [a0, a1] = view.attributes;
  return [view.bins[a0].length, view.bins[a1].length];
}

/** Cells (flat indices) of bin `index` along `axis`, optionally restricted
 * to a sibling-bin selection. */
function cellsOfBin(
  view: QueryView,
  axis: 0 | 1,
  index: number,
  siblingSelection: ReadonlySet<number>,
): number[] {
  const [n0, n1] = binCounts(view);
  const siblingSize = axis === 0 ? n1 : n0;
  const cells: number[] = [];
  for (let j = 0; j < siblingSize; j++) {
    if (siblingSelection.size > 0 && !siblingSelection.has(j)) continue;
    cells.push(axis === 0 ? index * n1 + j : j * n1 + index);
  }
  return cells;
}

function sumCells(view: QueryView, cells: number[]): { sum: number; rmse: number } {
  let sum = 0;
  for (const c of cells) sum += view.cellEstimates[c];
  let variance = 0;
  for (const c of cells) {
    for (const d of cells) variance += view.cellCovariance[c][d];
  }
  return { sum, rmse: Math.sqrt(Math.max(variance, 0)) };
}

/**
 * Drawable data for one panel, honoring the sibling panel's bin selection.
 */
export function panelData(
  view: QueryView,
  axis: 0 | 1,
  siblingSelection: ReadonlySet<number>,
): PanelData {
  const attribute = view.attributes[axis];
  const bins = view.bins[attribute];
  const filtered = siblingSelection.size > 0;
  if (!filtered) {
    return {
      attribute,
      bins,
      estimates: view.binEstimates[attribute],
      rmse: view.binRmse[attribute],
      previousEstimates: view.previousBinEstimates?.[attribute] ?? null,
      previousRmse: view.previousBinRmse?.[attribute] ?? null,
      filtered,
    };
  }
  const estimates: number[] = [];
  const rmse: number[] = [];
  for (let i = 0; i < bins.length; i++) {
    const { sum, rmse: err } = sumCells(view, cellsOfBin(view, axis, i, siblingSelection));
    estimates.push(sum);
    rmse.push(err);
  }
  return { attribute, bins, estimates, rmse, previousEstimates: null, previousRmse: null, filtered };
}

/**
 * Sum of the selected bins on a panel (with its error), respecting any
 * sibling selection restricting the panel.
 */
export function sumSelected(
  view: QueryView,
  axis: 0 | 1,
  ownSelection: ReadonlySet<number>,
  siblingSelection: ReadonlySet<number>,
): SumReadout | null {
  if (ownSelection.size === 0) return null;
  const cells: number[] = [];
  for (const index of ownSelection) {
    cells.push(...cellsOfBin(view, axis, index, siblingSelection));
  }
  const { sum, rmse } = sumCells(view, cells);
  return { sum, rmse, count: ownSelection.size };
}

/** Y-axis range covering every displayed value, error whiskers included
 * (negative whiskers extend the range below zero). */
export function panelRange(panels: PanelData[]): { min: number; max: number } {
  let min = 0;
  let max = 0;
  for (const panel of panels) {
    for (let i = 0; i < panel.estimates.length; i++) {
      max = Math.max(max, panel.estimates[i] + panel.rmse[i]);
      min = Math.min(min, panel.estimates[i] - panel.rmse[i]);
      if (panel.previousEstimates && panel.previousRmse) {
        max = Math.max(max, panel.previousEstimates[i] + panel.previousRmse[i]);
        min = Math.min(min, panel.previousEstimates[i] - panel.previousRmse[i]);
      }
    }
  }
  return { min, max };
}

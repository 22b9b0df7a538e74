/**
 * SVG histogram panel rendering.
 *
 * Bars carry a point marker at the top and a solid whisker spanning
 * estimate +/- error. After a remeasure, the previous measurement's error
 * appears as a dashed whisker: centered on the current estimate by default
 * (so widths compare directly), or shifted right and centered on the
 * previous estimate when the recenter toggle is on. Negative estimates draw
 * below the zero line without clamping.
 *
 * Markup is built from fixed-precision strings so identical state renders
 * byte-identical SVG.
 */

import type { PanelData } from './model.js';

const LAYOUT = {
  width: 320,
  height: 220,
  padTop: 10,
  padRight: 8,
  padBottom: 34,
  padLeft: 44,
  barGap: 6,
  recenterShift: 7, // px shift of dashed whiskers when recentered
};

const COLORS = {
  bar: '#9ecae1',
  barSelected: '#3182bd',
  point: '#08306b',
  whisker: '#08306b',
  previous: '#888888',
  axis: '#444444',
};

export interface PanelOptions {
  yMin: number;
  yMax: number;
  recenterPrevious: boolean;
  selection: ReadonlySet<number>;
}

const fmt = (x: number) => x.toFixed(2);

export function renderPanelSvg(panel: PanelData, options: PanelOptions): string {
  const { width, height, padTop, padRight, padBottom, padLeft, barGap } = LAYOUT;
  const innerWidth = width - padLeft - padRight;
  const innerHeight = height - padTop - padBottom;
  const span = options.yMax - options.yMin || 1;
  const y = (value: number) => padTop + innerHeight * (1 - (value - options.yMin) / span);
  const barWidth = innerWidth / panel.bins.length - barGap;

  const parts: string[] = [];
  parts.push(
    `<svg class="panel-svg" viewBox="0 0 ${width} ${height}" data-attribute="${panel.attribute}"` +
      ` data-filtered="${panel.filtered}">`,
  );
  // y axis and zero line
  parts.push(
    `<line class="axis" x1="${padLeft}" y1="${fmt(y(options.yMax))}" x2="${padLeft}"` +
      ` y2="${fmt(y(options.yMin))}" stroke="${COLORS.axis}"/>`,
  );
  parts.push(
    `<line class="zero" x1="${padLeft}" y1="${fmt(y(0))}" x2="${width - padRight}"` +
      ` y2="${fmt(y(0))}" stroke="${COLORS.axis}" stroke-dasharray="2,2"/>`,
  );
  parts.push(
    `<text class="ymax-label" x="${padLeft - 4}" y="${fmt(y(options.yMax) + 4)}"` +
      ` text-anchor="end" font-size="10">${fmt(options.yMax)}</text>`,
  );

  panel.bins.forEach((label, i) => {
    const x0 = padLeft + (i * innerWidth) / panel.bins.length + barGap / 2;
    const xMid = x0 + barWidth / 2;
    const estimate = panel.estimates[i];
    const rmse = panel.rmse[i];
    const lo = estimate - rmse;
    const hi = estimate + rmse;
    const selected = options.selection.has(i);
    const barTop = Math.min(y(0), y(estimate));
    const barHeight = Math.abs(y(estimate) - y(0));

    parts.push(
      `<g class="bar-group" data-bin="${i}" data-label="${label}"` +
        ` data-estimate="${fmt(estimate)}" data-rmse="${fmt(rmse)}"` +
        ` data-lo="${fmt(lo)}" data-hi="${fmt(hi)}">`,
    );
    parts.push(
      `<rect class="bar${selected ? ' selected' : ''}" x="${fmt(x0)}" y="${fmt(barTop)}"` +
        ` width="${fmt(barWidth)}" height="${fmt(barHeight)}"` +
        ` fill="${selected ? COLORS.barSelected : COLORS.bar}"/>`,
    );

    // dashed previous-measurement whisker
    if (panel.previousEstimates && panel.previousRmse) {
      const prevRmse = panel.previousRmse[i];
      const center = options.recenterPrevious ? panel.previousEstimates[i] : estimate;
      const xPrev = options.recenterPrevious ? xMid + LAYOUT.recenterShift : xMid;
      parts.push(
        `<line class="whisker-previous" x1="${fmt(xPrev)}" y1="${fmt(y(center - prevRmse))}"` +
          ` x2="${fmt(xPrev)}" y2="${fmt(y(center + prevRmse))}"` +
          ` stroke="${COLORS.previous}" stroke-dasharray="4,3" stroke-width="2"` +
          ` data-prev-rmse="${fmt(prevRmse)}"/>`,
      );
    }

    // current whisker and point marker at the bar top
    parts.push(
      `<line class="whisker-current" x1="${fmt(xMid)}" y1="${fmt(y(lo))}"` +
        ` x2="${fmt(xMid)}" y2="${fmt(y(hi))}" stroke="${COLORS.whisker}" stroke-width="2"/>`,
    );
    parts.push(
      `<circle class="point" cx="${fmt(xMid)}" cy="${fmt(y(estimate))}" r="3" fill="${COLORS.point}"/>`,
    );
    parts.push(
      `<text class="bin-label" x="${fmt(xMid)}" y="${height - padBottom + 12}"` +
        ` text-anchor="middle" font-size="9">${label}</text>`,
    );
    parts.push('</g>');
  });

  parts.push('</svg>');
  return parts.join('');
}

/** Tooltip body: the noisy count, its error, and the count +/- error interval. */
export function tooltipText(estimate: number, rmse: number): string {
  return (
    `count ${fmt(estimate)}, error ${fmt(rmse)}, ` +
    `interval [${fmt(estimate - rmse)}, ${fmt(estimate + rmse)}]`
  );
}

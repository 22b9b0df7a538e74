/**
 * Scripted interaction tests against the in-memory stub server: budget-bar
 * agreement under arbitrary click sequences, whisker-width comparisons after
 * remeasures, recenter involution, brushing-and-linking, tooltips, rescale.
 */

import { beforeEach, describe, expect, it } from 'vitest';

import { SessionApi } from '../src/api.js';
import { Workbench } from '../src/app.js';
import { tooltipText } from '../src/charts.js';
import { StubServer, mulberry32 } from './stub-server.js';

function makeWorkbench(seed = 1, totalRemeasures = 6) {
  const stub = new StubServer(seed, totalRemeasures);
  const root = document.createElement('div');
  document.body.innerHTML = '';
  document.body.appendChild(root);
  const workbench = new Workbench(root, new SessionApi('http://stub', stub.fetch));
  return { stub, root, workbench };
}

function budgetText(root: HTMLElement): string {
  return (root.querySelector('.budget-text') as HTMLElement).textContent ?? '';
}

function whiskerLengths(root: HTMLElement, queryId: string, cls: string): number[] {
  const row = root.querySelector(`[data-query="${queryId}"]`) as HTMLElement;
  return [...row.querySelectorAll(`line.${cls}`)].map((line) => {
    const y1 = Number(line.getAttribute('y1'));
    const y2 = Number(line.getAttribute('y2'));
    return Math.abs(y2 - y1);
  });
}

function clickRemeasureButton(root: HTMLElement, queryId: string): void {
  const button = root.querySelector(
    `[data-query="${queryId}"] button.remeasure`,
  ) as HTMLButtonElement;
  button.dispatchEvent(new MouseEvent('click', { bubbles: true }));
}

async function settle(): Promise<void> {
  // drain the task chain created by a click's async handler (response body
  // reads schedule macrotasks, so timers are needed as well)
  for (let i = 0; i < 5; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

describe('budget bar', () => {
  it('matches the API ledger after an arbitrary click sequence', async () => {
    const { stub, root, workbench } = makeWorkbench(7);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const q2 = await workbench.addQuery(['marital', 'income']);
    const rand = mulberry32(99);
    const ids = [q1, q2];
    for (let step = 0; step < 40; step++) {
      const queryId = ids[Math.floor(rand() * ids.length)];
      const action = rand();
      if (action < 0.5) {
        await workbench.clickRemeasure(queryId);
      } else if (action < 0.65) {
        workbench.toggleRecenter(queryId);
      } else if (action < 0.8) {
        workbench.toggleRescale(queryId);
      } else {
        const axis = rand() < 0.5 ? 0 : 1;
        workbench.brush(queryId, axis as 0 | 1, Math.floor(rand() * 3));
      }
      const budget = await new SessionApi('http://stub', stub.fetch).getBudget(
        (workbench as unknown as { sessionId: string })['sessionId'],
      );
      expect(budgetText(root)).toBe(`Remeasures used: ${budget.used} of ${budget.total}`);
      expect(budget.used).toBeLessThanOrEqual(budget.total);
    }
  });

  it('disables every remeasure button once the budget is exhausted', async () => {
    const { stub, root, workbench } = makeWorkbench(3, 2);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const q2 = await workbench.addQuery(['marital', 'income']);
    await workbench.clickRemeasure(q1);
    await workbench.clickRemeasure(q2);
    expect(budgetText(root)).toBe('Remeasures used: 2 of 2');
    const buttons = [...root.querySelectorAll('button.remeasure')] as HTMLButtonElement[];
    expect(buttons.every((b) => b.disabled)).toBe(true);
    const requestsBefore = stub.remeasureRequests;
    clickRemeasureButton(root, q1);
    await settle();
    expect(stub.remeasureRequests).toBe(requestsBefore); // no request at 2/2
  });

  it('treats a surprise 409 as exhaustion and disables all buttons', async () => {
    const { stub, root, workbench } = makeWorkbench(4);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    stub.forceConflictOnce = true;
    await workbench.clickRemeasure(q1);
    const buttons = [...root.querySelectorAll('button.remeasure')] as HTMLButtonElement[];
    expect(buttons.every((b) => b.disabled)).toBe(true);
    expect(budgetText(root)).toBe('Remeasures used: 0 of 6');
  });
});

describe('request discipline', () => {
  it('sends at most one in-flight remeasure request per query', async () => {
    const stub = new StubServer(31);
    let release: (() => void) | null = null;
    let delayedCalls = 0;
    const gatedFetch: typeof stub.fetch = async (url, init) => {
      if (url.includes('/remeasure')) {
        delayedCalls += 1;
        await new Promise<void>((resolve) => {
          release = resolve;
        });
      }
      return stub.fetch(url, init);
    };
    const root = document.createElement('div');
    document.body.innerHTML = '';
    document.body.appendChild(root);
    const workbench = new Workbench(root, new SessionApi('http://stub', gatedFetch));
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);

    const first = workbench.clickRemeasure(q1);
    const second = workbench.clickRemeasure(q1); // ignored while in flight
    expect(delayedCalls).toBe(1);
    const button = root.querySelector(
      `[data-query="${q1}"] button.remeasure`,
    ) as HTMLButtonElement;
    expect(button.disabled).toBe(true); // disabled while in flight
    release!();
    await Promise.all([first, second]);
    expect(delayedCalls).toBe(1);
    expect(budgetText(root)).toBe('Remeasures used: 1 of 6');
  });

  it('surfaces network failures as a banner with retry, without optimistic updates', async () => {
    const stub = new StubServer(32);
    let failNext = false;
    const flakyFetch: typeof stub.fetch = async (url, init) => {
      if (failNext && url.includes('/remeasure')) {
        failNext = false;
        throw new TypeError('network down');
      }
      return stub.fetch(url, init);
    };
    const root = document.createElement('div');
    document.body.innerHTML = '';
    document.body.appendChild(root);
    const workbench = new Workbench(root, new SessionApi('http://stub', flakyFetch));
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);

    failNext = true;
    await workbench.clickRemeasure(q1);
    const banner = root.querySelector('.banner') as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain('remeasure failed');
    expect(budgetText(root)).toBe('Remeasures used: 0 of 6'); // no optimistic update
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    expect(row.querySelectorAll('line.whisker-previous')).toHaveLength(0);

    (banner.querySelector('button.retry') as HTMLButtonElement).dispatchEvent(
      new MouseEvent('click', { bubbles: true }),
    );
    await settle();
    expect(banner.hidden).toBe(true);
    expect(budgetText(root)).toBe('Remeasures used: 1 of 6');
  });
});

describe('remeasure rendering', () => {
  it('draws dashed previous whiskers strictly wider than current after each remeasure', async () => {
    const { root, workbench } = makeWorkbench(11);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    expect(whiskerLengths(root, q1, 'whisker-previous')).toHaveLength(0);
    for (let i = 0; i < 4; i++) {
      await workbench.clickRemeasure(q1);
      const current = whiskerLengths(root, q1, 'whisker-current');
      const previous = whiskerLengths(root, q1, 'whisker-previous');
      expect(previous.length).toBe(current.length);
      previous.forEach((p, idx) => expect(p).toBeGreaterThan(current[idx]));
    }
  });

  it('increments the per-query counter in the control panel', async () => {
    const { root, workbench } = makeWorkbench(12);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    await workbench.clickRemeasure(q1);
    await workbench.clickRemeasure(q1);
    const button = root.querySelector(
      `[data-query="${q1}"] button.remeasure`,
    ) as HTMLButtonElement;
    expect(button.textContent).toContain('(2 used)');
  });
});

describe('recenter toggle', () => {
  it('is an involution: toggling twice restores a pixel-identical layout', async () => {
    const { root, workbench } = makeWorkbench(13);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    await workbench.clickRemeasure(q1);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const before = row.innerHTML;
    const checkbox = () => row.querySelector('input.recenter') as HTMLInputElement;
    checkbox().dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(row.innerHTML).not.toBe(before);
    checkbox().dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(row.innerHTML).toBe(before);
  });

  it('centers dashed whiskers on the current estimate by default and shifts on toggle', async () => {
    const { root, workbench } = makeWorkbench(14);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    await workbench.clickRemeasure(q1);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const solidX = Number(
      (row.querySelector('line.whisker-current') as SVGLineElement).getAttribute('x1'),
    );
    const dashedX = Number(
      (row.querySelector('line.whisker-previous') as SVGLineElement).getAttribute('x1'),
    );
    expect(dashedX).toBe(solidX); // default: same center as the current bar
    workbench.toggleRecenter(q1);
    const shiftedX = Number(
      (row.querySelector('line.whisker-previous') as SVGLineElement).getAttribute('x1'),
    );
    expect(shiftedX).toBeGreaterThan(solidX); // shifted right when recentered
  });
});

describe('brushing and linking', () => {
  it('filters the sibling panel to the selected bins', async () => {
    const { stub, root, workbench } = makeWorkbench(15);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const sessionId = (workbench as unknown as { sessionId: string })['sessionId'];
    const view = (await new SessionApi('http://stub', stub.fetch).getSession(sessionId))
      .queries[0];

    workbench.brush(q1, 1, 0); // select age bin 0 on the age panel
    workbench.brush(q1, 1, 2); // and age bin 2
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const racePanel = row.querySelector('.panel[data-axis="0"]') as HTMLElement;
    expect((racePanel.querySelector('.panel-title') as HTMLElement).textContent).toContain(
      '(filtered)',
    );
    const rendered = [...racePanel.querySelectorAll('.bar-group')].map((g) =>
      Number((g as HTMLElement).dataset.estimate),
    );
    const nAge = view.bins.age.length;
    const expected = view.bins.race.map((_, i) =>
      view.cellEstimates[i * nAge + 0] + view.cellEstimates[i * nAge + 2],
    );
    rendered.forEach((value, i) => expect(value).toBeCloseTo(expected[i], 2));
  });

  it('restores the full view when the selection is cleared', async () => {
    const { root, workbench } = makeWorkbench(16);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const fullEstimates = [...row.querySelectorAll('.panel[data-axis="0"] .bar-group')].map(
      (g) => (g as HTMLElement).dataset.estimate,
    );
    workbench.brush(q1, 1, 1);
    workbench.clearSelection(q1, 1);
    const restored = [...row.querySelectorAll('.panel[data-axis="0"] .bar-group')].map(
      (g) => (g as HTMLElement).dataset.estimate,
    );
    expect(restored).toEqual(fullEstimates);
  });

  it('keeps the selection across a remeasure of the same query', async () => {
    const { root, workbench } = makeWorkbench(17);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    workbench.brush(q1, 1, 1);
    await workbench.clickRemeasure(q1);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const racePanel = row.querySelector('.panel[data-axis="0"]') as HTMLElement;
    expect((racePanel.querySelector('.panel-title') as HTMLElement).textContent).toContain(
      '(filtered)',
    );
    const agePanel = row.querySelector('.panel[data-axis="1"]') as HTMLElement;
    expect(agePanel.querySelector('rect.bar.selected')).not.toBeNull();
  });

  it('shows a sum readout for the selected bins', async () => {
    const { stub, root, workbench } = makeWorkbench(18);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const sessionId = (workbench as unknown as { sessionId: string })['sessionId'];
    const view = (await new SessionApi('http://stub', stub.fetch).getSession(sessionId))
      .queries[0];
    const expected = view.binEstimates.age[0] + view.binEstimates.age[1];
    workbench.brush(q1, 1, 0);
    workbench.brush(q1, 1, 1);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const agePanel = row.querySelector('.panel[data-axis="1"]') as HTMLElement;
    const readout = (agePanel.querySelector('.sum-readout') as HTMLElement).textContent ?? '';
    expect(readout).toContain('selected 2 bins');
    expect(readout).toContain(expected.toFixed(2));
  });
});

describe('tooltips', () => {
  it('shows count, error, and the count +/- error interval on hover', async () => {
    const { root, workbench } = makeWorkbench(19);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const group = row.querySelector('.bar-group') as HTMLElement;
    const bar = group.querySelector('rect.bar') as SVGRectElement;
    bar.dispatchEvent(new MouseEvent('mouseover', { bubbles: true }));
    const tooltip = root.querySelector('.tooltip') as HTMLElement;
    expect(tooltip.hidden).toBe(false);
    expect(tooltip.textContent).toBe(
      tooltipText(Number(group.dataset.estimate), Number(group.dataset.rmse)),
    );
  });

  it('pins on point click and survives mouseout until unpinned', async () => {
    const { root, workbench } = makeWorkbench(20);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const point = row.querySelector('circle.point') as SVGCircleElement;
    point.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    const tooltip = root.querySelector('.tooltip') as HTMLElement;
    expect(tooltip.hidden).toBe(false);
    root.dispatchEvent(new MouseEvent('mouseout', { bubbles: true }));
    expect(tooltip.hidden).toBe(false); // pinned
    point.dispatchEvent(new MouseEvent('click', { bubbles: true }));
    expect(tooltip.hidden).toBe(true);
  });
});

describe('page layout', () => {
  it('renders one visualization row per query on the page', async () => {
    const { root, workbench } = makeWorkbench(23);
    await workbench.start('census');
    await workbench.addQuery(['race', 'age']);
    await workbench.addQuery(['marital', 'income']);
    await workbench.addQuery(['race', 'income']);
    await workbench.addQuery(['age', 'marital']);
    expect(root.querySelectorAll('.query-row')).toHaveLength(4);
    for (const row of root.querySelectorAll('.query-row')) {
      expect(row.querySelectorAll('.panel')).toHaveLength(2);
    }
  });

});

describe('rescale toggle', () => {
  it('keeps a common scale across remeasures by default', async () => {
    const { root, workbench } = makeWorkbench(21);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const label = () =>
      (root.querySelector(`[data-query="${q1}"] .ymax-label`) as HTMLElement).textContent;
    const before = label();
    await workbench.clickRemeasure(q1);
    expect(label()).toBe(before);
  });

  it('tightens the axis to the displayed data when toggled on after a filter', async () => {
    const { root, workbench } = makeWorkbench(22);
    await workbench.start('census');
    const q1 = await workbench.addQuery(['race', 'age']);
    const row = root.querySelector(`[data-query="${q1}"]`) as HTMLElement;
    const yMax = () =>
      Number(
        (row.querySelector('.panel[data-axis="0"] .ymax-label') as HTMLElement).textContent,
      );
    const defaultMax = yMax();
    workbench.brush(q1, 1, 0); // restrict race panel to one age slice
    workbench.toggleRescale(q1);
    expect(yMax()).toBeLessThan(defaultMax);
    workbench.toggleRescale(q1);
    expect(yMax()).toBe(defaultMax);
  });
});

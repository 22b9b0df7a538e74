/**
 * Entry point: wire the workbench to a running session API.
 *
 * Query parameters: ?api=http://127.0.0.1:8000&dataset=census plus an
 * optional comma-separated query list like
 * &queries=race:age,marital:income to issue on load.
 */

import { SessionApi } from './api.js';
import { Workbench } from './app.js';

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const apiBase = params.get('api') ?? 'http://127.0.0.1:8000';
  const dataset = params.get('dataset') ?? 'census';
  const queries = (params.get('queries') ?? 'race:age,marital:income')
    .split(',')
    .filter(Boolean)
    .map((pair) => pair.split(':'));

  const root = document.getElementById('workbench');
  if (!root) throw new Error('missing #workbench container');
  const workbench = new Workbench(root, new SessionApi(apiBase));
  await workbench.start(dataset);
  for (const attributes of queries) {
    await workbench.addQuery(attributes);
  }
}

void boot();

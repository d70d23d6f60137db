// End-to-end loop against the real service in mock-backend mode (spawned by
// globalSetup). Every number asserted here is echoed from service responses.
import { beforeEach, describe, expect, it } from 'vitest';
import { ApiClient } from '../src/api';
import { App, createApp } from '../src/app';
import { SERVICE_URL } from './serviceUrl';

const api = new ApiClient(SERVICE_URL);

async function resetService(): Promise<void> {
  const page = await api.listCorpus({ limit: 10000 });
  for (const entry of page.items) {
    await api.deleteEntry(entry.id);
  }
  await api.patchConfig({ t: 0.875, c: 1, template: 'qa_pair' });
}

let root: HTMLElement;
let app: App;

beforeEach(async () => {
  await resetService();
  root = document.createElement('div');
  document.body.replaceChildren(root);
  app = createApp(root, api, { confirmFn: () => true, pageSize: 10 });
  await app.init();
});

describe('live revision loop', () => {
  it('shows the uncertainty banner on an empty corpus', async () => {
    await app.submitQuery('Should I lie to my best friend?');
    expect(root.querySelectorAll('.turn')).toHaveLength(1);
    expect(root.querySelector('.uncertainty-banner')).not.toBeNull();
    expect(root.querySelectorAll('.context-card')).toHaveLength(0);
    expect(root.querySelector('.corpus-count')?.textContent).toBe('0 entries');
  });

  it('feedback then re-ask shows the corrected answer with a 1.00 card', async () => {
    await app.submitQuery('Should I lie to my best friend?');
    await app.submitFeedback(0, 'No, it is wrong.', -1);
    expect(root.querySelector('.feedback-status')?.textContent).toBe('saved (created)');

    await app.reAsk(0);
    const turns = root.querySelectorAll('.turn');
    expect(turns).toHaveLength(2);
    expect(turns[1].querySelector('.uncertainty-banner')).toBeNull();
    expect(turns[1].querySelector('.answer')?.textContent).toBe('No, it is wrong.');
    expect(turns[1].querySelector('.context-similarity')?.textContent).toBe('1.00');
    const badge = turns[1].querySelector('.polarity-badge');
    expect(badge?.textContent).toBe('-1');
    expect(badge?.classList.contains('polarity-neg')).toBe(true);
  });

  it('keeps the shown corpus count equal to the service total after each mutation', async () => {
    const queries = ['Should I lie?', 'Should I help?', 'Should I nap?'];
    for (let i = 0; i < queries.length; i++) {
      await app.submitQuery(queries[i]);
      await app.submitFeedback(i, "It's okay.", 0);
      const total = (await api.listCorpus()).total;
      expect(total).toBe(i + 1);
      expect(root.querySelector('.corpus-count')?.textContent).toBe(`${total} entries`);
    }
    const row = root.querySelector('.corpus-table tr') as HTMLElement;
    await app.deleteEntry(row.dataset.id!);
    const total = (await api.listCorpus()).total;
    expect(total).toBe(2);
    expect(root.querySelector('.corpus-count')?.textContent).toBe('2 entries');
  });

  it('raising t past a paraphrase similarity brings the banner back', async () => {
    await app.applyConfig({ t: 0.2 });
    await api.feedback('Should I lie to my best friend?', 'No, it is wrong.', -1);
    await app.submitQuery('Can I lie to my best friend sometimes?');
    let turn = root.querySelectorAll('.turn')[0];
    expect(turn.querySelector('.uncertainty-banner')).toBeNull();
    const shown = turn.querySelector('.context-similarity')?.textContent;
    const similarity = Number(shown);
    expect(similarity).toBeGreaterThanOrEqual(0.2);
    expect(similarity).toBeLessThan(0.999);

    await app.applyConfig({ t: 0.999 });
    await app.submitQuery('Can I lie to my best friend sometimes?');
    turn = root.querySelectorAll('.turn')[1];
    expect(turn.querySelector('.uncertainty-banner')).not.toBeNull();
    expect(turn.querySelectorAll('.context-card')).toHaveLength(0);
  });

  it('inline polarity edits round-trip through the service', async () => {
    await api.feedback('Should I nap?', "It's okay.", 0);
    await app.refreshCorpus();
    const row = root.querySelector('.corpus-table tr') as HTMLElement;
    await app.setEntryPolarity(row.dataset.id!, 1);
    const entry = (await api.listCorpus()).items[0];
    expect(entry.polarity).toBe(1);
    const select = root.querySelector('.entry-polarity') as HTMLSelectElement;
    expect(select.value).toBe('1');
  });
});

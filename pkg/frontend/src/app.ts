import { Polarity, QueryResponse, RevisionApi } from './types';

export interface AppOptions {
  /** Injectable so tests can accept or decline deletes without a real dialog. */
  confirmFn?: (message: string) => boolean;
  pageSize?: number;
}

interface Turn {
  query: string;
  response: QueryResponse;
  feedback?: { created: boolean };
}

const POLARITY_LABELS: Record<Polarity, string> = { [-1]: '-1', 0: '0', 1: '+1' };
const POLARITY_CLASSES: Record<Polarity, string> = {
  [-1]: 'polarity-neg',
  0: 'polarity-neu',
  1: 'polarity-pos',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function polarityBadge(polarity: Polarity, lowConfidence = false): HTMLElement {
  const badge = el('span', `polarity-badge ${POLARITY_CLASSES[polarity]}`, POLARITY_LABELS[polarity]);
  if (lowConfidence) badge.classList.add('low-confidence');
  return badge;
}

function polaritySelect(className: string, value: Polarity): HTMLSelectElement {
  const select = el('select', className);
  for (const polarity of [1, 0, -1] as Polarity[]) {
    const option = el('option', undefined, POLARITY_LABELS[polarity]);
    option.value = String(polarity);
    select.append(option);
  }
  select.value = String(value);
  return select;
}

export class App {
  private turns: Turn[] = [];
  private offset = 0;
  private search = '';
  private total = 0;
  private readonly pageSize: number;
  private readonly confirmFn: (message: string) => boolean;

  private turnsBox!: HTMLElement;
  private toastBox!: HTMLElement;
  private noticeBox!: HTMLElement;
  private corpusBody!: HTMLTableSectionElement;
  private countBox!: HTMLElement;
  private pageLabel!: HTMLElement;
  private tSlider!: HTMLInputElement;
  private tValue!: HTMLElement;
  private cInput!: HTMLInputElement;
  private templateSelect!: HTMLSelectElement;
  private configStatus!: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: RevisionApi,
    options: AppOptions = {},
  ) {
    this.pageSize = options.pageSize ?? 10;
    this.confirmFn = options.confirmFn ?? ((message) => window.confirm(message));
    this.buildLayout();
  }

  async init(): Promise<void> {
    await Promise.all([this.refreshCorpus(), this.refreshConfig()]);
  }

  // -- chat ------------------------------------------------------------------

  async submitQuery(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed) return;
    let response: QueryResponse;
    try {
      response = await this.api.query(trimmed);
      if (typeof response?.answer !== 'string' || !Array.isArray(response?.contexts)) {
        throw new Error('malformed service response');
      }
    } catch (err) {
      this.toast(err instanceof Error ? err.message : String(err));
      return;
    }
    this.turns.push({ query: trimmed, response });
    this.renderTurns();
  }

  async submitFeedback(turnIndex: number, answer: string, polarity: Polarity): Promise<void> {
    const turn = this.turns[turnIndex];
    if (!turn || !answer.trim()) return;
    try {
      const result = await this.api.feedback(turn.query, answer.trim(), polarity);
      turn.feedback = { created: result.created };
    } catch (err) {
      this.toast(err instanceof Error ? err.message : String(err));
      return;
    }
    this.renderTurns();
    await this.refreshCorpus();
  }

  async reAsk(turnIndex: number): Promise<void> {
    const turn = this.turns[turnIndex];
    if (turn) await this.submitQuery(turn.query);
  }

  // -- corpus browser --------------------------------------------------------

  async refreshCorpus(): Promise<void> {
    const page = await this.api.listCorpus({
      offset: this.offset,
      limit: this.pageSize,
      search: this.search || undefined,
    });
    this.total = page.total;
    this.countBox.textContent = `${page.total} entries`;
    this.pageLabel.textContent = `${this.offset + 1}-${this.offset + page.items.length} of ${page.total}`;
    this.corpusBody.replaceChildren();
    for (const entry of page.items) {
      const row = el('tr');
      row.dataset.id = entry.id;
      row.append(el('td', 'entry-query', entry.query));
      row.append(el('td', 'entry-answer', entry.answer));

      const polarityCell = el('td');
      const select = polaritySelect('entry-polarity', entry.polarity);
      select.addEventListener('change', () => {
        void this.setEntryPolarity(entry.id, Number(select.value) as Polarity);
      });
      polarityCell.append(select);
      row.append(polarityCell);

      const deleteCell = el('td');
      const deleteButton = el('button', 'entry-delete', 'delete');
      deleteButton.addEventListener('click', () => void this.deleteEntry(entry.id));
      deleteCell.append(deleteButton);
      row.append(deleteCell);
      this.corpusBody.append(row);
    }
  }

  async setSearch(text: string): Promise<void> {
    this.search = text;
    this.offset = 0;
    await this.refreshCorpus();
  }

  async nextPage(): Promise<void> {
    if (this.offset + this.pageSize < this.total) {
      this.offset += this.pageSize;
      await this.refreshCorpus();
    }
  }

  async prevPage(): Promise<void> {
    this.offset = Math.max(0, this.offset - this.pageSize);
    await this.refreshCorpus();
  }

  async deleteEntry(id: string): Promise<void> {
    if (!this.confirmFn(`Delete entry ${id}?`)) return;
    try {
      await this.api.deleteEntry(id);
    } catch (err) {
      // a row deleted elsewhere is already gone; drop it with a notice
      this.notice(`entry ${id} was already removed`);
    }
    await this.refreshCorpus();
  }

  async setEntryPolarity(id: string, polarity: Polarity): Promise<void> {
    try {
      await this.api.patchEntry(id, { polarity });
    } catch (err) {
      this.toast(err instanceof Error ? err.message : String(err));
    }
    await this.refreshCorpus();
  }

  // -- config panel ----------------------------------------------------------

  async refreshConfig(): Promise<void> {
    const config = await this.api.getConfig();
    this.showConfig(config.t, config.c, config.template);
  }

  async applyConfig(fields: { t?: number; c?: number; template?: string }): Promise<void> {
    try {
      const config = await this.api.patchConfig(fields);
      this.showConfig(config.t, config.c, config.template);
      this.configStatus.textContent = 'saved';
    } catch (err) {
      this.configStatus.textContent = '';
      this.toast(err instanceof Error ? err.message : String(err));
    }
  }

  private showConfig(t: number, c: number, template: string): void {
    this.tSlider.value = String(t);
    this.tValue.textContent = String(t);
    this.cInput.value = String(c);
    this.templateSelect.value = template;
  }

  // -- rendering -------------------------------------------------------------

  private buildLayout(): void {
    this.root.replaceChildren();
    const chat = el('section', 'chat');
    const queryForm = el('form', 'query-form');
    const queryInput = el('input', 'query-input');
    queryInput.placeholder = 'Ask a question';
    const queryButton = el('button', 'query-submit', 'Ask');
    queryButton.type = 'submit';
    queryForm.append(queryInput, queryButton);
    queryForm.addEventListener('submit', (event) => {
      event.preventDefault();
      const text = queryInput.value;
      queryInput.value = '';
      void this.submitQuery(text);
    });
    this.toastBox = el('div', 'toast');
    this.turnsBox = el('div', 'turns');
    chat.append(queryForm, this.toastBox, this.turnsBox);

    const side = el('section', 'side');
    this.noticeBox = el('div', 'notice');

    const corpus = el('div', 'corpus');
    corpus.append(el('h2', undefined, 'Revision corpus'));
    this.countBox = el('div', 'corpus-count', '0 entries');
    const searchInput = el('input', 'corpus-search');
    searchInput.placeholder = 'Search queries';
    searchInput.addEventListener('input', () => void this.setSearch(searchInput.value));
    const table = el('table', 'corpus-table');
    this.corpusBody = document.createElement('tbody');
    table.append(this.corpusBody);
    const pager = el('div', 'pager');
    const prev = el('button', 'page-prev', 'prev');
    prev.addEventListener('click', () => void this.prevPage());
    const next = el('button', 'page-next', 'next');
    next.addEventListener('click', () => void this.nextPage());
    this.pageLabel = el('span', 'page-label');
    pager.append(prev, this.pageLabel, next);
    corpus.append(this.countBox, searchInput, table, pager);

    const config = el('div', 'config');
    config.append(el('h2', undefined, 'Retrieval settings'));
    this.tSlider = el('input', 'config-t');
    this.tSlider.type = 'range';
    this.tSlider.min = '-1';
    this.tSlider.max = '1';
    this.tSlider.step = '0.005';
    this.tValue = el('span', 'config-t-value');
    this.tSlider.addEventListener('input', () => {
      this.tValue.textContent = this.tSlider.value;
    });
    this.cInput = el('input', 'config-c');
    this.cInput.type = 'number';
    this.cInput.min = '1';
    this.cInput.step = '1';
    this.templateSelect = el('select', 'config-template');
    for (const template of ['qa_pair', 'context_statement']) {
      const option = el('option', undefined, template);
      option.value = template;
      this.templateSelect.append(option);
    }
    const apply = el('button', 'config-apply', 'Apply');
    apply.addEventListener('click', () => {
      void this.applyConfig({
        t: Number(this.tSlider.value),
        c: Number(this.cInput.value),
        template: this.templateSelect.value,
      });
    });
    this.configStatus = el('span', 'config-status');
    config.append(this.tSlider, this.tValue, this.cInput, this.templateSelect, apply, this.configStatus);

    side.append(this.noticeBox, corpus, config);
    this.root.append(chat, side);
  }

  private renderTurns(): void {
    this.turnsBox.replaceChildren();
    this.turns.forEach((turn, index) => this.turnsBox.append(this.renderTurn(turn, index)));
  }

  private renderTurn(turn: Turn, index: number): HTMLElement {
    const { response } = turn;
    const box = el('article', 'turn');
    box.append(el('div', 'turn-query', turn.query));

    const answerRow = el('div', 'answer-row');
    answerRow.append(el('span', 'answer', response.answer));
    answerRow.append(polarityBadge(response.polarity, response.low_confidence));
    box.append(answerRow);

    if (response.contexts.length === 0) {
      box.append(el('div', 'uncertainty-banner',
        'no context found at this threshold; add feedback to supply one'));
    }
    for (const context of response.contexts) {
      const card = el('div', 'context-card');
      card.append(el('span', 'context-similarity', context.similarity.toFixed(2)));
      card.append(el('span', 'context-query', context.query));
      card.append(el('span', 'context-answer', context.answer));
      card.append(polarityBadge(context.polarity));
      box.append(card);
    }

    const promptBox = el('details', 'prompt-box');
    promptBox.append(el('summary', undefined, 'prompt'));
    promptBox.append(el('pre', 'prompt-text', response.prompt));
    box.append(promptBox);

    const form = el('form', 'feedback-form');
    const answerInput = el('input', 'feedback-answer');
    answerInput.placeholder = 'Corrected answer';
    const select = polaritySelect('feedback-polarity', response.polarity);
    const submit = el('button', 'feedback-submit', 'Send feedback');
    submit.type = 'submit';
    form.append(answerInput, select, submit);
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.submitFeedback(index, answerInput.value, Number(select.value) as Polarity);
    });
    box.append(form);

    if (turn.feedback) {
      box.append(el('span', 'feedback-status',
        turn.feedback.created ? 'saved (created)' : 'saved (updated)'));
      const reAsk = el('button', 're-ask', 'Re-ask');
      reAsk.addEventListener('click', () => void this.reAsk(index));
      box.append(reAsk);
    }
    return box;
  }

  private toast(message: string): void {
    this.toastBox.textContent = message;
  }

  private notice(message: string): void {
    this.noticeBox.textContent = message;
  }
}

export function createApp(root: HTMLElement, api: RevisionApi, options?: AppOptions): App {
  return new App(root, api, options);
}

import {
  CorpusEntry,
  CorpusPage,
  FeedbackResponse,
  HealthResponse,
  Polarity,
  QueryResponse,
  RetrievalConfigView,
  RevisionApi,
} from './types';

export class ApiError extends Error {
  constructor(public status: number, public code: string, detail: string) {
    super(detail);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = 'http_error';
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body?.error === 'string') code = body.error;
    if (typeof body?.detail === 'string') detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, detail);
}

export class ApiClient implements RevisionApi {
  constructor(private baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(`${this.baseUrl}/v1${path}`, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.json() as Promise<T>;
  }

  health(): Promise<HealthResponse> {
    return this.request('/health');
  }

  query(text: string, overrides?: { t?: number; c?: number; template?: string }): Promise<QueryResponse> {
    return this.request('/query', {
      method: 'POST',
      body: JSON.stringify({ text, ...overrides }),
    });
  }

  feedback(query: string, answer: string, polarity: Polarity): Promise<FeedbackResponse> {
    return this.request('/feedback', {
      method: 'POST',
      body: JSON.stringify({ query, answer, polarity }),
    });
  }

  listCorpus(params?: { offset?: number; limit?: number; search?: string }): Promise<CorpusPage> {
    const query = new URLSearchParams();
    if (params?.offset !== undefined) query.set('offset', String(params.offset));
    if (params?.limit !== undefined) query.set('limit', String(params.limit));
    if (params?.search) query.set('search', params.search);
    const suffix = query.toString() ? `?${query.toString()}` : '';
    return this.request(`/corpus${suffix}`);
  }

  patchEntry(id: string, fields: { query?: string; answer?: string; polarity?: Polarity }): Promise<CorpusEntry> {
    return this.request(`/corpus/${id}`, { method: 'PATCH', body: JSON.stringify(fields) });
  }

  async deleteEntry(id: string): Promise<void> {
    await this.request(`/corpus/${id}`, { method: 'DELETE' });
  }

  getConfig(): Promise<RetrievalConfigView> {
    return this.request('/config');
  }

  patchConfig(fields: { t?: number; c?: number; template?: string }): Promise<RetrievalConfigView> {
    return this.request('/config', { method: 'PATCH', body: JSON.stringify(fields) });
  }
}

export type Polarity = -1 | 0 | 1;

export interface ContextCard {
  id: string;
  similarity: number;
  query: string;
  answer: string;
  polarity: Polarity;
}

export interface QueryResponse {
  answer: string;
  polarity: Polarity;
  low_confidence: boolean;
  uncertain: boolean;
  contexts: ContextCard[];
  prompt: string;
}

export interface FeedbackResponse {
  id: string;
  created: boolean;
}

export interface CorpusEntry {
  id: string;
  query: string;
  answer: string;
  polarity: Polarity;
  source: string;
  created_at: number;
}

export interface CorpusPage {
  items: CorpusEntry[];
  total: number;
}

export interface RetrievalConfigView {
  t: number;
  c: number;
  template: 'qa_pair' | 'context_statement';
  backend_mode: string;
}

export interface HealthResponse {
  status: string;
  backend_mode: string;
  corpus_count: number;
}

/** The slice of the /v1 API the views depend on; tests substitute fakes. */
export interface RevisionApi {
  health(): Promise<HealthResponse>;
  query(text: string, overrides?: { t?: number; c?: number; template?: string }): Promise<QueryResponse>;
  feedback(query: string, answer: string, polarity: Polarity): Promise<FeedbackResponse>;
  listCorpus(params?: { offset?: number; limit?: number; search?: string }): Promise<CorpusPage>;
  patchEntry(id: string, fields: { query?: string; answer?: string; polarity?: Polarity }): Promise<CorpusEntry>;
  deleteEntry(id: string): Promise<void>;
  getConfig(): Promise<RetrievalConfigView>;
  patchConfig(fields: { t?: number; c?: number; template?: string }): Promise<RetrievalConfigView>;
}

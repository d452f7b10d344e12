/** Payload shapes of the annotation service API. */

export interface TokenPayload {
  surface: string;
  char_start: number;
  char_end: number;
  lemma: string;
  is_content: boolean;
}

export interface TextPayload {
  id: string;
  raw_text: string;
  tokens: TokenPayload[];
  /** Token-index ranges (end exclusive) partitioning the tokens. */
  sentences: [number, number][];
  /** Sentence-index ranges partitioning the sentences. */
  paragraphs: [number, number][];
}

export interface AlignmentPayload {
  seq: number;
  summary_spans: [number, number][];
  document_spans: [number, number][];
  annotator_id: string;
  deleted: boolean;
}

export interface SessionPayload {
  visited: number[];
  current_summary_sentence: number;
  status: "in_progress" | "complete";
  annotator_ids: string[];
}

export interface PairPayload {
  id: string;
  provenance: string;
  document: TextPayload;
  summary: TextPayload;
  /** One mask per summary sentence, one boolean per document token. */
  bold_masks: boolean[][];
  alignments: AlignmentPayload[];
  session: SessionPayload;
  version: number;
}

export interface PairListEntry {
  id: string;
  status: string;
  version: number;
}

export interface SaveAlignmentBody {
  summary_spans: [number, number][];
  document_spans: [number, number][];
  annotator_id: string;
}

export interface SavedAlignmentResponse {
  seq: number;
  summary_spans: [number, number][];
  document_spans: [number, number][];
  annotator_id: string;
  version: number;
}

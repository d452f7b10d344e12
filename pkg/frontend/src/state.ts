import type { PairPayload, SaveAlignmentBody } from "./types.js";

export interface TokenRange {
  start: number;
  /** exclusive */
  end: number;
}

/**
 * A pending (unsaved) token-range selection on one text side.
 *
 * Ranges stay canonical: sorted, disjoint, overlapping or touching additions
 * merge, so re-selecting an already-pending token is idempotent and the
 * outgoing payload never contains overlapping spans. Discontinuous facts are
 * just multiple disjoint ranges added before save.
 */
export class PendingSelection {
  private ranges: TokenRange[] = [];

  addRange(start: number, end: number): void {
    if (!(Number.isInteger(start) && Number.isInteger(end) && start < end)) {
      throw new RangeError(`bad token range [${start}, ${end})`);
    }
    const merged: TokenRange[] = [];
    let candidate: TokenRange = { start, end };
    for (const range of this.ranges) {
      if (range.end < candidate.start || range.start > candidate.end) {
        merged.push(range);
      } else {
        candidate = {
          start: Math.min(range.start, candidate.start),
          end: Math.max(range.end, candidate.end),
        };
      }
    }
    merged.push(candidate);
    merged.sort((a, b) => a.start - b.start);
    this.ranges = merged;
  }

  addToken(index: number): void {
    this.addRange(index, index + 1);
  }

  removeToken(index: number): void {
    const next: TokenRange[] = [];
    for (const range of this.ranges) {
      if (index < range.start || index >= range.end) {
        next.push(range);
        continue;
      }
      if (range.start < index) next.push({ start: range.start, end: index });
      if (index + 1 < range.end) next.push({ start: index + 1, end: range.end });
    }
    this.ranges = next;
  }

  contains(index: number): boolean {
    return this.ranges.some((r) => r.start <= index && index < r.end);
  }

  get isEmpty(): boolean {
    return this.ranges.length === 0;
  }

  clear(): void {
    this.ranges = [];
  }

  spans(): [number, number][] {
    return this.ranges.map((r) => [r.start, r.end]);
  }
}

export interface TokenView {
  text: string;
  /** part of the unsaved selection (normal highlight) */
  pending: boolean;
  /** part of a saved alignment (faded highlight) */
  saved: boolean;
  /** document side only: server-computed lemma relatedness, if toggled on */
  bold: boolean;
  /** summary side only: inside the active sentence box */
  active: boolean;
}

/**
 * View-model of one annotation session.
 *
 * The server is the source of truth: saved alignments, visit state, and
 * versions only change through `applyServerPair` after an acknowledged
 * request. Exactly one summary sentence is active at a time; bold flags come
 * verbatim from the served per-sentence masks.
 */
export class UiState {
  pair: PairPayload;
  currentSentence: number;
  readonly pendingSummary = new PendingSelection();
  readonly pendingDocument = new PendingSelection();
  boldEnabled = false;
  annotatorId: string;
  /** inline error text from the last failed request, if any */
  error: string | null = null;
  /** set when the server version advanced more than this client caused */
  staleNotice: string | null = null;

  constructor(pair: PairPayload, annotatorId = "anonymous") {
    this.pair = pair;
    this.annotatorId = annotatorId;
    this.currentSentence = this.clampSentence(
      pair.session.current_summary_sentence,
    );
  }

  private clampSentence(index: number): number {
    const last = Math.max(this.pair.summary.sentences.length - 1, 0);
    return Math.min(Math.max(index, 0), last);
  }

  get sentenceCount(): number {
    return this.pair.summary.sentences.length;
  }

  get liveAlignments() {
    return this.pair.alignments.filter((a) => !a.deleted);
  }

  get isComplete(): boolean {
    return this.pair.session.status === "complete";
  }

  /** Save is disabled until both sides carry a selection. */
  get canSave(): boolean {
    return !this.pendingSummary.isEmpty && !this.pendingDocument.isEmpty;
  }

  /**
   * Outgoing alignment payload. Ranges are validated against the served
   * token counts; nothing out of bounds ever leaves the client.
   */
  buildSavePayload(): SaveAlignmentBody {
    if (!this.canSave) {
      throw new Error("both a summary and a document selection are required");
    }
    const check = (spans: [number, number][], count: number, side: string) => {
      for (const [start, end] of spans) {
        if (start < 0 || end > count) {
          throw new RangeError(
            `${side} span [${start}, ${end}) outside 0..${count}`,
          );
        }
      }
    };
    const summarySpans = this.pendingSummary.spans();
    const documentSpans = this.pendingDocument.spans();
    check(summarySpans, this.pair.summary.tokens.length, "summary");
    check(documentSpans, this.pair.document.tokens.length, "document");
    return {
      summary_spans: summarySpans,
      document_spans: documentSpans,
      annotator_id: this.annotatorId,
    };
  }

  /** Adopt the server's canonical state after an acknowledged request. */
  applyServerPair(pair: PairPayload, causedEvents = 0): void {
    if (pair.id !== this.pair.id) {
      throw new Error(`payload for pair ${pair.id}, expected ${this.pair.id}`);
    }
    if (pair.version < this.pair.version) {
      throw new Error(
        `server version went backwards (${this.pair.version} -> ${pair.version})`,
      );
    }
    if (pair.version > this.pair.version + causedEvents) {
      this.staleNotice = `pair changed elsewhere (version ${this.pair.version} -> ${pair.version})`;
    }
    this.pair = pair;
    this.currentSentence = this.clampSentence(this.currentSentence);
  }

  clearPending(): void {
    this.pendingSummary.clear();
    this.pendingDocument.clear();
  }

  /** True when advancing from the last sentence, i.e. time to complete. */
  get onLastSentence(): boolean {
    return this.currentSentence >= this.sentenceCount - 1;
  }

  advanceLocally(): void {
    this.currentSentence = this.clampSentence(this.currentSentence + 1);
    this.clearPending();
  }

  setSentence(index: number): void {
    this.currentSentence = this.clampSentence(index);
    this.clearPending();
  }

  private savedTokenSet(side: "summary" | "document"): Set<number> {
    const key = side === "summary" ? "summary_spans" : "document_spans";
    const saved = new Set<number>();
    for (const alignment of this.liveAlignments) {
      for (const [start, end] of alignment[key]) {
        for (let i = start; i < end; i++) saved.add(i);
      }
    }
    return saved;
  }

  /** Per-token render flags for one side; bold comes straight from the
   * served mask of the active sentence and is never recomputed locally. */
  tokenViews(side: "summary" | "document"): TokenView[] {
    const text = side === "summary" ? this.pair.summary : this.pair.document;
    const pending =
      side === "summary" ? this.pendingSummary : this.pendingDocument;
    const saved = this.savedTokenSet(side);
    const mask =
      side === "document" ? (this.pair.bold_masks[this.currentSentence] ?? []) : [];
    const sentenceRange =
      side === "summary"
        ? this.pair.summary.sentences[this.currentSentence]
        : undefined;
    return text.tokens.map((token, i) => ({
      text: token.surface,
      pending: pending.contains(i),
      saved: saved.has(i),
      bold: side === "document" && this.boldEnabled && mask[i] === true,
      active:
        sentenceRange !== undefined &&
        i >= sentenceRange[0] &&
        i < sentenceRange[1],
    }));
  }
}

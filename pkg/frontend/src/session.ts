import { ApiClient, ApiError } from "./api.js";
import { UiState } from "./state.js";

/**
 * Sequences the annotate-save-advance workflow against the server.
 *
 * Every mutation follows request -> acknowledgment -> refresh: local state
 * only changes after the server confirmed, so the client can never drift from
 * the stored log. Failures land in `state.error` for inline display.
 */
export class AnnotationSession {
  constructor(
    private readonly api: ApiClient,
    readonly state: UiState,
  ) {}

  private fail(error: unknown): false {
    if (error instanceof ApiError) {
      const detail = error.detail;
      if (detail && typeof detail === "object" && "message" in detail) {
        const info = detail as { message: string; unvisited_sentences?: number[] };
        this.state.error = info.unvisited_sentences
          ? `${info.message}: ${info.unvisited_sentences.join(", ")}`
          : info.message;
      } else {
        this.state.error = String(detail);
      }
      return false;
    }
    throw error;
  }

  async refresh(causedEvents = 0): Promise<void> {
    const pair = await this.api.getPair(this.state.pair.id);
    this.state.applyServerPair(pair, causedEvents);
  }

  /** POST the pending alignment; on acknowledgment adopt the server state. */
  async save(): Promise<boolean> {
    this.state.error = null;
    let body;
    try {
      body = this.state.buildSavePayload();
    } catch (error) {
      this.state.error = (error as Error).message;
      return false;
    }
    try {
      await this.api.saveAlignment(this.state.pair.id, body);
    } catch (error) {
      return this.fail(error);
    }
    await this.refresh(1);
    this.state.clearPending();
    return true;
  }

  /** Mark the active sentence visited and move on; past the last sentence
   * this asks the server to complete the pair. */
  async advance(): Promise<boolean> {
    this.state.error = null;
    const wasLast = this.state.onLastSentence;
    try {
      await this.api.visit(this.state.pair.id, this.state.currentSentence);
      if (wasLast) {
        await this.api.complete(this.state.pair.id);
      }
    } catch (error) {
      await this.refresh(1).catch(() => undefined);
      return this.fail(error);
    }
    await this.refresh(wasLast ? 2 : 1);
    if (!wasLast) {
      this.state.advanceLocally();
    } else {
      this.state.clearPending();
    }
    return true;
  }

  async remove(seq: number): Promise<boolean> {
    this.state.error = null;
    try {
      await this.api.deleteAlignment(this.state.pair.id, seq);
    } catch (error) {
      return this.fail(error);
    }
    await this.refresh(1);
    return true;
  }
}

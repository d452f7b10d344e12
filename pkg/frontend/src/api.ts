import type {
  PairListEntry,
  PairPayload,
  SaveAlignmentBody,
  SavedAlignmentResponse,
} from "./types.js";

/** Error carrying the server's validation detail for inline display. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.status = status;
    this.detail = detail;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in body
        ? (body as { detail: unknown }).detail
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

/** Thin client over the annotation service; the server owns all state. */
export class ApiClient {
  constructor(private readonly base: string = "") {}

  listPairs(): Promise<{ pairs: PairListEntry[] }> {
    return request(`${this.base}/pairs`);
  }

  getPair(pairId: string): Promise<PairPayload> {
    return request(`${this.base}/pairs/${pairId}`);
  }

  saveAlignment(
    pairId: string,
    body: SaveAlignmentBody,
  ): Promise<SavedAlignmentResponse> {
    return request(`${this.base}/pairs/${pairId}/alignments`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  deleteAlignment(pairId: string, seq: number): Promise<{ deleted: number }> {
    return request(`${this.base}/pairs/${pairId}/alignments/${seq}`, {
      method: "DELETE",
    });
  }

  visit(
    pairId: string,
    sentenceIndex: number,
  ): Promise<{ visited: number[]; current_summary_sentence: number }> {
    return request(`${this.base}/pairs/${pairId}/visit`, {
      method: "POST",
      body: JSON.stringify({ sentence_index: sentenceIndex }),
    });
  }

  complete(pairId: string): Promise<{ status: string }> {
    return request(`${this.base}/pairs/${pairId}/complete`, { method: "POST" });
  }
}

import { ApiClient } from "./api.js";
import { AnnotationSession } from "./session.js";
import { UiState } from "./state.js";
import type { PairListEntry } from "./types.js";

const api = new ApiClient("");

let session: AnnotationSession | null = null;

// Drag selection state: which side the drag started on and its anchor token.
let dragSide: "summary" | "document" | null = null;
let dragAnchor = -1;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderPairList(entries: PairListEntry[]): void {
  const select = el<HTMLSelectElement>("pair-select");
  select.innerHTML = "";
  for (const entry of entries) {
    const option = document.createElement("option");
    option.value = entry.id;
    option.textContent = `${entry.id} (${entry.status})`;
    select.appendChild(option);
  }
}

function tokenSpan(
  side: "summary" | "document",
  index: number,
  view: { text: string; pending: boolean; saved: boolean; bold: boolean; active: boolean },
): HTMLSpanElement {
  const span = document.createElement("span");
  span.className = "token";
  span.dataset.side = side;
  span.dataset.index = String(index);
  span.textContent = view.text;
  if (view.pending) span.classList.add("pending");
  else if (view.saved) span.classList.add("saved");
  if (view.bold) span.classList.add("bold");
  return span;
}

function render(): void {
  if (!session) return;
  const state = session.state;
  const summaryViews = state.tokenViews("summary");
  const documentViews = state.tokenViews("document");

  const summaryBox = el("summary-box");
  summaryBox.innerHTML = "";
  state.pair.summary.sentences.forEach(([start, end], s) => {
    const sentence = document.createElement("span");
    sentence.className = "sentence";
    if (s === state.currentSentence) sentence.classList.add("active");
    if (state.pair.session.visited.includes(s)) sentence.classList.add("visited");
    for (let i = start; i < end; i++) {
      sentence.appendChild(tokenSpan("summary", i, summaryViews[i]!));
      sentence.appendChild(document.createTextNode(" "));
    }
    sentence.addEventListener("dblclick", () => {
      state.setSentence(s);
      render();
    });
    summaryBox.appendChild(sentence);
  });

  const documentBox = el("document-box");
  documentBox.innerHTML = "";
  for (const [pStart, pEnd] of state.pair.document.paragraphs) {
    const paragraph = document.createElement("p");
    paragraph.className = "paragraph";
    for (let s = pStart; s < pEnd; s++) {
      const [start, end] = state.pair.document.sentences[s]!;
      for (let i = start; i < end; i++) {
        paragraph.appendChild(tokenSpan("document", i, documentViews[i]!));
        paragraph.appendChild(document.createTextNode(" "));
      }
    }
    documentBox.appendChild(paragraph);
  }

  const list = el("alignment-list");
  list.innerHTML = "";
  for (const alignment of state.liveAlignments) {
    const item = document.createElement("li");
    const describe = (spans: [number, number][]) =>
      spans.map(([s, e]) => `[${s},${e})`).join(" ");
    item.textContent =
      `#${alignment.seq} ${alignment.annotator_id}: ` +
      `summary ${describe(alignment.summary_spans)} -> ` +
      `document ${describe(alignment.document_spans)} `;
    const remove = document.createElement("button");
    remove.textContent = "delete";
    remove.addEventListener("click", async () => {
      await session!.remove(alignment.seq);
      render();
    });
    item.appendChild(remove);
    list.appendChild(item);
  }

  el("status-line").textContent =
    `sentence ${state.currentSentence + 1}/${state.sentenceCount}` +
    ` | status: ${state.pair.session.status}` +
    ` | version ${state.pair.version}` +
    (state.staleNotice ? ` | ${state.staleNotice}` : "");
  el("error-line").textContent = state.error ?? "";
  el<HTMLButtonElement>("save-btn").disabled = !state.canSave;
  el<HTMLButtonElement>("advance-btn").textContent = state.onLastSentence
    ? "Finish pair"
    : "Next sentence";
}

function selectionTarget(event: Event): { side: "summary" | "document"; index: number } | null {
  const target = event.target as HTMLElement | null;
  if (!target || !target.classList.contains("token")) return null;
  const side = target.dataset.side as "summary" | "document";
  return { side, index: Number(target.dataset.index) };
}

function wireSelection(): void {
  document.addEventListener("mousedown", (event) => {
    const hit = selectionTarget(event);
    if (!hit || !session) return;
    event.preventDefault();
    dragSide = hit.side;
    dragAnchor = hit.index;
  });
  document.addEventListener("mouseover", (event) => {
    if (dragSide === null || !session) return;
    const hit = selectionTarget(event);
    if (!hit || hit.side !== dragSide) return;
    const pending =
      dragSide === "summary"
        ? session.state.pendingSummary
        : session.state.pendingDocument;
    pending.addRange(
      Math.min(dragAnchor, hit.index),
      Math.max(dragAnchor, hit.index) + 1,
    );
    render();
  });
  document.addEventListener("mouseup", (event) => {
    if (dragSide === null || !session) return;
    const hit = selectionTarget(event);
    if (hit && hit.side === dragSide) {
      const pending =
        dragSide === "summary"
          ? session.state.pendingSummary
          : session.state.pendingDocument;
      pending.addRange(
        Math.min(dragAnchor, hit.index),
        Math.max(dragAnchor, hit.index) + 1,
      );
    }
    dragSide = null;
    render();
  });
}

async function loadPair(pairId: string): Promise<void> {
  const annotator = el<HTMLInputElement>("annotator-input").value || "anonymous";
  const pair = await api.getPair(pairId);
  session = new AnnotationSession(api, new UiState(pair, annotator));
  render();
}

async function boot(): Promise<void> {
  const listing = await api.listPairs();
  renderPairList(listing.pairs);
  const select = el<HTMLSelectElement>("pair-select");
  select.addEventListener("change", () => void loadPair(select.value));
  el("load-btn").addEventListener("click", () => void loadPair(select.value));

  el("save-btn").addEventListener("click", async () => {
    if (!session) return;
    await session.save();
    render();
  });
  el("clear-btn").addEventListener("click", () => {
    session?.state.clearPending();
    render();
  });
  el("advance-btn").addEventListener("click", async () => {
    if (!session) return;
    await session.advance();
    render();
  });
  el<HTMLInputElement>("bold-toggle").addEventListener("change", (event) => {
    if (!session) return;
    session.state.boldEnabled = (event.target as HTMLInputElement).checked;
    render();
  });

  wireSelection();
  if (listing.pairs.length > 0) {
    await loadPair(listing.pairs[0]!.id);
  }
}

void boot();

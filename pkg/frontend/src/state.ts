/** Pure state transitions for the review session.
 *
 * The annotator walks the queue item by item: open, edit, optionally
 * rescore (preview only), then accept or reject. A stale-revision conflict
 * keeps the edit buffer intact and asks for a reload; a transport failure
 * raises the retry banner without losing anything.
 */

import type { ComponentScores, ReviewItem, Stats } from "./api.js";

export interface AppState {
  items: ReviewItem[];
  page: number;
  total: number;
  stats: Stats | null;
  openId: number | null;
  editBuffer: string;
  /** Last preview returned by rescore for the open item, if any. */
  preview: ComponentScores | null;
  conflict: boolean;
  /** Retry banner message; null when the service is reachable. */
  bannerError: string | null;
}

export function initialState(): AppState {
  return {
    items: [],
    page: 1,
    total: 0,
    stats: null,
    openId: null,
    editBuffer: "",
    preview: null,
    conflict: false,
    bannerError: null,
  };
}

export function withQueue(state: AppState, items: ReviewItem[], page: number, total: number): AppState {
  const next = { ...state, items, page, total, bannerError: null };
  // keep the open item if it is still queued, otherwise close the editor
  if (state.openId !== null && !items.some((i) => i.caption_id === state.openId)) {
    return closeEditor(next);
  }
  return next;
}

export function withStats(state: AppState, stats: Stats): AppState {
  return { ...state, stats, bannerError: null };
}

export function openItem(state: AppState, captionId: number): AppState {
  const item = state.items.find((i) => i.caption_id === captionId);
  if (!item) return state;
  return {
    ...state,
    openId: captionId,
    editBuffer: item.current_translation,
    preview: null,
    conflict: false,
  };
}

export function closeEditor(state: AppState): AppState {
  return { ...state, openId: null, editBuffer: "", preview: null, conflict: false };
}

export function openItemOf(state: AppState): ReviewItem | null {
  return state.items.find((i) => i.caption_id === state.openId) ?? null;
}

export function editBuffer(state: AppState, text: string): AppState {
  // editing invalidates the last preview; scores shown must match the text scored
  return { ...state, editBuffer: text, preview: null };
}

export function withPreview(state: AppState, scores: ComponentScores): AppState {
  return { ...state, preview: scores, bannerError: null };
}

/** After a successful accept/reject: drop the item and advance to the next
 * one in caption_id order (or close the editor when the queue is drained). */
export function afterDecision(state: AppState, captionId: number): AppState {
  const index = state.items.findIndex((i) => i.caption_id === captionId);
  const items = state.items.filter((i) => i.caption_id !== captionId);
  const total = Math.max(0, state.total - 1);
  const next = items[Math.min(index, items.length - 1)];
  const base = { ...state, items, total, conflict: false, bannerError: null };
  if (!next) return closeEditor(base);
  return openItem(base, next.caption_id);
}

/** Stale revision: keep the annotator's edits, surface the reload prompt. */
export function onConflict(state: AppState): AppState {
  return { ...state, conflict: true };
}

/** Reload after a conflict: fresh item data, edits retained in the buffer. */
export function resolveConflict(state: AppState, fresh: ReviewItem[]): AppState {
  const keepBuffer = state.editBuffer;
  const next = withQueue({ ...state, conflict: false }, fresh, state.page, fresh.length);
  if (next.openId !== null) {
    return { ...next, editBuffer: keepBuffer, preview: null };
  }
  return next;
}

export function onTransportError(state: AppState, message: string): AppState {
  return { ...state, bannerError: message };
}

/** Components whose raw score sits below its reported threshold. */
export function flaggedComponents(
  scores: ComponentScores,
  thresholds: { comet: number; bert: number; clip: number },
): Array<"comet" | "bert" | "clip"> {
  const out: Array<"comet" | "bert" | "clip"> = [];
  if (scores.comet_raw < thresholds.comet) out.push("comet");
  if (scores.bert_raw < thresholds.bert) out.push("bert");
  if (scores.clip_raw < thresholds.clip) out.push("clip");
  return out;
}

/** Image refs are opaque; only render ones a browser could plausibly load. */
export function servableImage(fileRef: string): boolean {
  return /^(https?:\/\/|\/|\.\/)/.test(fileRef);
}

/** DOM rendering. All numbers come straight from service responses. */

import type { ComponentScores, Stats } from "./api.js";
import { AppState, flaggedComponents, openItemOf, servableImage } from "./state.js";

const COMPONENT_LABELS: Record<string, string> = {
  comet: "translation QE",
  bert: "semantic F1",
  clip: "visual grounding",
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

function fmt(value: number): string {
  return value.toFixed(3);
}

export function renderBanner(state: AppState, container: HTMLElement, onRetry: () => void): void {
  container.innerHTML = "";
  if (state.bannerError === null) return;
  const banner = el("div", "banner-error");
  banner.append(el("span", "", `Service unreachable: ${state.bannerError} `));
  const retry = el("button", "", "Retry");
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  container.append(banner);
}

function scoreBadge(scores: ComponentScores, threshold: number | undefined): HTMLElement {
  const badge = el("span", "badge", fmt(scores.hybrid));
  if (threshold !== undefined && scores.hybrid < threshold) badge.classList.add("badge-low");
  return badge;
}

export function renderQueue(
  state: AppState,
  container: HTMLElement,
  onOpen: (captionId: number) => void,
): void {
  container.innerHTML = "";
  if (state.items.length === 0) {
    container.append(el("p", "queue-empty", "queue empty"));
    return;
  }
  const thresholds = state.stats?.config.component_thresholds;
  const list = el("ul", "queue");
  for (const item of state.items) {
    const row = el("li", "queue-row");
    if (item.caption_id === state.openId) row.classList.add("queue-row-open");
    row.dataset.captionId = String(item.caption_id);
    row.append(el("span", "queue-id", `#${item.caption_id}`));
    row.append(scoreBadge(item.scores, state.stats?.config.threshold));
    if (thresholds) {
      for (const name of flaggedComponents(item.scores, thresholds)) {
        row.append(el("span", "flag", COMPONENT_LABELS[name]));
      }
    }
    row.append(el("span", "queue-source", item.source_text));
    row.addEventListener("click", () => onOpen(item.caption_id));
    list.append(row);
  }
  container.append(list);
}

function scorePanel(scores: ComponentScores, stats: Stats | null): HTMLElement {
  const panel = el("table", "score-panel");
  const thresholds = stats?.config.component_thresholds;
  const flagged = thresholds ? flaggedComponents(scores, thresholds) : [];
  const rows: Array<[string, number, boolean]> = [
    ["translation QE", scores.comet_raw, flagged.includes("comet")],
    ["semantic F1", scores.bert_raw, flagged.includes("bert")],
    ["visual grounding", scores.clip_raw, flagged.includes("clip")],
    ["hybrid", scores.hybrid, stats ? scores.hybrid < stats.config.threshold : false],
  ];
  for (const [label, value, low] of rows) {
    const tr = el("tr", low ? "score-low" : "");
    tr.append(el("td", "", label));
    tr.append(el("td", "score-value", fmt(value)));
    panel.append(tr);
  }
  return panel;
}

export interface EditorHandlers {
  onBuffer: (text: string) => void;
  onRescore: () => void;
  onAccept: () => void;
  onReject: () => void;
  onReload: () => void;
}

export function renderEditor(
  state: AppState,
  container: HTMLElement,
  handlers: EditorHandlers,
): void {
  container.innerHTML = "";
  const item = openItemOf(state);
  if (!item) {
    container.append(el("p", "editor-empty", "select a caption from the queue"));
    return;
  }
  const editor = el("div", "editor");

  if (servableImage(item.image_file_ref)) {
    const img = el("img", "editor-image");
    img.src = item.image_file_ref;
    img.alt = item.image_file_ref;
    img.addEventListener("error", () => {
      img.replaceWith(el("div", "image-placeholder", item.image_file_ref));
    });
    editor.append(img);
  } else {
    editor.append(el("div", "image-placeholder", item.image_file_ref));
  }

  editor.append(el("h3", "", `caption #${item.caption_id}`));
  editor.append(el("p", "editor-source", item.source_text));
  editor.append(el("p", "editor-bt", `back-translation: ${item.back_translation}`));
  editor.append(
    el(
      "p",
      "editor-instructions",
      "Improve sentence formulation and fluency while preserving the semantic content.",
    ),
  );

  const textarea = el("textarea", "editor-input");
  textarea.value = state.editBuffer;
  textarea.dir = "rtl"; // target language is right-to-left
  textarea.addEventListener("input", () => handlers.onBuffer(textarea.value));
  editor.append(textarea);

  const actions = el("div", "editor-actions");
  const rescore = el("button", "btn-rescore", "Rescore");
  rescore.addEventListener("click", handlers.onRescore);
  const accept = el("button", "btn-accept", "Accept");
  accept.addEventListener("click", handlers.onAccept);
  const reject = el("button", "btn-reject", "Reject");
  reject.addEventListener("click", handlers.onReject);
  actions.append(rescore, accept, reject);
  editor.append(actions);

  editor.append(el("h4", "", state.preview ? "preview scores" : "stored scores"));
  editor.append(scorePanel(state.preview ?? item.scores, state.stats));

  if (state.conflict) {
    const dialog = el("div", "conflict-dialog");
    dialog.append(
      el(
        "p",
        "",
        "Another reviewer changed this caption. Reload to get the latest revision; your edits stay in the editor.",
      ),
    );
    const reload = el("button", "btn-reload", "Reload");
    reload.addEventListener("click", handlers.onReload);
    dialog.append(reload);
    editor.append(dialog);
  }

  container.append(editor);
}

export function renderStats(state: AppState, container: HTMLElement): void {
  container.innerHTML = "";
  if (!state.stats) return;
  const counts = state.stats.counts;
  const interesting = [
    "needs_manual_review",
    "accepted_manual",
    "rejected",
    "accepted_auto",
  ];
  const bar = el("div", "stats");
  for (const key of interesting) {
    bar.append(el("span", "stat", `${key}: ${counts[key] ?? 0}`));
  }
  bar.append(el("span", "stat", `queue total: ${state.total}`));
  container.append(bar);
}

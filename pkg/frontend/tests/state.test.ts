import { describe, expect, it } from "vitest";

import type { ComponentScores, ReviewItem } from "../src/api.js";
import {
  afterDecision,
  editBuffer,
  flaggedComponents,
  initialState,
  onConflict,
  onTransportError,
  openItem,
  openItemOf,
  resolveConflict,
  servableImage,
  withPreview,
  withQueue,
} from "../src/state.js";

function scores(overrides: Partial<ComponentScores> = {}): ComponentScores {
  return {
    comet_raw: 0.75,
    bert_raw: 0.95,
    clip_raw: 0.6,
    s_orig: 0.3,
    s_bt: 0.25,
    normalized: [0.75, 0.95, 0.6],
    hybrid: 0.8,
    ...overrides,
  };
}

function item(captionId: number, overrides: Partial<ReviewItem> = {}): ReviewItem {
  return {
    caption_id: captionId,
    image_file_ref: `img_${captionId}.jpg`,
    source_text: `source ${captionId}`,
    current_translation: `translation ${captionId}`,
    back_translation: `back ${captionId}`,
    scores: scores(),
    revision: 3,
    ...overrides,
  };
}

const THRESHOLDS = { comet: 0.7, bert: 0.9, clip: 0.7 };

describe("queue state", () => {
  it("loads items and clears the error banner", () => {
    let state = onTransportError(initialState(), "boom");
    state = withQueue(state, [item(1), item(2)], 1, 2);
    expect(state.items).toHaveLength(2);
    expect(state.bannerError).toBeNull();
  });

  it("closes the editor when the open item leaves the queue", () => {
    let state = withQueue(initialState(), [item(1), item(2)], 1, 2);
    state = openItem(state, 1);
    state = withQueue(state, [item(2)], 1, 1);
    expect(state.openId).toBeNull();
    expect(state.editBuffer).toBe("");
  });
});

describe("editing", () => {
  it("opening an item seeds the edit buffer with the current translation", () => {
    let state = withQueue(initialState(), [item(7)], 1, 1);
    state = openItem(state, 7);
    expect(state.editBuffer).toBe("translation 7");
    expect(openItemOf(state)?.caption_id).toBe(7);
  });

  it("editing invalidates a stale preview", () => {
    let state = withQueue(initialState(), [item(7)], 1, 1);
    state = openItem(state, 7);
    state = withPreview(state, scores({ hybrid: 0.9 }));
    expect(state.preview?.hybrid).toBe(0.9);
    state = editBuffer(state, "new text");
    expect(state.preview).toBeNull();
  });
});

describe("decisions", () => {
  it("advances to the next queue item after a decision", () => {
    let state = withQueue(initialState(), [item(1), item(2), item(3)], 1, 3);
    state = openItem(state, 1);
    state = afterDecision(state, 1);
    expect(state.items.map((i) => i.caption_id)).toEqual([2, 3]);
    expect(state.openId).toBe(2);
    expect(state.total).toBe(2);
    expect(state.editBuffer).toBe("translation 2");
  });

  it("closes the editor when the last item is decided", () => {
    let state = withQueue(initialState(), [item(9)], 1, 1);
    state = openItem(state, 9);
    state = afterDecision(state, 9);
    expect(state.openId).toBeNull();
    expect(state.items).toHaveLength(0);
  });

  it("a conflict keeps the edit buffer for the reload flow", () => {
    let state = withQueue(initialState(), [item(5, { revision: 1 })], 1, 1);
    state = openItem(state, 5);
    state = editBuffer(state, "careful manual edit");
    state = onConflict(state);
    expect(state.conflict).toBe(true);
    expect(state.editBuffer).toBe("careful manual edit");

    const fresh = item(5, { revision: 2, current_translation: "other reviewer text" });
    state = resolveConflict(state, [fresh]);
    expect(state.conflict).toBe(false);
    expect(openItemOf(state)?.revision).toBe(2);
    expect(state.editBuffer).toBe("careful manual edit"); // edits retained
  });
});

describe("score flags", () => {
  it("flags components below their thresholds", () => {
    const low = scores({ comet_raw: 0.69, bert_raw: 0.91, clip_raw: 0.2 });
    expect(flaggedComponents(low, THRESHOLDS)).toEqual(["comet", "clip"]);
  });

  it("flags nothing at or above thresholds", () => {
    const high = scores({ comet_raw: 0.7, bert_raw: 0.9, clip_raw: 0.7 });
    expect(flaggedComponents(high, THRESHOLDS)).toEqual([]);
  });
});

describe("image refs", () => {
  it("only url-like refs are treated as servable", () => {
    expect(servableImage("https://example.com/x.jpg")).toBe(true);
    expect(servableImage("/static/x.jpg")).toBe(true);
    expect(servableImage("img_000123.jpg")).toBe(false);
    expect(servableImage("coco/train2017/000123.jpg")).toBe(false);
  });
});

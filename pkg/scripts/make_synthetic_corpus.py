#!/usr/bin/env python3
"""Generate a synthetic multi-label image-caption corpus file.

Example:
    python scripts/make_synthetic_corpus.py --images 200 --seed 3 --out corpus.records
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

LABEL_RATES = {
    "person": 0.45,
    "car": 0.25,
    "dog": 0.12,
    "chair": 0.08,
    "kite": 0.03,
    "beach": 0.015,
}
NOUNS = ["person", "car", "dog", "chair", "kite", "bench", "tree", "boat"]
VERBS = ["standing", "moving", "resting", "waiting"]
PLACES = ["street", "park", "harbor", "field"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--images", type=int, default=100)
    parser.add_argument("--captions-per-image", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="corpus.records")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    lines = []
    caption_id = 1
    for image_id in range(1, args.images + 1):
        labels = [name for name, rate in LABEL_RATES.items() if rng.random() < rate]
        captions = []
        for _ in range(args.captions_per_image):
            text = (
                f"a {rng.choice(NOUNS)} {rng.choice(VERBS)} near the {rng.choice(PLACES)} "
                f"with a {rng.choice(NOUNS)}"
            )
            captions.append({"caption_id": caption_id, "text": text})
            caption_id += 1
        lines.append(
            json.dumps(
                {
                    "image_id": image_id,
                    "file_ref": f"img_{image_id:06d}.jpg",
                    "labels": labels,
                    "captions": captions,
                },
                sort_keys=True,
                ensure_ascii=False,
                separators=(",", ":"),
            )
        )
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.images} images / {caption_id - 1} captions to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

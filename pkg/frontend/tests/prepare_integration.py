#!/usr/bin/env python3
"""Stage a review-service workspace for the UI integration test.

Usage: python prepare_integration.py <workdir>

Writes <workdir>/config.json and <workdir>/store/refined.records with three
captions awaiting manual review (taken from the frozen flagged fixture).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "src"))

from capqe.model import CaptionStatus, record_to_line, records_from_bytes  # noqa: E402

DATA = REPO / "tests" / "data"


def main() -> int:
    workdir = Path(sys.argv[1])
    store = workdir / "store"
    store.mkdir(parents=True, exist_ok=True)

    records = records_from_bytes((DATA / "flagged_20.records").read_bytes())
    manual = [r.evolve(CaptionStatus.NEEDS_MANUAL_REVIEW) for r in records[:3]]
    (store / "refined.records").write_text(
        "".join(record_to_line(r) + "\n" for r in manual), encoding="utf-8"
    )
    # provider seeds must match the ones the fixture's scores were frozen with
    providers = {
        kind: {"seed": 7}
        for kind in ["translator", "text_embedder", "multimodal_embedder", "qe_scorer", "refiner"]
    }
    (workdir / "config.json").write_text(
        json.dumps(
            {
                "corpus": str(DATA / "flagged_20.corpus"),
                "store": str(store),
                "providers": providers,
            }
        ),
        encoding="utf-8",
    )
    print(str(workdir / "config.json"))
    return 0


if __name__ == "__main__":
    sys.exit(main())

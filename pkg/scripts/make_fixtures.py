#!/usr/bin/env python3
"""Regenerate the frozen test fixtures under tests/data/.

Outputs are deterministic; rerunning must reproduce the committed files
byte-for-byte. Fixtures:
  metrics_refs.txt / metrics_before.txt / metrics_after.txt
      20 aligned segments where the "after" side is strictly closer to the
      references than the "before" side on every metric.
  flagged_20.corpus / flagged_20.records / flagged_20.refs / flagged_20.subs.json
      20 captions whose corrupted translations score below the hybrid
      threshold under the default mock providers, plus the clean reference
      translations and the token substitution table that repairs them.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from capqe.model import (  # noqa: E402
    CaptionRecord,
    CaptionStatus,
    Corpus,
    ImageEntry,
    QEConfig,
    record_to_line,
)
from capqe.pipeline import score_single  # noqa: E402
from capqe.providers import Direction, build_provider_set  # noqa: E402
from capqe.providers.mock import MockTranslator  # noqa: E402
from capqe.providers import ProviderConfig  # noqa: E402

DATA = ROOT / "tests" / "data"

NOUNS = ["cat", "dog", "horse", "bus", "table", "umbrella", "plate", "bird", "laptop", "bench"]
VERBS = ["sitting", "standing", "running", "resting", "waiting", "playing"]
PLACES = ["park", "street", "kitchen", "beach", "market", "station"]
JUNK = ["zqx", "vrbl", "ktp", "wzzr", "qjf", "xxv", "plk", "ngr"]


def make_sentences(rng: random.Random, n: int) -> list[str]:
    out = []
    for _ in range(n):
        out.append(
            f"a {rng.choice(NOUNS)} {rng.choice(VERBS)} near the {rng.choice(PLACES)} "
            f"with a {rng.choice(NOUNS)}"
        )
    return out


def corrupt(
    rng: random.Random,
    text: str,
    rate: float,
    allow_drop: bool = True,
    counter: list[int] | None = None,
) -> str:
    """Replace tokens with junk at ``rate``; unique junk when ``counter`` given.

    Unique junk keeps a token-substitution table collision-free, so the
    refinement fixture can be repaired back to its references exactly.
    """
    tokens = text.split()
    out = []
    for tok in tokens:
        if rng.random() < rate:
            junk = rng.choice(JUNK)
            if counter is not None:
                counter[0] += 1
                junk = f"{junk}{counter[0]}"
            out.append(junk)
        else:
            out.append(tok)
    if allow_drop and rng.random() < rate:
        out = out[:-1]
    return " ".join(out)


def write_metric_fixture() -> None:
    rng = random.Random(42)
    refs = make_sentences(rng, 20)
    before = [corrupt(rng, ref, 0.55) for ref in refs]
    after = []
    for i, ref in enumerate(refs):
        after.append(corrupt(rng, ref, 0.12) if i % 2 == 0 else ref)
    (DATA / "metrics_refs.txt").write_text("\n".join(refs) + "\n", encoding="utf-8")
    (DATA / "metrics_before.txt").write_text("\n".join(before) + "\n", encoding="utf-8")
    (DATA / "metrics_after.txt").write_text("\n".join(after) + "\n", encoding="utf-8")


def write_refinement_fixture() -> None:
    rng = random.Random(1234)
    sources = make_sentences(rng, 40)
    providers = build_provider_set(
        {
            "translator": ProviderConfig(kind="translator", seed=7),
            "text_embedder": ProviderConfig(kind="text_embedder", seed=7),
            "multimodal_embedder": ProviderConfig(kind="multimodal_embedder", seed=7),
            "qe_scorer": ProviderConfig(kind="qe_scorer", seed=7),
            "refiner": ProviderConfig(kind="refiner", seed=7),
        }
    )
    qe_config = QEConfig()
    tag = MockTranslator._tag

    images = []
    records = []
    references = []
    substitutions: dict[str, str] = {}
    i = 0
    junk_counter = [0]
    for source in sources:
        if len(records) == 20:
            break
        i += 1
        corrupted_src = corrupt(rng, source, 0.6, allow_drop=False, counter=junk_counter)
        translated = tag(corrupted_src)
        reference = tag(source)
        scores, back = score_single(source, translated, f"img_{i}.jpg", providers, qe_config)
        if scores.hybrid >= qe_config.threshold:
            continue  # keep only genuinely flagged captions
        for bad, good in zip(translated.split(), reference.split()):
            if bad != good:
                substitutions[bad] = good
        record = (
            CaptionRecord(caption_id=200 + i, image_id=i, source_text=source)
            .evolve(CaptionStatus.TRANSLATED, translated_text=translated)
            .evolve(CaptionStatus.SCORED, back_translated_text=back, scores=scores)
            .evolve(CaptionStatus.NEEDS_REFINEMENT)
        )
        records.append(record)
        references.append(reference)
        images.append(
            ImageEntry(
                image_id=i,
                file_ref=f"img_{i}.jpg",
                labels=frozenset({"fixture"}),
                caption_ids=(200 + i,),
            )
        )

    # substitution tables must repair every corruption unambiguously
    corpus = Corpus(
        images=tuple(images),
        captions=tuple(
            CaptionRecord(caption_id=r.caption_id, image_id=r.image_id, source_text=r.source_text)
            for r in records
        ),
    )
    from capqe.model import corpus_to_lines

    (DATA / "flagged_20.corpus").write_text(
        "\n".join(corpus_to_lines(corpus)) + "\n", encoding="utf-8"
    )
    (DATA / "flagged_20.records").write_text(
        "".join(record_to_line(r) + "\n" for r in records), encoding="utf-8"
    )
    (DATA / "flagged_20.refs").write_text("\n".join(references) + "\n", encoding="utf-8")
    (DATA / "flagged_20.subs.json").write_text(
        json.dumps(substitutions, sort_keys=True, ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8",
    )

    # sanity: the substitution refiner reproduces every reference exactly
    for record, reference in zip(records, references):
        repaired = " ".join(substitutions.get(t, t) for t in record.translated_text.split())
        assert repaired == reference, f"caption {record.caption_id}: table does not repair"


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    write_metric_fixture()
    write_refinement_fixture()
    print(f"fixtures written to {DATA}")

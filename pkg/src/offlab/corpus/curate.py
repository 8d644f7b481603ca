"""Curation: confidence filtering, binarization, merging, splitting, stats.

All operations here are pure functions over independent rows; outputs are
deterministic given inputs and seed.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from typing import Sequence

import numpy as np

from ..codec import CuratedExample, TaskKind, encode_sentence, encode_token
from ..errors import ContractError
from ..labels import CanonicalLabel, Scheme, SchemeMapping
from .types import CuratedDataset, DatasetStats, Provenance, RawInstance

logger = logging.getLogger(__name__)

LENGTH_BUCKET_WIDTH = 32


def filter_confident(
    instances: Sequence[RawInstance], std_threshold: float
) -> list[RawInstance]:
    """Keep the instances whose ensemble standard deviation is at most the
    threshold (inclusive), preserving input order."""
    kept = []
    for inst in instances:
        if inst.soft_label is None:
            raise ContractError(f"instance {inst.id!r} has no soft label to filter on")
        if inst.soft_label.std <= std_threshold:
            kept.append(inst)
    return kept


def binarize(instance: RawInstance) -> CanonicalLabel:
    """OFF iff the ensemble mean is strictly above 0.5, else NOT (OLID_A)."""
    if instance.soft_label is None:
        raise ContractError(f"instance {instance.id!r} has no soft label to binarize")
    return CanonicalLabel("OFF" if instance.soft_label.mean > 0.5 else "NOT", Scheme.OLID_A)


def map_scheme(raw_label: str, mapping: SchemeMapping) -> CanonicalLabel:
    """Map a source-corpus label onto its canonical scheme."""
    return mapping.map(raw_label)


def canonical_label_for(instance: RawInstance, mapping: SchemeMapping) -> CanonicalLabel:
    """Resolve an instance's canonical label under a mapping.

    Soft-labeled instances are binarized (OLID_A mappings only); hard labels
    must already agree with the mapping's scheme.
    """
    if instance.soft_label is not None:
        if mapping.scheme is not Scheme.OLID_A:
            raise ContractError(
                f"soft-labeled instance {instance.id!r} cannot map to scheme "
                f"{mapping.scheme.value}; binarization targets OLID_A"
            )
        return binarize(instance)
    if instance.hard_label is None:
        raise ContractError(f"instance {instance.id!r} has no label")
    if instance.hard_label.scheme is not mapping.scheme:
        raise ContractError(
            f"instance {instance.id!r} carries scheme {instance.hard_label.scheme.value}, "
            f"mapping expects {mapping.scheme.value}"
        )
    return instance.hard_label


def merge_with_prefixes(
    datasets: Sequence[tuple[Sequence[RawInstance], SchemeMapping]],
    std_thresholds: Sequence[float | None] | None = None,
) -> CuratedDataset:
    """Merge several corpora into one prefix-tagged curated dataset.

    Each input text becomes ``prefix + ": " + text``; each target is the
    canonical label string.  Example ids are namespaced by the dataset
    prefix so duplicates across sources cannot collide; duplicated raw ids
    only produce a warning.  ``std_thresholds`` records, per dataset, the
    filter threshold already applied upstream (None when not filtered).
    """
    if std_thresholds is None:
        std_thresholds = [None] * len(datasets)
    if len(std_thresholds) != len(datasets):
        raise ContractError("std_thresholds must have one entry per dataset")

    examples: list[CuratedExample] = []
    provenance: list[Provenance] = []
    seen_raw_ids: dict[str, str] = {}
    duplicate_ids = 0
    for (instances, mapping), threshold in zip(datasets, std_thresholds):
        source_id = mapping.dataset_prefix
        count = 0
        for inst in instances:
            label = canonical_label_for(inst, mapping)
            example = encode_sentence(mapping.dataset_prefix, inst.text, label)
            example.example_id = f"{source_id}/{inst.id}"
            example.source_id = source_id
            examples.append(example)
            count += 1
            prior = seen_raw_ids.get(inst.id)
            if prior is not None and prior != source_id:
                duplicate_ids += 1
            else:
                seen_raw_ids[inst.id] = source_id
        provenance.append(Provenance(source_id=source_id, std_threshold=threshold, count=count))
    if duplicate_ids:
        logger.warning(
            "%d raw instance ids appear in more than one source; "
            "ids were namespaced by dataset prefix", duplicate_ids,
        )
    return CuratedDataset(examples=examples, provenance=provenance)


def curate_token_task(
    instances: Sequence[RawInstance], prefix: str, source_id: str | None = None
) -> CuratedDataset:
    """Encode span-annotated instances as a token-level curated dataset."""
    from ..codec import CharSpanSet

    source_id = source_id or prefix
    examples = []
    for inst in instances:
        spans = inst.token_spans if inst.token_spans is not None else CharSpanSet()
        example = encode_token(prefix, inst.text, spans)
        example.example_id = f"{source_id}/{inst.id}"
        example.source_id = source_id
        examples.append(example)
    return CuratedDataset(
        examples=examples,
        provenance=[Provenance(source_id=source_id, std_threshold=None, count=len(examples))],
    )


def split_train_eval(
    dataset: CuratedDataset, fraction: float = 0.2, seed: int = 0
) -> tuple[CuratedDataset, CuratedDataset]:
    """Disjoint train/eval partition with a seeded uniform shuffle.

    The eval split gets round(fraction * n) examples.  The same seed always
    produces the same partition.
    """
    if not 0.0 < fraction < 1.0:
        raise ContractError(f"fraction {fraction} outside (0, 1)")
    n = len(dataset)
    if n == 0:
        logger.warning("splitting an empty dataset")
        return CuratedDataset(), CuratedDataset()
    eval_n = round(fraction * n)
    rng = np.random.Generator(np.random.Philox(seed))
    perm = rng.permutation(n)
    eval_idx = perm[:eval_n]
    train_idx = perm[eval_n:]

    def take(indices) -> CuratedDataset:
        subset = [dataset.examples[i] for i in indices]
        return CuratedDataset(examples=subset, provenance=_recount(dataset, subset))

    return take(train_idx), take(eval_idx)


def _recount(parent: CuratedDataset, subset: list[CuratedExample]) -> list[Provenance]:
    thresholds = {p.source_id: p.std_threshold for p in parent.provenance}
    counts = Counter(ex.source_id for ex in subset)
    return [
        Provenance(source_id=p.source_id, std_threshold=thresholds.get(p.source_id), count=counts.get(p.source_id, 0))
        for p in parent.provenance
    ]


def stats(dataset: CuratedDataset) -> DatasetStats:
    """Per-source counts, per-label counts, and a text-length histogram."""
    per_source = Counter(ex.source_id or "unknown" for ex in dataset)
    per_label = Counter(
        ex.target_text for ex in dataset if ex.task is TaskKind.SENTENCE
    )
    hist: Counter[str] = Counter()
    for ex in dataset:
        bucket = math.floor(len(ex.original_text) / LENGTH_BUCKET_WIDTH)
        lo = bucket * LENGTH_BUCKET_WIDTH
        hist[f"{lo}-{lo + LENGTH_BUCKET_WIDTH - 1}"] += 1
    return DatasetStats(
        size=len(dataset),
        per_source=dict(per_source),
        per_label=dict(per_label),
        length_histogram=dict(hist),
    )

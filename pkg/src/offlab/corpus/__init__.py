"""Corpus ingestion, curation, and synthesis."""

from .curate import (
    binarize,
    canonical_label_for,
    curate_token_task,
    filter_confident,
    map_scheme,
    merge_with_prefixes,
    split_train_eval,
    stats,
)
from .io import (
    instance_from_record,
    instance_to_record,
    iter_canonical,
    iter_cctk,
    iter_solid,
    load_canonical,
    load_cctk,
    load_solid,
    write_canonical,
    write_cctk,
    write_solid,
)
from .synth import synth_corpus
from .types import (
    CuratedDataset,
    DatasetStats,
    Provenance,
    RawInstance,
    SoftLabel,
    Source,
    SynthSpec,
)

__all__ = [
    "CuratedDataset",
    "DatasetStats",
    "Provenance",
    "RawInstance",
    "SoftLabel",
    "Source",
    "SynthSpec",
    "binarize",
    "canonical_label_for",
    "curate_token_task",
    "filter_confident",
    "instance_from_record",
    "instance_to_record",
    "iter_canonical",
    "iter_cctk",
    "iter_solid",
    "load_canonical",
    "load_cctk",
    "load_solid",
    "map_scheme",
    "merge_with_prefixes",
    "split_train_eval",
    "stats",
    "synth_corpus",
    "write_canonical",
    "write_cctk",
    "write_solid",
]

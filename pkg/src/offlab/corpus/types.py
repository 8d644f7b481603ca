"""Core corpus data types."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..codec import CharSpanSet, CuratedExample
from ..errors import ContractError
from ..labels import CanonicalLabel


class Source(Enum):
    SOLID_LIKE = "SOLID_LIKE"
    CCTK_LIKE = "CCTK_LIKE"
    TASK = "TASK"


@dataclass(frozen=True)
class SoftLabel:
    """Mean and standard deviation of an ensemble of offensiveness scores."""

    mean: float
    std: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ContractError(f"soft-label mean {self.mean} outside [0, 1]")
        if self.std < 0.0:
            raise ContractError(f"soft-label std {self.std} is negative")


@dataclass
class RawInstance:
    """One corpus row before curation.

    Trainable instances carry either a semi-supervised soft label or a hard
    canonical label, never both.
    """

    id: str
    text: str
    source: Source
    soft_label: SoftLabel | None = None
    hard_label: CanonicalLabel | None = None
    token_spans: CharSpanSet | None = None

    def __post_init__(self):
        if self.soft_label is not None and self.hard_label is not None:
            raise ContractError(f"instance {self.id!r} has both soft and hard labels")
        if self.token_spans is not None:
            self.token_spans.validate_for(self.text)


@dataclass(frozen=True)
class Provenance:
    """Per-source bookkeeping for a curated dataset."""

    source_id: str
    std_threshold: float | None
    count: int


@dataclass
class CuratedDataset:
    """An ordered list of curated examples plus per-source provenance."""

    examples: list[CuratedExample] = field(default_factory=list)
    provenance: list[Provenance] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i):
        return self.examples[i]


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the planted-lexicon synthetic corpus generator.

    An instance is truly offensive iff its text contains at least one
    lexicon token; ``ensemble_size`` simulated scorers each emit the true
    label plus Gaussian noise clipped to [0, 1].
    """

    vocab_size: int
    lexicon: frozenset[str]
    n_instances: int
    ensemble_size: int = 4
    noise: float = 0.0
    min_tokens: int = 3
    max_tokens: int = 12
    p_offensive: float = 0.5
    filler_prefix: str = "w"

    def __post_init__(self):
        object.__setattr__(self, "lexicon", frozenset(self.lexicon))
        if self.ensemble_size < 1:
            raise ContractError("ensemble_size must be >= 1")
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ContractError("token length bounds must satisfy 1 <= min <= max")


@dataclass
class DatasetStats:
    """Cheap descriptive statistics over a curated dataset."""

    size: int
    per_source: dict[str, int]
    per_label: dict[str, int]
    length_histogram: dict[str, int]

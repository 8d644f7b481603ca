"""Canonical label schemes, task prefixes, and label-scheme mappings.

Every dataset that enters the lab is mapped onto one of two canonical
sentence-level schemes: OLID_A (OFF vs NOT) or CCTK (TOX vs NOT).  A task
prefix is prepended to each input text so a single text-to-text model can
serve several datasets at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ContractError, SchemeError

# Separator between the task prefix and the source text.  Fixed so encoded
# examples are bit-exact and reversible.
PREFIX_SEPARATOR = ": "


class Scheme(Enum):
    OLID_A = "OLID_A"
    CCTK = "CCTK"


#: Admissible label values per scheme.
SCHEME_LABELS: dict[Scheme, tuple[str, ...]] = {
    Scheme.OLID_A: ("OFF", "NOT"),
    Scheme.CCTK: ("TOX", "NOT"),
}

#: The negative (fallback) class of each scheme.
NEGATIVE_LABEL = "NOT"


@dataclass(frozen=True)
class CanonicalLabel:
    """A canonical label value together with the scheme it belongs to."""

    value: str
    scheme: Scheme

    def __post_init__(self):
        if self.value not in SCHEME_LABELS[self.scheme]:
            raise ContractError(
                f"label {self.value!r} not admitted by scheme {self.scheme.value}"
            )

    def __str__(self) -> str:
        return self.value


OFF = CanonicalLabel("OFF", Scheme.OLID_A)
NOT_OLID = CanonicalLabel("NOT", Scheme.OLID_A)
TOX = CanonicalLabel("TOX", Scheme.CCTK)
NOT_CCTK = CanonicalLabel("NOT", Scheme.CCTK)


def negative_label(scheme: Scheme) -> CanonicalLabel:
    return CanonicalLabel(NEGATIVE_LABEL, scheme)


# ---------------------------------------------------------------------------
# Prefix registry
# ---------------------------------------------------------------------------

_PREFIXES: dict[str, Scheme] = {}


def register_prefix(prefix: str, scheme: Scheme) -> None:
    """Register a task prefix and the canonical scheme its labels follow.

    Re-registering with the same scheme is a no-op; changing the scheme of
    an existing prefix is rejected.
    """
    if not prefix or any(ch.isspace() for ch in prefix):
        raise ContractError(f"invalid prefix {prefix!r}: must be non-empty, no whitespace")
    existing = _PREFIXES.get(prefix)
    if existing is not None and existing is not scheme:
        raise ContractError(
            f"prefix {prefix!r} already registered with scheme {existing.value}"
        )
    _PREFIXES[prefix] = scheme


def registered_prefixes() -> list[str]:
    return sorted(_PREFIXES)


def prefix_scheme(prefix: str) -> Scheme:
    try:
        return _PREFIXES[prefix]
    except KeyError:
        raise SchemeError(
            f"unregistered prefix {prefix!r}; known prefixes: {registered_prefixes()}"
        ) from None


def is_registered_prefix(prefix: str) -> bool:
    return prefix in _PREFIXES


# The two pre-training prefixes plus the benchmark task prefixes used in the
# fine-tuning experiments.  All benchmark tasks score OFF vs NOT.
register_prefix("OLID_A", Scheme.OLID_A)
register_prefix("CCTK", Scheme.CCTK)
for _task_prefix in ("AHSD", "OLID", "TRAC", "TSD", "HateX"):
    register_prefix(_task_prefix, Scheme.OLID_A)


# ---------------------------------------------------------------------------
# Label-scheme mappings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchemeMapping:
    """Total mapping from a source corpus's label set onto a canonical scheme.

    ``label_map`` sends every source label to a canonical value admitted by
    ``scheme``; ``dataset_prefix`` is the task prefix attached to the mapped
    instances.
    """

    dataset_prefix: str
    scheme: Scheme
    label_map: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        admitted = SCHEME_LABELS[self.scheme]
        for src, tgt in self.label_map.items():
            if tgt not in admitted:
                raise ContractError(
                    f"mapping {src!r} -> {tgt!r} not admitted by scheme {self.scheme.value}"
                )

    @property
    def source_labels(self) -> list[str]:
        return list(self.label_map)

    @property
    def target_labels(self) -> list[CanonicalLabel]:
        return [CanonicalLabel(v, self.scheme) for v in self.label_map.values()]

    def map(self, raw_label: str) -> CanonicalLabel:
        try:
            return CanonicalLabel(self.label_map[raw_label], self.scheme)
        except KeyError:
            raise SchemeError(
                f"label {raw_label!r} not mapped for prefix {self.dataset_prefix!r}; "
                f"known labels: {sorted(self.label_map)}"
            ) from None


def identity_mapping(prefix: str, scheme: Scheme) -> SchemeMapping:
    """Mapping for corpora already carrying canonical labels."""
    return SchemeMapping(prefix, scheme, {v: v for v in SCHEME_LABELS[scheme]})


# Built-in mappings for the multilingual evaluation sets.  German maps onto
# the CCTK scheme; the others map onto OLID level A.  The Spanish five-way
# labels collapse to binary: the four offensive-side labels all become OFF.
GERMAN_MAPPING = SchemeMapping("CCTK", Scheme.CCTK, {"Toxic": "TOX", "Not-toxic": "NOT"})
SPANISH_MAPPING = SchemeMapping(
    "OLID_A",
    Scheme.OLID_A,
    {
        "Offensive individual target": "OFF",
        "Offensive group target": "OFF",
        "Offensive other target": "OFF",
        "Expletive language": "OFF",
        "Non-offensive": "NOT",
    },
)
HINDI_MAPPING = SchemeMapping("OLID_A", Scheme.OLID_A, {"Offensive": "OFF", "Not offensive": "NOT"})
KOREAN_MAPPING = SchemeMapping("OLID_A", Scheme.OLID_A, {"Offensive": "OFF", "Not offensive": "NOT"})
SINHALA_MAPPING = SchemeMapping("OLID_A", Scheme.OLID_A, {"Offensive": "OFF", "Not offensive": "NOT"})
MARATHI_MAPPING = SchemeMapping("OLID_A", Scheme.OLID_A, {"Offensive": "OFF", "Not offensive": "NOT"})

BUILTIN_MAPPINGS: dict[str, SchemeMapping] = {
    "german": GERMAN_MAPPING,
    "spanish": SPANISH_MAPPING,
    "hindi": HINDI_MAPPING,
    "korean": KOREAN_MAPPING,
    "sinhala": SINHALA_MAPPING,
    "marathi": MARATHI_MAPPING,
}

"""Planted-lexicon synthetic corpora.

The generator stands in for the semi-automatic annotation of the large
source corpora: a fixed "offensive" lexicon is planted into random token
strings, and an ensemble of simulated scorers emits the true label plus
clipped Gaussian noise.  Low ensemble disagreement (std) then genuinely
correlates with label correctness, which is what the confidence filter
exploits.
"""

from __future__ import annotations

import numpy as np

from ..codec import CharSpanSet
from ..errors import SpecError
from ..labels import CanonicalLabel, Scheme
from .types import RawInstance, SoftLabel, Source, SynthSpec


def _vocabulary(spec: SynthSpec) -> tuple[list[str], list[str]]:
    """The generated vocabulary: lexicon tokens plus filler words."""
    lexicon = sorted(spec.lexicon)
    n_filler = spec.vocab_size - len(lexicon)
    if n_filler < 1:
        raise SpecError(
            f"lexicon of {len(lexicon)} tokens does not fit in vocabulary of "
            f"size {spec.vocab_size} with at least one filler word"
        )
    width = len(str(n_filler - 1))
    filler = [f"{spec.filler_prefix}{i:0{width}d}" for i in range(n_filler)]
    overlap = spec.lexicon.intersection(filler)
    if overlap:
        raise SpecError(f"lexicon tokens collide with filler words: {sorted(overlap)}")
    return lexicon, filler


def synth_corpus(
    spec: SynthSpec, seed: int, source: Source = Source.SOLID_LIKE
) -> list[RawInstance]:
    """Generate a planted-lexicon corpus.

    An instance is truly offensive iff it contains at least one lexicon
    token.  SOLID_LIKE instances carry the simulated ensemble's (mean, std)
    soft label; CCTK_LIKE instances carry the ensemble mean binarized at
    >= 0.5 into TOX/NOT; TASK instances carry the noise-free true label
    (OFF/NOT) plus the lexicon-token character spans.
    """
    lexicon, filler = _vocabulary(spec)
    rng = np.random.Generator(np.random.Philox(seed))
    instances: list[RawInstance] = []
    for i in range(spec.n_instances):
        n_tokens = int(rng.integers(spec.min_tokens, spec.max_tokens + 1))
        offensive = bool(rng.random() < spec.p_offensive)
        tokens = [filler[int(k)] for k in rng.integers(0, len(filler), size=n_tokens)]
        if offensive:
            n_planted = min(n_tokens, 1 + int(rng.random() < 0.3))
            positions = rng.choice(n_tokens, size=n_planted, replace=False)
            for pos in positions:
                tokens[int(pos)] = lexicon[int(rng.integers(0, len(lexicon)))]
        text = " ".join(tokens)

        span_indices: set[int] = set()
        cursor = 0
        for tok in tokens:
            if tok in spec.lexicon:
                span_indices.update(range(cursor, cursor + len(tok)))
            cursor += len(tok) + 1
        truly_offensive = bool(span_indices)

        truth = 1.0 if truly_offensive else 0.0
        scores = truth + rng.normal(0.0, spec.noise, size=spec.ensemble_size) if spec.noise > 0 else np.full(spec.ensemble_size, truth)
        scores = np.clip(scores, 0.0, 1.0)
        mean = float(scores.mean())
        std = float(scores.std(ddof=0))

        inst_id = f"synth-{seed}-{i:06d}"
        spans = CharSpanSet(span_indices)
        if source is Source.SOLID_LIKE:
            instances.append(
                RawInstance(
                    id=inst_id, text=text, source=source,
                    soft_label=SoftLabel(mean=mean, std=std), token_spans=spans,
                )
            )
        elif source is Source.CCTK_LIKE:
            label = CanonicalLabel("TOX" if mean >= 0.5 else "NOT", Scheme.CCTK)
            instances.append(
                RawInstance(id=inst_id, text=text, source=source, hard_label=label, token_spans=spans)
            )
        else:
            label = CanonicalLabel("OFF" if truly_offensive else "NOT", Scheme.OLID_A)
            instances.append(
                RawInstance(id=inst_id, text=text, source=source, hard_label=label, token_spans=spans)
            )
    return instances

"""Whitespace-token vocabulary with reserved special symbols."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from ..codec import MARKER, CuratedExample
from ..errors import ContractError
from ..labels import PREFIX_SEPARATOR, registered_prefixes

PAD, EOS, UNK = "<pad>", "</s>", "<unk>"


class Vocab:
    """Bijection between whitespace tokens and contiguous ids.

    Reserved symbols (PAD, EOS, UNK, the span marker, and every task prefix
    token) occupy the lowest ids and are never reassigned by corpus counts.
    """

    def __init__(self, tokens: Sequence[str], n_reserved: int):
        self.id_to_token: list[str] = list(tokens)
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ContractError("duplicate tokens in vocabulary")
        self.n_reserved = n_reserved
        self.pad_id = self.token_to_id[PAD]
        self.eos_id = self.token_to_id[EOS]
        self.unk_id = self.token_to_id[UNK]
        self.marker_id = self.token_to_id[MARKER]

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def encode(self, text: str) -> list[int]:
        """Token ids of a whitespace-tokenized text (no EOS appended)."""
        return [self.token_to_id.get(tok, self.unk_id) for tok in text.split()]

    def decode(self, ids: Iterable[int]) -> str:
        return " ".join(self.id_to_token[i] for i in ids)

    def unseen_tokens(self, texts: Iterable[str]) -> set[str]:
        unseen = set()
        for text in texts:
            for tok in text.split():
                if tok not in self.token_to_id:
                    unseen.add(tok)
        return unseen


def reserved_tokens(prefixes: Sequence[str] | None = None) -> list[str]:
    """PAD/EOS/UNK, the span marker, then one token per registered prefix.

    The prefix tokens are the exact whitespace tokens produced by encoding,
    i.e. the prefix followed by the separator's colon.
    """
    if prefixes is None:
        prefixes = registered_prefixes()
    sep_head = PREFIX_SEPARATOR.strip()  # ":" glued to the prefix token
    return [PAD, EOS, UNK, MARKER] + [p + sep_head for p in sorted(prefixes)]


def build_vocab(
    corpus: Sequence[CuratedExample],
    min_count: int = 1,
    prefixes: Sequence[str] | None = None,
) -> Vocab:
    """Build a vocabulary from a curated corpus.

    Whitespace tokens of both input and target texts with frequency at
    least ``min_count`` get ids; everything else maps to UNK.  Corpus
    tokens are ordered by descending frequency, ties broken lexically.
    """
    if not corpus:
        raise ContractError("cannot build a vocabulary from an empty corpus")
    reserved = reserved_tokens(prefixes)
    reserved_set = set(reserved)
    counts: Counter[str] = Counter()
    for ex in corpus:
        counts.update(ex.input_text.split())
        counts.update(ex.target_text.split())
    body = sorted(
        (tok for tok, c in counts.items() if c >= min_count and tok not in reserved_set),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocab(reserved + body, n_reserved=len(reserved))

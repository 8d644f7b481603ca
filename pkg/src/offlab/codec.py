"""Codecs between (text, labels/spans) and the text-to-text representation.

Sentence tasks encode a post as ``"<prefix>: <text>"`` with the canonical
label string as the target.  Token tasks keep the post as the target but
insert an ``"[OFF] "`` marker immediately before every token that overlaps
an offensive character span; decoding aligns the generated text back to the
original post to recover character offsets.

All decode operations are total: malformed generations degrade to the
negative class or the empty span set with ``parse_ok=False`` instead of
raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import ContractError
from .labels import (
    NEGATIVE_LABEL,
    PREFIX_SEPARATOR,
    SCHEME_LABELS,
    CanonicalLabel,
    Scheme,
    negative_label,
    prefix_scheme,
)

#: Marker inserted before offensive tokens in token-level targets.
MARKER = "[OFF]"


class TaskKind(Enum):
    SENTENCE = "sentence"
    TOKEN = "token"


# ---------------------------------------------------------------------------
# Character span sets
# ---------------------------------------------------------------------------

class CharSpanSet:
    """A set of character indices (Unicode scalar positions) marking
    offensive content in an original text.

    Serialized as sorted inclusive ranges, e.g. ``"8-13,20-24"``.
    """

    __slots__ = ("indices",)

    def __init__(self, indices: Iterable[int] = ()):
        idx = frozenset(int(i) for i in indices)
        for i in idx:
            if i < 0:
                raise ContractError(f"negative character index {i}")
        self.indices: frozenset[int] = idx

    @classmethod
    def from_ranges(cls, text: str) -> "CharSpanSet":
        """Parse the ``"8-13,20-24"`` inclusive-range serialization."""
        text = text.strip()
        if not text:
            return cls()
        indices: set[int] = set()
        for part in text.split(","):
            lo_s, sep, hi_s = part.partition("-")
            lo = int(lo_s)
            hi = int(hi_s) if sep else lo
            if hi < lo:
                raise ContractError(f"descending range {part!r}")
            indices.update(range(lo, hi + 1))
        return cls(indices)

    def to_ranges(self) -> str:
        if not self.indices:
            return ""
        ordered = sorted(self.indices)
        ranges: list[tuple[int, int]] = []
        lo = hi = ordered[0]
        for i in ordered[1:]:
            if i == hi + 1:
                hi = i
            else:
                ranges.append((lo, hi))
                lo = hi = i
        ranges.append((lo, hi))
        return ",".join(f"{a}-{b}" if a != b else str(a) for a, b in ranges)

    def validate_for(self, text: str) -> None:
        if self.indices and max(self.indices) >= len(text):
            raise ContractError(
                f"span index {max(self.indices)} out of range for text of length {len(text)}"
            )

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(sorted(self.indices))

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def __eq__(self, other) -> bool:
        if isinstance(other, CharSpanSet):
            return self.indices == other.indices
        if isinstance(other, (set, frozenset)):
            return self.indices == frozenset(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.indices)

    def __bool__(self) -> bool:
        return bool(self.indices)

    def __repr__(self) -> str:
        return f"CharSpanSet({self.to_ranges()!r})"


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

class Token(NamedTuple):
    text: str
    start: int  # character offset of the first character
    end: int    # character offset one past the last character


def tokenize_with_offsets(text: str) -> list[Token]:
    """Split on Unicode whitespace, keeping character offsets."""
    tokens: list[Token] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                tokens.append(Token(text[start:i], start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        tokens.append(Token(text[start:], start, len(text)))
    return tokens


def token_char_indices(token: Token) -> range:
    return range(token.start, token.end)


# ---------------------------------------------------------------------------
# Curated examples
# ---------------------------------------------------------------------------

@dataclass
class CuratedExample:
    """A prefix-tagged (input text, target text) pair ready for training."""

    input_text: str
    target_text: str
    original_text: str
    task: TaskKind
    example_id: str | None = None
    source_id: str | None = None
    gold_spans: CharSpanSet | None = None


def make_input_text(prefix: str, text: str) -> str:
    return prefix + PREFIX_SEPARATOR + text


def strip_prefix(input_text: str, prefix: str) -> str:
    head = prefix + PREFIX_SEPARATOR
    if not input_text.startswith(head):
        raise ContractError(f"input does not start with prefix {prefix!r}")
    return input_text[len(head):]


# ---------------------------------------------------------------------------
# Sentence-level codec
# ---------------------------------------------------------------------------

def encode_sentence(prefix: str, text: str, label: CanonicalLabel) -> CuratedExample:
    """Encode a sentence-level example; the target is the label string."""
    scheme = prefix_scheme(prefix)
    if label.scheme is not scheme:
        raise ContractError(
            f"label scheme {label.scheme.value} does not match prefix {prefix!r} "
            f"(expects {scheme.value})"
        )
    return CuratedExample(
        input_text=make_input_text(prefix, text),
        target_text=label.value,
        original_text=text,
        task=TaskKind.SENTENCE,
    )


def decode_sentence(output_text: str, scheme: Scheme) -> tuple[CanonicalLabel, bool]:
    """Map a generated string back to a canonical label.

    Matching is case-insensitive after whitespace trimming.  Anything that
    is not a label of ``scheme`` falls back to the negative class with
    ``parse_ok=False``.
    """
    candidate = output_text.strip().upper()
    for value in SCHEME_LABELS[scheme]:
        if candidate == value:
            return CanonicalLabel(value, scheme), True
    return negative_label(scheme), False


# ---------------------------------------------------------------------------
# Token-level codec
# ---------------------------------------------------------------------------

def encode_token(prefix: str, text: str, spans: CharSpanSet) -> CuratedExample:
    """Encode a token-level example.

    The target is the text itself with ``"[OFF] "`` inserted immediately
    before every whitespace token whose character range intersects ``spans``.
    A token partially covered by a span counts as offensive.
    """
    prefix_scheme(prefix)  # prefix must be registered
    spans.validate_for(text)
    pieces: list[str] = []
    cursor = 0
    for tok in tokenize_with_offsets(text):
        if spans.indices.intersection(token_char_indices(tok)):
            pieces.append(text[cursor:tok.start])
            pieces.append(MARKER + " ")
            cursor = tok.start
    pieces.append(text[cursor:])
    return CuratedExample(
        input_text=make_input_text(prefix, text),
        target_text="".join(pieces),
        original_text=text,
        task=TaskKind.TOKEN,
        gold_spans=spans,
    )


def decode_token(output_text: str, original_text: str) -> tuple[CharSpanSet, bool]:
    """Recover character offsets from a generated token-level output.

    Both texts are whitespace-tokenized.  Markers are removed from the
    output, each remembering the next non-marker token; the remaining output
    tokens are aligned to the original tokens by longest common subsequence.
    A marked token that aligns contributes its original character range.

    ``parse_ok`` is False when any marker was dropped (trailing, or its
    token failed to align) or when alignment left unmatched output tokens.
    Never raises, whatever ``output_text`` contains.
    """
    original_tokens = tokenize_with_offsets(original_text)
    out_tokens = [t.text for t in tokenize_with_offsets(output_text)]

    content: list[str] = []      # output tokens with markers removed
    marked: set[int] = set()     # indices into `content` that carry a marker
    pending_marker = False
    dropped_marker = False
    for tok in out_tokens:
        if tok == MARKER:
            pending_marker = True
            continue
        if pending_marker:
            marked.add(len(content))
            pending_marker = False
        content.append(tok)
    if pending_marker:
        dropped_marker = True  # trailing marker with nothing to mark

    alignment = align_tokens(content, [t.text for t in original_tokens])
    aligned = dict(alignment.pairs)

    indices: set[int] = set()
    for out_idx in marked:
        orig_idx = aligned.get(out_idx)
        if orig_idx is None:
            dropped_marker = True
            continue
        indices.update(token_char_indices(original_tokens[orig_idx]))

    parse_ok = not dropped_marker and not alignment.unmatched_output
    return CharSpanSet(indices), parse_ok


# ---------------------------------------------------------------------------
# Token alignment
# ---------------------------------------------------------------------------

@dataclass
class TokenAlignment:
    """Non-crossing pairing of output tokens to original tokens."""

    pairs: list[tuple[int, int]] = field(default_factory=list)
    unmatched_output: list[int] = field(default_factory=list)


def align_tokens(output_tokens: list[str], original_tokens: list[str]) -> TokenAlignment:
    """Longest common subsequence on exact token equality.

    Among equal-length LCSs the match with the earliest original indices is
    preferred (leftmost tie-break).
    """
    n, m = len(output_tokens), len(original_tokens)
    # lcs[i][j] = LCS length of output_tokens[i:] vs original_tokens[j:]
    lcs = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = lcs[i], lcs[i + 1]
        for j in range(m - 1, -1, -1):
            if output_tokens[i] == original_tokens[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = max(below[j], row[j + 1])

    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < n and j < m and lcs[i][j] > 0:
        if output_tokens[i] == original_tokens[j] and lcs[i][j] == lcs[i + 1][j + 1] + 1:
            pairs.append((i, j))
            i += 1
            j += 1
        elif lcs[i + 1][j] == lcs[i][j]:
            # Skipping an output token keeps the original cursor early.
            i += 1
        else:
            j += 1

    matched_out = {a for a, _ in pairs}
    unmatched = [k for k in range(n) if k not in matched_out]
    return TokenAlignment(pairs=pairs, unmatched_output=unmatched)


# ---------------------------------------------------------------------------
# Word-level annotation helper
# ---------------------------------------------------------------------------

def word_spans_to_char_spans(text: str, word_indices: Iterable[int]) -> CharSpanSet:
    """Convert word-level offensive annotations to character offsets.

    ``word_indices`` index the whitespace tokens of ``text``; each selected
    word contributes its full character range.
    """
    tokens = tokenize_with_offsets(text)
    indices: set[int] = set()
    for w in word_indices:
        if not 0 <= w < len(tokens):
            raise ContractError(f"word index {w} out of range for {len(tokens)} tokens")
        indices.update(token_char_indices(tokens[w]))
    return CharSpanSet(indices)

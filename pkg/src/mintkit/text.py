"""Tokenization, n-gram matching, LCS and extractive fragment decomposition.

Sources may consist of several documents. They are concatenated into one
:class:`TokenSeq` whose ``doc_boundaries`` mark where each new document
starts; n-grams, fragments and common subsequences never span a boundary.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

_WORD_RE = re.compile(r"\w+|[^\w\s]")
_WORD_ONLY_RE = re.compile(r"\w+")


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...] = ()
    doc_boundaries: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "doc_boundaries", tuple(self.doc_boundaries))
        if any(not t for t in self.tokens):
            raise ValueError("empty token in TokenSeq")
        prev = 0
        for b in self.doc_boundaries:
            if b <= prev or b >= len(self.tokens):
                raise ValueError(f"invalid doc boundary {b} for {len(self.tokens)} tokens")
            prev = b

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    @classmethod
    def from_docs(cls, docs: Iterable[Sequence[str]]) -> "TokenSeq":
        tokens: list[str] = []
        bounds: list[int] = []
        for doc in docs:
            if not doc:
                continue
            if tokens:
                bounds.append(len(tokens))
            tokens.extend(doc)
        return cls(tuple(tokens), tuple(bounds))

    @cached_property
    def segment_ids(self) -> tuple[int, ...]:
        """Document number of every token."""
        ids = []
        bounds = self.doc_boundaries
        for i in range(len(self.tokens)):
            ids.append(bisect_right(bounds, i))
        return tuple(ids)

    def documents(self) -> list[tuple[str, ...]]:
        starts = (0,) + self.doc_boundaries
        ends = self.doc_boundaries + (len(self.tokens),)
        return [self.tokens[s:e] for s, e in zip(starts, ends) if e > s]

    def ngrams(self, n: int) -> list[tuple[str, ...]]:
        """All n-grams, in order, that do not cross a document boundary."""
        if n < 1:
            raise ValueError("n must be >= 1")
        out = []
        for doc in self.documents():
            out.extend(tuple(doc[i:i + n]) for i in range(len(doc) - n + 1))
        return out

    def truncate(self, max_words: int) -> "TokenSeq":
        """Shorten so the combined length is at most ``max_words``.

        The budget is shared equally between documents; budget left unused
        by short documents is handed on to the longer ones.
        """
        if max_words < 0:
            raise ValueError("max_words must be >= 0")
        docs = self.documents()
        if sum(map(len, docs)) <= max_words:
            return self
        keep = [0] * len(docs)
        remaining = max_words
        order = sorted(range(len(docs)), key=lambda i: (len(docs[i]), i))
        for rank, i in enumerate(order):
            share = remaining // (len(docs) - rank)
            keep[i] = min(len(docs[i]), share)
            remaining -= keep[i]
        return TokenSeq.from_docs(d[:k] for d, k in zip(docs, keep))

    @cached_property
    def index(self) -> "SourceIndex":
        return SourceIndex.build(self)


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    keep_punct: bool = True


def tokenize(text: str | Sequence[str], config: TokenizerConfig | None = None) -> TokenSeq:
    """Split text (or a list of documents) into word and punctuation tokens.

    >>> tokenize("The cat sat.").tokens
    ('the', 'cat', 'sat', '.')
    """
    config = config or TokenizerConfig()
    docs = [text] if isinstance(text, str) else list(text)
    pattern = _WORD_RE if config.keep_punct else _WORD_ONLY_RE
    split = []
    for doc in docs:
        if config.lowercase:
            doc = doc.lower()
        split.append(pattern.findall(doc))
    return TokenSeq.from_docs(split)


@dataclass(frozen=True)
class SourceIndex:
    """Token -> sorted occurrence positions, plus document membership."""

    positions: dict[str, tuple[int, ...]]
    segment_ids: tuple[int, ...] = field(repr=False)

    @classmethod
    def build(cls, seq: TokenSeq) -> "SourceIndex":
        pos: dict[str, list[int]] = {}
        for i, tok in enumerate(seq.tokens):
            pos.setdefault(tok, []).append(i)
        return cls({t: tuple(p) for t, p in pos.items()}, seq.segment_ids)

    def __contains__(self, token):
        return token in self.positions

    def occurrences(self, token: str) -> tuple[int, ...]:
        return self.positions.get(token, ())

    def same_doc(self, i: int, j: int) -> bool:
        return self.segment_ids[i] == self.segment_ids[j]

    def extend(self, ends: Iterable[int], token: str, tokens: Sequence[str]) -> frozenset[int]:
        """Positions p+1 such that ``tokens[p+1] == token`` in the same document as p."""
        n = len(tokens)
        seg = self.segment_ids
        return frozenset(
            p + 1 for p in ends
            if p + 1 < n and tokens[p + 1] == token and seg[p + 1] == seg[p]
        )


class NgramCount(NamedTuple):
    matched: int
    total: int


def matched_ngram_count(x: TokenSeq, y: TokenSeq, n: int) -> NgramCount:
    """Count n-grams of ``y`` that occur in ``x``, with multiplicity and no clipping."""
    if n < 1:
        raise ValueError("n must be >= 1")
    source = set(x.ngrams(n))
    grams = y.ngrams(n)
    return NgramCount(sum(1 for g in grams if g in source), len(grams))


def _lcs_bitparallel(a: Sequence[str], b: Sequence[str]) -> int:
    # Hyyro's bit-vector LCS; bit i of a mask stands for a[i].
    if not a or not b:
        return 0
    masks: dict[str, int] = {}
    for i, tok in enumerate(a):
        masks[tok] = masks.get(tok, 0) | (1 << i)
    full = (1 << len(a)) - 1
    v = full
    for tok in b:
        m = masks.get(tok)
        if m is None:
            continue
        u = v & m
        v = ((v + u) | (v - u)) & full
    return len(a) - bin(v).count("1")


def lcs_length(x: TokenSeq, y: TokenSeq) -> int:
    """Length of the longest common subsequence of ``x`` and ``y``.

    A common subsequence lies within one document of each side, so for
    multi-document inputs this is the best score over document pairs.
    """
    best = 0
    for dy in y.documents():
        for dx in x.documents():
            if min(len(dx), len(dy)) > best:
                best = max(best, _lcs_bitparallel(dx, dy))
    return best


class Fragment(NamedTuple):
    summary_start: int
    length: int


@dataclass(frozen=True)
class FragmentSet:
    fragments: tuple[Fragment, ...] = ()

    def __len__(self):
        return len(self.fragments)

    def __iter__(self):
        return iter(self.fragments)

    def lengths(self) -> list[int]:
        return [f.length for f in self.fragments]

    def coverage(self, summary_len: int) -> float:
        return sum(self.lengths()) / summary_len if summary_len else 0.0

    def density(self, summary_len: int) -> float:
        return sum(k * k for k in self.lengths()) / summary_len if summary_len else 0.0


def longest_match_at(x: TokenSeq, y: TokenSeq, start: int) -> int:
    """Length of the longest prefix of ``y[start:]`` occurring contiguously in ``x``."""
    idx = x.index
    ends = frozenset(idx.occurrences(y[start]))
    length = 0
    while ends:
        length += 1
        if start + length >= len(y) or y.segment_ids[start + length] != y.segment_ids[start]:
            break
        ends = idx.extend(ends, y[start + length], x.tokens)
    return length


def greedy_fragments(x: TokenSeq, y: TokenSeq) -> FragmentSet:
    """Decompose ``y`` left to right into longest fragments copied from ``x``."""
    frags = []
    i = 0
    while i < len(y):
        k = longest_match_at(x, y, i)
        if k:
            frags.append(Fragment(i, k))
            i += k
        else:
            i += 1
    return FragmentSet(tuple(frags))

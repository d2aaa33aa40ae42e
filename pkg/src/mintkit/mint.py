"""MINT abstractiveness score and its components."""

from __future__ import annotations

import statistics
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from typing import Iterable

from .text import TokenSeq, greedy_fragments, lcs_length, matched_ngram_count

MAX_ORDER = 4


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class MintReport:
    p1: float
    p2: float
    p3: float
    p4: float
    lcsr: float
    chi: float
    mint: float
    density: float
    fragment_count: float
    summary_len: float

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.field_names(), astuple(self)))


def smoothed_match_chain(m1: int, m2: int, m3: int, m4: int, m5: int) -> tuple[Fraction, ...]:
    """Smooth matched n-gram counts for n = 1..4.

    Each count becomes the mean of itself, the smoothed (n-1)-gram count
    and the raw (n+1)-gram count; the smoothed 0-gram count is ``m1 + 1``.

    >>> smoothed_match_chain(3, 2, 1, 0, 0)
    (Fraction(3, 1), Fraction(2, 1), Fraction(1, 1), Fraction(1, 3))
    """
    raw = (m1, m2, m3, m4, m5)
    if any(m < 0 for m in raw):
        raise ValueError("match counts must be nonnegative")
    prev = Fraction(m1 + 1)
    out = []
    for n in range(MAX_ORDER):
        prev = (prev + raw[n] + raw[n + 1]) / 3
        out.append(prev)
    return tuple(out)


def harmonic_mean(values: Iterable[Fraction | float]) -> Fraction | float:
    # statistics.harmonic_mean already yields 0 when any value is 0
    return statistics.harmonic_mean(list(values))


def mint_score(x: TokenSeq, y: TokenSeq) -> MintReport:
    if len(y) == 0:
        raise DegenerateInputError("summary is empty")
    counts = [matched_ngram_count(x, y, n) for n in range(1, MAX_ORDER + 2)]
    smoothed = smoothed_match_chain(*(c.matched for c in counts))
    precisions = [s / (c.total or 1) for s, c in zip(smoothed, counts)]
    lcsr = Fraction(lcs_length(x, y), len(y))
    chi = float(harmonic_mean(precisions + [lcsr]))
    frags = greedy_fragments(x, y)
    return MintReport(
        *(float(p) for p in precisions),
        lcsr=float(lcsr),
        chi=chi,
        mint=1.0 - chi,
        density=frags.density(len(y)),
        fragment_count=len(frags),
        summary_len=len(y),
    )


def corpus_mint(pairs: Iterable[tuple[TokenSeq, TokenSeq]]) -> MintReport:
    """Field-wise mean of :func:`mint_score` over ``(source, summary)`` pairs."""
    reports = [mint_score(x, y) for x, y in pairs]
    return mean_report(reports)


def mean_report(reports: list[MintReport]) -> MintReport:
    if not reports:
        raise DegenerateInputError("no pairs to average")
    columns = zip(*(astuple(r) for r in reports))
    return MintReport(*(statistics.fmean(col) for col in columns))

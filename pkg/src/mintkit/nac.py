"""Nonlinear abstractiveness constraints for beam decoding.

An extractive fragment of length ``l`` is discounted by
``lambda_h(l) = 2 ** -(l**e / h**e)``.  Because the discount of a whole
fragment telescopes into per-token ratios ``lambda_h(l) / lambda_h(l-1)``,
it can be applied token by token while decoding: a :class:`FragmentTracker`
follows the fragment the current output is inside of and supplies the log
ratio for each candidate token.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol

from .text import FragmentSet, TokenSeq, greedy_fragments

EOS = "</s>"


class Mode(str, Enum):
    OFF = "off"
    PENALTY = "penalty"
    REWARD = "reward"


@dataclass(frozen=True)
class NacConfig:
    mode: Mode = Mode.PENALTY
    h: float = 2.0
    exponent: float = 2.0
    beam_size: int = 4
    max_len: int = 60
    min_len: int = 0
    length_norm: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if not self.exponent > 0:
            raise ValueError(f"exponent must be positive, got {self.exponent}")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.min_len < 0 or self.min_len > self.max_len or self.max_len < 1:
            raise ValueError(f"need 0 <= min_len <= max_len, max_len >= 1 (got {self.min_len}, {self.max_len})")

    @property
    def sign(self) -> int:
        return {Mode.OFF: 0, Mode.PENALTY: 1, Mode.REWARD: -1}[self.mode]


def lambda_h(h: float, length: int, exponent: float = 2.0) -> float:
    """Discount probability of an extractive fragment of ``length`` tokens."""
    return 2.0 ** -((length / h) ** exponent)


def log_lambda(h: float, length: int, exponent: float = 2.0) -> float:
    """Natural log of :func:`lambda_h`; ``-length**2 / (1.20112 * h)**2`` for exponent 2."""
    if length == 0:
        return 0.0
    return -math.log(2.0) * (length / h) ** exponent


def log_step(h: float, length: int, exponent: float = 2.0) -> float:
    """Log ratio applied when a fragment grows from ``length - 1`` to ``length``."""
    return log_lambda(h, length, exponent) - log_lambda(h, length - 1, exponent)


@dataclass(frozen=True)
class FragmentTracker:
    # source positions of the current fragment's last token
    match_positions: frozenset[int] = frozenset()
    current_len: int = 0

    def __post_init__(self):
        if (self.current_len == 0) != (not self.match_positions):
            raise ValueError("current_len must be 0 exactly when there are no match positions")


EMPTY_TRACKER = FragmentTracker()


def advance_tracker(tracker: FragmentTracker, token: str, x: TokenSeq) -> FragmentTracker:
    idx = x.index
    if tracker.current_len:
        ext = idx.extend(tracker.match_positions, token, x.tokens)
        if ext:
            return FragmentTracker(ext, tracker.current_len + 1)
    occ = idx.occurrences(token)
    if occ:
        return FragmentTracker(frozenset(occ), 1)
    return EMPTY_TRACKER


def step_tracker(tracker: FragmentTracker, token: str, x: TokenSeq,
                 config: NacConfig) -> tuple[FragmentTracker, float]:
    """Feed one output token; return the new tracker and its log discount factor."""
    new = advance_tracker(tracker, token, x)
    if new.current_len == 0 or config.sign == 0:
        return new, 0.0
    return new, config.sign * log_step(config.h, new.current_len, config.exponent)


def fragment_log_discount(frags: FragmentSet, config: NacConfig) -> float:
    if config.sign == 0:
        return 0.0
    return config.sign * sum(log_lambda(config.h, f.length, config.exponent) for f in frags)


def offline_penalty(x: TokenSeq, y: TokenSeq, config: NacConfig) -> float:
    """Summed log discount of the greedy fragments of a complete output."""
    return fragment_log_discount(greedy_fragments(x, y), config)


def replay(x: TokenSeq, y: TokenSeq, config: NacConfig) -> float:
    """Accumulate :func:`step_tracker` factors over ``y``."""
    tracker = EMPTY_TRACKER
    total = 0.0
    for tok in y:
        tracker, f = step_tracker(tracker, tok, x, config)
        total += f
    return total


class ScoringModel(Protocol):
    def next_distribution(self, x: TokenSeq, prefix: TokenSeq) -> Mapping[str, float]:
        """Log-probabilities of the next token, including :data:`EOS`."""
        ...


class DecodeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple[str, ...]
    model_logprob: float
    nac_logdiscount: float
    tracker: FragmentTracker = field(repr=False)
    finished: bool = False


@dataclass(frozen=True)
class DecodeResult:
    tokens: TokenSeq
    model_logprob: float
    nac_logdiscount: float
    score: float


def _score(hyp_len: int, model_lp: float, nac_lp: float, config: NacConfig) -> float:
    if config.length_norm:
        model_lp = model_lp / max(hyp_len, 1) ** config.length_norm
    return model_lp + nac_lp


def _rank_key(item):
    score, tokens = item[0], item[1]
    return (-score, tokens)


def beam_decode(model: ScoringModel, x: TokenSeq, config: NacConfig) -> DecodeResult:
    """Beam search maximizing model log-prob plus the NAC log discount.

    Hypotheses reaching ``max_len`` are finished without an end token;
    an end token proposed before ``min_len`` is ignored.
    """
    k = config.beam_size
    beam = [Hypothesis((), 0.0, 0.0, EMPTY_TRACKER)]
    finished: list[Hypothesis] = []
    while beam:
        candidates = []
        for hyp in beam:
            dist = model.next_distribution(x, TokenSeq(hyp.tokens))
            candidates.extend(_expand(hyp, dist, x, config, k))
        if not candidates and not finished:
            raise DecodeError("model yields no valid continuation")
        candidates.sort(key=_rank_key)
        beam = []
        for _, _, hyp in candidates[:k]:
            if hyp.finished:
                finished.append(hyp)
            elif len(hyp.tokens) >= config.max_len:
                finished.append(Hypothesis(hyp.tokens, hyp.model_logprob, hyp.nac_logdiscount,
                                           hyp.tracker, True))
            else:
                beam.append(hyp)
        if len(finished) >= k and _can_stop(finished, beam, config):
            break
    if not finished:
        raise DecodeError("no hypothesis finished")
    best = min(
        ((_score(len(h.tokens), h.model_logprob, h.nac_logdiscount, config), h.tokens, h) for h in finished),
        key=_rank_key,
    )
    hyp = best[2]
    return DecodeResult(TokenSeq(hyp.tokens), hyp.model_logprob, hyp.nac_logdiscount, best[0])


def _can_stop(finished, beam, config) -> bool:
    # Scores only decrease while extending when no factor can be positive,
    # so the search may end once no live hypothesis beats the best finished one.
    if config.sign < 0 or config.length_norm:
        return False
    best = max(_score(len(h.tokens), h.model_logprob, h.nac_logdiscount, config) for h in finished)
    return all(_score(len(h.tokens), h.model_logprob, h.nac_logdiscount, config) <= best for h in beam)


def _expand(hyp: Hypothesis, dist: Mapping[str, float], x: TokenSeq, config: NacConfig, k: int):
    """Scored extensions of one hypothesis.

    Tokens absent from the source carry no discount, so only the ``k`` best
    of them can survive pruning; the rest are skipped.
    """
    n = len(hyp.tokens) + 1
    out = []
    novel = []
    src = x.index
    for tok, lp in dist.items():
        if lp == -math.inf:
            continue
        if tok == EOS:
            if len(hyp.tokens) < config.min_len:
                continue
            new = Hypothesis(hyp.tokens, hyp.model_logprob + lp, hyp.nac_logdiscount, hyp.tracker, True)
            out.append((_score(len(hyp.tokens), new.model_logprob, new.nac_logdiscount, config),
                        hyp.tokens, new))
        elif tok in src:
            tracker, f = step_tracker(hyp.tracker, tok, x, config)
            tokens = hyp.tokens + (tok,)
            new = Hypothesis(tokens, hyp.model_logprob + lp, hyp.nac_logdiscount + f, tracker)
            out.append((_score(n, new.model_logprob, new.nac_logdiscount, config), tokens, new))
        else:
            novel.append((lp, tok))
    for lp, tok in heapq.nsmallest(k, novel, key=lambda t: (-t[0], t[1])):
        tokens = hyp.tokens + (tok,)
        new = Hypothesis(tokens, hyp.model_logprob + lp, hyp.nac_logdiscount, EMPTY_TRACKER)
        out.append((_score(n, new.model_logprob, new.nac_logdiscount, config), tokens, new))
    return out

"""A small word n-gram model with a copy component, used as the decoder's scoring model.

The n-gram part interpolates additive-smoothed estimates of every order
``1..order``.  The copy part is uniform over the tokens that continue the
longest suffix of the output prefix found in the source, or uniform over the
source vocabulary when nothing continues.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .nac import EOS
from .text import TokenSeq

BOS = "<s>"
FORMAT_NAME = "mintkit-ngram"
FORMAT_VERSION = 1
MAX_COPY_SUFFIX = 8


@dataclass
class NgramModel:
    order: int
    vocab: tuple[str, ...]
    # counts[k][context] -> Counter of next tokens, context length k
    counts: list[dict[tuple[str, ...], Counter]]
    delta: float = 0.1
    weights: tuple[float, ...] = ()
    copy_alpha: float = 0.0
    _vocab_index: dict[str, int] = field(init=False, repr=False)
    _totals: list[dict[tuple[str, ...], int]] = field(init=False, repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if not self.weights:
            self.weights = tuple([1.0 / self.order] * self.order)
        if len(self.weights) != self.order or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("need one interpolation weight per order, summing to 1")
        if not 0.0 <= self.copy_alpha <= 1.0:
            raise ValueError("copy_alpha must be in [0, 1]")
        if self.delta <= 0:
            raise ValueError("smoothing constant must be positive")
        self._vocab_index = {t: i for i, t in enumerate(self.vocab)}
        self._totals = [{ctx: sum(c.values()) for ctx, c in level.items()} for level in self.counts]
        self._ngram_cache = lru_cache(maxsize=65536)(self._ngram_probs)

    def with_copy_alpha(self, alpha: float) -> "NgramModel":
        return NgramModel(self.order, self.vocab, self.counts, self.delta, self.weights, alpha)

    def _ngram_probs(self, history: tuple[str, ...]) -> np.ndarray:
        V = len(self.vocab)
        probs = np.zeros(V)
        for k, w in enumerate(self.weights):
            ctx = history[len(history) - k:] if k else ()
            denom = self._totals[k].get(ctx, 0) + self.delta * V
            probs += w * self.delta / denom
            counter = self.counts[k].get(ctx)
            if counter:
                for tok, c in counter.items():
                    probs[self._vocab_index[tok]] += w * c / denom
        probs.setflags(write=False)
        return probs

    def _history(self, prefix: Sequence[str]) -> tuple[str, ...]:
        padded = (BOS,) * (self.order - 1) + tuple(prefix)
        return padded[len(padded) - (self.order - 1):] if self.order > 1 else ()

    def ngram_distribution(self, prefix: Sequence[str]) -> dict[str, float]:
        probs = self._ngram_cache(self._history(prefix))
        return dict(zip(self.vocab, probs.tolist()))

    def prob(self, token: str, prefix: Sequence[str]) -> float:
        i = self._vocab_index.get(token)
        if i is None:
            return 0.0
        return float(self._ngram_cache(self._history(prefix))[i])

    def next_distribution(self, x: TokenSeq, prefix: TokenSeq | Sequence[str]) -> dict[str, float]:
        """Log-probabilities of the next token given source ``x`` and output ``prefix``."""
        prefix = tuple(prefix)
        a = self.copy_alpha
        mix: dict[str, float] = {}
        if a < 1.0:
            probs = self._ngram_cache(self._history(prefix))
            mix = {t: (1.0 - a) * p for t, p in zip(self.vocab, probs.tolist())}
        if a > 0.0:
            targets = copy_targets(x, prefix)
            if targets:
                share = a / len(targets)
                for t in targets:
                    mix[t] = mix.get(t, 0.0) + share
            else:
                for t in mix:
                    mix[t] /= 1.0 - a
        return {t: math.log(p) for t, p in mix.items() if p > 0.0}

    def perplexity(self, corpus: Iterable[Sequence[str]]) -> float:
        """Per-token perplexity of the n-gram part, counting the end token."""
        total = 0.0
        n = 0
        for seq in corpus:
            seq = tuple(seq)
            for i, tok in enumerate(seq + (EOS,)):
                total -= math.log(self.prob(tok, seq[:i]))
                n += 1
        return math.exp(total / n)

    def to_json(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "order": self.order,
            "delta": self.delta,
            "weights": list(self.weights),
            "copy_alpha": self.copy_alpha,
            "vocab": list(self.vocab),
            "counts": [
                [[list(ctx), dict(sorted(c.items()))] for ctx, c in sorted(level.items())]
                for level in self.counts
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NgramModel":
        if data.get("format") != FORMAT_NAME:
            raise ValueError("not a mintkit n-gram model file")
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {data.get('version')}")
        counts = [
            {tuple(ctx): Counter(c) for ctx, c in level}
            for level in data["counts"]
        ]
        return cls(data["order"], tuple(data["vocab"]), counts, data["delta"],
                   tuple(data["weights"]), data["copy_alpha"])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train(corpus: Iterable[Sequence[str]], order: int = 2, delta: float = 0.1,
          copy_alpha: float = 0.0, weights: Sequence[float] = ()) -> NgramModel:
    corpus = [tuple(seq) for seq in corpus]
    if not corpus or not any(corpus):
        raise ValueError("cannot train on an empty corpus")
    if order < 1:
        raise ValueError("order must be >= 1")
    counts: list[dict[tuple[str, ...], Counter]] = [defaultdict(Counter) for _ in range(order)]
    vocab = set()
    for seq in corpus:
        vocab.update(seq)
        padded = (BOS,) * (order - 1) + seq + (EOS,)
        for i in range(order - 1, len(padded)):
            for k in range(order):
                counts[k][padded[i - k:i]][padded[i]] += 1
    vocab.add(EOS)
    vocab.discard(BOS)
    return NgramModel(order, tuple(sorted(vocab)), [dict(level) for level in counts],
                      delta, tuple(weights), copy_alpha)


def copy_targets(x: TokenSeq, prefix: Sequence[str]) -> list[str]:
    """Tokens continuing the longest prefix suffix that occurs in ``x``."""
    idx = x.index
    for k in range(min(len(prefix), MAX_COPY_SUFFIX), 0, -1):
        suffix = prefix[len(prefix) - k:]
        ends = frozenset(idx.occurrences(suffix[0]))
        for tok in suffix[1:]:
            if not ends:
                break
            ends = idx.extend(ends, tok, x.tokens)
        nxt = {x[p + 1] for p in ends if p + 1 < len(x) and idx.same_doc(p, p + 1)}
        if nxt:
            return sorted(nxt)
    return sorted(idx.positions)


# Synthetic corpus for desk-scale decoding experiments.

def synthetic_corpus(n_docs: int = 60, seed: int = 13, vocab_size: int = 150,
                     doc_sentences: tuple[int, int] = (4, 7)) -> list[TokenSeq]:
    """Documents sampled from a sparse random Markov chain over made-up words."""
    rng = random.Random(seed)
    words = [_pseudo_word(rng) for _ in range(vocab_size)]
    words = list(dict.fromkeys(words))
    successors = {
        w: (rng.sample(words, 6), [1.0 / (r + 1) for r in range(6)])
        for w in words
    }
    docs = []
    for _ in range(n_docs):
        toks: list[str] = []
        for _ in range(rng.randint(*doc_sentences)):
            w = rng.choice(words)
            sent = [w]
            for _ in range(rng.randint(6, 12)):
                nxt, wts = successors[w]
                w = rng.choices(nxt, wts)[0]
                sent.append(w)
            toks.extend(sent + ["."])
        docs.append(TokenSeq(tuple(toks)))
    return docs


def _pseudo_word(rng: random.Random) -> str:
    cons, vows = "bdfgklmnprstvz", "aeiou"
    return "".join(rng.choice(cons) + rng.choice(vows) for _ in range(rng.randint(1, 3)))

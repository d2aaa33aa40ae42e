import math
import random
import statistics

import pytest

from mintkit.lm import NgramModel, copy_targets, synthetic_corpus, train
from mintkit.mint import mint_score
from mintkit.nac import EOS, NacConfig, beam_decode
from mintkit.text import TokenSeq


def seq(s):
    return TokenSeq(tuple(s.split()))


def reference_perplexity(train_seqs, test_seqs, order, delta):
    """Straight-from-the-formula interpolated additive smoothing."""
    vocab = sorted({t for s in train_seqs for t in s} | {EOS})
    V = len(vocab)

    def padded(s):
        return ["<s>"] * (order - 1) + list(s) + [EOS]

    ngram = {}
    ctx = {}
    for s in train_seqs:
        p = padded(s)
        for i in range(order - 1, len(p)):
            for k in range(order):
                g = tuple(p[i - k:i + 1])
                ngram[g] = ngram.get(g, 0) + 1
                ctx[g[:-1]] = ctx.get(g[:-1], 0) + 1

    nll, n = 0.0, 0
    for s in test_seqs:
        p = padded(s)
        for i in range(order - 1, len(p)):
            prob = 0.0
            for k in range(order):
                g = tuple(p[i - k:i + 1])
                prob += (ngram.get(g, 0) + delta) / (ctx.get(g[:-1], 0) + delta * V) / order
            nll -= math.log(prob)
            n += 1
    return math.exp(nll / n)


def fixture_text(n_tokens, seed):
    rng = random.Random(seed)
    words = "the a cat dog sat ran on under mat log quickly slowly and .".split()
    seqs = []
    total = 0
    while total < n_tokens:
        s = [rng.choice(words) for _ in range(rng.randint(5, 15))]
        seqs.append(s)
        total += len(s)
    return seqs


class TestTrain:
    def test_count_dominance(self):
        m = train([["a", "b"], ["a", "b"]], order=2)
        assert m.prob("b", ["a"]) > m.prob("a", ["a"])

    def test_unigram_context_free(self):
        m = train([["a", "b", "b"], ["c"]], order=1)
        assert m.ngram_distribution(["a"]) == m.ngram_distribution(["c", "b"])
        assert m.prob("b", []) > m.prob("a", [])

    def test_empty(self):
        with pytest.raises(ValueError):
            train([])
        with pytest.raises(ValueError):
            train([[]])

    def test_vocab_has_eos(self):
        m = train([["x"]])
        assert m.vocab == (EOS, "x")

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_perplexity_matches_reference(self, order):
        tr = fixture_text(1000, 1)
        te = fixture_text(1000, 2)
        m = train(tr, order=order, delta=0.1)
        ref = reference_perplexity(tr, te, order, 0.1)
        assert m.perplexity(te) == pytest.approx(ref, rel=0.01)
        assert m.perplexity(te) == pytest.approx(ref, rel=1e-9)


class TestNextDistribution:
    def model(self, alpha):
        return train([["a", "b", "c"], ["b", "a", "d"]], order=2, copy_alpha=alpha)

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
    @pytest.mark.parametrize("prefix", [[], ["a"], ["a", "b"], ["z"]])
    def test_normalized(self, alpha, prefix):
        dist = self.model(alpha).next_distribution(seq("a b c e"), prefix)
        assert math.fsum(math.exp(v) for v in dist.values()) == pytest.approx(1.0, abs=1e-6)
        assert all(v > -math.inf for v in dist.values())

    def test_pure_copy(self):
        dist = self.model(1.0).next_distribution(seq("a b c"), ["a"])
        assert dist == {"b": 0.0}

    def test_copy_fallback_and_oov(self):
        dist = self.model(1.0).next_distribution(seq("a b c"), ["c"])
        assert set(dist) == {"a", "b", "c"}
        assert copy_targets(seq("a b q"), ["z"]) == ["a", "b", "q"]

    def test_no_copy_equals_ngram(self):
        m = self.model(0.0)
        dist = m.next_distribution(seq("a b c"), ["a"])
        ng = m.ngram_distribution(["a"])
        assert dist.keys() == ng.keys()
        for t in ng:
            assert math.exp(dist[t]) == pytest.approx(ng[t], rel=1e-12)

    def test_mixture_by_hand(self):
        # training counts: unigram over a b c d EOS (2,2,1,1,2 of 8); bigram after "a": b 1, d 1
        m = self.model(0.4)
        V, d = 5, 0.1
        uni = {"a": 2, "b": 2, "c": 1, "d": 1, EOS: 2}
        big = {"b": 1, "d": 1}
        g = {t: 0.5 * (uni[t] + d) / (8 + d * V) + 0.5 * (big.get(t, 0) + d) / (2 + d * V) for t in uni}
        # x = a b c, prefix ends in "a": copy mass all on "b"
        c = {"b": 1.0}
        dist = m.next_distribution(seq("a b c"), ["a"])
        for t in ("b", "c", "d"):
            expect = 0.4 * c.get(t, 0.0) + 0.6 * g[t]
            assert math.exp(dist[t]) == pytest.approx(expect, rel=1e-12)

    def test_longest_suffix_wins(self):
        assert copy_targets(seq("a b c a b d"), ["c", "a", "b"]) == ["d"]
        assert copy_targets(seq("a b c a b d"), ["a", "b"]) == ["c", "d"]


class TestSerialization:
    def test_round_trip(self, tmp_path):
        m = train(fixture_text(300, 3), order=3, delta=0.2, copy_alpha=0.25)
        path = tmp_path / "model.json"
        m.save(path)
        m2 = NgramModel.load(path)
        assert m2.to_json() == m.to_json()
        x = seq("the cat sat on the mat")
        assert m2.next_distribution(x, ["the"]) == m.next_distribution(x, ["the"])

    def test_bad_version(self, tmp_path):
        data = train([["a"]]).to_json()
        data["version"] = 99
        with pytest.raises(ValueError):
            NgramModel.from_json(data)


def test_copy_alpha_raises_density():
    docs = synthetic_corpus(50)
    base = train([d.tokens for d in docs], order=2)
    cfg = NacConfig(mode="off", beam_size=2, min_len=10, max_len=20)
    means = []
    for alpha in (0.05, 0.5):
        model = base.with_copy_alpha(alpha)
        means.append(statistics.fmean(
            mint_score(d, beam_decode(model, d, cfg).tokens).density for d in docs))
    assert means[0] < means[1]

"""Abstractiveness metrics, abstractiveness-constrained decoding and tradeoff analysis."""

__version__ = "0.1.0"

from .mint import MintReport, corpus_mint, mint_score, smoothed_match_chain
from .nac import NacConfig, beam_decode, lambda_h, log_lambda, offline_penalty, step_tracker
from .text import TokenSeq, greedy_fragments, lcs_length, matched_ngram_count, tokenize
from .tradeoff import TradeoffPoint, TrendFit, f_at, fit_trend, mu_score, pearson_r

__all__ = [
    "MintReport", "corpus_mint", "mint_score", "smoothed_match_chain",
    "NacConfig", "beam_decode", "lambda_h", "log_lambda", "offline_penalty", "step_tracker",
    "TokenSeq", "greedy_fragments", "lcs_length", "matched_ngram_count", "tokenize",
    "TradeoffPoint", "TrendFit", "f_at", "fit_trend", "mu_score", "pearson_r",
]

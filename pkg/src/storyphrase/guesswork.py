"""Security math: entropy, expected guesses and marginal guesswork.

Marginal guesswork w_a is the number of most-probable guesses an optimal
attacker needs before their cumulative success probability reaches a.
Guesswork distributions here are empirical n-gram relative frequencies
(no smoothing): they model an attacker enumerating observed n-grams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaOutOfRange, InvalidDistribution

# Absorbs float summation dust when a cumulative probability lands exactly
# on alpha (uniform 1/N sums versus alpha on the usual 0.05 grid).
_CUM_SLACK = 1e-12

DEFAULT_ALPHA_GRID = [round(0.05 * i, 2) for i in range(1, 21)]


@dataclass
class GuessworkDistribution:
    outcomes: list  # [(item, probability)] sorted by descending probability
    _cumulative: np.ndarray = None

    def __post_init__(self):
        probs = np.array([p for _, p in self.outcomes], dtype=np.float64)
        if probs.size == 0:
            raise InvalidDistribution("empty distribution")
        if (probs <= 0).any():
            raise InvalidDistribution("non-positive probability")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidDistribution(f"probabilities sum to {probs.sum()}")
        if (np.diff(probs) > 0).any():
            raise InvalidDistribution("outcomes not sorted by descending probability")
        self._cumulative = np.cumsum(probs)

    @classmethod
    def from_counts(cls, counts: dict) -> "GuessworkDistribution":
        total = sum(counts.values())
        items = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return cls(outcomes=[(item, c / total) for item, c in items])

    @classmethod
    def from_model(cls, model) -> "GuessworkDistribution":
        return cls.from_counts(model.counts)

    def __len__(self):
        return len(self.outcomes)


def entropy_bits(vocab_size: int, k: int) -> float:
    """Entropy of k independent uniform draws from a vocab_size dictionary."""
    if vocab_size < 1:
        raise ValueError(f"vocab_size={vocab_size}")
    return k * math.log2(vocab_size)


def entropy_bits_slots(sizes) -> float:
    """Entropy of one draw per slot from per-slot dictionaries."""
    return sum(math.log2(s) for s in sizes)


def expected_guesses(vocab_size: int, k: int) -> float:
    """Average-case guesses over the uniform k-word space: vocab**k / 2."""
    if vocab_size < 1:
        raise ValueError(f"vocab_size={vocab_size}")
    return vocab_size**k / 2


def marginal_guesswork(dist: GuessworkDistribution, alpha: float) -> int:
    """Smallest i whose top-i cumulative probability reaches alpha."""
    if not 0 < alpha <= 1:
        raise AlphaOutOfRange(f"alpha={alpha}")
    idx = int(np.searchsorted(dist._cumulative, alpha - _CUM_SLACK, side="left"))
    return min(idx, len(dist) - 1) + 1


def guesswork_curve(model_or_dist, alpha_grid=None):
    """[(alpha, log2 w_alpha)] over the grid; nondecreasing in alpha."""
    if isinstance(model_or_dist, GuessworkDistribution):
        dist = model_or_dist
    else:
        dist = GuessworkDistribution.from_model(model_or_dist)
    grid = list(alpha_grid if alpha_grid is not None else DEFAULT_ALPHA_GRID)
    return [(alpha, math.log2(marginal_guesswork(dist, alpha))) for alpha in grid]

"""Guessability scoring and ranking of candidate passphrases.

A candidate's score is the maximum of its smoothed joint probabilities
under the 2-, 3-, 4- and 5-gram corpus models; a LOW score means no model
order finds the word sequence likely, so rank 1 (minimum score) is the
hardest-to-guess candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyList
from .extract import CandidatePassphrase
from .ngram import NGramModel, joint_probability

SCORE_ORDERS = (2, 3, 4, 5)


@dataclass
class ScoredPassphrase:
    candidate: CandidatePassphrase
    a: float  # joint probability under the 2-gram model
    b: float  # 3-gram
    c: float  # 4-gram
    d: float  # 5-gram
    score: float
    rank: int | None = None

    @property
    def score_log2(self) -> float:
        return math.log2(self.score)

    @property
    def components_log2(self) -> tuple[float, float, float, float]:
        return tuple(math.log2(v) for v in (self.a, self.b, self.c, self.d))


def score_passphrase(models, candidate: CandidatePassphrase) -> ScoredPassphrase:
    """Score under the four model orders; `models` maps order -> NGramModel
    (a Corpus also works: its ngram_model(order) is used)."""

    def model_for(order: int) -> NGramModel:
        if isinstance(models, dict):
            return models[order]
        return models.ngram_model(order)

    joints = [joint_probability(model_for(o), candidate.words) for o in SCORE_ORDERS]
    a, b, c, d = joints
    return ScoredPassphrase(candidate=candidate, a=a, b=b, c=c, d=d, score=max(joints))


def rank_passphrases(scored: list[ScoredPassphrase]) -> list[ScoredPassphrase]:
    """Ascending by score (rank 1 = minimum); ties broken on the words."""
    if not scored:
        raise EmptyList("nothing to rank")
    ordered = sorted(scored, key=lambda s: (s.score, s.candidate.text))
    for i, entry in enumerate(ordered, start=1):
        entry.rank = i
    return ordered


def blacklist_guessable(ranked: list[ScoredPassphrase], keep_fraction: float = 1.0):
    """Keep only the ceil(keep_fraction * N) lowest-score entries."""
    if not 0 < keep_fraction <= 1:
        raise ValueError(f"keep_fraction={keep_fraction}")
    keep = math.ceil(keep_fraction * len(ranked))
    return ranked[:keep]

"""Story-text generation: distribution transforms and a seeded n-gram sampler.

The built-in sampler is a desk-scale stand-in for a fine-tuned neural
generator: it samples autoregressively from the corpus n-gram model with
the per-step transform pipeline temperature -> top-k -> top-p.  Imported
text (e.g. output of an external model) enters through import_generated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import Corpus
from .errors import (
    EmptyGeneratedText,
    InvalidDistribution,
    KZero,
    NonPositiveTemperature,
    POutOfRange,
)
from .rng import SplitMix64

_SUM_TOL = 1e-9
# Slack absorbing float dust when a cumulative sum lands exactly on the
# top-p threshold (0.5 + 0.3 vs p=0.8).
_CUM_SLACK = 1e-12
_TINY = 1e-308


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.7
    top_k: int = 40
    top_p: float = 0.9
    min_tokens: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise NonPositiveTemperature(f"temperature={self.temperature}")
        if self.top_k < 1:
            raise KZero(f"top_k={self.top_k}")
        if not 0 < self.top_p <= 1:
            raise POutOfRange(f"top_p={self.top_p}")
        if self.min_tokens < 1:
            raise ValueError(f"min_tokens={self.min_tokens}")


@dataclass
class GeneratedText:
    text: str
    source: str  # "builtin-sampler" | "imported"
    corpus_id: str
    params: SamplingParams | None = None


def _validate(dist):
    if not dist:
        raise InvalidDistribution("empty distribution")
    total = 0.0
    for _, p in dist:
        if p <= 0:
            raise InvalidDistribution(f"non-positive probability {p}")
        total += p
    if abs(total - 1.0) > _SUM_TOL:
        raise InvalidDistribution(f"probabilities sum to {total}")


def _renormalize(pairs):
    total = sum(p for _, p in pairs)
    return [(t, p / total) for t, p in pairs]


def apply_temperature(dist, temperature: float):
    """Sharpen (T<1) or flatten (T>1) a distribution: p -> p**(1/T), renormalized."""
    if temperature <= 0:
        raise NonPositiveTemperature(f"temperature={temperature}")
    _validate(dist)
    # Work in log space and shift by the max so extreme temperatures cannot
    # overflow; ranking is unaffected.
    logs = [math.log(p) / temperature for _, p in dist]
    peak = max(logs)
    weights = [max(math.exp(l - peak), _TINY) for l in logs]
    return _renormalize([(t, w) for (t, _), w in zip(dist, weights)])


def apply_top_k(dist, k: int):
    """Keep the k most probable entries (ties broken lexicographically)."""
    if k < 1:
        raise KZero(f"k={k}")
    _validate(dist)
    if k >= len(dist):
        return list(dist)
    ranked = sorted(dist, key=lambda tp: (-tp[1], tp[0]))
    return _renormalize(ranked[:k])


def apply_top_p(dist, p: float):
    """Nucleus filter: keep the smallest probability-sorted prefix reaching p."""
    if not 0 < p <= 1:
        raise POutOfRange(f"p={p}")
    _validate(dist)
    ranked = sorted(dist, key=lambda tp: (-tp[1], tp[0]))
    kept = []
    cum = 0.0
    for token, prob in ranked:
        kept.append((token, prob))
        cum += prob
        if cum >= p - _CUM_SLACK:
            break
    return _renormalize(kept)


def _successor_index(model):
    index = {}
    for key, count in model.counts.items():
        index.setdefault(key[:-1], {})[key[-1]] = count
    return index


def _step_distribution(vocab_sorted, successors, context_count, vocab_size):
    denom = context_count + vocab_size
    base = 1.0 / denom
    out = []
    for token in vocab_sorted:
        c = successors.get(token)
        out.append((token, (c + 1) / denom if c else base))
    return out


def sample_text(corpus: Corpus, order: int, params: SamplingParams) -> GeneratedText:
    """Generate >= min_tokens tokens; deterministic for a fixed seed.

    A period is appended after any emitted token that ended a segment in
    the source corpus, so the extractor downstream sees terminators.
    """
    rng = SplitMix64(params.seed)
    vocab_sorted = sorted(corpus.vocabulary)
    successor_cache = {}
    out_tokens: list[str] = []
    parts: list[str] = []
    hard_cap = params.min_tokens + 200

    while True:
        m = min(order, len(out_tokens) + 1)
        model = corpus.ngram_model(m)
        if m not in successor_cache:
            successor_cache[m] = _successor_index(model)
        context = tuple(out_tokens[-(m - 1) :]) if m > 1 else ()
        successors = successor_cache[m].get(context, {})
        context_count = model.context_counts.get(context, 0)
        dist = _step_distribution(
            vocab_sorted, successors, context_count, model.vocab_size
        )
        dist = apply_temperature(dist, params.temperature)
        dist = apply_top_k(dist, params.top_k)
        dist = apply_top_p(dist, params.top_p)

        u = rng.next_float()
        cum = 0.0
        token = dist[-1][0]
        for t, p in dist:
            cum += p
            if u < cum:
                token = t
                break
        out_tokens.append(token)
        ended = token in corpus.segment_final_tokens
        parts.append(token + "." if ended else token)
        if len(out_tokens) >= params.min_tokens and (
            ended or len(out_tokens) >= hard_cap
        ):
            break

    return GeneratedText(
        text=" ".join(parts),
        source="builtin-sampler",
        corpus_id=corpus.id,
        params=params,
    )


def import_generated(path, corpus_id: str) -> GeneratedText:
    """Load externally generated text verbatim (line endings normalized)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8")  # UnicodeDecodeError surfaces as-is
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    if not text.strip():
        raise EmptyGeneratedText(f"{path} contains no text")
    return GeneratedText(text=text, source="imported", corpus_id=corpus_id)

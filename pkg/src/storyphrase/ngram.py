"""N-gram frequency models with Laplace-smoothed conditional probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field

from ._kernels import window_counts
from .corpus import Corpus
from .errors import BadContextLength, EmptySequence, OrderTooLarge

MAX_ORDER = 5


@dataclass
class NGramModel:
    order: int
    counts: dict  # tuple[str, ...] (length order) -> int
    context_counts: dict  # tuple[str, ...] (length order-1) -> int
    vocab_size: int
    corpus: Corpus | None = field(default=None, repr=False)

    def total_windows(self) -> int:
        return sum(self.counts.values())


def build_ngram_model(corpus: Corpus, order: int) -> NGramModel:
    if not 1 <= order <= MAX_ORDER:
        raise OrderTooLarge(f"order must be in 1..{MAX_ORDER}, got {order}")
    if len(corpus.tokens) < order:
        raise OrderTooLarge(
            f"corpus {corpus.id!r} has {len(corpus.tokens)} tokens, shorter than order {order}"
        )
    counts = window_counts(corpus.tokens, order)
    if order == 1:
        context_counts = {(): len(corpus.tokens)}
    else:
        # Contexts are counted over window *prefixes* so that the counts with
        # a given prefix always sum exactly to that prefix's context count.
        context_counts = window_counts(corpus.tokens[: len(corpus.tokens)], order - 1)
        tail = tuple(corpus.tokens[-(order - 1) :])
        context_counts[tail] -= 1
        if context_counts[tail] == 0:
            del context_counts[tail]
    return NGramModel(
        order=order,
        counts=counts,
        context_counts=context_counts,
        vocab_size=len(corpus.vocabulary),
        corpus=corpus,
    )


def smoothed_conditional(model: NGramModel, context, word: str) -> float:
    """Laplace-smoothed P(word | context): (c + 1) / (C + V)."""
    context = tuple(context)
    if len(context) != model.order - 1:
        raise BadContextLength(
            f"context length {len(context)} != order-1 ({model.order - 1})"
        )
    c = model.counts.get(context + (word,), 0)
    big_c = model.context_counts.get(context, 0)
    return (c + 1) / (big_c + model.vocab_size)


def joint_probability(model: NGramModel, sequence) -> float:
    """Chain-rule product of smoothed conditionals under `model`.

    The first order-1 positions have fewer preceding tokens than the model
    needs; each such position backs off to the model of matching order
    built from the same corpus (no boundary padding symbols).
    """
    sequence = list(sequence)
    if not sequence:
        raise EmptySequence("cannot score an empty sequence")
    if model.corpus is None:
        raise ValueError("model was built without a corpus backreference")
    prob = 1.0
    for i, word in enumerate(sequence):
        m = min(model.order, i + 1)
        sub = model if m == model.order else model.corpus.ngram_model(m)
        context = tuple(sequence[i - (m - 1) : i])
        prob *= smoothed_conditional(sub, context, word)
    return prob

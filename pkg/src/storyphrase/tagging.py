"""Coarse POS tagging, tag-rule extraction and structure-based filtering.

A tag-rule is a tag sequence together with every distinct word sequence in
the corpus realizing it; the fewer realizations, the less guessing work
the structure leaves an attacker, so candidates whose tag sequence is not
unique (among the candidates or against the corpus rules of the same
length) are filtered out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from ._kernels import window_groups
from .errors import EmptyInput, NoRules, OrderTooLarge
from .extract import CandidatePassphrase

DEFAULT_TAGSET = [
    "NOUN", "VERB", "MODAL", "ADJ", "ADV", "PRON", "DET", "ADP",
    "CONJ", "NUM", "PRT", "WH", "EX", "INTJ", "X",
]


@dataclass
class Tagger:
    tagset: list[str]
    lexicon: dict[str, str]  # lowercased word -> tag
    suffix_rules: list[tuple[str, str]]  # longest-first (suffix, tag)
    default_tag: str = "NOUN"

    def tag(self, word: str) -> str:
        tag = self.lexicon.get(word.lower())
        if tag is not None:
            return tag
        lowered = word.lower()
        for suffix, stag in self.suffix_rules:
            if len(lowered) > len(suffix) and lowered.endswith(suffix):
                return stag
        return self.default_tag


def tag_sequence(tagger: Tagger, words) -> list[str]:
    words = list(words)
    if not words:
        raise EmptyInput("cannot tag an empty word sequence")
    return [tagger.tag(w) for w in words]


def load_default_tagger() -> Tagger:
    data = resources.files("storyphrase") / "data"
    lexicon = {}
    for line in (data / "lexicon.tsv").read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        word, tag = line.split("\t")
        lexicon[word.lower()] = tag
    rules = []
    for line in (data / "suffix_rules.tsv").read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        suffix, tag = line.split("\t")
        rules.append((suffix, tag))
    rules.sort(key=lambda st: -len(st[0]))
    tags = set(lexicon.values()) | {t for _, t in rules} | {"NOUN"}
    assert tags <= set(DEFAULT_TAGSET)
    return Tagger(
        tagset=list(DEFAULT_TAGSET),
        lexicon=lexicon,
        suffix_rules=rules,
        default_tag="NOUN",
    )


def load_tagger_tsv(path, tagset=None) -> Tagger:
    """External tagger import: word<TAB>tag per line, no suffix rules."""
    lexicon = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            word, tag = line.split("\t")
            lexicon[word.lower()] = tag
    tags = tagset or sorted(set(lexicon.values()))
    return Tagger(tagset=list(tags), lexicon=lexicon, suffix_rules=[], default_tag=tags[0] if "NOUN" not in tags else "NOUN")


@dataclass
class TagRule:
    tags: tuple[str, ...]
    sequences: set[tuple[str, ...]]
    corpus_id: str

    @property
    def search_space_bits(self) -> float:
        return math.log2(len(self.sequences))


def extract_tag_rules(corpus, tagger: Tagger, n: int) -> list[TagRule]:
    if len(corpus.tokens) < n:
        raise OrderTooLarge(
            f"corpus {corpus.id!r} has {len(corpus.tokens)} tokens, shorter than {n}"
        )
    tags = [tagger.tag(w) for w in corpus.tokens]
    groups = window_groups(tags, corpus.tokens, n)
    return [
        TagRule(tags=key, sequences=seqs, corpus_id=corpus.id)
        for key, seqs in groups.items()
    ]


def tag_space_bits(tagset_size: int, length: int) -> float:
    """Upper bound on tag-sequence entropy: log2(tagset_size ** length)."""
    return length * math.log2(tagset_size)


DEFAULT_BUCKET_EDGES = [1.0, 2.0, 2.8]


def search_space_histogram(rules, bucket_edges=None) -> dict[str, float]:
    rules = list(rules)
    if not rules:
        raise NoRules("no tag rules to bucket")
    edges = list(bucket_edges if bucket_edges is not None else DEFAULT_BUCKET_EDGES)
    labels = []
    lo = 0.0
    for edge in edges:
        labels.append(f"[{lo:g},{edge:g})")
        lo = edge
    labels.append(f">={lo:g}")
    counts = [0] * len(labels)
    for rule in rules:
        bits = rule.search_space_bits
        idx = len(edges)
        for j, edge in enumerate(edges):
            if bits < edge:
                idx = j
                break
        counts[idx] += 1
    total = len(rules)
    return {label: 100.0 * c / total for label, c in zip(labels, counts)}


def filter_by_tag_rules(
    candidates: list[CandidatePassphrase],
    corpus_rules: dict[int, set[tuple[str, ...]]],
    tagger: Tagger,
):
    """Partition candidates into (kept, removed-with-reason).

    A candidate is removed when its tag sequence collides with another
    candidate's, or when it equals an existing corpus tag-rule of the same
    length.  Removal reasons: "duplicate-candidate-tags" |
    "matches-corpus-rule".
    """
    tagged = [(c, tuple(tag_sequence(tagger, c.words))) for c in candidates]
    seen: dict[tuple[str, ...], int] = {}
    for _, tags in tagged:
        seen[tags] = seen.get(tags, 0) + 1

    kept, removed = [], []
    for cand, tags in tagged:
        if seen[tags] > 1:
            removed.append((cand, "duplicate-candidate-tags"))
        elif tags in corpus_rules.get(len(tags), set()):
            removed.append((cand, "matches-corpus-rule"))
        else:
            kept.append(cand)
    return kept, removed

"""Corpus ingestion: tokenization and n-gram-ready token streams.

Tokenization rules (these fix the surface forms everything downstream sees):

* words mode: the text is whitespace-split after stripping every Unicode
  punctuation character.  Apostrophes, quotes and the like are removed in
  place with no space inserted ("Queen's" -> "Queens"); dash-category
  characters (hyphens, em dashes) become separators.  Case is preserved.
* segments mode: the text is cut into word runs at the terminators
  comma, colon, semicolon and period, and additionally at paragraph
  breaks (blank lines).  Question and exclamation marks do NOT terminate
  a segment: sentence fragments regularly continue past a quoted "?" or
  "!" ("... places!" said the King, ...), and treating them as hard stops
  loses those candidates.  Terminators are never tokens.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, EmptyCorpus

TERMINATORS = ",:;."

_PARAGRAPH_RE = re.compile(r"\n[ \t]*\n")
_SEGMENT_SPLIT_RE = re.compile("[" + re.escape(TERMINATORS) + "]")


def _punctuation_table(text: str) -> dict:
    # Built per call over the distinct characters actually present, so the
    # full Unicode punctuation range never needs enumerating.
    table = {}
    for ch in set(text):
        cat = unicodedata.category(ch)
        if cat.startswith("P"):
            table[ord(ch)] = " " if cat == "Pd" else None
    return table


def _split_words(text: str) -> list[str]:
    return text.translate(_punctuation_table(text)).split()


def tokenize(text: str, mode: str = "words"):
    """Tokenize `text`; mode "words" gives a flat token list, "segments"
    gives one token list per punctuation-delimited segment."""
    if mode == "words":
        return _split_words(text)
    if mode == "segments":
        segments = []
        for paragraph in _PARAGRAPH_RE.split(text):
            for chunk in _SEGMENT_SPLIT_RE.split(paragraph):
                words = _split_words(chunk)
                if words:
                    segments.append(words)
        return segments
    raise ValueError(f"unknown tokenize mode: {mode!r}")


@dataclass
class Corpus:
    id: str
    title: str
    tokens: list[str]
    vocabulary: set[str]
    character_names: list[str] = field(default_factory=list)
    # Tokens that ended at least one segment in the source text; the
    # built-in sampler re-inserts periods after these so the extractor
    # sees terminators.
    segment_final_tokens: set[str] = field(default_factory=set)
    _models: dict = field(default_factory=dict, repr=False)

    def ngram_model(self, order: int):
        """Build (and memoize) the n-gram model of the given order."""
        if order not in self._models:
            from .ngram import build_ngram_model

            self._models[order] = build_ngram_model(self, order)
        return self._models[order]


def build_corpus(
    text: str, id: str, title: str = "", character_names: list[str] | None = None
) -> Corpus:
    tokens = tokenize(text, "words")
    if not tokens:
        raise EmptyCorpus(f"corpus {id!r}: no tokens survive tokenization")
    finals = {segment[-1] for segment in tokenize(text, "segments")}
    return Corpus(
        id=id,
        title=title or id,
        tokens=tokens,
        vocabulary=set(tokens),
        character_names=list(character_names or []),
        segment_final_tokens=finals,
    )


def load_corpus_dir(directory) -> Corpus:
    """Load a corpus from a registry directory holding text.txt + corpus.meta.

    corpus.meta is line-based key=value with keys: id, title,
    characters=comma-separated names.
    """
    directory = Path(directory)
    text_path = directory / "text.txt"
    meta_path = directory / "corpus.meta"
    if not text_path.is_file():
        raise ConfigError(f"missing {text_path}")
    if not meta_path.is_file():
        raise ConfigError(f"missing {meta_path}")
    meta = {}
    for line in meta_path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{meta_path}: bad line {line!r}")
        key, value = line.split("=", 1)
        meta[key.strip()] = value.strip()
    if "id" not in meta:
        raise ConfigError(f"{meta_path}: missing id")
    characters = [c.strip() for c in meta.get("characters", "").split(",") if c.strip()]
    return build_corpus(
        text_path.read_text(encoding="utf-8"),
        id=meta["id"],
        title=meta.get("title", meta["id"]),
        character_names=characters,
    )

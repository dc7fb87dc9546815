"""Candidate passphrase extraction from generated story text.

Pipeline: cut the text into punctuation-delimited segments, discard runs
shorter than five words, strip the function words and/the/a/an, keep only
5..7-word sequences, then swap personal pronouns for character names.

Name substitution can lengthen a candidate (a two-word name such as
"white rabbit" adds a word).  The seven-word cap is re-enforced after
substitution by dropping words from the front while the leading word is
not part of a substituted name; a candidate that still cannot fit is
dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Corpus, tokenize
from .errors import NoCharacters
from .rng import SplitMix64
from .sampling import GeneratedText

REMOVAL_WORDS = {"and", "the", "a", "an"}
PRONOUNS = {"i", "me", "she", "he", "them", "it"}
MIN_WORDS = 5
MAX_WORDS = 7


@dataclass
class CandidatePassphrase:
    words: list[str]
    corpus_id: str
    source_segment: str
    # (index of the name's first word in `words`, original pronoun,
    #  substituted name); multi-word names span len(name.split()) words.
    replaced_slots: list[tuple[int, str, str]] = field(default_factory=list)

    @property
    def text(self) -> str:
        return " ".join(self.words)


def split_candidates(text: str) -> list[list[str]]:
    """Punctuation-delimited word runs with fewer than 5 words discarded."""
    return [seg for seg in tokenize(text, "segments") if len(seg) >= MIN_WORDS]


def remove_function_words(seq) -> list[str]:
    return [w for w in seq if w.lower() not in REMOVAL_WORDS]


def _substitute(seq, characters, rng):
    words: list[str] = []
    slots: list[tuple[int, str, str]] = []
    for token in seq:
        if token.lower() in PRONOUNS:
            name = rng.choice(characters)
            slots.append((len(words), token, name))
            words.extend(name.split())
        else:
            words.append(token)
    return words, slots


def replace_pronouns(seq, characters, seed: int):
    """Replace I/me/she/he/them/it with seeded-uniform character names."""
    if not characters:
        raise NoCharacters("corpus has no character names configured")
    return _substitute(list(seq), characters, SplitMix64(seed))


def _enforce_cap(words, slots):
    """Drop leading words until <= MAX_WORDS; None if the front is a name."""
    while len(words) > MAX_WORDS:
        if slots and slots[0][0] == 0:
            return None
        words = words[1:]
        slots = [(pos - 1, pron, name) for pos, pron, name in slots]
    return words, slots


def extract_candidates(
    text: GeneratedText | str, corpus: Corpus, seed: int
) -> list[CandidatePassphrase]:
    if not corpus.character_names:
        raise NoCharacters(f"corpus {corpus.id!r} has no character names configured")
    raw = text.text if isinstance(text, GeneratedText) else text
    rng = SplitMix64(seed)

    candidates: list[CandidatePassphrase] = []
    seen_pre: set[tuple[str, ...]] = set()
    seen_final: set[tuple[str, ...]] = set()
    for segment in split_candidates(raw):
        cleaned = remove_function_words(segment)
        if not MIN_WORDS <= len(cleaned) <= MAX_WORDS:
            continue
        key = tuple(cleaned)
        if key in seen_pre:
            continue
        seen_pre.add(key)
        words, slots = _substitute(cleaned, corpus.character_names, rng)
        capped = _enforce_cap(words, slots)
        if capped is None:
            continue
        words, slots = capped
        final_key = tuple(words)
        if final_key in seen_final:
            continue
        seen_final.add(final_key)
        candidates.append(
            CandidatePassphrase(
                words=words,
                corpus_id=corpus.id,
                source_segment=" ".join(segment),
                replaced_slots=slots,
            )
        )
    return candidates

import math

import pytest

from storyphrase.corpus import build_corpus
from storyphrase.errors import EmptyInput, NoRules, OrderTooLarge
from storyphrase.extract import CandidatePassphrase
from storyphrase.rng import SplitMix64
from storyphrase.tagging import (
    DEFAULT_TAGSET,
    Tagger,
    extract_tag_rules,
    filter_by_tag_rules,
    load_default_tagger,
    search_space_histogram,
    tag_sequence,
    tag_space_bits,
)


def toy_tagger(mapping, default="NOUN"):
    return Tagger(tagset=DEFAULT_TAGSET, lexicon=mapping, suffix_rules=[], default_tag=default)


def make_candidate(words):
    return CandidatePassphrase(words=list(words), corpus_id="t", source_segment=" ".join(words))


class TestTagSequence:
    def test_lexicon_lookup(self):
        tagger = toy_tagger({"pigeon": "NOUN", "flew": "VERB"})
        assert tag_sequence(tagger, ["Pigeon", "flew"]) == ["NOUN", "VERB"]

    def test_suffix_rule(self):
        tagger = Tagger(DEFAULT_TAGSET, {}, [("ing", "VERB")], "NOUN")
        assert tag_sequence(tagger, ["glorfing"]) == ["VERB"]

    def test_longest_suffix_wins(self):
        tagger = load_default_tagger()
        # "running" matches both "ing"->VERB and no longer rule; lexicon
        # absent, so the suffix applies
        assert tagger.tag("zuffing") == "VERB"
        assert tagger.tag("zuffly") == "ADV"

    def test_default_tag(self):
        tagger = toy_tagger({})
        assert tag_sequence(tagger, ["qwyjibo"]) == ["NOUN"]

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            tag_sequence(toy_tagger({}), [])

    def test_default_tagger_shape(self):
        tagger = load_default_tagger()
        assert len(tagger.tagset) == 15
        assert tagger.default_tag in tagger.tagset
        assert set(tagger.lexicon.values()) <= set(tagger.tagset)
        assert all(t in tagger.tagset for _, t in tagger.suffix_rules)


class TestExtractTagRules:
    def test_alternating_corpus(self):
        corpus = build_corpus("a b a b a b a", id="t")
        tagger = toy_tagger({"a": "X", "b": "VERB"})
        rules = {r.tags: r.sequences for r in extract_tag_rules(corpus, tagger, 5)}
        assert rules == {
            ("X", "VERB", "X", "VERB", "X"): {("a", "b", "a", "b", "a")},
            ("VERB", "X", "VERB", "X", "VERB"): {("b", "a", "b", "a", "b")},
        }

    def test_distinct_tags_give_zero_bits(self):
        corpus = build_corpus("q w e r t y u", id="t")
        tagger = toy_tagger({w: t for w, t in zip("qwertyu", DEFAULT_TAGSET)})
        rules = extract_tag_rules(corpus, tagger, 5)
        assert all(len(r.sequences) == 1 for r in rules)
        assert all(r.search_space_bits == 0 for r in rules)

    def test_too_short(self):
        with pytest.raises(OrderTooLarge):
            extract_tag_rules(build_corpus("a b c", id="t"), toy_tagger({}), 5)

    def test_matches_brute_force(self):
        rng = SplitMix64(21)
        for trial in range(5):
            words = [f"w{rng.next_below(6)}" for _ in range(80)]
            corpus = build_corpus(" ".join(words), id="t")
            tagger = toy_tagger({f"w{i}": ["NOUN", "VERB", "ADJ"][i % 3] for i in range(6)})
            for n in (5, 6, 7):
                rules = extract_tag_rules(corpus, tagger, n)
                brute = {}
                for i in range(len(words) - n + 1):
                    window = tuple(words[i : i + n])
                    key = tuple(tagger.tag(w) for w in window)
                    brute.setdefault(key, set()).add(window)
                assert {r.tags: r.sequences for r in rules} == brute
                for rule in rules:
                    assert rule.search_space_bits == math.log2(len(rule.sequences))

    def test_sequences_total_is_distinct_ngram_count(self):
        rng = SplitMix64(8)
        words = [f"w{rng.next_below(4)}" for _ in range(60)]
        corpus = build_corpus(" ".join(words), id="t")
        tagger = toy_tagger({"w0": "NOUN", "w1": "NOUN", "w2": "VERB", "w3": "ADJ"})
        for n in (5, 6):
            rules = extract_tag_rules(corpus, tagger, n)
            distinct = {tuple(words[i : i + n]) for i in range(len(words) - n + 1)}
            assert sum(len(r.sequences) for r in rules) == len(distinct)


class TestHistogram:
    def test_all_singletons(self):
        corpus = build_corpus("q w e r t y u", id="t")
        tagger = toy_tagger({w: t for w, t in zip("qwertyu", DEFAULT_TAGSET)})
        hist = search_space_histogram(extract_tag_rules(corpus, tagger, 5))
        assert hist["[0,1)"] == 100.0

    def test_two_buckets(self):
        from storyphrase.tagging import TagRule

        rules = [
            TagRule(tags=("A",), sequences={("x",)}, corpus_id="t"),
            TagRule(
                tags=("B",),
                sequences={(f"y{i}",) for i in range(8)},
                corpus_id="t",
            ),
        ]
        hist = search_space_histogram(rules)
        assert hist["[0,1)"] == 50.0
        assert hist[">=2.8"] == 50.0

    def test_percentages_sum_to_100(self):
        rng = SplitMix64(5)
        words = [f"w{rng.next_below(5)}" for _ in range(120)]
        corpus = build_corpus(" ".join(words), id="t")
        tagger = toy_tagger({f"w{i}": ["NOUN", "VERB"][i % 2] for i in range(5)})
        hist = search_space_histogram(extract_tag_rules(corpus, tagger, 5))
        assert abs(sum(hist.values()) - 100.0) <= 0.01

    def test_no_rules(self):
        with pytest.raises(NoRules):
            search_space_histogram([])


class TestTagSpaceBits:
    def test_fifteen_tag_seven_word_bound(self):
        assert math.floor(tag_space_bits(15, 7)) == 27


class TestFilterByTagRules:
    def test_duplicates_both_removed(self):
        tagger = toy_tagger({"a": "NOUN", "b": "VERB", "c": "ADJ"})
        c1 = make_candidate(["a", "b", "a", "b", "a"])
        c2 = make_candidate(["a", "b", "a", "b", "a"])
        kept, removed = filter_by_tag_rules([c1, c2], {5: set()}, tagger)
        assert kept == []
        assert [(c, r) for c, r in removed] == [
            (c1, "duplicate-candidate-tags"),
            (c2, "duplicate-candidate-tags"),
        ]

    def test_corpus_rule_match_removed(self):
        tagger = toy_tagger({"a": "NOUN", "b": "VERB"})
        cand = make_candidate(["a", "b", "a", "b", "a"])
        rules = {5: {("NOUN", "VERB", "NOUN", "VERB", "NOUN")}}
        kept, removed = filter_by_tag_rules([cand], rules, tagger)
        assert kept == []
        assert removed[0][1] == "matches-corpus-rule"

    def test_unique_kept(self):
        tagger = toy_tagger({"a": "NOUN", "b": "VERB"})
        cand = make_candidate(["a", "b", "a", "b", "a"])
        kept, removed = filter_by_tag_rules([cand], {5: set()}, tagger)
        assert kept == [cand] and removed == []

    def test_partition_and_distinct_tags(self):
        rng = SplitMix64(31)
        tagger = load_default_tagger()
        vocab = ["Pigeon", "flew", "away", "straight", "line", "court", "hall",
                 "players", "dancing", "running", "Alice", "nine", "high", "move"]
        candidates = [
            make_candidate([vocab[rng.next_below(len(vocab))] for _ in range(5 + rng.next_below(3))])
            for _ in range(24)
        ]
        kept, removed = filter_by_tag_rules(candidates, {5: set(), 6: set(), 7: set()}, tagger)
        assert len(kept) + len(removed) == len(candidates)
        kept_tags = [tuple(tag_sequence(tagger, c.words)) for c in kept]
        assert len(kept_tags) == len(set(kept_tags))

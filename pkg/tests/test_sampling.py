import pytest

from storyphrase.corpus import build_corpus
from storyphrase.errors import (
    EmptyGeneratedText,
    InvalidDistribution,
    KZero,
    NonPositiveTemperature,
    POutOfRange,
)
from storyphrase.rng import SplitMix64
from storyphrase.sampling import (
    SamplingParams,
    apply_temperature,
    apply_top_k,
    apply_top_p,
    import_generated,
    sample_text,
)


def random_distribution(rng, max_size=12):
    size = 2 + rng.next_below(max_size - 1)
    weights = [rng.next_float() + 1e-6 for _ in range(size)]
    total = sum(weights)
    return [(f"t{i}", w / total) for i, w in enumerate(weights)]


class TestTemperature:
    def test_identity_at_one(self):
        dist = [("a", 0.75), ("b", 0.25)]
        out = apply_temperature(dist, 1.0)
        assert [t for t, _ in out] == ["a", "b"]
        for (_, p), (_, q) in zip(dist, out):
            assert p == pytest.approx(q, abs=1e-12)

    def test_half_squares(self):
        out = dict(apply_temperature([("a", 0.75), ("b", 0.25)], 0.5))
        assert out["a"] == pytest.approx(0.9, abs=1e-12)
        assert out["b"] == pytest.approx(0.1, abs=1e-12)

    def test_low_temperature_concentrates(self):
        out = dict(apply_temperature([("a", 0.6), ("b", 0.4)], 0.01))
        assert out["a"] > 0.999

    def test_nonpositive(self):
        with pytest.raises(NonPositiveTemperature):
            apply_temperature([("a", 1.0)], 0.0)

    def test_invalid_distribution(self):
        with pytest.raises(InvalidDistribution):
            apply_temperature([("a", 0.5), ("b", 0.4)], 1.0)
        with pytest.raises(InvalidDistribution):
            apply_temperature([("a", 1.5), ("b", -0.5)], 1.0)


class TestTopK:
    def test_k_at_least_length_identity(self):
        dist = [("a", 0.5), ("b", 0.3), ("c", 0.2)]
        assert apply_top_k(dist, 3) == dist
        assert apply_top_k(dist, 10) == dist

    def test_keep_two(self):
        out = apply_top_k([("a", 0.5), ("b", 0.3), ("c", 0.2)], 2)
        assert out[0][0] == "a" and out[1][0] == "b"
        assert out[0][1] == pytest.approx(0.625, abs=1e-12)
        assert out[1][1] == pytest.approx(0.375, abs=1e-12)

    def test_k_one_degenerate(self):
        out = apply_top_k([("a", 0.5), ("b", 0.3), ("c", 0.2)], 1)
        assert out == [("a", 1.0)]

    def test_tie_break_lexicographic(self):
        out = apply_top_k([("b", 0.25), ("a", 0.25), ("c", 0.5)], 2)
        assert [t for t, _ in out] == ["c", "a"]

    def test_k_zero(self):
        with pytest.raises(KZero):
            apply_top_k([("a", 1.0)], 0)


class TestTopP:
    def test_p_one_keeps_all(self):
        dist = [("a", 0.5), ("b", 0.3), ("c", 0.2)]
        out = apply_top_p(dist, 1.0)
        assert sorted(t for t, _ in out) == ["a", "b", "c"]

    def test_cut_at_cumulative(self):
        out = apply_top_p([("a", 0.5), ("b", 0.3), ("c", 0.2)], 0.7)
        assert [t for t, _ in out] == ["a", "b"]
        assert out[0][1] == pytest.approx(0.625, abs=1e-12)

    def test_first_entry_suffices(self):
        out = apply_top_p([("a", 0.5), ("b", 0.3), ("c", 0.2)], 0.4)
        assert out == [("a", 1.0)]

    def test_out_of_range(self):
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(POutOfRange):
                apply_top_p([("a", 1.0)], bad)


class TestTransformProperties:
    """Seeded sweep over 1000 random distributions."""

    def test_invariants(self):
        rng = SplitMix64(2024)
        for trial in range(1000):
            dist = random_distribution(rng)
            temperature = 0.1 + 3 * rng.next_float()
            k = 1 + rng.next_below(len(dist) + 2)
            p = 0.05 + 0.95 * rng.next_float()

            warmed = apply_temperature(dist, temperature)
            assert abs(sum(q for _, q in warmed) - 1.0) <= 1e-9
            assert all(0 < q <= 1 for _, q in warmed)
            # ranking preserved (non-strict: extreme temperatures may flatten)
            order_in = sorted(range(len(dist)), key=lambda i: -dist[i][1])
            by_token = dict(warmed)
            ranked = [by_token[dist[i][0]] for i in order_in]
            assert all(x >= y - 1e-15 for x, y in zip(ranked, ranked[1:]))

            cut = apply_top_k(warmed, k)
            assert abs(sum(q for _, q in cut) - 1.0) <= 1e-9
            assert len(cut) == min(k, len(warmed))
            assert {t for t, _ in cut} <= {t for t, _ in dist}

            nucleus = apply_top_p(cut, p)
            assert abs(sum(q for _, q in nucleus) - 1.0) <= 1e-9
            assert {t for t, _ in nucleus} <= {t for t, _ in cut}
            # minimal qualifying prefix, within the documented tolerance band
            pre_cut = sorted((q for _, q in cut), reverse=True)
            kept = len(nucleus)
            assert sum(pre_cut[:kept]) >= p - 1e-9
            if kept > 1:
                assert sum(pre_cut[: kept - 1]) < p + 1e-9


class TestSamplingParams:
    def test_validation(self):
        with pytest.raises(NonPositiveTemperature):
            SamplingParams(temperature=0)
        with pytest.raises(KZero):
            SamplingParams(top_k=0)
        with pytest.raises(POutOfRange):
            SamplingParams(top_p=1.2)
        with pytest.raises(ValueError):
            SamplingParams(min_tokens=0)


class TestSampleText:
    def test_deterministic(self):
        corpus = build_corpus("a b c. a b d. b c a. c a b.", id="t")
        params = SamplingParams(min_tokens=25, seed=77)
        first = sample_text(corpus, 2, params)
        second = sample_text(corpus, 2, params)
        assert first.text == second.text
        assert first.source == "builtin-sampler"

    def test_alternating_corpus_with_top_k_one(self):
        corpus = build_corpus("a b a b a", id="t")
        params = SamplingParams(top_k=1, top_p=1.0, min_tokens=20, seed=5)
        tokens = [t.rstrip(".") for t in sample_text(corpus, 2, params).text.split()]
        for prev, cur in zip(tokens, tokens[1:]):
            assert {prev, cur} == {"a", "b"}

    def test_min_tokens(self):
        corpus = build_corpus("a b c. b c a. c a b. a c b.", id="t")
        params = SamplingParams(min_tokens=300, seed=1)
        generated = sample_text(corpus, 2, params)
        assert len(generated.text.split()) >= 300

    def test_different_seeds_differ(self):
        corpus = build_corpus("a b c. b c a. c a b. a c b. b a c.", id="t")
        texts = {
            sample_text(corpus, 2, SamplingParams(min_tokens=40, seed=s)).text
            for s in range(6)
        }
        assert len(texts) > 1


class TestImportGenerated:
    def test_verbatim(self, tmp_path):
        path = tmp_path / "gen.txt"
        path.write_text("Alice was here.\nShe left.\n", encoding="utf-8")
        generated = import_generated(path, "alice")
        assert generated.text == "Alice was here.\nShe left.\n"
        assert generated.source == "imported"
        assert generated.corpus_id == "alice"

    def test_crlf_normalized(self, tmp_path):
        path = tmp_path / "gen.txt"
        path.write_bytes(b"line one.\r\nline two.\r\n")
        assert import_generated(path, "c").text == "line one.\nline two.\n"

    def test_empty(self, tmp_path):
        path = tmp_path / "gen.txt"
        path.write_text("   \n", encoding="utf-8")
        with pytest.raises(EmptyGeneratedText):
            import_generated(path, "c")

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            import_generated(tmp_path / "nope.txt", "c")

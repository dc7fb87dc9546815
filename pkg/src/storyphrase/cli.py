"""Command-line entry point tying the pipeline stages together.

Stages are independently runnable subcommands; `report` drives the whole
pipeline from a JSON manifest.  All randomness flows through explicit
seeds, so reruns with the same inputs are byte-identical.

Exit codes: 0 success, 2 validation failure, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, StageError, StoryphraseError
from .corpus import load_corpus_dir
from .extract import CandidatePassphrase, extract_candidates
from .guesswork import (
    DEFAULT_ALPHA_GRID,
    GuessworkDistribution,
    entropy_bits,
    entropy_bits_slots,
    expected_guesses,
    guesswork_curve,
    marginal_guesswork,
)
from .ranking import blacklist_guessable, rank_passphrases, score_passphrase
from .sampling import SamplingParams, import_generated, sample_text
from .similarity import DefaultEmbeddingProvider, check_assignable, similarity_matrix
from .study import compute_metrics, survey_aggregates, typo_report
from .tagging import (
    extract_tag_rules,
    filter_by_tag_rules,
    load_default_tagger,
    load_tagger_tsv,
    search_space_histogram,
    tag_space_bits,
)


def _load_corpus(registry: str, corpus_id: str):
    directory = Path(registry) / corpus_id
    if not directory.is_dir():
        raise ConfigError(f"corpus directory not found: {directory}")
    return load_corpus_dir(directory)


def write_candidates_tsv(path, candidates):
    lines = []
    for cand in candidates:
        slots = ";".join(
            f"{pos}:{pron}:{name}" for pos, pron, name in cand.replaced_slots
        )
        lines.append("\t".join([" ".join(cand.words), cand.source_segment, slots]))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_candidates_tsv(path, corpus_id):
    candidates = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        fields = line.split("\t")
        words = fields[0].split()
        source = fields[1] if len(fields) > 1 else ""
        slots = []
        if len(fields) > 2 and fields[2]:
            for item in fields[2].split(";"):
                pos, pron, name = item.split(":", 2)
                slots.append((int(pos), pron, name))
        candidates.append(
            CandidatePassphrase(
                words=words,
                corpus_id=corpus_id,
                source_segment=source,
                replaced_slots=slots,
            )
        )
    return candidates


def write_ranked_tsv(path, ranked):
    lines = ["\t".join(["rank", "score_log2", "a_log2", "b_log2", "c_log2", "d_log2", "words"])]
    for entry in ranked:
        logs = entry.components_log2
        lines.append(
            "\t".join(
                [str(entry.rank), f"{entry.score_log2:.6f}"]
                + [f"{v:.6f}" for v in logs]
                + [entry.candidate.text]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_ranked_phrases(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    phrases = []
    for line in lines:
        if not line.strip() or line.startswith("rank\t"):
            continue
        phrases.append(line.split("\t")[-1])
    return phrases


def _emit(args, payload, human: str | None = None):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    elif human is not None:
        print(human)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))


# -- subcommand handlers -----------------------------------------------------


def cmd_ingest(args):
    corpus = _load_corpus(args.registry, args.corpus)
    payload = {
        "stage": "ingest",
        "corpus": corpus.id,
        "title": corpus.title,
        "tokens": len(corpus.tokens),
        "vocabulary": len(corpus.vocabulary),
        "characters": corpus.character_names,
    }
    _emit(
        args,
        payload,
        f"{corpus.id}: {len(corpus.tokens)} tokens, vocabulary {len(corpus.vocabulary)}",
    )
    return 0


def cmd_generate(args):
    corpus = _load_corpus(args.registry, args.corpus)
    params = SamplingParams(
        temperature=args.temperature,
        top_k=args.top_k,
        top_p=args.top_p,
        min_tokens=args.min_tokens,
        seed=args.seed,
    )
    generated = sample_text(corpus, args.order, params)
    Path(args.out).write_text(generated.text + "\n", encoding="utf-8")
    _emit(
        args,
        {"stage": "generate", "corpus": corpus.id, "seed": args.seed, "out": args.out,
         "tokens": len(generated.text.split())},
        f"wrote {args.out} ({len(generated.text.split())} tokens)",
    )
    return 0


def cmd_import(args):
    generated = import_generated(args.file, args.corpus)
    Path(args.out).write_text(generated.text, encoding="utf-8")
    _emit(
        args,
        {"stage": "import", "corpus": args.corpus, "file": args.file, "out": args.out},
        f"imported {args.file} -> {args.out}",
    )
    return 0


def cmd_extract(args):
    corpus = _load_corpus(args.registry, args.corpus)
    text = Path(args.input).read_text(encoding="utf-8")
    candidates = extract_candidates(text, corpus, args.seed)
    write_candidates_tsv(args.out, candidates)
    _emit(
        args,
        {"stage": "extract", "corpus": corpus.id, "seed": args.seed,
         "candidates": len(candidates), "out": args.out},
        f"extracted {len(candidates)} candidates -> {args.out}",
    )
    return 0


def _resolve_tagger(args):
    if getattr(args, "tagger", None):
        return load_tagger_tsv(args.tagger)
    return load_default_tagger()


def cmd_tag_rules(args):
    corpus = _load_corpus(args.registry, args.corpus)
    tagger = _resolve_tagger(args)
    rows = ["n,bucket,percentage"]
    summary = {}
    for n in args.n:
        rules = extract_tag_rules(corpus, tagger, n)
        hist = search_space_histogram(rules)
        below = 100.0 * sum(1 for r in rules if r.search_space_bits < 2.8) / len(rules)
        summary[str(n)] = {
            "rules": len(rules),
            "below_2.8_bits_pct": round(below, 2),
            "histogram": {k: round(v, 4) for k, v in hist.items()},
            "tag_space_upper_bound_bits": round(tag_space_bits(len(tagger.tagset), n), 2),
        }
        for bucket, pct in hist.items():
            rows.append(f"{n},{bucket},{pct:.4f}")
    if args.report:
        Path(args.report).write_text("\n".join(rows) + "\n", encoding="utf-8")
    _emit(args, {"stage": "tag-rules", "corpus": corpus.id, "summary": summary})
    return 0


def cmd_filter_candidates(args):
    corpus = _load_corpus(args.registry, args.corpus)
    tagger = _resolve_tagger(args)
    candidates = read_candidates_tsv(args.candidates, corpus.id)
    lengths = sorted({len(c.words) for c in candidates})
    corpus_rules = {
        n: {r.tags for r in extract_tag_rules(corpus, tagger, n)} for n in lengths
    }
    kept, removed = filter_by_tag_rules(candidates, corpus_rules, tagger)
    write_candidates_tsv(args.out, kept)
    payload = {
        "stage": "filter-candidates",
        "kept": len(kept),
        "removed": [{"words": c.text, "reason": reason} for c, reason in removed],
        "out": args.out,
    }
    _emit(args, payload, f"kept {len(kept)}, removed {len(removed)} -> {args.out}")
    return 0


def cmd_rank(args):
    corpus = _load_corpus(args.registry, args.corpus)
    candidates = read_candidates_tsv(args.candidates, corpus.id)
    if not candidates:
        raise ConfigError(f"no candidates in {args.candidates}")
    scored = [score_passphrase(corpus, c) for c in candidates]
    ranked = rank_passphrases(scored)
    if args.keep_fraction < 1.0:
        ranked = blacklist_guessable(ranked, args.keep_fraction)
    write_ranked_tsv(args.out, ranked)
    _emit(
        args,
        {"stage": "rank", "corpus": corpus.id, "ranked": len(ranked), "out": args.out},
        f"ranked {len(ranked)} candidates -> {args.out}",
    )
    return 0


def cmd_simmatrix(args):
    phrases = read_ranked_phrases(args.infile)
    if not phrases:
        raise ConfigError(f"no passphrases in {args.infile}")
    matrix = similarity_matrix(phrases, DefaultEmbeddingProvider())
    lines = ["," + ",".join(f"p{i + 1}" for i in range(len(phrases)))]
    for i, row in enumerate(matrix):
        lines.append(f"p{i + 1}," + ",".join(f"{v:.4f}" for v in row))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit(
        args,
        {"stage": "simmatrix", "passphrases": len(phrases), "out": args.out},
        f"wrote {len(phrases)}x{len(phrases)} matrix -> {args.out}",
    )
    return 0


def cmd_guesswork(args):
    corpus = _load_corpus(args.registry, args.corpus)
    rows = ["n,alpha,guesswork_bits"]
    summary = {}
    for n in args.n:
        model = corpus.ngram_model(n)
        curve = guesswork_curve(model, DEFAULT_ALPHA_GRID)
        for alpha, bits in curve:
            rows.append(f"{n},{alpha},{bits:.4f}")
        dist = GuessworkDistribution.from_model(model)
        full = marginal_guesswork(dist, 1.0)
        summary[str(n)] = {
            "distinct_ngrams": len(dist),
            "alpha1_bits": round(math.log2(full), 1),
        }
    Path(args.out).write_text("\n".join(rows) + "\n", encoding="utf-8")
    _emit(args, {"stage": "guesswork", "corpus": corpus.id, "summary": summary,
                 "out": args.out})
    return 0


def cmd_entropy(args):
    if args.slots:
        sizes = [int(s) for s in args.slots.split(",")]
        bits = entropy_bits_slots(sizes)
        payload = {"stage": "entropy", "slots": sizes, "bits": round(bits, 1)}
        human = f"entropy over slots {sizes}: {bits:.1f} bits"
    else:
        if args.vocab is None or args.k is None:
            raise ConfigError("entropy requires --vocab and --k (or --slots)")
        bits = entropy_bits(args.vocab, args.k)
        guesses = expected_guesses(args.vocab, args.k)
        payload = {
            "stage": "entropy",
            "vocab": args.vocab,
            "k": args.k,
            "bits": round(bits, 1),
            "expected_guesses_log2": round(math.log2(guesses), 1),
            "online_attack_resistant": guesses > 10**6,
        }
        human = (
            f"{args.vocab}^{args.k}: entropy {bits:.1f} bits, "
            f"expected guesses 2^{math.log2(guesses):.1f} "
            f"({'>>' if guesses > 10**6 else '<='} 10^6)"
        )
    _emit(args, payload, human)
    return 0


def cmd_assign(args):
    phrases = read_ranked_phrases(args.pool)
    assigned_path = Path(args.assigned)
    assigned = (
        [l for l in assigned_path.read_text(encoding="utf-8").splitlines() if l.strip()]
        if assigned_path.exists()
        else []
    )
    provider = DefaultEmbeddingProvider()
    choice = None
    for phrase in phrases:
        if phrase in assigned:
            continue
        if check_assignable(phrase, assigned, args.theta, provider):
            choice = phrase
            break
    if choice is None:
        raise StageError("assign", "pool exhausted: no entry passes the dissimilarity check")
    if args.commit:
        with open(assigned_path, "a", encoding="utf-8") as fh:
            fh.write(choice + "\n")
    _emit(
        args,
        {"stage": "assign", "passphrase": choice, "committed": bool(args.commit)},
        choice,
    )
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import ManualClock, RealClock, ServiceConfig, serve

    config = ServiceConfig.from_file(args.config)
    if args.host:
        config.listen_host = args.host
    if args.port:
        config.listen_port = args.port
    if args.test_clock:
        config.test_clock = True
    clock = ManualClock() if config.test_clock else RealClock()
    app = serve(config, args.log, clock)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
    return 0


def _read_log(path):
    from .events import read_events

    return read_events(path)


def cmd_metrics(args):
    events = _read_log(args.log)
    if args.story:
        table = compute_metrics(events, condition="familiar", story=args.story)
    else:
        table = compute_metrics(events, condition=args.condition)
    payload = {"stage": "metrics", "table": table.to_dict(),
               "survey": survey_aggregates(events)}
    if args.json:
        _emit(args, payload)
        return 0
    rows = table.to_dict()["rounds"]
    print(f"participants at memorization: {table.participants0}")
    header = (
        "i  part  NSR  remembered  survived  successful  dropout  "
        "success%  failure%  cond-survival%"
    )
    print(header)
    for r in rows:
        print(
            f"{r['i']:<2} {r['participants']:<5} {r['num_successful_returned']:<4} "
            f"{r['num_remembered']:<11} {r['num_survived']:<9} "
            f"{str(r['num_successful']):<11} {r['dropout']:<8} "
            f"{r['success_rate']:<9.2f} {r['failure_rate']:<9.2f} "
            f"{r['conditional_survival']:.2f}"
        )
    return 0


def cmd_typo_report(args):
    events = _read_log(args.log)
    report = typo_report(events)
    _emit(args, {"stage": "typo-report", "stories": report})
    return 0


def cmd_report(args):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    registry = manifest.get("registry", "corpora")
    corpus_id = manifest["corpus"]
    seed = int(manifest.get("seed", 0))
    out_dir = Path(manifest.get("out_dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    report: dict = {"manifest": manifest, "stages": []}

    def stage(name, fn):
        try:
            result = fn()
        except StoryphraseError as exc:
            raise StageError(name, str(exc))
        report["stages"].append({"stage": name, **result})
        return result

    loaded = {}

    def do_ingest():
        loaded["corpus"] = _load_corpus(registry, corpus_id)
        return {"corpus": corpus_id, "tokens": len(loaded["corpus"].tokens)}

    stage("ingest", do_ingest)
    corpus = loaded["corpus"]

    generated_path = out_dir / "generated.txt"
    if "import" in manifest:
        def do_import():
            generated = import_generated(manifest["import"]["file"], corpus_id)
            generated_path.write_text(generated.text, encoding="utf-8")
            return {"source": "imported", "file": manifest["import"]["file"]}
        stage("import", do_import)
    else:
        gen_cfg = manifest.get("generate", {})
        def do_generate():
            params = SamplingParams(
                temperature=gen_cfg.get("temperature", 0.7),
                top_k=gen_cfg.get("top_k", 40),
                top_p=gen_cfg.get("top_p", 0.9),
                min_tokens=gen_cfg.get("min_tokens", 300),
                seed=gen_cfg.get("seed", seed),
            )
            generated = sample_text(corpus, gen_cfg.get("order", 3), params)
            generated_path.write_text(generated.text + "\n", encoding="utf-8")
            return {"source": "builtin-sampler", "seed": params.seed,
                    "tokens": len(generated.text.split())}
        stage("generate", do_generate)

    candidates_path = out_dir / "candidates.tsv"
    def do_extract():
        text = generated_path.read_text(encoding="utf-8")
        candidates = extract_candidates(text, corpus, seed)
        write_candidates_tsv(candidates_path, candidates)
        return {"seed": seed, "candidates": len(candidates)}
    stage("extract", do_extract)

    kept_path = out_dir / "kept.tsv"
    def do_filter():
        tagger = load_default_tagger()
        candidates = read_candidates_tsv(candidates_path, corpus_id)
        lengths = sorted({len(c.words) for c in candidates})
        rules = {n: {r.tags for r in extract_tag_rules(corpus, tagger, n)} for n in lengths}
        kept, removed = filter_by_tag_rules(candidates, rules, tagger)
        write_candidates_tsv(kept_path, kept)
        return {"kept": len(kept), "removed": len(removed)}
    stage("tag-filter", do_filter)

    ranked_path = out_dir / "ranked.tsv"
    def do_rank():
        candidates = read_candidates_tsv(kept_path, corpus_id)
        if not candidates:
            return {"ranked": 0}
        ranked = rank_passphrases([score_passphrase(corpus, c) for c in candidates])
        keep_fraction = manifest.get("keep_fraction", 1.0)
        if keep_fraction < 1.0:
            ranked = blacklist_guessable(ranked, keep_fraction)
        write_ranked_tsv(ranked_path, ranked)
        return {"ranked": len(ranked), "keep_fraction": keep_fraction}
    stage("rank", do_rank)

    def do_security():
        vocab = len(corpus.vocabulary)
        lengths = range(5, 8)
        summary = {
            "vocabulary": vocab,
            "entropy_bits": {str(k): round(entropy_bits(vocab, k), 1) for k in lengths},
            "guesswork_alpha1_bits": {},
        }
        for n in (2, 3, 4, 5):
            if len(corpus.tokens) >= n:
                dist = GuessworkDistribution.from_model(corpus.ngram_model(n))
                summary["guesswork_alpha1_bits"][str(n)] = round(
                    math.log2(marginal_guesswork(dist, 1.0)), 1
                )
        return summary
    stage("security", do_security)

    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    _emit(args, report, f"pipeline complete; report at {report_path}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storyphrase",
        description="Familiar-vocabulary passphrase pipeline and recall study tools",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--registry", default="corpora", help="corpus registry root")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a corpus")
    p.add_argument("--corpus", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("generate", help="sample story text from the corpus n-grams")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--temperature", type=float, default=0.7)
    p.add_argument("--top-k", type=int, default=40)
    p.add_argument("--top-p", type=float, default=0.9)
    p.add_argument("--min-tokens", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("import", help="import externally generated text")
    p.add_argument("--corpus", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_import)

    p = sub.add_parser("extract", help="extract candidate passphrases")
    p.add_argument("--corpus", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("tag-rules", help="tag-rule search-space report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n", type=int, nargs="+", default=[5, 6, 7])
    p.add_argument("--report")
    p.add_argument("--tagger", help="external word<TAB>tag TSV")
    p.set_defaults(fn=cmd_tag_rules)

    p = sub.add_parser("filter-candidates", help="drop non-unique tag sequences")
    p.add_argument("--candidates", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tagger")
    p.set_defaults(fn=cmd_filter_candidates)

    p = sub.add_parser("rank", help="score and rank candidates")
    p.add_argument("--corpus", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-fraction", type=float, default=1.0)
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("simmatrix", help="pairwise similarity matrix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simmatrix)

    p = sub.add_parser("guesswork", help="marginal guesswork curves")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_guesswork)

    p = sub.add_parser("entropy", help="uniform-space entropy and expected guesses")
    p.add_argument("--vocab", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--slots", help="comma-separated per-slot dictionary sizes")
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("assign", help="next dissimilar passphrase from a ranked pool")
    p.add_argument("--pool", required=True)
    p.add_argument("--assigned", required=True)
    p.add_argument("--theta", type=float, default=0.8)
    p.add_argument("--commit", action="store_true")
    p.set_defaults(fn=cmd_assign)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--test-clock", action="store_true")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("metrics", help="recall metrics tables from an event log")
    p.add_argument("--log", required=True)
    p.add_argument("--condition", choices=["random", "familiar"])
    p.add_argument("--story")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("typo-report", help="failed-attempt similarity buckets")
    p.add_argument("--log", required=True)
    p.set_defaults(fn=cmd_typo_report)

    p = sub.add_parser("report", help="run the full pipeline from a manifest")
    p.add_argument("--manifest", required=True, help="pipeline manifest JSON")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StoryphraseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

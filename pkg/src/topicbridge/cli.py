"""Command line for the corpus -> model -> graph -> recommendations pipeline.

Subcommands mirror the pipeline stages plus `serve` (HTTP layer), `simulate`
(synthetic corpus) and `evaluate` (diversity harness on a labeled corpus).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .corpus import Corpus, ingest, load_stopwords
from .recsys import RecConfig, cluster, recommend
from .service import EventStore, create_app
from .synth import HarnessConfig, SynthSpec, evaluate_corpus, write_corpus
from .topicgraph import (
    CENTRALITY_METHODS,
    WEIGHTED_CLOSENESS,
    build_graph,
    intermediary_topics,
    load_graph_bundle,
    save_graph_bundle,
)
from .topics import ModelConfig, TopicModel, train

logger = logging.getLogger(__name__)


def _load_corpus(path: str) -> Corpus:
    """Accept either a saved corpus directory or a raw NDJSON file."""
    p = Path(path)
    if p.is_dir():
        if (p / "meta.json").exists():
            return Corpus.load(p)
        ndjson = p / "corpus.ndjson"
        if ndjson.exists():
            return ingest(ndjson)
        raise SystemExit(f"no corpus found under {p}")
    return ingest(p)


def cmd_ingest(args: argparse.Namespace) -> int:
    stopwords = load_stopwords(args.stopwords)
    corpus = ingest(args.input, stopwords=stopwords)
    corpus.save(args.out)
    print(
        f"ingested {corpus.n_tweets} tweets from {corpus.n_users} users "
        f"({len(corpus.vocabulary)} vocabulary terms, {corpus.skipped} lines skipped) "
        f"-> {args.out}"
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    burn_in = args.burn_in if args.burn_in is not None else args.iters // 5
    cfg = ModelConfig(
        k=args.k,
        alpha=args.alpha,
        beta=args.beta,
        iterations=args.iters,
        burn_in=burn_in,
        epsilon=args.epsilon,
        rng_seed=args.seed,
        min_doc_freq=args.min_doc_freq,
    )
    model = train(corpus, cfg)
    model.save(args.out)
    print(
        f"trained k={cfg.k} on {len(model.user_ids)} users; "
        f"final log-likelihood {model.log_likelihood[-1]:.1f} -> {args.out}"
    )
    return 0


def cmd_graph(args: argparse.Namespace) -> int:
    model = TopicModel.load(args.model)
    epsilon = args.epsilon if args.epsilon is not None else model.config.epsilon
    vectors = [model.user_vector(u) for u in model.user_ids]
    graph = build_graph(vectors, epsilon)
    itset = intermediary_topics(graph, method=args.method)
    labels = {t: model.top_words(t, 5) for t in graph.nodes}
    save_graph_bundle(args.out, graph, itset, labels)
    print(
        f"graph over k={graph.k} topics: {len(graph.edges)} edges, "
        f"{len(itset.topic_ids)} intermediary topics (threshold {itset.threshold:.4f}) "
        f"-> {args.out}"
    )
    return 0


def cmd_recommend(args: argparse.Namespace) -> int:
    model = TopicModel.load(args.model)
    _, itset, _ = load_graph_bundle(args.graph)
    cfg = RecConfig(algorithm=args.algorithm, gamma=args.gamma, top_n=args.top_n)
    recs = recommend(args.target, model.user_ids, cfg, model, itset)
    groups = cluster(recs, model)
    report = {
        "target": args.target,
        "algorithm": cfg.algorithm,
        "gamma": cfg.gamma,
        "recommendations": [r.to_dict() for r in recs],
        "clusters": [g.to_dict() for g in groups],
    }
    text = json.dumps(report, indent=2, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(text + "\n", "utf-8")
        print(f"{len(recs)} recommendations for {args.target} -> {args.out}")
    else:
        print(text)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    corpus = _load_corpus(args.corpus)
    model = TopicModel.load(args.model)
    _, itset, _ = load_graph_bundle(args.graph)
    store = EventStore(args.event_dir)
    app = create_app(
        corpus,
        model,
        itset,
        store,
        seed=args.seed,
        gamma=args.gamma,
        top_n=args.top_n,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.spec:
        spec = SynthSpec.from_dict(json.loads(Path(args.spec).read_text("utf-8")))
    else:
        spec = SynthSpec()
    corpus_path, labels_path = write_corpus(spec, args.out)
    print(f"simulated corpus -> {corpus_path}, labels -> {labels_path}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = _load_corpus(args.corpus)
    labels = json.loads(Path(args.labels).read_text("utf-8"))
    overrides = {
        key: value
        for key, value in (
            ("k", args.k),
            ("iterations", args.iters),
            ("restarts", args.restarts),
            ("min_doc_freq", args.min_doc_freq),
            ("epsilon", args.epsilon),
        )
        if value is not None
    }
    if args.iters is not None:
        overrides.setdefault("burn_in", max(1, args.iters // 4))
    harness = HarnessConfig(gamma=args.gamma, **overrides)
    rows = [
        evaluate_corpus(corpus, labels, harness, rng_seed=seed)
        for seed in range(args.seeds)
    ]
    mean_kld = sum(r["KLD"] for r in rows) / len(rows)
    mean_it = sum(r["IT"] for r in rows) / len(rows)
    report = {
        "corpus": str(args.corpus),
        "gamma": harness.gamma,
        "seeds": rows,
        "mean_kld": mean_kld,
        "mean_it": mean_it,
        "separation": mean_it - mean_kld,
    }
    print(f"{'seed':>6} {'n_intermediary':>14} {'KLD':>8} {'IT':>8}")
    for row in rows:
        print(
            f"{row['seed']:>6} {row['n_intermediary']:>14} "
            f"{row['KLD']:>8.4f} {row['IT']:>8.4f}"
        )
    print(
        f"mean KLD {mean_kld:.4f}, mean IT {mean_it:.4f}, "
        f"separation {report['separation']:.4f}"
    )
    if args.report:
        Path(args.report).write_text(
            json.dumps(report, indent=2, ensure_ascii=False) + "\n", "utf-8"
        )
        print(f"report -> {args.report}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicbridge",
        description="Topic models, intermediary-topic graphs and diverse people recommendations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="tokenize an NDJSON tweet dump into a corpus directory")
    p.add_argument("--input", required=True, help="NDJSON file, one tweet per line")
    p.add_argument("--out", required=True, help="corpus output directory")
    p.add_argument("--stopwords", default=None, help="stopword file (default: bundled es+en)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="fit the per-user topic model by collapsed Gibbs sampling")
    p.add_argument("--corpus", required=True, help="corpus directory or NDJSON file")
    p.add_argument("--k", type=int, default=100, help="number of topics")
    p.add_argument("--iters", type=int, default=500, help="Gibbs iterations")
    p.add_argument("--seed", type=int, default=42, help="sampler seed")
    p.add_argument("--out", required=True, help="model output path (JSON)")
    p.add_argument("--alpha", type=float, default=None, help="doc-topic prior (default 50/k)")
    p.add_argument("--beta", type=float, default=0.01, help="topic-word prior")
    p.add_argument("--burn-in", type=int, default=None, help="burn-in sweeps (default iters/5)")
    p.add_argument("--epsilon", type=float, default=0.01, help="significant-topic threshold")
    p.add_argument("--min-doc-freq", type=int, default=1, help="prune rarer vocabulary")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("graph", help="build the topic graph and its intermediary-topic set")
    p.add_argument("--model", required=True, help="trained model path")
    p.add_argument("--epsilon", type=float, default=None, help="override the model's threshold")
    p.add_argument("--method", choices=CENTRALITY_METHODS, default=WEIGHTED_CLOSENESS)
    p.add_argument("--out", required=True, help="graph bundle output path (JSON)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("recommend", help="rank people recommendations for one user")
    p.add_argument("--model", required=True)
    p.add_argument("--graph", required=True, help="graph bundle path")
    p.add_argument("--target", required=True, help="user to recommend for")
    p.add_argument("--algorithm", choices=("IT", "KLD"), default="IT")
    p.add_argument("--gamma", type=float, default=1.0, help="diversity/similarity balance")
    p.add_argument("--top-n", type=int, default=20)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("serve", help="serve portraits, recommendations and metrics over HTTP")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=42, help="experiment assignment seed")
    p.add_argument("--event-dir", default="events", help="event/condition log directory")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--top-n", type=int, default=20)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("simulate", help="write a synthetic two-community corpus")
    p.add_argument("--spec", default=None, help="corpus spec JSON (default: built-in spec)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="measure cross-community reach on a labeled corpus")
    p.add_argument("--corpus", required=True, help="corpus directory or NDJSON file")
    p.add_argument("--labels", required=True, help="ground-truth labels JSON")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seeds", type=int, default=10, help="number of training seeds")
    p.add_argument("--report", default=None, help="write the report JSON here")
    p.add_argument("--k", type=int, default=None, help="override harness topic count")
    p.add_argument("--iters", type=int, default=None, help="override harness iterations")
    p.add_argument("--restarts", type=int, default=None, help="override harness restarts")
    p.add_argument("--min-doc-freq", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

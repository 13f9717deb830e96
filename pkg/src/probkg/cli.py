"""Command-line entry point: ``probkg {load,query,update,bench,selftest}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .adaptive import Engine, compute_probability
from .bench import BenchConfig, run_bench, to_csv, write_outputs
from .config import EngineConfig
from .errors import ProbKGError
from .graph import ProbEdge, load_graph
from .maintenance import AnswerStore, passes
from .query import answer_signature, load_query, match_query

log = logging.getLogger("probkg")

QUERY_ID = "q"


def _dump(obj, fh=None):
    fh = fh or sys.stdout
    json.dump(obj, fh, indent=2, ensure_ascii=False)
    fh.write("\n")


def answer_record(a, q) -> dict:
    sig = answer_signature(a, q)
    rec = {"binding": list(a.binding), "prob": a.prob}
    if a.symE is not None:
        rec["symE"] = str(a.symE)
    rec["engine"] = a.engine
    rec["signature"] = {"d": sig.d, "n": sig.n, "s": sig.s}
    return rec


def _engine_config(args) -> EngineConfig:
    return EngineConfig.load(args.config) if args.config else EngineConfig()


def _forced_engine(args):
    return None if args.engine == "auto" else Engine(args.engine)


def cmd_load(args):
    g = load_graph(args.graph)
    _dump({"vertices": len(g.vertices), "edges": len(g)})
    return 0


def cmd_query(args):
    g = load_graph(args.graph)
    q = load_query(args.query)
    config = _engine_config(args)
    engine = _forced_engine(args)
    threshold = args.threshold if args.threshold is not None else q.threshold
    probs = g.probs
    out = []
    for a in match_query(g, q):
        compute_probability(a, q, probs, config, engine)
        if passes(a.prob, threshold, args.threshold_mode):
            out.append(answer_record(a, q))
    _dump(out)
    return 0


def parse_op(line: str):
    parts = line.split()
    if not parts:
        raise ValueError("empty operation")
    op = parts[0].upper()
    try:
        if op == "ADD" and len(parts) == 6:
            return op, ProbEdge(int(parts[1]), parts[2], parts[3], parts[4], float(parts[5]))
        if op == "DEL" and len(parts) == 2:
            return op, int(parts[1])
        if op == "PROB" and len(parts) == 3:
            return op, (int(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ValueError(f"bad operand in {line.strip()!r}: {exc}") from None
    raise ValueError(f"cannot parse operation {line.strip()!r}")


def apply_op(store: AnswerStore, op, arg, threshold=None):
    if op == "ADD":
        return store.add_edge(arg, threshold)
    if op == "DEL":
        return store.delete_edge(arg)
    return store.update_prob(*arg)


def cmd_update(args):
    g = load_graph(args.graph)
    q = load_query(args.query)
    store = AnswerStore(g, _engine_config(args), _forced_engine(args), args.threshold_mode)
    initial = store.run_query(QUERY_ID, q)
    report = {"initial": [answer_record(a, q) for a in initial], "ops": []}
    log_lines = []
    with open(args.ops, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            entry = {"line": lineno, "op": line.strip(), "affected": [], "error": None}
            try:
                op, arg = parse_op(line)
                records = apply_op(store, op, arg, args.threshold)
            except (ValueError, ProbKGError) as exc:
                entry["error"] = str(exc)
                log.error("line %d: %s", lineno, exc)
            else:
                for r in records:
                    entry["affected"].append({"binding": list(r.binding), "old_prob": r.old_prob,
                                              "value": r.value, "status": r.status})
                    log_lines.append(r.log_line())
            report["ops"].append(entry)
    report["final"] = [answer_record(a, q) for a in store.answers_for(QUERY_ID)]
    if args.log:
        Path(args.log).write_text("".join(line + "\n" for line in log_lines), encoding="utf-8")
    _dump(report)
    return 0


def cmd_bench(args):
    path = args.bench_config or args.config
    cfg = BenchConfig.load(path) if path else BenchConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.per_bucket is not None:
        cfg.per_bucket = args.per_bucket
    if args.generator:
        cfg.generator = args.generator
    result = run_bench(cfg)
    rows = result.bucket_rows()
    if args.out_dir:
        paths = write_outputs(result, args.out_dir, figures=not args.no_figures)
        for name, path in paths.items():
            log.info("wrote %s: %s", name, path)
    sys.stdout.write(to_csv(rows))
    return 0


def selftest_checks():
    """(name, passed, detail) for the bundled running example."""
    data = resources.files("probkg") / "data"
    with resources.as_file(data) as root:
        g = load_graph(root / "flights.tsv")
        q = load_query(root / "one_stop.rq")
    checks = []
    store = AnswerStore(g)
    answers = {a.binding: a for a in store.run_query(QUERY_ID, q)}
    expected = {("DEL", "BAR"): 0.48, ("DEL", "JFK"): 0.36, ("SIN", "MUN"): 0.564}
    for b, p in expected.items():
        got = answers[b].prob if b in answers else None
        checks.append((f"prob{b}", got is not None and abs(got - p) < 1e-9, got))
    records = store.add_edge(ProbEdge(6, "DEL", "A1", "MUN", 0.2))
    after = {r.binding: r.value for r in records}
    for b, p in {("DEL", "BAR"): 0.544, ("DEL", "JFK"): 0.408, ("SIN", "MUN"): 0.6392}.items():
        got = after.get(b)
        checks.append((f"after ADD e6 {b}", got is not None and abs(got - p) < 1e-9, got))
    store.delete_edge(6)
    records = store.update_prob(2, 0.6)
    got = {r.binding: r.value for r in records}.get(("SIN", "MUN"))
    # signed offset 0.06 - 0.048; matches the possible-worlds value 0.6 * (1 - 0.2 * 0.4)
    checks.append(("PROB e2 0.6 (SIN,MUN)", got is not None and abs(got - 0.552) < 1e-9, got))
    return checks


def cmd_selftest(args):
    ok = True
    for name, passed, detail in selftest_checks():
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
        ok &= passed
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--engine", choices=["auto", "semiring", "kc", "oracle"], default="auto")
    common.add_argument("--threshold-mode", choices=["strict", "inclusive"], default="strict")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", help="JSON engine configuration (adaptive.*, oracle.var_cap)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="probkg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", parents=[common], help="load a graph and print its size")
    p.add_argument("graph")
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("query", parents=[common], help="answer a query with probabilities")
    p.add_argument("graph")
    p.add_argument("query")
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("update", parents=[common], help="apply mutations and maintain answers")
    p.add_argument("graph")
    p.add_argument("query")
    p.add_argument("ops")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--log", help="write tab-separated mutation log lines here")
    p.set_defaults(func=cmd_update)

    p = sub.add_parser("bench", parents=[common], help="time engines across answer signatures")
    p.add_argument("bench_config", nargs="?", help="JSON benchmark configuration")
    p.add_argument("--out-dir", help="directory for CSV, summary and figures")
    p.add_argument("--per-bucket", type=int)
    p.add_argument("--generator", choices=["dnf", "graph"])
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", parents=[common], help="check the bundled running example")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ProbKGError, ValueError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())

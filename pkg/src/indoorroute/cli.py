"""Command line: route, eval, search, combine, report, gen."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .calibrate import (
    CalibrationError,
    CombinationResult,
    SearchResult,
    WeightSchedule,
    combine,
    grid_search,
    report,
)
from .criteria import ALL_KINDS, CostModel, CostModelError, parse_kind
from .graph import GraphError, IndoorGraph, dump_graph, read_graph_file
from .plot import curve_svg
from .router import RoutingError, plan_route, route_breakdown
from .similarity import (
    CorpusError,
    RouteCorpus,
    changed_fraction,
    dump_corpus,
    evaluate_corpus,
    load_corpus,
)
from .synth import SyntheticSpec, SyntheticSpecError, generate

log = logging.getLogger("indoorroute")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNREACHABLE = 2
EXIT_IO = 3

VALIDATION_ERRORS = (
    GraphError,
    CostModelError,
    CorpusError,
    CalibrationError,
    SyntheticSpecError,
    RoutingError,
    KeyError,
    json.JSONDecodeError,
)

COMBINATION_FILE = "combination.json"


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    graph: IndoorGraph | None = None
    corpus: RouteCorpus | None = None
    model: CostModel = field(default_factory=CostModel)
    schedule: WeightSchedule = field(default_factory=WeightSchedule)
    out: Path | None = None
    seed: int = 0
    formats: tuple[str, ...] = ()

    @classmethod
    def from_args(cls, args: argparse.Namespace, *, need_graph=False, need_corpus=False) -> "RunConfig":
        """Load and validate every referenced input before any work starts."""
        cfg = cls(seed=args.seed, formats=tuple(args.format or ()))
        if args.out:
            cfg.out = Path(args.out)
        if need_graph and not args.graph:
            raise UsageError("--graph is required")
        if need_corpus and not args.corpus:
            raise UsageError("--corpus is required")
        if args.graph:
            cfg.graph = read_graph_file(args.graph)
        if args.corpus:
            if cfg.graph is None:
                raise UsageError("--corpus needs --graph")
            with open(args.corpus, "rb") as fh:
                cfg.corpus = load_corpus(fh, cfg.graph)
        cfg.model = _model_from_args(args)
        if args.schedule:
            cfg.schedule = WeightSchedule.parse(args.schedule)
        return cfg


def _model_from_args(args) -> CostModel:
    if args.model:
        with open(args.model, "rb") as fh:
            model = CostModel.from_dict(json.load(fh))
        if args.criterion and args.weight:
            raise UsageError("use either --model or --criterion/--weight")
        return model
    kinds = args.criterion or []
    weights = args.weight or []
    if getattr(args, "command", None) == "search":
        return CostModel()
    if len(kinds) != len(weights):
        raise UsageError("every --criterion needs a matching --weight")
    return CostModel.from_weights({parse_kind(k): w for k, w in zip(kinds, weights)})


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="graph JSON file")
    p.add_argument("--corpus", help="corpus JSON file")
    p.add_argument("--model", help="cost model JSON file")
    p.add_argument("--criterion", action="append", help="criterion name (repeatable)")
    p.add_argument("--weight", action="append", type=float, help="weight in meters (pairs with --criterion)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", action="append", choices=("json", "csv", "svg"))
    p.add_argument("--schedule", help="fine_max,fine_step,coarse_max,coarse_step")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indoorroute", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="plan one route and show its penalty breakdown")
    _add_common(p)
    p.add_argument("start")
    p.add_argument("dest")
    p.add_argument("--faithful", action="store_true", help="node-label Dijkstra (may be suboptimal)")

    p = sub.add_parser("eval", help="mean similarity and impacted share of a corpus under a model")
    _add_common(p)

    p = sub.add_parser("search", help="grid-search criterion weights")
    _add_common(p)

    p = sub.add_parser("combine", help="combine improving criteria and emit the report")
    _add_common(p)

    p = sub.add_parser("report", help="render the report from saved results")
    _add_common(p)

    p = sub.add_parser("gen", help="generate a synthetic campus and planted corpus")
    _add_common(p)
    p.add_argument("--spec", help="synthetic spec JSON (fields override defaults)")
    p.add_argument("--floors", type=int)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--records", type=int)
    p.add_argument("--noise", type=float)
    return parser


def _write_all(files: dict[Path, str]) -> None:
    for path, text in files.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def cmd_route(args) -> int:
    cfg = RunConfig.from_args(args, need_graph=True)
    g = cfg.graph
    start, dest = g.resolve(args.start), g.resolve(args.dest)
    route = plan_route(g, start, dest, cfg.model, faithful=args.faithful)
    if route is None:
        print(f"unreachable: no route from {start} to {dest}", file=sys.stderr)
        return EXIT_UNREACHABLE
    breakdown = route_breakdown(g, route, cfg.model)
    if "json" in cfg.formats:
        doc = {
            "nodes": list(route.nodes),
            "metric_length": route.metric_length,
            "weighted_cost": route.weighted_cost,
            "penalties": {k.value: {"count": n, "meters": m} for k, (n, m) in breakdown.items()},
        }
        print(json.dumps(doc, indent=1))
        return EXIT_OK
    print(" -> ".join(str(n) for n in route.nodes))
    print(f"metric length: {route.metric_length:.3f} m")
    print(f"weighted cost: {route.weighted_cost:.3f} m")
    for kind, (count, meters) in breakdown.items():
        print(f"  {kind.value}: {count} x {cfg.model.weight(kind):g} = {meters:.3f} m")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = RunConfig.from_args(args, need_graph=True, need_corpus=True)
    ev = evaluate_corpus(cfg.graph, cfg.corpus, cfg.model)
    base = evaluate_corpus(cfg.graph, cfg.corpus, cfg.model.zeroed())
    doc = {
        "mean_similarity": ev.mean,
        "baseline_similarity": base.mean,
        "impacted_fraction": changed_fraction(ev.routes, base.routes),
        "records": len(cfg.corpus),
        "unreachable": [
            {"index": i, "start": cfg.corpus.records[i].start, "dest": cfg.corpus.records[i].dest}
            for i in ev.unreachable
        ],
    }
    print(json.dumps(doc, indent=1))
    return EXIT_OK


def _require_out(cfg: RunConfig) -> Path:
    if cfg.out is None:
        raise UsageError("--out is required")
    return cfg.out


def cmd_search(args) -> int:
    cfg = RunConfig.from_args(args, need_graph=True, need_corpus=True)
    out = _require_out(cfg)
    names = args.criterion or ["all"]
    kinds = []
    for name in names:
        kinds.extend(ALL_KINDS if name == "all" else [parse_kind(name)])
    kinds = list(dict.fromkeys(kinds))
    files = {}
    for kind in kinds:
        log.info("searching %s", kind.value)
        res = grid_search(cfg.graph, cfg.corpus, kind, cfg.schedule)
        stem = out / f"search_{kind.value}"
        files[stem.with_suffix(".json")] = res.to_json()
        files[stem.with_suffix(".csv")] = res.to_csv()
        if "svg" in cfg.formats:
            files[stem.with_suffix(".svg")] = curve_svg(res)
        flag = " (unbounded)" if res.unbounded else ""
        print(
            f"{kind.value}: best w={res.best_w:g}{flag} similarity={res.best_sim:.4f} "
            f"baseline={res.baseline_sim:.4f} improved={res.improved}"
        )
    _write_all(files)
    return EXIT_OK


def _load_results(out: Path) -> list[SearchResult]:
    paths = sorted(out.glob("search_*.json"))
    if not paths:
        raise CalibrationError(f"no search results in {out}")
    results = [SearchResult.from_dict(json.loads(p.read_text(encoding="utf-8"))) for p in paths]
    order = {k: i for i, k in enumerate(ALL_KINDS)}
    return sorted(results, key=lambda r: order[r.kind])


def _report_files(out: Path, results, combo) -> dict[Path, str]:
    table = report(results, combo)
    print(table.to_text(), end="")
    return {out / "report.txt": table.to_text(), out / "report.csv": table.to_csv()}


def cmd_combine(args) -> int:
    cfg = RunConfig.from_args(args, need_graph=True, need_corpus=True)
    out = _require_out(cfg)
    results = _load_results(out)
    combo = combine(cfg.graph, cfg.corpus, results)
    files = {out / COMBINATION_FILE: json.dumps(combo.to_dict(), indent=1) + "\n"}
    files.update(_report_files(out, results, combo))
    _write_all(files)
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = RunConfig.from_args(args)
    out = _require_out(cfg)
    results = _load_results(out)
    combo_path = out / COMBINATION_FILE
    combo = None
    if combo_path.exists():
        combo = CombinationResult.from_dict(json.loads(combo_path.read_text(encoding="utf-8")))
    _write_all(_report_files(out, results, combo))
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = RunConfig.from_args(args)
    out = _require_out(cfg)
    spec = SyntheticSpec()
    if args.spec:
        with open(args.spec, "rb") as fh:
            spec = SyntheticSpec.from_dict(json.load(fh))
    overrides = {
        k: getattr(args, k)
        for k in ("floors", "rows", "cols", "records", "noise")
        if getattr(args, k) is not None
    }
    if cfg.model.criteria:
        overrides["planted"] = cfg.model
    spec = replace(spec, **overrides)
    g, corpus = generate(spec, cfg.seed)
    _write_all(
        {
            out / "graph.json": dump_graph(g),
            out / "corpus.json": dump_corpus(corpus),
            out / "planted_model.json": json.dumps(spec.planted.to_dict(), indent=1) + "\n",
        }
    )
    print(f"wrote {len(g)} nodes, {len(g.edges)} edges, {len(corpus)} routes to {out}")
    return EXIT_OK


COMMANDS = {
    "route": cmd_route,
    "eval": cmd_eval,
    "search": cmd_search,
    "combine": cmd_combine,
    "report": cmd_report,
    "gen": cmd_gen,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (UsageError, *VALIDATION_ERRORS) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

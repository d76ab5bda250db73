"""One-dimensional weight calibration per criterion, the additive combination, and the summary table."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .criteria import ALL_KINDS, CostModel, CriterionKind, parse_kind
from .graph import IndoorGraph
from .similarity import CorpusError, RouteCorpus, changed_fraction, evaluate_corpus

OVERLAP = (CriterionKind.TURNS, CriterionKind.STREETS)


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class WeightSchedule:
    """Sampling plan: fine steps up to ``fine_max``, coarse steps up to ``coarse_max``.

    Coarse points sit on multiples of ``coarse_step``; ``coarse_max`` is always sampled.
    """

    fine_max: float = 25.0
    fine_step: float = 1.0
    coarse_max: float = 100.0
    coarse_step: float = 10.0
    extension_cap: float = 1000.0

    def __post_init__(self):
        vals = (self.fine_max, self.fine_step, self.coarse_max, self.coarse_step, self.extension_cap)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in vals):
            raise CalibrationError("schedule values must be finite numbers")
        if not (0 < self.fine_step <= self.fine_max < self.coarse_max <= self.extension_cap):
            raise CalibrationError(
                "schedule needs 0 < fine_step <= fine_max < coarse_max <= extension_cap"
            )
        if self.coarse_step <= 0:
            raise CalibrationError("coarse_step must be positive")

    @classmethod
    def parse(cls, text: str) -> "WeightSchedule":
        """``"fine_max,fine_step,coarse_max,coarse_step"`` as used on the command line."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise CalibrationError("schedule must be fine_max,fine_step,coarse_max,coarse_step")
        try:
            fine_max, fine_step, coarse_max, coarse_step = map(float, parts)
        except ValueError:
            raise CalibrationError(f"schedule values must be numbers: {text!r}") from None
        cap = max(1000.0, coarse_max)
        return cls(fine_max, fine_step, coarse_max, coarse_step, cap)

    def fine_points(self) -> list[float]:
        n = int(math.floor(self.fine_max / self.fine_step + 1e-9))
        pts = [_clean(i * self.fine_step) for i in range(n + 1)]
        if pts[-1] < self.fine_max:
            pts.append(_clean(self.fine_max))
        return pts

    def coarse_points(self, low: float | None = None, high: float | None = None,
                      step: float | None = None) -> list[float]:
        low = self.fine_max if low is None else low
        high = self.coarse_max if high is None else high
        step = self.coarse_step if step is None else step
        k = int(math.floor(low / step + 1e-9)) + 1
        pts = []
        while k * step < high - 1e-9:
            pts.append(_clean(k * step))
            k += 1
        pts.append(_clean(high))
        return pts

    def base_points(self) -> list[float]:
        return self.fine_points() + self.coarse_points()


def _clean(w: float) -> float:
    # keep 0.1 * 3 style drift out of reported weights
    return float(round(w, 9))


@dataclass(frozen=True)
class CurvePoint:
    w: float
    mean_sim: float
    impacted: float


@dataclass(frozen=True)
class SearchResult:
    kind: CriterionKind
    curve: tuple[CurvePoint, ...]
    best_w: float
    best_sim: float
    baseline_sim: float
    improved: bool
    unbounded: bool

    def weights(self) -> list[float]:
        return [p.w for p in self.curve]

    def point(self, w: float) -> CurvePoint:
        for p in self.curve:
            if p.w == w:
                return p
        raise KeyError(w)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "curve": [[p.w, p.mean_sim, p.impacted] for p in self.curve],
            "best_w": self.best_w,
            "best_sim": self.best_sim,
            "baseline_sim": self.baseline_sim,
            "improved": self.improved,
            "unbounded": self.unbounded,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "SearchResult":
        try:
            return cls(
                kind=parse_kind(doc["kind"]),
                curve=tuple(CurvePoint(float(w), float(s), float(i)) for w, s, i in doc["curve"]),
                best_w=float(doc["best_w"]),
                best_sim=float(doc["best_sim"]),
                baseline_sim=float(doc["baseline_sim"]),
                improved=bool(doc["improved"]),
                unbounded=bool(doc["unbounded"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(f"malformed search result: {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["w", "mean_similarity", "impacted"])
        for p in self.curve:
            out.writerow([repr(p.w), repr(p.mean_sim), repr(p.impacted)])
        return buf.getvalue()


def grid_search(
    g: IndoorGraph,
    corpus: RouteCorpus,
    kind: CriterionKind | str,
    schedule: WeightSchedule | None = None,
    model_options: dict | None = None,
) -> SearchResult:
    """Sweep one criterion's weight and return the mean-similarity curve and its optimum.

    After the base pass, a best weight sitting on the last sampled point pushes
    the range out (each round doubles both range and step) until the boundary
    stops attaining the best score or ``extension_cap`` is hit. A best weight
    beyond ``fine_max`` is then refined at ``fine_step`` within one coarse step
    on either side, repeated until the optimum stops moving.
    """
    kind = parse_kind(kind)
    schedule = schedule or WeightSchedule()
    opts = dict(model_options or {})
    if not len(corpus):
        raise CorpusError("corpus is empty")

    base = evaluate_corpus(g, corpus, CostModel.single(kind, 0.0, **opts))
    seen: dict[float, CurvePoint] = {0.0: CurvePoint(0.0, base.mean, 0.0)}

    def sample(ws: Iterable[float]) -> None:
        for w in ws:
            w = _clean(w)
            if w in seen or w < 0:
                continue
            ev = evaluate_corpus(g, corpus, CostModel.single(kind, w, **opts))
            seen[w] = CurvePoint(w, ev.mean, changed_fraction(ev.routes, base.routes))

    def optimum() -> CurvePoint:
        top = max(p.mean_sim for p in seen.values())
        return min((p for p in seen.values() if p.mean_sim == top), key=lambda p: p.w)

    sample(schedule.base_points())

    def boundary_is_best() -> bool:
        top = optimum().mean_sim
        return top > base.mean and seen[upper].mean_sim == top

    upper = schedule.coarse_max
    step = schedule.coarse_step
    while boundary_is_best() and upper < schedule.extension_cap:
        new_upper = min(2 * upper, schedule.extension_cap)
        step *= 2
        sample(schedule.coarse_points(upper, new_upper, step))
        upper = new_upper

    while True:
        best = optimum()
        if best.w <= schedule.fine_max:
            break
        lo = max(0.0, best.w - schedule.coarse_step)
        hi = min(upper, best.w + schedule.coarse_step)
        n = int(math.floor((hi - lo) / schedule.fine_step + 1e-9))
        window = [_clean(lo + i * schedule.fine_step) for i in range(n + 1)]
        fresh = [w for w in window if w not in seen]
        if not fresh:
            break
        sample(fresh)

    best = optimum()
    return SearchResult(
        kind=kind,
        curve=tuple(seen[w] for w in sorted(seen)),
        best_w=best.w,
        best_sim=best.mean_sim,
        baseline_sim=base.mean,
        improved=best.mean_sim > base.mean,
        unbounded=upper >= schedule.extension_cap and boundary_is_best(),
    )


@dataclass(frozen=True)
class CombinationResult:
    model: CostModel
    mean_sim: float
    impacted: float
    baseline_sim: float
    excluded: tuple[tuple[CriterionKind, str], ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "mean_sim": self.mean_sim,
            "impacted": self.impacted,
            "baseline_sim": self.baseline_sim,
            "excluded": [[k.value, reason] for k, reason in self.excluded],
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "CombinationResult":
        try:
            return cls(
                model=CostModel.from_dict(doc["model"]),
                mean_sim=float(doc["mean_sim"]),
                impacted=float(doc["impacted"]),
                baseline_sim=float(doc["baseline_sim"]),
                excluded=tuple((parse_kind(k), str(r)) for k, r in doc["excluded"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CalibrationError(f"malformed combination result: {exc}") from None


def combine(
    g: IndoorGraph,
    corpus: RouteCorpus,
    results: Sequence[SearchResult],
    model_options: dict | None = None,
) -> CombinationResult:
    """Add up every criterion that beat the shortest path, each at its own best weight.

    Turns and streets penalise overlapping things; when both qualify only the
    one with the higher score is kept (turns on a tie).
    """
    kinds = [r.kind for r in results]
    if len(set(kinds)) != len(kinds):
        raise CalibrationError("search results must cover distinct criteria")
    excluded: list[tuple[CriterionKind, str]] = []
    chosen = {}
    for r in results:
        if r.improved:
            chosen[r.kind] = r
        else:
            excluded.append((r.kind, "not improved"))
    if all(k in chosen for k in OVERLAP):
        turns, streets = chosen[CriterionKind.TURNS], chosen[CriterionKind.STREETS]
        loser = CriterionKind.STREETS if turns.best_sim >= streets.best_sim else CriterionKind.TURNS
        del chosen[loser]
        excluded.append((loser, "overlap"))

    opts = dict(model_options or {})
    opts.pop("allow_turns_and_streets", None)
    model = CostModel.from_weights({k: chosen[k].best_w for k in ALL_KINDS if k in chosen}, **opts)
    ev = evaluate_corpus(g, corpus, model)
    base = evaluate_corpus(g, corpus, model.zeroed())
    excluded.sort(key=lambda item: ALL_KINDS.index(item[0]))
    return CombinationResult(
        model=model,
        mean_sim=ev.mean,
        impacted=changed_fraction(ev.routes, base.routes),
        baseline_sim=base.mean,
        excluded=tuple(excluded),
    )


REPORT_COLUMNS = ("Factor", "Weight", "Similarity Score", "Difference to SP", "Impacted Paths")


@dataclass(frozen=True)
class ReportRow:
    factor: str
    weight: str
    similarity: float
    difference: float
    impacted: float

    def cells(self) -> list[str]:
        return [
            self.factor,
            self.weight,
            f"{100 * self.similarity:.2f}%",
            f"{100 * self.difference:.2f}%",
            f"{100 * self.impacted:.2f}%",
        ]


@dataclass(frozen=True)
class ReportTable:
    baseline_sim: float
    rows: tuple[ReportRow, ...]
    not_improved: tuple[ReportRow, ...]

    def to_text(self) -> str:
        lines = [f"Shortest path similarity (baseline): {100 * self.baseline_sim:.2f}%", ""]
        if self.rows:
            lines += _text_table(self.rows)
        else:
            lines.append("No factor improved on the shortest path.")
        if self.not_improved:
            lines += ["", "Not improved over the shortest path:"]
            lines += _text_table(self.not_improved)
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["Section", *REPORT_COLUMNS])
        for section, rows in (("improved", self.rows), ("not_improved", self.not_improved)):
            for r in rows:
                out.writerow(
                    [section, r.factor, r.weight, repr(r.similarity), repr(r.difference), repr(r.impacted)]
                )
        return buf.getvalue()


def _text_table(rows: Sequence[ReportRow]) -> list[str]:
    table = [list(REPORT_COLUMNS)] + [r.cells() for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(REPORT_COLUMNS))]
    out = []
    for i, row in enumerate(table):
        out.append(" | ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            out.append("-+-".join("-" * w for w in widths))
    return out


def factor_name(kind: CriterionKind) -> str:
    return kind.value.replace("_", " ").title()


def _weight_label(result: SearchResult) -> str:
    label = f"{result.best_w:g}"
    return label + "+" if result.unbounded else label


def _impacted_at_best(result: SearchResult) -> float:
    return result.point(result.best_w).impacted


def report(results: Sequence[SearchResult], combo: CombinationResult | None) -> ReportTable:
    if results:
        baseline = results[0].baseline_sim
    elif combo is not None:
        baseline = combo.baseline_sim
    else:
        baseline = 0.0

    def row(factor, weight, sim, impacted):
        return ReportRow(factor, weight, sim, sim - baseline, impacted)

    improved = [
        row(factor_name(r.kind), _weight_label(r), r.best_sim, _impacted_at_best(r))
        for r in results
        if r.improved
    ]
    if combo is not None and combo.model.criteria:
        improved.append(row("Combination", "varied", combo.mean_sim, combo.impacted))
    flat = [
        row(factor_name(r.kind), _weight_label(r), r.best_sim, _impacted_at_best(r))
        for r in results
        if not r.improved
    ]

    def order(rows):
        return tuple(sorted(rows, key=lambda r: (-r.similarity, r.factor)))

    return ReportTable(baseline, order(improved), order(flat))

"""Statistical analysis of run results.

Everything here is a pure function over values: descriptive statistics,
fixed-effects one-way ANOVA (p-values via the incomplete-beta kernel in
:mod:`evalbench.special`), signed effect contrasts for two-level factorials,
Pareto ranking of effect magnitudes, composite (boosting) indices over
normalized metrics, and chart-series emission for the presentation layers.
Factors with more than two levels are analyzed marginally with one-way
ANOVA per factor rather than a general linear model.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .doe import Factor, RunSpec
from .errors import PayloadError
from .special import f_sf, t_ppf

CHART_KINDS = frozenset({"column", "line", "scatter", "radar", "pareto"})


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    sd: float
    minimum: float
    maximum: float
    ci95: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.minimum,
            "max": self.maximum,
            "ci95": list(self.ci95),
        }


@dataclass(frozen=True)
class AnovaTable:
    ss_between: float
    ss_within: float
    ss_total: float
    df_between: int
    df_within: int
    ms_between: float
    ms_within: float
    f: float
    p: float
    degenerate: bool = False
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "ss_between": self.ss_between,
            "ss_within": self.ss_within,
            "ss_total": self.ss_total,
            "df_between": self.df_between,
            "df_within": self.df_within,
            "ms_between": self.ms_between,
            "ms_within": self.ms_within,
            "f": self.f if math.isfinite(self.f) else None,
            "p": self.p,
            "degenerate": self.degenerate,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class EffectEstimate:
    term: str
    effect: float
    share: float  # |effect| / sum of |effects|; 0 when all effects are zero

    def to_dict(self) -> dict:
        return {"term": self.term, "effect": self.effect, "share": self.share}

    @classmethod
    def from_dict(cls, data: dict) -> "EffectEstimate":
        return cls(term=data["term"], effect=float(data["effect"]), share=float(data.get("share", 0.0)))


@dataclass(frozen=True)
class ParetoRanking:
    effects: tuple[EffectEstimate, ...]
    cumulative_pct: tuple[float, ...]
    no_dominant: bool = False

    def to_dict(self) -> dict:
        return {
            "effects": [e.to_dict() for e in self.effects],
            "cumulative_pct": list(self.cumulative_pct),
            "no_dominant": self.no_dominant,
        }


@dataclass(frozen=True)
class BoostingIndex:
    alternative: str
    scores: dict[str, float]
    aggregate: float

    def to_dict(self) -> dict:
        return {
            "alternative": self.alternative,
            "scores": dict(self.scores),
            "aggregate": self.aggregate,
        }


@dataclass(frozen=True)
class BoostingResult:
    indices: tuple[BoostingIndex, ...]
    weights: dict[str, float]
    directions: dict[str, str]

    def ranking(self) -> list[str]:
        """Alternatives best-first; ties broken by name."""
        return [
            ix.alternative
            for ix in sorted(self.indices, key=lambda i: (-i.aggregate, i.alternative))
        ]

    def to_dict(self) -> dict:
        return {
            "indices": [i.to_dict() for i in self.indices],
            "weights": dict(self.weights),
            "directions": dict(self.directions),
            "ranking": self.ranking(),
        }


@dataclass
class ChartSeries:
    kind: str
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    unit: str = ""
    series: list[dict] = field(default_factory=list)  # {"name": ..., "points": [[x, y], ...]}
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "title": self.title,
            "x_label": self.x_label,
            "y_label": self.y_label,
            "unit": self.unit,
            "series": [dict(s) for s in self.series],
            "meta": dict(self.meta),
        }


# ---------------------------------------------------------------------------
# Descriptive statistics


def _check_finite(values: Sequence[float], what: str) -> None:
    for v in values:
        if not math.isfinite(v):
            raise PayloadError(f"{what} must be finite, got {v!r}")


def descriptive_stats(observations: Sequence[float]) -> DescriptiveStats:
    """n, mean, sample sd, extrema, and the 95% t-based CI of the mean."""
    values = [float(v) for v in observations]
    if len(values) < 2:
        raise PayloadError("descriptive statistics need at least 2 observations")
    _check_finite(values, "observations")
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    sd = math.sqrt(var)
    half = t_ppf(0.975, n - 1) * sd / math.sqrt(n)
    return DescriptiveStats(
        n=n,
        mean=mean,
        sd=sd,
        minimum=min(values),
        maximum=max(values),
        ci95=(mean - half, mean + half),
    )


# ---------------------------------------------------------------------------
# One-way ANOVA


def anova_oneway(samples: Mapping[str, Sequence[float]]) -> AnovaTable:
    """Fixed-effects one-way ANOVA over labeled groups.

    Requires >=2 groups with >=2 finite observations each. A zero
    within-group mean square is reported as degenerate (infinite F when any
    between-group variation exists, F = 0 when there is none).
    """
    if len(samples) < 2:
        raise PayloadError("ANOVA needs at least 2 groups")
    groups: list[list[float]] = []
    for label in samples:
        values = [float(v) for v in samples[label]]
        if len(values) < 2:
            raise PayloadError(f"group {label!r} needs at least 2 observations")
        _check_finite(values, f"group {label!r}")
        groups.append(values)

    total_n = sum(len(g) for g in groups)
    grand = sum(sum(g) for g in groups) / total_n
    ss_between = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups)
    ss_within = sum(sum((v - sum(g) / len(g)) ** 2 for v in g) for g in groups)
    ss_total = ss_between + ss_within
    df_between = len(groups) - 1
    df_within = total_n - len(groups)
    ms_between = ss_between / df_between
    ms_within = ss_within / df_within

    if ms_within == 0.0:
        if ms_between > 0.0:
            return AnovaTable(
                ss_between, ss_within, ss_total, df_between, df_within,
                ms_between, ms_within, math.inf, 0.0,
                degenerate=True, detail="degenerate: infinite F (no within-group variation)",
            )
        return AnovaTable(
            ss_between, ss_within, ss_total, df_between, df_within,
            ms_between, ms_within, 0.0, 1.0,
            degenerate=True, detail="degenerate: no variation at all",
        )

    f_stat = ms_between / ms_within
    p = f_sf(f_stat, df_between, df_within)
    return AnovaTable(
        ss_between, ss_within, ss_total, df_between, df_within,
        ms_between, ms_within, f_stat, p,
    )


# ---------------------------------------------------------------------------
# Two-level factorial effects


def factorial_effects(
    factors: Sequence[Factor],
    observations: Sequence[tuple[Mapping, float]],
    term_separator: str = ":",
) -> list[EffectEstimate]:
    """Signed main and interaction effects of a two-level full factorial.

    ``observations`` pairs each run's factor-level combination with its
    response value; replicates are averaged per cell before contrasts are
    applied. For every factor, ``levels[0]`` codes -1 and ``levels[1]``
    codes +1; an interaction's contrast is the product of its factors'
    contrasts, and every effect is mean(response at +1) minus mean(response
    at -1). Terms are emitted in subset order (mains first), labels joined
    with ``term_separator``.
    """
    if not factors:
        raise PayloadError("at least one factor is required")
    for factor in factors:
        if len(factor.levels) != 2:
            raise PayloadError(
                f"factor {factor.name!r} has {len(factor.levels)} levels; "
                "effect contrasts need exactly 2"
            )
    names = [f.name for f in factors]
    level_code = {
        f.name: {str(f.levels[0]): -1, str(f.levels[1]): +1} for f in factors
    }

    cells: dict[tuple[int, ...], list[float]] = {}
    for combination, value in observations:
        key = []
        for f in factors:
            raw = combination.get(f.name)
            code = level_code[f.name].get(str(raw))
            if code is None:
                raise PayloadError(
                    f"run level {raw!r} is not a level of factor {f.name!r}"
                )
            key.append(code)
        if not math.isfinite(float(value)):
            raise PayloadError(f"non-finite response value {value!r}")
        cells.setdefault(tuple(key), []).append(float(value))

    expected = list(itertools.product((-1, +1), repeat=len(factors)))
    missing = [c for c in expected if c not in cells]
    if missing:
        raise PayloadError(
            f"incomplete design: {len(missing)} of {len(expected)} cells have no runs"
        )
    counts = {len(v) for v in cells.values()}
    if len(counts) != 1:
        raise PayloadError("unbalanced design: cells have unequal replicate counts")

    cell_means = {key: sum(vals) / len(vals) for key, vals in cells.items()}

    effects: list[EffectEstimate] = []
    raw: list[tuple[str, float]] = []
    for size in range(1, len(factors) + 1):
        for subset in itertools.combinations(range(len(factors)), size):
            term = term_separator.join(names[i] for i in subset)
            high = [m for key, m in cell_means.items() if _prod(key, subset) > 0]
            low = [m for key, m in cell_means.items() if _prod(key, subset) < 0]
            effect = sum(high) / len(high) - sum(low) / len(low)
            raw.append((term, effect))
    total_abs = sum(abs(e) for _, e in raw)
    for term, effect in raw:
        share = abs(effect) / total_abs if total_abs > 0 else 0.0
        effects.append(EffectEstimate(term=term, effect=effect, share=share))
    return effects


def _prod(key: tuple[int, ...], subset: tuple[int, ...]) -> int:
    out = 1
    for i in subset:
        out *= key[i]
    return out


def pareto_ranking(effects: Sequence[EffectEstimate]) -> ParetoRanking:
    """Effects by descending magnitude with cumulative percentages.

    Ties in |effect| break lexicographically by term label. The cumulative
    series always ends at exactly 100. When every effect is zero the result
    carries equal shares and the ``no_dominant`` flag.
    """
    if not effects:
        raise PayloadError("at least one effect is required")
    ordered = sorted(effects, key=lambda e: (-abs(e.effect), e.term))
    total = sum(abs(e.effect) for e in ordered)
    if total == 0.0:
        share = 1.0 / len(ordered)
        flagged = tuple(
            EffectEstimate(term=e.term, effect=e.effect, share=share) for e in ordered
        )
        cumulative = tuple(100.0 * (i + 1) * share for i in range(len(ordered)))
        cumulative = cumulative[:-1] + (100.0,)
        return ParetoRanking(effects=flagged, cumulative_pct=cumulative, no_dominant=True)
    shared = tuple(
        EffectEstimate(term=e.term, effect=e.effect, share=abs(e.effect) / total)
        for e in ordered
    )
    running = 0.0
    cumulative: list[float] = []
    for e in shared:
        running += abs(e.effect)
        cumulative.append(100.0 * running / total)
    cumulative[-1] = 100.0
    return ParetoRanking(effects=shared, cumulative_pct=tuple(cumulative), no_dominant=False)


# ---------------------------------------------------------------------------
# Boosting (composite) indices


def boosting_index(
    alternatives: Mapping[str, Mapping[str, float]],
    directions: Mapping[str, str],
    weights: Optional[Mapping[str, float]] = None,
) -> BoostingResult:
    """Combine several primary metrics into one index per alternative.

    Each metric is min-max normalized across alternatives (lower-better
    metrics flipped so 1.0 is always best); a metric with no spread scores
    1.0 for everyone. The aggregate is the weighted arithmetic mean of the
    normalized scores; weights default to uniform and are normalized to
    sum 1.
    """
    if not alternatives:
        raise PayloadError("at least one alternative is required")
    metrics = sorted(directions)
    if not metrics:
        raise PayloadError("at least one metric direction is required")
    for metric in metrics:
        if directions[metric] not in {"higher-better", "lower-better"}:
            raise PayloadError(f"invalid direction {directions[metric]!r} for {metric!r}")
    for alt, values in alternatives.items():
        for metric in metrics:
            if metric not in values:
                raise PayloadError(f"alternative {alt!r} is missing metric {metric!r}")

    if weights is None:
        norm_weights = {m: 1.0 / len(metrics) for m in metrics}
    else:
        for metric, w in weights.items():
            if w < 0:
                raise PayloadError(f"negative weight {w!r} for metric {metric!r}")
        total = sum(weights.get(m, 0.0) for m in metrics)
        if total <= 0:
            raise PayloadError("weights must include at least one positive value")
        norm_weights = {m: weights.get(m, 0.0) / total for m in metrics}

    spans = {}
    for metric in metrics:
        column = [float(alternatives[a][metric]) for a in alternatives]
        _check_finite(column, f"metric {metric!r}")
        spans[metric] = (min(column), max(column))

    indices = []
    for alt in sorted(alternatives):
        scores: dict[str, float] = {}
        for metric in metrics:
            lo, hi = spans[metric]
            x = float(alternatives[alt][metric])
            if hi == lo:
                scores[metric] = 1.0
            elif directions[metric] == "higher-better":
                scores[metric] = (x - lo) / (hi - lo)
            else:
                scores[metric] = (hi - x) / (hi - lo)
        aggregate = sum(norm_weights[m] * scores[m] for m in metrics)
        indices.append(BoostingIndex(alternative=alt, scores=scores, aggregate=aggregate))
    return BoostingResult(
        indices=tuple(indices),
        weights=norm_weights,
        directions={m: directions[m] for m in metrics},
    )


# ---------------------------------------------------------------------------
# Chart series


def chart_data(data, kind: str, title: str = "", unit: str = "", x_label: str = "", y_label: str = "") -> ChartSeries:
    """Build a self-contained, render-ready series for the given chart kind.

    pareto expects effects (or a ParetoRanking), radar expects a
    BoostingResult, and column/line/scatter expect grouped samples. The
    output carries everything the presentation layer needs; no statistics
    happen downstream of this call.
    """
    if kind not in CHART_KINDS:
        raise PayloadError(f"unknown chart kind {kind!r}")
    if kind == "pareto":
        if isinstance(data, ParetoRanking):
            ranking = data
        elif isinstance(data, (list, tuple)) and data and isinstance(data[0], EffectEstimate):
            ranking = pareto_ranking(data)
        else:
            raise PayloadError("pareto charts need effect estimates")
        bars = [[e.term, abs(e.effect)] for e in ranking.effects]
        cumulative = [
            [e.term, pct] for e, pct in zip(ranking.effects, ranking.cumulative_pct)
        ]
        return ChartSeries(
            kind="pareto",
            title=title or "effect magnitudes",
            x_label=x_label or "term",
            y_label=y_label or "absolute effect",
            unit=unit,
            series=[
                {"name": "effects", "points": bars},
                {"name": "cumulative", "points": cumulative},
            ],
            meta={"no_dominant": ranking.no_dominant, "cumulative_unit": "percent"},
        )
    if kind == "radar":
        if not isinstance(data, BoostingResult):
            raise PayloadError("radar charts need a boosting result")
        spokes = sorted(data.directions)
        return ChartSeries(
            kind="radar",
            title=title or "composite index profile",
            x_label=x_label or "metric",
            y_label=y_label or "normalized score",
            unit=unit,
            series=[
                {"name": ix.alternative, "points": [[m, ix.scores[m]] for m in spokes]}
                for ix in data.indices
            ],
            meta={"spokes": spokes, "aggregates": {ix.alternative: ix.aggregate for ix in data.indices}},
        )
    # grouped samples
    if not isinstance(data, Mapping) or not data:
        raise PayloadError(f"{kind} charts need grouped samples")
    groups = list(data)
    for label in groups:
        if not isinstance(data[label], (list, tuple)):
            raise PayloadError(f"{kind} charts need grouped samples")
    if kind == "scatter":
        series = [
            {
                "name": str(label),
                "points": [[i + 1, float(v)] for i, v in enumerate(data[label])],
            }
            for label in groups
        ]
    else:
        series = [
            {
                "name": "group means",
                "points": [
                    [str(label), sum(map(float, data[label])) / len(data[label])]
                    for label in groups
                    if len(data[label]) > 0
                ],
            }
        ]
    return ChartSeries(
        kind=kind,
        title=title,
        x_label=x_label or ("observation" if kind == "scatter" else "group"),
        y_label=y_label or "value",
        unit=unit,
        series=series,
    )


# ---------------------------------------------------------------------------
# Canned analysis payload for a completed campaign


def runs_to_observations(
    plan: Sequence[RunSpec] | Sequence[dict],
    records: Sequence[dict],
    metric: str,
) -> list[tuple[dict, float]]:
    """Pair each ok run's combination with its measured value for a metric."""
    plan_dicts = [r.to_dict() if isinstance(r, RunSpec) else r for r in plan]
    by_index = {r["index"]: r for r in plan_dicts}
    out: list[tuple[dict, float]] = []
    for rec in records:
        if rec.get("status") != "ok":
            continue
        cell = rec.get("measurements", {}).get(metric)
        if cell is None:
            continue
        planned = by_index.get(rec["index"])
        combo = planned["combination"] if planned else rec.get("combination", {})
        out.append((combo, float(cell["value"])))
    return out


def build_analysis_payload(
    factors: Sequence[Factor],
    plan: Sequence[dict],
    records: Sequence[dict],
    response_metrics: Sequence[str],
    units: Optional[Mapping[str, str]] = None,
) -> dict:
    """Deterministic analysis-step payload from a completed campaign.

    Per response metric: overall descriptive stats, a marginal one-way
    ANOVA per design factor (levels as groups), and, when every design
    factor has two levels, the full effect/Pareto analysis plus its chart
    series.
    """
    units = dict(units or {})
    results: dict = {"descriptive": {}, "anova": {}, "effects": {}, "pareto": {}, "charts": []}
    two_level = all(len(f.levels) == 2 for f in factors)
    for metric in response_metrics:
        observations = runs_to_observations(plan, records, metric)
        values = [v for _, v in observations]
        if len(values) >= 2:
            results["descriptive"][metric] = descriptive_stats(values).to_dict()
        for factor in factors:
            groups: dict[str, list[float]] = {}
            for combo, value in observations:
                groups.setdefault(str(combo.get(factor.name)), []).append(value)
            usable = {k: v for k, v in groups.items() if len(v) >= 2}
            if len(usable) >= 2:
                results["anova"].setdefault(metric, {})[factor.name] = anova_oneway(usable).to_dict()
        if two_level and observations:
            try:
                effects = factorial_effects(factors, observations)
            except PayloadError:
                continue  # incomplete after failures; marginal ANOVA still stands
            ranking = pareto_ranking(effects)
            results["effects"][metric] = [e.to_dict() for e in effects]
            results["pareto"][metric] = ranking.to_dict()
            chart = chart_data(ranking, "pareto", title=f"{metric}: effect ranking", unit=units.get(metric, ""))
            entry = chart.to_dict()
            entry["id"] = f"chart:pareto:{metric}"
            results["charts"].append(entry)
    results = {k: v for k, v in results.items() if v}
    if not results:
        raise PayloadError("no analyzable measurements in the campaign records")
    return {"results": results}

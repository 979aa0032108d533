"""Statistical operations against hand and brute-force oracles."""

import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evalbench.analysis import (
    EffectEstimate,
    anova_oneway,
    boosting_index,
    build_analysis_payload,
    chart_data,
    descriptive_stats,
    factorial_effects,
    pareto_ranking,
)
from evalbench.doe import Factor
from evalbench.errors import PayloadError


class TestDescriptiveStats:
    def test_constant_data(self):
        stats = descriptive_stats([2, 2, 2])
        assert stats.mean == 2.0
        assert stats.sd == 0.0
        assert stats.ci95 == (2.0, 2.0)

    def test_one_two_three(self):
        # hand oracle: mean 2, variance ((1)^2 + 0 + 1^2)/2 = 1
        stats = descriptive_stats([1, 2, 3])
        assert stats.mean == pytest.approx(2.0)
        assert stats.sd == pytest.approx(1.0)
        assert stats.minimum == 1 and stats.maximum == 3
        lo, hi = stats.ci95
        assert lo < 2.0 < hi

    def test_empty_rejected(self):
        with pytest.raises(PayloadError):
            descriptive_stats([])

    def test_ci_against_scipy(self):
        import scipy.stats

        values = [3.1, 4.7, 2.2, 5.5, 4.1, 3.3]
        stats = descriptive_stats(values)
        ref_lo, ref_hi = scipy.stats.t.interval(
            0.95, len(values) - 1, loc=stats.mean, scale=stats.sd / math.sqrt(len(values))
        )
        assert stats.ci95[0] == pytest.approx(ref_lo, rel=1e-9)
        assert stats.ci95[1] == pytest.approx(ref_hi, rel=1e-9)


def brute_force_anova(groups):
    """Definitional oracle: explicit sums, no shared code with the engine."""
    labels = list(groups)
    all_values = [v for label in labels for v in groups[label]]
    grand = sum(all_values) / len(all_values)
    ssb = 0.0
    ssw = 0.0
    for label in labels:
        g = groups[label]
        mean = sum(g) / len(g)
        ssb += len(g) * (mean - grand) ** 2
        ssw += sum((v - mean) ** 2 for v in g)
    dfb = len(labels) - 1
    dfw = len(all_values) - len(labels)
    return ssb, ssw, dfb, dfw, (ssb / dfb) / (ssw / dfw) if ssw > 0 else None


class TestAnova:
    def test_fixed_case(self):
        # hand sum-of-squares oracle: grand mean 2.5, SSB 1.5, SSW 4
        table = anova_oneway({"a": [1, 2, 3], "b": [2, 3, 4]})
        assert table.ss_between == pytest.approx(1.5, rel=1e-12)
        assert table.ss_within == pytest.approx(4.0, rel=1e-12)
        assert (table.df_between, table.df_within) == (1, 4)
        assert table.f == pytest.approx(1.5, rel=1e-12)

    def test_equal_means_zero_f(self):
        table = anova_oneway({"a": [1, 3], "b": [2, 2]})
        assert table.ss_between == pytest.approx(0.0, abs=1e-12)
        assert table.f == pytest.approx(0.0, abs=1e-12)

    def test_degenerate_infinite_f(self):
        table = anova_oneway({"a": [1, 1], "b": [2, 2]})
        assert table.degenerate
        assert math.isinf(table.f)
        assert table.p == 0.0
        assert "infinite F" in table.detail

    def test_all_constant_degenerate(self):
        table = anova_oneway({"a": [5, 5], "b": [5, 5]})
        assert table.degenerate
        assert table.f == 0.0
        assert table.p == 1.0

    def test_group_size_preconditions(self):
        with pytest.raises(PayloadError):
            anova_oneway({"a": [1, 2]})
        with pytest.raises(PayloadError):
            anova_oneway({"a": [1], "b": [2, 3]})
        with pytest.raises(PayloadError):
            anova_oneway({"a": [1, float("nan")], "b": [2, 3]})

    def test_against_scipy_f_oneway(self):
        import scipy.stats

        rnd = random.Random(5)
        for _ in range(50):
            groups = {
                str(i): [rnd.gauss(i * 0.3, 1.5) for _ in range(rnd.randint(2, 9))]
                for i in range(rnd.randint(2, 5))
            }
            table = anova_oneway(groups)
            ref = scipy.stats.f_oneway(*groups.values())
            assert table.f == pytest.approx(ref.statistic, rel=1e-9)
            assert table.p == pytest.approx(ref.pvalue, abs=1e-8)

    @settings(max_examples=80, deadline=None)
    @given(
        st.lists(
            st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=12),
            min_size=2,
            max_size=5,
        )
    )
    def test_decomposition_identity(self, raw_groups):
        groups = {str(i): g for i, g in enumerate(raw_groups)}
        table = anova_oneway(groups)
        assert table.ss_total == pytest.approx(
            table.ss_between + table.ss_within, rel=1e-9, abs=1e-9
        )
        ssb, ssw, dfb, dfw, f = brute_force_anova(groups)
        assert table.ss_between == pytest.approx(ssb, rel=1e-9, abs=1e-9)
        assert table.ss_within == pytest.approx(ssw, rel=1e-9, abs=1e-9)


def brute_force_effects(factors, observations):
    """Contrast oracle: enumerate cells, average, apply signed contrasts."""
    names = [f.name for f in factors]
    cells = {}
    for combo, value in observations:
        key = tuple(
            -1 if str(combo[f.name]) == str(f.levels[0]) else +1 for f in factors
        )
        cells.setdefault(key, []).append(value)
    means = {k: sum(v) / len(v) for k, v in cells.items()}
    out = {}
    for size in range(1, len(factors) + 1):
        for subset in itertools.combinations(range(len(factors)), size):
            term = ":".join(names[i] for i in subset)
            plus = [m for k, m in means.items() if math.prod(k[i] for i in subset) > 0]
            minus = [m for k, m in means.items() if math.prod(k[i] for i in subset) < 0]
            out[term] = sum(plus) / len(plus) - sum(minus) / len(minus)
    return out


class TestFactorialEffects:
    A = Factor("A", "resource", ("-", "+"))
    B = Factor("B", "resource", ("-", "+"))
    C = Factor("C", "resource", ("-", "+"))

    def cells_2x2(self, values):
        pairs = []
        for (a, b), v in zip(itertools.product("-+", repeat=2), values):
            pairs.append(({"A": a, "B": b}, v))
        return pairs

    def test_two_by_two_example(self):
        # cells (--, -+, +-, ++) = (10, 10, 14, 14): pure A effect
        observations = [
            ({"A": "-", "B": "-"}, 10.0),
            ({"A": "+", "B": "-"}, 14.0),
            ({"A": "-", "B": "+"}, 10.0),
            ({"A": "+", "B": "+"}, 14.0),
        ]
        effects = {e.term: e.effect for e in factorial_effects([self.A, self.B], observations)}
        assert effects == {"A": 4.0, "B": 0.0, "A:B": 0.0}
        oracle = brute_force_effects([self.A, self.B], observations)
        assert effects == oracle

    def test_all_cells_equal(self):
        observations = self.cells_2x2([7, 7, 7, 7])
        effects = factorial_effects([self.A, self.B], observations)
        assert all(e.effect == 0.0 for e in effects)
        assert all(e.share == 0.0 for e in effects)

    def test_2p3_pure_c_effect(self):
        factors = [self.A, self.B, self.C]
        observations = []
        for a, b, c in itertools.product("-+", repeat=3):
            observations.append(({"A": a, "B": b, "C": c}, 6.0 if c == "+" else 0.0))
        effects = {e.term: e.effect for e in factorial_effects(factors, observations)}
        oracle = brute_force_effects(factors, observations)
        assert effects == oracle
        assert effects["C"] == 6.0
        assert all(v == 0.0 for term, v in effects.items() if term != "C")

    def test_replicates_averaged_per_cell(self):
        observations = self.cells_2x2([10, 10, 14, 14]) + self.cells_2x2([12, 12, 16, 16])
        effects = {e.term: e.effect for e in factorial_effects([self.A, self.B], observations)}
        assert effects["A"] == pytest.approx(4.0)

    def test_non_two_level_rejected(self):
        wide = Factor("W", "resource", ("a", "b", "c"))
        with pytest.raises(PayloadError):
            factorial_effects([wide], [({"W": "a"}, 1.0)])

    def test_incomplete_design_rejected(self):
        observations = self.cells_2x2([1, 2, 3, 4])[:3]
        with pytest.raises(PayloadError):
            factorial_effects([self.A, self.B], observations)

    def test_shares_sum_to_one(self):
        observations = self.cells_2x2([3, 9, 4, 1])
        effects = factorial_effects([self.A, self.B], observations)
        assert sum(e.share for e in effects) == pytest.approx(1.0)


class TestParetoRanking:
    def effects(self, mapping):
        return [EffectEstimate(term=k, effect=v, share=0.0) for k, v in mapping.items()]

    def test_fixed_case(self):
        # arithmetic oracle: 4/5.5, 5/5.5, 5.5/5.5
        ranking = pareto_ranking(self.effects({"A": 4.0, "B": 1.0, "AB": 0.5}))
        assert [e.term for e in ranking.effects] == ["A", "B", "AB"]
        assert ranking.cumulative_pct[0] == pytest.approx(72.72, abs=0.01)
        assert ranking.cumulative_pct[1] == pytest.approx(90.90, abs=0.01)
        assert ranking.cumulative_pct[2] == 100.0

    def test_single_effect(self):
        ranking = pareto_ranking(self.effects({"A": 2.0}))
        assert list(ranking.cumulative_pct) == [100.0]

    def test_tie_break_lexicographic(self):
        ranking = pareto_ranking(self.effects({"B": 1.0, "A": 1.0}))
        assert [e.term for e in ranking.effects] == ["A", "B"]
        assert list(ranking.cumulative_pct) == [50.0, 100.0]

    def test_all_zero_flags_no_dominant(self):
        ranking = pareto_ranking(self.effects({"A": 0.0, "B": 0.0}))
        assert ranking.no_dominant
        assert all(e.share == pytest.approx(0.5) for e in ranking.effects)
        assert ranking.cumulative_pct[-1] == 100.0

    def test_empty_rejected(self):
        with pytest.raises(PayloadError):
            pareto_ranking([])

    @given(
        st.dictionaries(
            st.text(alphabet="ABCD:", min_size=1, max_size=4),
            st.floats(-1e6, 1e6),
            min_size=1,
            max_size=8,
        )
    )
    def test_cumulative_is_monotone_and_ends_at_100(self, mapping):
        ranking = pareto_ranking(self.effects(mapping))
        series = list(ranking.cumulative_pct)
        assert all(b >= a - 1e-9 for a, b in zip(series, series[1:]))
        assert series[-1] == 100.0
        magnitudes = [abs(e.effect) for e in ranking.effects]
        assert magnitudes == sorted(magnitudes, reverse=True)


class TestBoostingIndex:
    def test_identical_alternatives_all_score_one(self):
        result = boosting_index(
            {"X": {"m1": 5, "m2": 2}, "Y": {"m1": 5, "m2": 2}},
            {"m1": "higher-better", "m2": "higher-better"},
        )
        for ix in result.indices:
            assert ix.aggregate == 1.0
            assert all(s == 1.0 for s in ix.scores.values())

    def test_dominating_alternative(self):
        # min-max arithmetic oracle: X is the minimum on both metrics
        result = boosting_index(
            {"X": {"m1": 10, "m2": 1}, "Y": {"m1": 20, "m2": 2}},
            {"m1": "higher-better", "m2": "higher-better"},
        )
        by_name = {ix.alternative: ix for ix in result.indices}
        assert by_name["X"].aggregate == 0.0
        assert by_name["Y"].aggregate == 1.0
        assert result.ranking() == ["Y", "X"]

    def test_lower_better_flipped(self):
        result = boosting_index(
            {"X": {"lat": 10}, "Y": {"lat": 30}},
            {"lat": "lower-better"},
        )
        by_name = {ix.alternative: ix for ix in result.indices}
        assert by_name["X"].aggregate == 1.0
        assert by_name["Y"].aggregate == 0.0

    def test_affine_transform_preserves_scores(self):
        alternatives = {"X": {"m1": 10.0, "m2": 1.0}, "Y": {"m1": 20.0, "m2": 2.0}, "Z": {"m1": 12.0, "m2": 9.0}}
        directions = {"m1": "higher-better", "m2": "lower-better"}
        base = boosting_index(alternatives, directions)
        transformed = {
            alt: {"m1": 3.0 * v["m1"] + 5.0, "m2": v["m2"]} for alt, v in alternatives.items()
        }
        shifted = boosting_index(transformed, directions)
        assert shifted.ranking() == base.ranking()
        for a, b in zip(base.indices, shifted.indices):
            assert b.scores["m1"] == pytest.approx(a.scores["m1"], abs=1e-12)

    def test_missing_metric_rejected(self):
        with pytest.raises(PayloadError):
            boosting_index({"X": {"m1": 1}}, {"m1": "higher-better", "m2": "higher-better"})

    def test_negative_weight_rejected(self):
        with pytest.raises(PayloadError):
            boosting_index(
                {"X": {"m1": 1}, "Y": {"m1": 2}},
                {"m1": "higher-better"},
                weights={"m1": -1.0},
            )


class TestChartData:
    def test_pareto_chart_shape(self):
        effects = [
            EffectEstimate("A", 4.0, 0.0),
            EffectEstimate("B", 1.0, 0.0),
            EffectEstimate("AB", 0.5, 0.0),
        ]
        chart = chart_data(effects, "pareto")
        assert chart.kind == "pareto"
        bars = chart.series[0]["points"]
        cumulative = chart.series[1]["points"]
        assert len(bars) == 3
        assert cumulative[-1][1] == 100.0

    def test_radar_chart_shape(self):
        result = boosting_index(
            {"X": {"m1": 1, "m2": 2, "m3": 3}, "Y": {"m1": 3, "m2": 2, "m3": 1}},
            {"m1": "higher-better", "m2": "higher-better", "m3": "higher-better"},
        )
        chart = chart_data(result, "radar")
        assert len(chart.series) == 2
        assert all(len(s["points"]) == 3 for s in chart.series)
        assert chart.meta["spokes"] == ["m1", "m2", "m3"]

    def test_kind_mismatch(self):
        with pytest.raises(PayloadError):
            chart_data({"g": [1, 2]}, "radar")
        with pytest.raises(PayloadError):
            chart_data({"g": [1, 2]}, "mystery")

    def test_column_chart_means(self):
        chart = chart_data({"a": [1.0, 3.0], "b": [5.0, 7.0]}, "column")
        assert chart.series[0]["points"] == [["a", 2.0], ["b", 6.0]]

    def test_scatter_keeps_observations(self):
        chart = chart_data({"a": [1.0, 3.0]}, "scatter")
        assert chart.series[0]["points"] == [[1, 1.0], [2, 3.0]]


class TestBuildAnalysisPayload:
    def test_payload_covers_descriptive_anova_effects(self, bundle):
        from helpers import canned_design_spec, fabricate_records
        from evalbench.doe import full_factorial

        spec = canned_design_spec()
        plan = [r.to_dict() for r in full_factorial(spec)]
        records = fabricate_records(plan)
        payload = build_analysis_payload(spec.factors, plan, records, spec.response_metrics)
        results = payload["results"]
        metric = spec.response_metrics[0]
        assert metric in results["descriptive"]
        assert set(results["anova"][metric]) == {"instance type", "message size"}
        assert results["pareto"][metric]["cumulative_pct"][-1] == 100.0
        assert results["charts"][0]["id"] == f"chart:pareto:{metric}"

    def test_no_measurements_rejected(self):
        spec_factor = Factor("A", "resource", ("-", "+"))
        with pytest.raises(PayloadError):
            build_analysis_payload([spec_factor], [], [], ["m"])

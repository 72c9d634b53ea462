import numpy as np
import pytest

from schemas.bgp import BgpUpdate
from schemas.changepoints import Changepoint
from schemas.params import Params
from services.aggregator import Aggregator, EmpiricalCdf
from services.correlation_pipeline import CorrelationPipeline
from utils.constants import SweepGrid
from utils.exceptions import DataError, ParamsError

from tests.conftest import PATH_A, PATH_B, PREFIX, TARGET


def update(ts, cp="cp1", as_path=PATH_A):
    return BgpUpdate(cp_id=cp, prefix=PREFIX, timestamp=ts, as_path=as_path)


def report_for(probe, updates, changepoint_times, cp="cp1", discarded=()):
    changepoints = [
        Changepoint(timestamp=ts, index=i + 1, mean_before=10.0, mean_after=20.0)
        for i, ts in enumerate(changepoint_times)
    ]
    return CorrelationPipeline.match(
        updates, changepoints, 960, probe_id=probe, cp_id=cp, target=TARGET, prefix=PREFIX, discarded=discarded
    )


def sweep_pairs(data, prefixes):
    truth = data.ground_truth
    return [
        (probe_id, cp_id, truth.target, prefix)
        for prefix in prefixes
        for probe_id in truth.probes
        for cp_id in truth.collector_peers
    ]


class TestCdf:
    def test_step_function(self):
        cdf = EmpiricalCdf([0.5, 0.0, 1.0, 0.5])
        assert cdf(0.0) == 0.25
        assert cdf(0.49) == 0.25
        assert cdf(0.5) == 0.75
        assert cdf(1.0) == 1.0
        assert cdf(-0.1) == 0.0
        assert cdf.steps() == [(0.0, 0.25), (0.5, 0.75), (1.0, 1.0)]

    def test_area_of_perfect_correlation(self):
        assert EmpiricalCdf([1.0, 1.0]).area() == 0.0

    def test_area_of_no_correlation(self):
        assert EmpiricalCdf([0.0]).area() == 1.0

    def test_rejects_empty_and_out_of_range(self):
        with pytest.raises(DataError):
            EmpiricalCdf([])
        with pytest.raises(DataError):
            EmpiricalCdf([0.2, 1.5])


class TestCorrelationScore:
    def test_examples(self):
        assert Aggregator.correlation_score([1.0, 1.0]) == 0.0
        assert Aggregator.correlation_score([0.0]) == 1.0
        assert Aggregator.correlation_score([0.0, 0.5, 0.5, 1.0]) == pytest.approx(0.5)

    def test_empty(self):
        with pytest.raises(DataError):
            Aggregator.correlation_score([])

    def test_out_of_range(self):
        with pytest.raises(DataError):
            Aggregator.correlation_score([-0.1])

    def test_equals_area_under_cdf(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            size = int(rng.integers(1, 50))
            factors = rng.random(size)
            # Exact 0s, 1s and repeats exercise the step boundaries
            factors[rng.random(size) < 0.2] = 0.0
            factors[rng.random(size) < 0.2] = 1.0
            factors[rng.random(size) < 0.2] = factors[0]
            area = Aggregator.cdf(factors).area()
            assert abs(area - Aggregator.correlation_score(factors)) <= 1e-12

    def test_raising_one_factor_never_raises_score(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            factors = rng.random(int(rng.integers(1, 30)))
            raised = factors.copy()
            position = int(rng.integers(len(factors)))
            raised[position] = rng.uniform(factors[position], 1.0)
            assert Aggregator.correlation_score(raised) <= Aggregator.correlation_score(factors)
            assert Aggregator.cdf(raised).area() <= Aggregator.cdf(factors).area() + 1e-12


class TestCommonCollectorPeers:
    def test_only_peers_seeing_every_prefix(self):
        other = PREFIX.supernet()
        updates = [
            update(0, cp="cp1"),
            BgpUpdate(cp_id="cp1", prefix=other, timestamp=1, as_path=PATH_A),
            update(2, cp="cp2"),
        ]
        assert Aggregator.common_collector_peers(updates, [PREFIX, other]) == {"cp1"}


class TestSweep:
    def test_single_cell_scores_one_minus_factor(self, correlated_data, params):
        truth = correlated_data.ground_truth
        pair = ("probe-1", "cp-1", truth.target, truth.prefix)
        [surface] = Aggregator.sweep(
            correlated_data.measurements, correlated_data.updates, [pair], [10000.0], [0], params
        )
        report = CorrelationPipeline.run_loaded(
            correlated_data.measurements, correlated_data.updates, *pair, params
        )
        assert surface.cells == {(10000.0, 0): pytest.approx(1 - report.correlation_factor)}

    def test_pair_order_does_not_matter(self, correlated_data, params):
        pairs = sweep_pairs(correlated_data, [correlated_data.ground_truth.prefix])
        forward = Aggregator.sweep(
            correlated_data.measurements, correlated_data.updates, pairs, [1.0, 10000.0], [0, 300], params
        )
        backward = Aggregator.sweep(
            correlated_data.measurements, correlated_data.updates, pairs[::-1], [1.0, 10000.0], [0, 300], params
        )
        assert forward == backward

    def test_invalid_cell(self, correlated_data, params):
        pairs = sweep_pairs(correlated_data, [correlated_data.ground_truth.prefix])
        with pytest.raises(ParamsError):
            Aggregator.sweep(correlated_data.measurements, correlated_data.updates, pairs, [0.0], [0], params)

    def test_empty_grid(self, correlated_data, params):
        pairs = sweep_pairs(correlated_data, [correlated_data.ground_truth.prefix])
        with pytest.raises(DataError):
            Aggregator.sweep(correlated_data.measurements, correlated_data.updates, pairs, [], [0], params)

    def test_reference_cell_ranks_among_the_best(self, correlated_data):
        truth = correlated_data.ground_truth
        prefixes = [truth.prefix, *truth.decoy_prefixes]
        surfaces = Aggregator.sweep(
            correlated_data.measurements, correlated_data.updates, sweep_pairs(correlated_data, prefixes),
            SweepGrid.ELBOW_SLOPE_THRESHOLDS, SweepGrid.TIME_SHIFTS, Params()
        )
        by_prefix = {surface.prefix: surface for surface in surfaces}
        assert set(by_prefix) == set(prefixes)

        true_surface = by_prefix[truth.prefix]
        assert len(true_surface.cells) == 84
        reference = true_surface.score(10000.0, 0)
        strictly_better = sum(1 for score in true_surface.cells.values() if score < reference)
        assert strictly_better <= 0.1 * len(true_surface.cells)

        def separation(est):
            decoys = [by_prefix[decoy].score(est, 0) for decoy in truth.decoy_prefixes]
            return float(np.mean(decoys)) - true_surface.score(est, 0)

        assert separation(10000.0) > separation(0.001)


class TestEquivalenceClasses:
    @pytest.fixture
    def reports(self):
        updates = [update(1000), update(2000, as_path=PATH_B), update(3000), update(4000, as_path=PATH_B)]
        return [
            report_for("p1", updates, [1000, 2000, 3000]),
            report_for("p2", updates, [1000, 2000, 4000]),
            report_for("p3", updates, []),
            report_for("p4", updates, []),
        ]

    def test_half_overlap_at_threshold(self, reports):
        classing = Aggregator.equivalence_classes(reports, 0.5)
        assert classing.members == ["p1", "p2", "p3", "p4"]
        assert classing.similarity[0][1] == 0.5
        assert classing.similarity[2][3] == 1.0
        assert classing.classes == [["p1", "p2"], ["p3", "p4"]]

    def test_stricter_threshold_splits(self, reports):
        assert Aggregator.equivalence_classes(reports, 0.6).classes == [["p1"], ["p2"], ["p3", "p4"]]

    def test_similarity_is_symmetric(self, reports):
        similarity = Aggregator.equivalence_classes(reports, 0.7).similarity
        assert similarity == [list(row) for row in zip(*similarity)]
        assert all(similarity[i][i] == 1.0 for i in range(len(similarity)))

    def test_windows(self, reports):
        first, second = Aggregator.equivalence_classes_by_window(reports[:2], 2000, 0.5)
        assert (first.window_start, second.window_start) == (1000, 3000)
        assert first.classes == [["p1", "p2"]]
        assert second.classes == [["p1"], ["p2"]]

    def test_rejects_mixed_peers(self, reports):
        other = report_for("p5", [update(1000, cp="cp2")], [1000], cp="cp2")
        with pytest.raises(DataError):
            Aggregator.equivalence_classes([*reports, other], 0.5)

    def test_rejects_threshold_out_of_range(self, reports):
        with pytest.raises(DataError):
            Aggregator.equivalence_classes(reports, 1.5)


class TestTimeline:
    def test_ordinals_count_discarded_updates(self):
        report = report_for("p1", [update(1000), update(2000)], [1000], discarded=[update(500)])
        rows = Aggregator.emit_match_timeline([report])
        assert [(row.timestamp, row.ordinal, row.matched) for row in rows] == [(1000, 2, True), (2000, 3, False)]

    def test_rows_sorted_across_reports(self):
        rows = Aggregator.emit_match_timeline([
            report_for("p2", [update(1000)], []),
            report_for("p1", [update(1000), update(1500)], [1500]),
        ])
        assert [(row.timestamp, row.probe_id) for row in rows] == [(1000, "p1"), (1000, "p2"), (1500, "p1")]

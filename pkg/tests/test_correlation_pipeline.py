from ipaddress import IPv4Address, IPv4Network

import pytest

from schemas.bgp import BgpUpdate
from schemas.changepoints import Changepoint
from schemas.measurements import RttMeasurement, RttSample
from schemas.params import Params
from services.aggregator import Aggregator
from services.correlation_pipeline import CorrelationPipeline
from utils.exceptions import DataError

from tests.conftest import PREFIX, TARGET

OTHER_TARGET = IPv4Address("8.8.8.8")


def measurement(ts, rtts=(12.0, 11.0, 13.0), ip=TARGET, probe="p1", target=TARGET):
    return RttMeasurement(probe_id=probe, target=target, timestamp=ts, rtts=rtts, responded_ip=ip)


def update(ts, cp="cp1", prefix=PREFIX, as_path=(3333, 25152)):
    return BgpUpdate(cp_id=cp, prefix=prefix, timestamp=ts, as_path=as_path)


def changepoint(ts, index=1):
    return Changepoint(timestamp=ts, index=index, mean_before=10.0, mean_after=20.0)


def samples_at(*timestamps):
    return [RttSample(timestamp=ts, value=10.0) for ts in timestamps]


def run_match(updates, changepoints, tolerance=960):
    return CorrelationPipeline.match(
        updates, changepoints, tolerance, probe_id="p1", cp_id="cp1", target=TARGET, prefix=PREFIX
    )


class TestPreprocessRtt:
    def test_keeps_minimum_of_complete_measurements(self):
        samples = CorrelationPipeline.preprocess_rtt([measurement(0, (12.0, 9.5, 30.0))], TARGET)
        assert samples == [RttSample(timestamp=0, value=9.5)]

    def test_drops_incomplete_and_unexpected_responder(self):
        measurements = [
            measurement(0, (12.0, 11.0)),
            measurement(240, ip=IPv4Address("193.0.14.1")),
            measurement(480, ip=None),
            measurement(720),
        ]
        assert [s.timestamp for s in CorrelationPipeline.preprocess_rtt(measurements, TARGET)] == [720]


class TestTimeAlign:
    def test_shift(self):
        shifted = CorrelationPipeline.time_align(samples_at(1000, 1240), -120)
        assert [s.timestamp for s in shifted] == [880, 1120]

    def test_zero_shift_is_identity(self):
        samples = samples_at(0, 240)
        assert CorrelationPipeline.time_align(samples, 0) == samples

    def test_shift_before_epoch(self):
        with pytest.raises(DataError):
            CorrelationPipeline.time_align(samples_at(100), -600)


class TestPreprocessBgp:
    def test_last_update_per_gap(self):
        updates = [update(ts) for ts in (0, 100, 200, 300, 1000, 2500)]
        valid, invalid = CorrelationPipeline.preprocess_bgp(updates, samples_at(0, 240, 480, 2000), 960)
        assert [u.timestamp for u in valid] == [200, 300]
        assert [u.timestamp for u in invalid] == [0, 100, 1000, 2500]

    def test_gap_is_half_open(self):
        samples = samples_at(0, 240, 480)
        valid, _ = CorrelationPipeline.preprocess_bgp([update(240)], samples, 960)
        assert [u.timestamp for u in valid] == [240]
        valid, _ = CorrelationPipeline.preprocess_bgp([update(240), update(241)], samples, 960)
        assert [u.timestamp for u in valid] == [240, 241]

    def test_gap_equal_to_tolerance_is_kept(self):
        valid, _ = CorrelationPipeline.preprocess_bgp([update(500)], samples_at(0, 960), 960)
        assert len(valid) == 1

    def test_no_samples(self):
        updates = [update(10)]
        assert CorrelationPipeline.preprocess_bgp(updates, [], 960) == ([], updates)


class TestMatch:
    def test_window_is_inclusive(self):
        report = run_match([update(520), update(1480), update(1481)], [changepoint(1000)])
        assert [entry.matched for entry in report.entries] == [True, True, False]
        assert report.correlation_factor == pytest.approx(2 / 3)

    def test_records_matching_changepoints(self):
        report = run_match([update(1000)], [changepoint(800, 3), changepoint(1100, 4), changepoint(2000, 5)])
        assert [c.index for c in report.entries[0].matched_changepoints] == [3, 4]

    def test_no_changepoints(self):
        report = run_match([update(10), update(500)], [])
        assert report.correlation_factor == 0
        assert not report.insufficient_data

    def test_no_updates_flags_insufficient_data(self):
        report = run_match([], [changepoint(1000)])
        assert report.insufficient_data
        assert report.correlation_factor == 0
        assert report.changepoint_count == 1


class TestRunLoaded:
    def test_step_with_matching_update(self, params):
        measurements = [measurement(i * 240, (30.0 if i < 50 else 60.0,) * 3) for i in range(100)]
        # First sample of the new regime is at 50 * 240 = 12000
        report = CorrelationPipeline.run_loaded(
            measurements, [update(11900), update(20000)], "p1", "cp1", TARGET, PREFIX, params
        )
        assert report.changepoint_count == 1
        assert [entry.matched for entry in report.entries] == [True, False]
        assert report.correlation_factor == 0.5

    def test_filters_by_probe_target_cp_and_prefix(self, params):
        measurements = [measurement(i * 240, (30.0 if i < 50 else 60.0,) * 3) for i in range(100)]
        measurements += [measurement(i * 240, probe="p2") for i in range(100)]
        measurements += [measurement(i * 240, target=OTHER_TARGET, ip=OTHER_TARGET) for i in range(100)]
        updates = [update(11900), update(11950, cp="cp2"), update(11950, prefix=IPv4Network("10.0.0.0/8"))]

        report = CorrelationPipeline.run_loaded(measurements, updates, "p1", "cp1", TARGET, PREFIX, params)
        assert [entry.update.timestamp for entry in report.entries] == [11900]
        assert report.matched_count == 1

    def test_missing_updates(self, params):
        measurements = [measurement(i * 240) for i in range(10)]
        report = CorrelationPipeline.run_loaded(measurements, [], "p1", "cp1", TARGET, PREFIX, params)
        assert report.insufficient_data
        assert report.correlation_factor == 0

    def test_time_window_clips_inputs(self, params):
        measurements = [measurement(i * 240, (30.0 if i < 50 else 60.0,) * 3) for i in range(100)]
        clipped = params.model_copy(update={"time_window": (0, 9600)})
        report = CorrelationPipeline.run_loaded(
            measurements, [update(5000), update(11900)], "p1", "cp1", TARGET, PREFIX, clipped
        )
        assert report.changepoint_count == 0
        assert [entry.update.timestamp for entry in report.entries] == [5000]

    def test_time_shift_moves_changepoints(self):
        base = 100000
        measurements = [measurement(base + i * 240, (30.0 if i < 50 else 60.0,) * 3) for i in range(100)]
        updates = [update(base + 11900)]
        aligned = CorrelationPipeline.run_loaded(
            measurements, updates, "p1", "cp1", TARGET, PREFIX, Params(time_shift=0)
        )
        shifted = CorrelationPipeline.run_loaded(
            measurements, updates, "p1", "cp1", TARGET, PREFIX, Params(time_shift=-1200)
        )
        assert aligned.correlation_factor == 1
        assert shifted.correlation_factor == 0


class TestSelectPairs:
    def test_pairs_with_data(self):
        measurements = [measurement(0, probe="p2"), measurement(0, probe="p1"),
                        measurement(0, probe="p3", target=OTHER_TARGET)]
        updates = [update(0, cp="cp2"), update(0, cp="cp1"), update(0, cp="cp9", prefix=IPv4Network("10.0.0.0/8"))]
        pairs = CorrelationPipeline.select_pairs(measurements, updates, TARGET, PREFIX)
        assert pairs == [("p1", "cp1"), ("p1", "cp2"), ("p2", "cp1"), ("p2", "cp2")]

    def test_explicit_selection_is_used_as_given(self):
        pairs = CorrelationPipeline.select_pairs([], [], TARGET, PREFIX, probes=["p9"], collector_peers=["cpX"])
        assert pairs == [("p9", "cpX")]


class TestEndToEnd:
    def test_true_prefix_correlates_and_decoys_do_not(self, correlated_data, params):
        truth = correlated_data.ground_truth
        scores = {}
        for prefix in [truth.prefix, *truth.decoy_prefixes]:
            pairs = CorrelationPipeline.select_pairs(
                correlated_data.measurements, correlated_data.updates, truth.target, prefix
            )
            assert len(pairs) == len(truth.probes) * len(truth.collector_peers)
            reports = CorrelationPipeline.run_pairs(
                correlated_data.measurements, correlated_data.updates, pairs, truth.target, prefix, params
            )
            factors = [report.correlation_factor for report in reports]
            if prefix == truth.prefix:
                assert min(factors) >= 0.9
            else:
                assert max(factors) <= 0.3
            scores[prefix] = Aggregator.correlation_score(factors)

        assert scores[truth.prefix] == min(scores.values())
        assert all(scores[truth.prefix] < scores[decoy] for decoy in truth.decoy_prefixes)

    def test_parallel_run_matches_serial(self, correlated_data, params):
        truth = correlated_data.ground_truth
        pairs = CorrelationPipeline.select_pairs(
            correlated_data.measurements, correlated_data.updates, truth.target, truth.prefix
        )
        serial = CorrelationPipeline.run_pairs(
            correlated_data.measurements, correlated_data.updates, pairs, truth.target, truth.prefix, params
        )
        parallel = CorrelationPipeline.run_pairs(
            correlated_data.measurements, correlated_data.updates, pairs, truth.target, truth.prefix, params, jobs=2
        )
        assert parallel == serial

    def test_run_pair_from_files(self, scenario_dir, params):
        report = CorrelationPipeline.run_pair(
            scenario_dir / "rtt.ndjson", scenario_dir / "bgp.ndjson", "probe-1", "cp-1", TARGET, PREFIX, params
        )
        assert len(report.entries) == 8
        assert report.correlation_factor >= 0.9

"""
Correlation Pipeline Service

Per (probe, CP, target, prefix) methodology: RTT preprocessing and time
alignment, changepoint detection, BGP preprocessing, matching and the
BGP-RTT correlation factor.
"""

import logging
from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from ipaddress import IPv4Address, IPv4Network
from typing import List, Optional, Sequence, Set, Tuple

from schemas.bgp import BgpUpdate
from schemas.changepoints import Changepoint
from schemas.measurements import RttMeasurement, RttSample
from schemas.params import Params
from schemas.reports import MatchEntry, MatchReport
from services.changepoint_detector import ChangepointDetector
from services.ingest import Ingest, PathLike
from utils.constants import MeasurementDefaults
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


class CorrelationPipeline:
    """Match BGP routing changes against RTT changepoints"""

    @staticmethod
    def preprocess_rtt(measurements: Sequence[RttMeasurement], expected_ip: IPv4Address) -> List[RttSample]:
        """Keep complete measurements that reached the expected address; retain the minimum RTT"""
        samples = []
        for measurement in measurements:
            if len(measurement.rtts) < MeasurementDefaults.RTT_VALUES_PER_MEASUREMENT:
                continue
            if measurement.responded_ip != expected_ip:
                continue
            samples.append(RttSample(timestamp=measurement.timestamp, value=min(measurement.rtts)))

        logger.debug(f"Kept {len(samples)} of {len(measurements)} RTT measurements")
        return samples

    @staticmethod
    def time_align(samples: Sequence[RttSample], shift: int) -> List[RttSample]:
        """Shift every sample timestamp by a fixed number of seconds"""
        if shift == 0:
            return list(samples)
        aligned = []
        for sample in samples:
            timestamp = sample.timestamp + shift
            if timestamp < 0:
                raise DataError(f"time shift {shift}s moves sample at {sample.timestamp} before the epoch")
            aligned.append(RttSample(timestamp=timestamp, value=sample.value))
        return aligned

    @staticmethod
    def preprocess_bgp(
        updates: Sequence[BgpUpdate],
        samples: Sequence[RttSample],
        tolerance: int
    ) -> Tuple[List[BgpUpdate], List[BgpUpdate]]:
        """
        Split updates into (valid, invalid).

        Between consecutive samples (s_k, s_{k+1}] only the last update is
        valid, and none is when the gap exceeds the tolerance window. Updates
        outside the sampled span are invalid.
        """
        if not samples:
            return [], list(updates)

        sample_times = [sample.timestamp for sample in samples]
        # gap index -> position in updates of the last update seen in that gap
        last_in_gap = {}
        for position, update in enumerate(updates):
            gap = bisect_left(sample_times, update.timestamp) - 1
            if gap < 0 or gap >= len(sample_times) - 1:
                continue
            if sample_times[gap + 1] - sample_times[gap] > tolerance:
                continue
            last_in_gap[gap] = position

        keep: Set[int] = set(last_in_gap.values())
        valid = [update for position, update in enumerate(updates) if position in keep]
        invalid = [update for position, update in enumerate(updates) if position not in keep]

        logger.debug(f"{len(valid)} valid and {len(invalid)} invalid BGP updates")
        return valid, invalid

    @staticmethod
    def match(
        valid_updates: Sequence[BgpUpdate],
        changepoints: Sequence[Changepoint],
        tolerance: int,
        *,
        probe_id: str,
        cp_id: str,
        target: IPv4Address,
        prefix: IPv4Network,
        discarded: Sequence[BgpUpdate] = (),
        params: Optional[Params] = None
    ) -> MatchReport:
        """Mark each update matched when a changepoint lies within tolerance/2 of it"""
        cp_times = [changepoint.timestamp for changepoint in changepoints]
        half_width = tolerance / 2

        entries = []
        for update in valid_updates:
            lo = bisect_left(cp_times, update.timestamp - half_width)
            hi = bisect_right(cp_times, update.timestamp + half_width)
            in_window = list(changepoints[lo:hi])
            entries.append(MatchEntry(update=update, matched=bool(in_window), matched_changepoints=in_window))

        matched = sum(1 for entry in entries if entry.matched)
        return MatchReport(
            probe_id=probe_id,
            cp_id=cp_id,
            target=target,
            prefix=prefix,
            entries=entries,
            discarded=list(discarded),
            # No valid updates: factor 0, flagged rather than NaN
            correlation_factor=matched / len(entries) if entries else 0.0,
            insufficient_data=not entries,
            changepoint_count=len(changepoints),
            params=params
        )

    @staticmethod
    def run_loaded(
        measurements: Sequence[RttMeasurement],
        updates: Sequence[BgpUpdate],
        probe_id: str,
        cp_id: str,
        target: IPv4Address,
        prefix: IPv4Network,
        params: Params,
        detector: Optional[ChangepointDetector] = None
    ) -> MatchReport:
        """Full methodology on already-parsed measurements and updates"""
        detector = detector or ChangepointDetector()

        probe_measurements = [
            m for m in measurements if m.probe_id == probe_id and m.target == target
        ]
        pair_updates = [u for u in updates if u.cp_id == cp_id and u.prefix == prefix]
        probe_measurements = Ingest.clip_window(probe_measurements, params.time_window)
        pair_updates = Ingest.clip_window(pair_updates, params.time_window)

        samples = CorrelationPipeline.preprocess_rtt(probe_measurements, expected_ip=target)
        samples = CorrelationPipeline.time_align(samples, params.time_shift)
        changepoints, _ = detector.detect(samples, params)

        valid, invalid = CorrelationPipeline.preprocess_bgp(pair_updates, samples, params.tolerance_window)
        report = CorrelationPipeline.match(
            valid, changepoints, params.tolerance_window,
            probe_id=probe_id, cp_id=cp_id, target=target, prefix=prefix,
            discarded=invalid, params=params
        )

        if report.insufficient_data:
            logger.info(f"Pair ({probe_id}, {cp_id}) on {prefix}: no valid BGP updates")
        return report

    @staticmethod
    def run_pair(
        rtt_file: PathLike,
        bgp_file: PathLike,
        probe_id: str,
        cp_id: str,
        target: IPv4Address,
        prefix: IPv4Network,
        params: Params
    ) -> MatchReport:
        measurements = Ingest.read_rtt(rtt_file)
        updates = Ingest.read_bgp(bgp_file)
        return CorrelationPipeline.run_loaded(measurements, updates, probe_id, cp_id, target, prefix, params)

    @staticmethod
    def select_pairs(
        measurements: Sequence[RttMeasurement],
        updates: Sequence[BgpUpdate],
        target: IPv4Address,
        prefix: IPv4Network,
        probes: Optional[Sequence[str]] = None,
        collector_peers: Optional[Sequence[str]] = None
    ) -> List[Tuple[str, str]]:
        """
        Every (probe, CP) with data for the target and the prefix, sorted.
        Explicitly requested probes or CPs are used as given, with or without data.
        """
        probe_ids = sorted(set(probes)) if probes else sorted({m.probe_id for m in measurements if m.target == target})
        cp_ids = (
            sorted(set(collector_peers)) if collector_peers
            else sorted({u.cp_id for u in updates if u.prefix == prefix})
        )
        return [(probe_id, cp_id) for probe_id in probe_ids for cp_id in cp_ids]

    @staticmethod
    def run_pairs(
        measurements: Sequence[RttMeasurement],
        updates: Sequence[BgpUpdate],
        pairs: Sequence[Tuple[str, str]],
        target: IPv4Address,
        prefix: IPv4Network,
        params: Params,
        jobs: int = 1
    ) -> List[MatchReport]:
        """run_loaded over many pairs, in pair order; jobs > 1 spreads pairs over processes"""
        if jobs <= 1 or len(pairs) <= 1:
            detector = ChangepointDetector()
            return [
                CorrelationPipeline.run_loaded(measurements, updates, probe_id, cp_id, target, prefix, params, detector)
                for probe_id, cp_id in pairs
            ]

        # Each worker only needs its probe's measurements and its CP's updates
        tasks = [
            (
                [m for m in measurements if m.probe_id == probe_id],
                [u for u in updates if u.cp_id == cp_id],
                probe_id, cp_id, target, prefix, params
            )
            for probe_id, cp_id in pairs
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(CorrelationPipeline.run_loaded, *task) for task in tasks]
            return [future.result() for future in futures]

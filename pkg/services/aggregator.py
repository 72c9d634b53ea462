"""
Aggregator Service

Cross-pair aggregation: empirical CDF of correlation factors, the correlation
score (area under that CDF), the elbow slope threshold x time shift sweep,
equivalence classes of probes and the per-update match timeline.
"""

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from ipaddress import IPv4Address, IPv4Network
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import ValidationError

from schemas.bgp import BgpUpdate
from schemas.measurements import RttMeasurement
from schemas.params import Params
from schemas.reports import EquivalenceClassing, MatchReport, ScoreSurface, TimelineRow
from services.changepoint_detector import ChangepointDetector
from services.correlation_pipeline import CorrelationPipeline
from utils.exceptions import DataError, ParamsError

logger = logging.getLogger(__name__)

# (probe, CP, target, prefix)
Pair = Tuple[str, str, IPv4Address, IPv4Network]


class EmpiricalCdf:
    """Right-continuous step function F(x) = |{f <= x}| / n"""

    def __init__(self, factors: Sequence[float]):
        values = np.sort(np.asarray(factors, dtype=np.float64))
        if len(values) == 0:
            raise DataError("cannot build a CDF from no factors")
        if values[0] < 0 or values[-1] > 1:
            raise DataError("correlation factors must lie in [0, 1]")
        self.values = values

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right") / len(self.values))

    def steps(self) -> List[Tuple[float, float]]:
        """(x, F(x)) at every distinct factor"""
        distinct = np.unique(self.values)
        heights = np.searchsorted(self.values, distinct, side="right") / len(self.values)
        return [(float(x), float(h)) for x, h in zip(distinct, heights)]

    def area(self) -> float:
        """Integral of F over [0, 1], summed interval by interval"""
        xs = [x for x, _ in self.steps()] + [1.0]
        heights = [h for _, h in self.steps()]
        return float(sum(h * (right - left) for h, left, right in zip(heights, xs, xs[1:])))


class Aggregator:
    """Aggregate match reports across probe/CP pairs"""

    @staticmethod
    def cdf(factors: Sequence[float]) -> EmpiricalCdf:
        return EmpiricalCdf(factors)

    @staticmethod
    def correlation_score(factors: Sequence[float]) -> float:
        """Area under the CDF of factors, in closed form 1 - mean; lower is better"""
        values = np.asarray(factors, dtype=np.float64)
        if len(values) == 0:
            raise DataError("cannot score an empty set of factors")
        if values.min() < 0 or values.max() > 1:
            raise DataError("correlation factors must lie in [0, 1]")
        return float(1.0 - values.mean())

    @staticmethod
    def common_collector_peers(updates: Iterable[BgpUpdate], prefixes: Iterable[IPv4Network]) -> Set[str]:
        """Collector peers that recorded updates for every one of the prefixes"""
        wanted = set(prefixes)
        seen: Dict[str, Set[IPv4Network]] = defaultdict(set)
        for update in updates:
            if update.prefix in wanted:
                seen[update.cp_id].add(update.prefix)
        return {cp_id for cp_id, prefixes_seen in seen.items() if prefixes_seen == wanted}

    @staticmethod
    def _sweep_cells(
        measurements: Sequence[RttMeasurement],
        updates: Sequence[BgpUpdate],
        pairs: Sequence[Pair],
        cells: Sequence[Tuple[float, int]],
        params: Params
    ) -> Dict[Tuple[float, int], List[MatchReport]]:
        detector = ChangepointDetector()
        results = {}
        for est, shift in cells:
            cell_params = params.model_copy(update={"elbow_slope_threshold": est, "time_shift": shift})
            results[(est, shift)] = [
                CorrelationPipeline.run_loaded(
                    measurements, updates, probe_id, cp_id, target, prefix, cell_params, detector
                )
                for probe_id, cp_id, target, prefix in pairs
            ]
        return results

    @staticmethod
    def sweep(
        measurements: Sequence[RttMeasurement],
        updates: Sequence[BgpUpdate],
        pairs: Sequence[Pair],
        est_values: Sequence[float],
        shift_values: Sequence[int],
        params: Params,
        jobs: int = 1
    ) -> List[ScoreSurface]:
        """
        Run the pipeline for every pair in every (EST, shift) cell and score
        each cell per (target, prefix). One surface per (target, prefix).
        """
        if not est_values or not shift_values:
            raise DataError("sweep needs at least one EST and one time shift value")
        if not pairs:
            raise DataError("sweep needs at least one probe/CP pair")

        cells = [(float(est), int(shift)) for est in est_values for shift in shift_values]
        # Validate every cell up front so a bad grid fails before any work
        for est, shift in cells:
            try:
                Params.model_validate({**params.model_dump(), "elbow_slope_threshold": est, "time_shift": shift})
            except ValidationError as e:
                raise ParamsError(f"invalid sweep cell (EST {est}, shift {shift}): {e.errors()[0]['msg']}")
        if jobs > 1:
            # Split by EST so each worker keeps its own changepoint cache warm
            by_est: Dict[float, List[Tuple[float, int]]] = defaultdict(list)
            for cell in cells:
                by_est[cell[0]].append(cell)
            reports: Dict[Tuple[float, int], List[MatchReport]] = {}
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [
                    pool.submit(Aggregator._sweep_cells, measurements, updates, pairs, group, params)
                    for group in by_est.values()
                ]
                for future in futures:
                    reports.update(future.result())
        else:
            reports = Aggregator._sweep_cells(measurements, updates, pairs, cells, params)

        surfaces: Dict[Tuple[IPv4Address, IPv4Network], Dict[Tuple[float, int], float]] = defaultdict(dict)
        for cell in cells:
            factors: Dict[Tuple[IPv4Address, IPv4Network], List[float]] = defaultdict(list)
            for report in reports[cell]:
                factors[(report.target, report.prefix)].append(report.correlation_factor)
            for key, values in factors.items():
                surfaces[key][cell] = Aggregator.correlation_score(values)

        logger.info(f"Swept {len(cells)} cells over {len(pairs)} pairs")
        return [
            ScoreSurface(target=target, prefix=prefix, cells=scores)
            for (target, prefix), scores in sorted(surfaces.items(), key=lambda item: (int(item[0][0]), str(item[0][1])))
        ]

    @staticmethod
    def _matched_sets(reports: Sequence[MatchReport], window: Optional[Tuple[int, int]] = None) -> Dict[str, FrozenSet]:
        sets = {}
        for report in reports:
            sets[report.probe_id] = frozenset(
                (entry.update.timestamp, entry.update.as_path)
                for entry in report.entries
                if entry.matched and (window is None or window[0] <= entry.update.timestamp < window[1])
            )
        return sets

    @staticmethod
    def _classes(sets: Dict[str, FrozenSet], threshold: float, window_start: Optional[int] = None) -> EquivalenceClassing:
        members = sorted(sets)
        size = len(members)
        similarity = [[1.0] * size for _ in range(size)]
        for i in range(size):
            for j in range(i + 1, size):
                a, b = sets[members[i]], sets[members[j]]
                union = len(a | b)
                # Two empty sets are identical
                value = len(a & b) / union if union else 1.0
                similarity[i][j] = similarity[j][i] = value

        # Connected components over edges with similarity >= threshold
        parent = list(range(size))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(size):
            for j in range(i + 1, size):
                if similarity[i][j] >= threshold:
                    parent[find(j)] = find(i)

        groups: Dict[int, List[str]] = defaultdict(list)
        for i, member in enumerate(members):
            groups[find(i)].append(member)
        classes = sorted((sorted(group) for group in groups.values()), key=lambda group: group[0])

        return EquivalenceClassing(
            members=members, classes=classes, similarity=similarity,
            threshold=threshold, window_start=window_start
        )

    @staticmethod
    def equivalence_classes(reports: Sequence[MatchReport], jaccard_threshold: float) -> EquivalenceClassing:
        """Probes whose matched-update sets overlap by Jaccard >= threshold share a class"""
        if not 0 <= jaccard_threshold <= 1:
            raise DataError("jaccard_threshold must lie in [0, 1]")
        cps = {report.cp_id for report in reports}
        targets = {report.target for report in reports}
        if len(cps) > 1 or len(targets) > 1:
            raise DataError("equivalence classes need reports for a single CP and target")
        return Aggregator._classes(Aggregator._matched_sets(reports), jaccard_threshold)

    @staticmethod
    def equivalence_classes_by_window(
        reports: Sequence[MatchReport], window_seconds: int, jaccard_threshold: float
    ) -> List[EquivalenceClassing]:
        """Classes recomputed on consecutive fixed-width windows of update time"""
        if window_seconds <= 0:
            raise DataError("window_seconds must be positive")
        Aggregator.equivalence_classes(reports, jaccard_threshold)

        timestamps = [entry.update.timestamp for report in reports for entry in report.entries]
        if not timestamps:
            return []
        start, end = min(timestamps), max(timestamps)
        classings = []
        for window_start in range(start, end + 1, window_seconds):
            window = (window_start, window_start + window_seconds)
            classings.append(Aggregator._classes(
                Aggregator._matched_sets(reports, window), jaccard_threshold, window_start
            ))
        return classings

    @staticmethod
    def emit_match_timeline(reports: Sequence[MatchReport]) -> List[TimelineRow]:
        """One row per report entry; ordinal is the update's 1-based position in its CP's sequence"""
        rows = []
        for report in reports:
            ordinals = {}
            for ordinal, (update, _) in enumerate(report.all_updates(), start=1):
                ordinals.setdefault(id(update), ordinal)
            for entry in report.entries:
                rows.append(TimelineRow(
                    timestamp=entry.update.timestamp,
                    ordinal=ordinals[id(entry.update)],
                    probe_id=report.probe_id,
                    cp_id=report.cp_id,
                    matched=entry.matched
                ))
        return sorted(rows, key=lambda row: (row.timestamp, row.probe_id, row.cp_id))

"""
Changepoint Detector Service

Penalized segmentation of RTT series under a squared-error (mean shift) cost:
exact PELT, the unpruned Optimal Partitioning recursion it must agree with,
and the elbow rule that picks the penalty.
"""

import hashlib
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from schemas.changepoints import Changepoint, ElbowRow, ElbowTrace, Segmentation
from schemas.measurements import RttSample
from schemas.params import Params
from utils.exceptions import DataError

logger = logging.getLogger(__name__)

# Relative slack on the pruning test; keeps candidates that rounding could
# make look worse than they are
PRUNE_TOLERANCE = 1e-9


class SquaredErrorCost:
    """Within-segment sum of squared errors, O(1) per segment from prefix sums"""

    def __init__(self, values: Sequence[float]):
        data = np.asarray(values, dtype=np.float64)
        if data.ndim != 1:
            raise DataError("series must be one-dimensional")
        self.n = len(data)

        # Centering first keeps s2 - s1^2/len from cancelling catastrophically
        centered = data - data.mean() if self.n else data
        zero = np.zeros(1, dtype=np.longdouble)
        self._sum = np.concatenate((zero, np.cumsum(centered, dtype=np.longdouble))).astype(np.float64)
        self._sum_sq = np.concatenate((zero, np.cumsum(centered * centered, dtype=np.longdouble))).astype(np.float64)

    def __call__(self, lo: int, hi: int) -> float:
        if not 0 <= lo < hi <= self.n:
            raise DataError(f"empty or out-of-range segment [{lo}, {hi}) for {self.n} values")
        return float(self.many(np.array([lo], dtype=np.int64), hi)[0])

    def many(self, starts: np.ndarray, hi: int) -> np.ndarray:
        """Costs of segments [s, hi) for every s in starts"""
        length = hi - starts
        s1 = self._sum[hi] - self._sum[starts]
        s2 = self._sum_sq[hi] - self._sum_sq[starts]
        return np.maximum(s2 - s1 * s1 / length, 0.0)


def segment_cost(values: Sequence[float], lo: int, hi: int) -> float:
    """Sum of squared deviations from the mean of values[lo:hi]"""
    return SquaredErrorCost(values)(lo, hi)


def _changepoints_ending_at(last: np.ndarray, end: int) -> List[int]:
    """Changepoints of the optimal segmentation of values[:end]"""
    indices = []
    start = int(last[end])
    while start > 0:
        indices.append(start)
        start = int(last[start])
    return indices[::-1]


def _break_tie(tied: np.ndarray, count: np.ndarray, last: np.ndarray) -> int:
    """Fewest changepoints first, then the lexicographically smallest index list"""
    counts = np.array([count[c] + (1 if c > 0 else 0) for c in tied])
    fewest = tied[counts == counts.min()]
    if len(fewest) == 1:
        return int(fewest[0])

    def path(candidate: int) -> List[int]:
        if candidate == 0:
            return []
        return _changepoints_ending_at(last, candidate) + [candidate]

    return int(min(fewest, key=lambda c: path(int(c))))


def _segment(values: Sequence[float], penalty: float, prune: bool) -> Segmentation:
    if penalty < 0:
        raise DataError(f"penalty must be non-negative, got {penalty}")
    cost = SquaredErrorCost(values)
    n = cost.n
    if n == 0:
        raise DataError("cannot segment an empty series")

    # best[t]: optimal penalized cost of values[:t]; last[t]: start of its final segment
    best = np.zeros(n + 1)
    count = np.zeros(n + 1, dtype=np.int64)
    last = np.zeros(n + 1, dtype=np.int64)
    candidates = np.zeros(1, dtype=np.int64)

    for t in range(1, n + 1):
        seg = cost.many(candidates, t)
        totals = best[candidates] + seg + np.where(candidates > 0, penalty, 0.0)
        minimum = totals.min()
        tied = candidates[totals == minimum]
        choice = int(tied[0]) if len(tied) == 1 else _break_tie(tied, count, last)

        best[t] = minimum
        last[t] = choice
        count[t] = count[choice] + (1 if choice > 0 else 0)

        if prune:
            # Drop s when F(s) + C(s, t) > F(t); the penalty is added back for s > 0
            slack = PRUNE_TOLERANCE * max(1.0, abs(minimum))
            candidates = candidates[totals - penalty <= minimum + slack]
        candidates = np.append(candidates, t)

    return Segmentation(
        changepoint_indices=tuple(_changepoints_ending_at(last, n)),
        total_cost=float(best[n]),
        penalty=penalty
    )


def pelt(values: Sequence[float], penalty: float) -> Segmentation:
    """Exact penalized segmentation with pruning (PELT)"""
    return _segment(values, penalty, prune=True)


def optimal_partitioning(values: Sequence[float], penalty: float) -> Segmentation:
    """Unpruned O(n^2) recursion; same optimum as pelt"""
    return _segment(values, penalty, prune=False)


def elbow_select(
    values: Sequence[float],
    params: Params,
    segmenter: Callable[[Sequence[float], float], Segmentation] = pelt
) -> Tuple[float, ElbowTrace]:
    """
    Walk the penalty schedule until the difference quotient between consecutive
    (penalty, changepoint count) points drops below the elbow slope threshold.

    Returns the selected penalty and the walked curve.
    """
    if len(values) == 0:
        raise DataError("cannot select a penalty for an empty series")

    rows: List[ElbowRow] = []
    selected: Optional[int] = None

    for i in range(params.max_elbow_iterations + 1):
        penalty = params.penalty(i)
        changepoints = segmenter(values, penalty).changepoint_count

        quotient = None
        if rows and rows[-1].changepoint_count > changepoints:
            quotient = (penalty - rows[-1].penalty) / (rows[-1].changepoint_count - changepoints)
        rows.append(ElbowRow(
            iteration=i, penalty=penalty,
            changepoint_count=changepoints, difference_quotient=quotient
        ))

        if changepoints == 0:
            break
        if quotient is not None and quotient < params.elbow_slope_threshold:
            selected = i
            break

    converged = selected is not None
    if not converged:
        # Guard: keep the last penalty that still found something
        with_changes = [row.iteration for row in rows if row.changepoint_count > 0]
        selected = with_changes[-1] if with_changes else 0
        logger.debug(
            f"Elbow criterion not met after {len(rows)} penalties; "
            f"falling back to p_{selected} = {rows[selected].penalty}"
        )

    trace = ElbowTrace(rows=rows, selected_index=selected, converged=converged)
    return trace.selected_penalty, trace


def to_changepoints(samples: Sequence[RttSample], seg: Segmentation) -> List[Changepoint]:
    """Stamp each changepoint with the first sample of the new regime"""
    n = len(samples)
    for index in seg.changepoint_indices:
        if not 1 <= index <= n - 1:
            raise DataError(f"changepoint index {index} out of range for {n} samples")
    if not seg.changepoint_indices:
        return []

    values = np.array([sample.value for sample in samples], dtype=np.float64)
    bounds = [0, *seg.changepoint_indices, n]
    means = [float(values[lo:hi].mean()) for lo, hi in zip(bounds, bounds[1:])]

    changepoints = []
    for position, index in enumerate(seg.changepoint_indices):
        before, after = means[position], means[position + 1]
        if before == after:
            logger.debug(f"Skipping changepoint at index {index}: equal adjacent means")
            continue
        changepoints.append(Changepoint(
            timestamp=samples[index].timestamp,
            index=index,
            mean_before=before,
            mean_after=after
        ))
    return changepoints


class ChangepointDetector:
    """PELT with results memoized per (series, penalty)"""

    def __init__(self):
        # series digest -> penalty -> segmentation
        self._cache: Dict[bytes, Dict[float, Segmentation]] = {}

    @staticmethod
    def series_key(values: Sequence[float]) -> bytes:
        return hashlib.sha1(np.ascontiguousarray(values, dtype=np.float64).tobytes()).digest()

    def segment(self, values: Sequence[float], penalty: float, key: Optional[bytes] = None) -> Segmentation:
        by_penalty = self._cache.setdefault(key or self.series_key(values), {})
        seg = by_penalty.get(float(penalty))
        if seg is None:
            seg = pelt(values, penalty)
            by_penalty[float(penalty)] = seg
        return seg

    def elbow_select(
        self, values: Sequence[float], params: Params, key: Optional[bytes] = None
    ) -> Tuple[float, ElbowTrace]:
        key = key or self.series_key(values)
        return elbow_select(values, params, segmenter=lambda v, p: self.segment(v, p, key))

    @property
    def cached_series(self) -> int:
        return len(self._cache)

    def detect(
        self, samples: Sequence[RttSample], params: Params
    ) -> Tuple[List[Changepoint], Optional[ElbowTrace]]:
        """Elbow-selected segmentation of a sample series, as changepoints"""
        if not samples:
            return [], None
        values = np.array([sample.value for sample in samples], dtype=np.float64)
        key = self.series_key(values)
        penalty, trace = self.elbow_select(values, params, key)
        changepoints = to_changepoints(samples, self.segment(values, penalty, key))
        logger.debug(
            f"{len(changepoints)} changepoints in {len(samples)} samples "
            f"(penalty {penalty}, {len(trace.rows)} elbow steps)"
        )
        return changepoints, trace

"""
Report Writer Service

CSV and JSON outputs of the analysis commands. Every writer sorts its rows and
formats numbers the same way on every run, so identical inputs give
byte-identical files.
"""

import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from schemas.changepoints import Changepoint, ElbowTrace
from schemas.reports import EquivalenceClassing, MatchReport, ScoreSurface, TimelineRow, ValidationReport
from services.aggregator import Aggregator
from services.ingest import PathLike
from utils.constants import EntryStatus, OutputFiles

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6f"
# Significant digits; difference quotients span many orders of magnitude
ELBOW_FLOAT_FORMAT = "%.6g"

UNSAFE_FILE_CHARS = re.compile(r"[^A-Za-z0-9._-]")

SUMMARY_COLUMNS = [
    "probe", "cp", "target", "prefix", "valid_updates", "matched_updates",
    "discarded_updates", "changepoints", "correlation_factor", "insufficient_data",
]
SURFACE_COLUMNS = ["target", "prefix", "elbow_slope_threshold", "time_shift", "correlation_score"]
CDF_COLUMNS = ["target", "prefix", "x", "cdf"]
TIMELINE_COLUMNS = ["timestamp", "ordinal", "probe", "cp", "matched"]
VALIDATION_COLUMNS = [
    "probe", "cp", "bgp_rtt_correlation", "bgp_traceroute_correlation",
    "bgp_traceroute_false_negative", "q_plus", "q_minus",
]
CHANGEPOINT_COLUMNS = ["probe", "target", "timestamp", "index", "mean_before", "mean_after"]
ELBOW_COLUMNS = ["probe", "target", "iteration", "penalty", "changepoints", "difference_quotient", "selected"]


def _file_token(text: str) -> str:
    return UNSAFE_FILE_CHARS.sub("_", text)


def _write_csv(rows: List[list], columns: List[str], path: PathLike, float_format: str = FLOAT_FORMAT) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(rows, columns=columns)
    df.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path


def _write_json(payload, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


class ReportWriter:
    """Tabular and JSON report files"""

    @staticmethod
    def summary_rows(reports: Sequence[MatchReport]) -> List[list]:
        ordered = sorted(reports, key=lambda r: (int(r.target), str(r.prefix), r.probe_id, r.cp_id))
        return [
            [
                report.probe_id, report.cp_id, str(report.target), str(report.prefix),
                len(report.entries), report.matched_count, len(report.discarded),
                report.changepoint_count, report.correlation_factor, report.insufficient_data,
            ]
            for report in ordered
        ]

    @staticmethod
    def write_summary(reports: Sequence[MatchReport], path: PathLike) -> Path:
        return _write_csv(ReportWriter.summary_rows(reports), SUMMARY_COLUMNS, path)

    @staticmethod
    def write_match_report(report: MatchReport, out_dir: PathLike) -> Path:
        """One JSON document per pair, named after the pair"""
        parts = (report.probe_id, report.cp_id, str(report.prefix))
        name = "match_" + "_".join(_file_token(part) for part in parts) + ".json"
        payload = report.model_dump(mode="json", by_alias=True)
        payload["entries"] = [
            {**entry, "status": (EntryStatus.MATCHED if entry["matched"] else EntryStatus.UNMATCHED).value}
            for entry in payload["entries"]
        ]
        return _write_json(payload, Path(out_dir) / name)

    @staticmethod
    def write_surface(surfaces: Sequence[ScoreSurface], path: PathLike) -> Path:
        rows = []
        for surface in surfaces:
            for (est, shift), score in sorted(surface.cells.items()):
                rows.append([str(surface.target), str(surface.prefix), est, shift, score])
        return _write_csv(rows, SURFACE_COLUMNS, path)

    @staticmethod
    def write_cdf(reports: Sequence[MatchReport], path: PathLike) -> Path:
        """Step points (x, F(x)) of the factor CDF of every (target, prefix)"""
        grouped: Dict[tuple, List[float]] = {}
        for report in reports:
            grouped.setdefault((int(report.target), str(report.target), str(report.prefix)), []).append(
                report.correlation_factor
            )
        rows = []
        for (_, target, prefix), factors in sorted(grouped.items()):
            for x, height in Aggregator.cdf(factors).steps():
                rows.append([target, prefix, x, height])
        return _write_csv(rows, CDF_COLUMNS, path)

    @staticmethod
    def write_timeline(rows: Sequence[TimelineRow], path: PathLike) -> Path:
        return _write_csv(
            [[row.timestamp, row.ordinal, row.probe_id, row.cp_id, row.matched] for row in rows],
            TIMELINE_COLUMNS, path
        )

    @staticmethod
    def write_classes(classings: Dict[str, Sequence[EquivalenceClassing]], path: PathLike) -> Path:
        """Classings keyed by collector peer"""
        return _write_json(
            {cp_id: [classing.model_dump(mode="json") for classing in items] for cp_id, items in classings.items()},
            path
        )

    @staticmethod
    def _validation_rows(reports: Sequence[ValidationReport]) -> List[list]:
        ordered = sorted(reports, key=lambda r: (r.probe_id, r.cp_id))
        return [
            [
                report.probe_id, report.cp_id, report.bgp_rtt_correlation,
                report.bgp_traceroute_correlation, report.bgp_traceroute_false_negative,
                report.q_plus_size, report.q_minus_size,
            ]
            for report in ordered
        ]

    @staticmethod
    def write_validation(reports: Sequence[ValidationReport], out_dir: PathLike) -> List[Path]:
        """
        All pairs, then the pairs with |Q+| > 0 (correlation panel) and the
        pairs with |Q-| > 0 (false-negative panel). Undefined factors are blank.
        """
        out = Path(out_dir)
        return [
            _write_csv(ReportWriter._validation_rows(reports), VALIDATION_COLUMNS, out / OutputFiles.VALIDATION),
            _write_csv(
                ReportWriter._validation_rows([r for r in reports if r.q_plus_size > 0]),
                VALIDATION_COLUMNS, out / OutputFiles.VALIDATION_CORRELATION
            ),
            _write_csv(
                ReportWriter._validation_rows([r for r in reports if r.q_minus_size > 0]),
                VALIDATION_COLUMNS, out / OutputFiles.VALIDATION_FALSE_NEGATIVE
            ),
        ]

    @staticmethod
    def changepoint_rows(probe_id: str, target: str, changepoints: Sequence[Changepoint]) -> List[list]:
        return [
            [probe_id, target, cp.timestamp, cp.index, cp.mean_before, cp.mean_after]
            for cp in changepoints
        ]

    @staticmethod
    def elbow_rows(probe_id: str, target: str, trace: Optional[ElbowTrace]) -> List[list]:
        if trace is None:
            return []
        return [
            [
                probe_id, target, row.iteration, row.penalty, row.changepoint_count,
                row.difference_quotient, row.iteration == trace.selected_index,
            ]
            for row in trace.rows
        ]

    @staticmethod
    def write_changepoints(rows: List[list], path: PathLike) -> Path:
        return _write_csv(rows, CHANGEPOINT_COLUMNS, path)

    @staticmethod
    def write_elbow(rows: List[list], path: PathLike) -> Path:
        return _write_csv(rows, ELBOW_COLUMNS, path, float_format=ELBOW_FLOAT_FORMAT)

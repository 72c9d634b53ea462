import logging
from pathlib import Path

import click

from config import settings
from dependencies import (
    PREFIX, bgp_options, cell_options, input_options, jobs_option, output_options,
    params_from_options, params_options, selected
)
from services.aggregator import Aggregator
from services.correlation_pipeline import CorrelationPipeline
from services.ingest import Ingest
from services.report_writer import ReportWriter
from utils.constants import OutputFiles
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


@click.command("classes")
@input_options
@bgp_options
@click.option("--prefix", type=PREFIX, required=True, help="Announced prefix covering the target")
@click.option("--threshold", type=click.FloatRange(0, 1), default=settings.JACCARD_THRESHOLD, show_default=True,
              help="Jaccard similarity threshold")
@click.option("--window", "window_seconds", type=click.IntRange(min=1),
              help="Recompute classes per window of this many seconds")
@cell_options
@params_options
@jobs_option
@output_options
@params_from_options
def classes(rtt_file, target, probes, bgp_file, collector_peers, prefix, threshold, window_seconds,
            jobs, out_dir, params):
    """Group probes whose matched updates overlap, per collector peer"""
    measurements = Ingest.read_rtt(rtt_file)
    updates = Ingest.read_bgp(bgp_file)

    pairs = CorrelationPipeline.select_pairs(
        measurements, updates, target, prefix, selected(probes), selected(collector_peers)
    )
    if not pairs:
        raise DataError(f"no probe/CP pair has data for {target} and {prefix}")
    reports = CorrelationPipeline.run_pairs(measurements, updates, pairs, target, prefix, params, jobs)

    classings = {}
    for cp_id in sorted({report.cp_id for report in reports}):
        cp_reports = [report for report in reports if report.cp_id == cp_id]
        if window_seconds:
            classings[cp_id] = Aggregator.equivalence_classes_by_window(cp_reports, window_seconds, threshold)
        else:
            classings[cp_id] = [Aggregator.equivalence_classes(cp_reports, threshold)]
        logger.info(f"{cp_id}: {len(classings[cp_id])} classing(s) over {len(cp_reports)} probes")

    out = Path(out_dir)
    ReportWriter.write_classes(classings, out / OutputFiles.CLASSES)
    ReportWriter.write_timeline(Aggregator.emit_match_timeline(reports), out / OutputFiles.TIMELINE)

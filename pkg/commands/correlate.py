import logging
from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from dependencies import (
    PREFIX, bgp_options, cell_options, input_options, jobs_option, output_options,
    params_from_options, params_options, selected
)
from services.ingest import Ingest
from services.correlation_pipeline import CorrelationPipeline
from services.report_writer import ReportWriter
from utils.constants import OutputFiles
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


def render_summary(reports) -> None:
    table = Table(title="BGP-RTT correlation")
    for column in ("probe", "cp", "valid", "matched", "changepoints", "factor"):
        table.add_column(column, justify="right" if column not in ("probe", "cp") else "left")
    for row in ReportWriter.summary_rows(reports):
        probe, cp, _, _, valid, matched, _, changepoints, factor, insufficient = row
        table.add_row(
            probe, cp, str(valid), str(matched), str(changepoints),
            "n/a" if insufficient else f"{factor:.3f}"
        )
    Console().print(table)


@click.command("correlate")
@input_options
@bgp_options
@click.option("--prefix", type=PREFIX, required=True, help="Announced prefix covering the target")
@cell_options
@params_options
@jobs_option
@output_options
@params_from_options
def correlate(rtt_file, target, probes, bgp_file, collector_peers, prefix, jobs, out_dir, params):
    """Match BGP updates of a prefix with RTT changepoints, per probe/CP pair"""
    measurements = Ingest.read_rtt(rtt_file)
    updates = Ingest.read_bgp(bgp_file)

    pairs = CorrelationPipeline.select_pairs(
        measurements, updates, target, prefix, selected(probes), selected(collector_peers)
    )
    if not pairs:
        raise DataError(f"no probe/CP pair has data for {target} and {prefix}")
    logger.info(f"Correlating {len(pairs)} pairs for {target} / {prefix}")

    reports = CorrelationPipeline.run_pairs(measurements, updates, pairs, target, prefix, params, jobs)

    out = Path(out_dir)
    for report in reports:
        ReportWriter.write_match_report(report, out)
    ReportWriter.write_summary(reports, out / OutputFiles.SUMMARY)
    render_summary(reports)

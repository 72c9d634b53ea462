import logging
from pathlib import Path

import click

from dependencies import (
    FLOAT_LIST, INT_LIST, PREFIX, bgp_options, input_options, jobs_option, output_options,
    params_from_options, params_options, selected
)
from services.aggregator import Aggregator
from services.correlation_pipeline import CorrelationPipeline
from services.ingest import Ingest
from services.report_writer import ReportWriter
from utils.constants import OutputFiles, SweepGrid
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


@click.command("sweep")
@input_options
@bgp_options
@click.option("--prefix", "prefixes", type=PREFIX, multiple=True, required=True,
              help="Prefix to score (repeatable)")
@click.option("--est", "est_values", type=FLOAT_LIST, default=",".join(str(v) for v in SweepGrid.ELBOW_SLOPE_THRESHOLDS),
              show_default=True, help="Elbow slope thresholds, comma-separated")
@click.option("--shift", "shift_values", type=INT_LIST, default=",".join(str(v) for v in SweepGrid.TIME_SHIFTS),
              show_default=True, help="Time shifts (s), comma-separated")
@click.option("--common-cps", is_flag=True, help="Only collector peers with updates for every prefix")
@params_options
@jobs_option
@output_options
@params_from_options
def sweep(rtt_file, target, probes, bgp_file, collector_peers, prefixes, est_values, shift_values,
          common_cps, jobs, out_dir, params):
    """Correlation score of each prefix over the EST x time shift grid"""
    measurements = Ingest.read_rtt(rtt_file)
    updates = Ingest.read_bgp(bgp_file)

    cp_filter = selected(collector_peers)
    if common_cps:
        common = Aggregator.common_collector_peers(updates, prefixes)
        cp_filter = sorted(common & set(cp_filter)) if cp_filter else sorted(common)
        if not cp_filter:
            raise DataError("no collector peer recorded updates for every prefix")

    pairs = []
    for prefix in sorted(set(prefixes), key=lambda p: (int(p.network_address), p.prefixlen)):
        for probe_id, cp_id in CorrelationPipeline.select_pairs(
            measurements, updates, target, prefix, selected(probes), cp_filter
        ):
            pairs.append((probe_id, cp_id, target, prefix))
    if not pairs:
        raise DataError(f"no probe/CP pair has data for {target}")
    logger.info(f"Sweeping {len(est_values)}x{len(shift_values)} cells over {len(pairs)} pairs")

    surfaces = Aggregator.sweep(measurements, updates, pairs, est_values, shift_values, params, jobs)

    # CDFs at the resolved single-cell parameters
    reports = []
    for prefix in sorted(set(prefixes), key=lambda p: (int(p.network_address), p.prefixlen)):
        prefix_pairs = [(probe_id, cp_id) for probe_id, cp_id, _, p in pairs if p == prefix]
        reports.extend(CorrelationPipeline.run_pairs(measurements, updates, prefix_pairs, target, prefix, params, jobs))

    out = Path(out_dir)
    ReportWriter.write_surface(surfaces, out / OutputFiles.SURFACE)
    ReportWriter.write_cdf(reports, out / OutputFiles.CDF)

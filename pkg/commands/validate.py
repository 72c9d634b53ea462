import logging

import click

from dependencies import (
    EXISTING_FILE, PREFIX, bgp_options, cell_options, input_options, jobs_option, output_options,
    params_from_options, params_options, selected
)
from services.correlation_pipeline import CorrelationPipeline
from services.ingest import Ingest
from services.prefix_table import PrefixTable
from services.report_writer import ReportWriter
from services.traceroute_validator import TracerouteValidator
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


@click.command("validate")
@input_options
@bgp_options
@click.option("--prefix", type=PREFIX, required=True, help="Announced prefix covering the target")
@click.option("--traceroute", "traceroute_file", type=EXISTING_FILE, required=True, help="Traceroutes (NDJSON)")
@click.option("--prefix-table", "prefix_table_file", type=EXISTING_FILE, required=True,
              help="prefix,asn,collector_count CSV")
@click.option("--ixps", "ixps_file", type=EXISTING_FILE, help="IXP ASNs, one per line")
@click.option("--probe-as", type=click.IntRange(min=1), required=True, help="AS hosting the probes")
@cell_options
@params_options
@jobs_option
@output_options
@params_from_options
def validate(rtt_file, target, probes, bgp_file, collector_peers, prefix, traceroute_file, prefix_table_file,
             ixps_file, probe_as, jobs, out_dir, params):
    """Check matched updates against traceroute AS-path changes"""
    measurements = Ingest.read_rtt(rtt_file)
    updates = Ingest.read_bgp(bgp_file)
    traceroutes = Ingest.read_traceroute(traceroute_file)
    ixps = Ingest.read_ixp_list(ixps_file) if ixps_file else set()
    table = PrefixTable.from_rows(Ingest.read_prefix_table(prefix_table_file), ixps, probe_as)
    if ixps_file is None:
        logger.warning("No IXP list given; IXP hops stay in mapped AS paths")

    pairs = CorrelationPipeline.select_pairs(
        measurements, updates, target, prefix, selected(probes), selected(collector_peers)
    )
    if not pairs:
        raise DataError(f"no probe/CP pair has data for {target} and {prefix}")
    reports = CorrelationPipeline.run_pairs(measurements, updates, pairs, target, prefix, params, jobs)

    validations = [
        TracerouteValidator.validate_run(report, traceroutes, table, params.time_shift)
        for report in reports
    ]
    logger.info(f"Validated {len(validations)} pairs against {len(traceroutes)} traceroutes")
    ReportWriter.write_validation(validations, out_dir)

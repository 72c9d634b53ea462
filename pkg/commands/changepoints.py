import logging
from pathlib import Path

import click

from dependencies import cell_options, input_options, output_options, params_from_options, params_options
from services.changepoint_detector import ChangepointDetector
from services.correlation_pipeline import CorrelationPipeline
from services.ingest import Ingest
from services.report_writer import ReportWriter
from utils.constants import OutputFiles

logger = logging.getLogger(__name__)


@click.command("changepoints")
@input_options
@click.option("--emit-elbow", is_flag=True, help="Also write the penalty/changepoint-count curve")
@cell_options
@params_options
@output_options
@params_from_options
def changepoints(rtt_file, target, probes, emit_elbow, out_dir, params):
    """RTT changepoints of each probe's series toward the target"""
    measurements = Ingest.read_rtt(rtt_file)
    probe_ids = sorted(set(probes)) if probes else sorted({m.probe_id for m in measurements if m.target == target})

    detector = ChangepointDetector()
    changepoint_rows, elbow_rows = [], []
    for probe_id in probe_ids:
        own = Ingest.clip_window(
            [m for m in measurements if m.probe_id == probe_id and m.target == target], params.time_window
        )
        samples = CorrelationPipeline.preprocess_rtt(own, expected_ip=target)
        samples = CorrelationPipeline.time_align(samples, params.time_shift)
        found, trace = detector.detect(samples, params)
        logger.info(f"{probe_id}: {len(found)} changepoints in {len(samples)} samples")
        changepoint_rows.extend(ReportWriter.changepoint_rows(probe_id, str(target), found))
        elbow_rows.extend(ReportWriter.elbow_rows(probe_id, str(target), trace))

    out = Path(out_dir)
    ReportWriter.write_changepoints(changepoint_rows, out / OutputFiles.CHANGEPOINTS)
    if emit_elbow:
        ReportWriter.write_elbow(elbow_rows, out / OutputFiles.ELBOW)

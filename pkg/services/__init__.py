"""
Services package - contains the analysis stages and report writers
"""
from services.ingest import Ingest
from services.changepoint_detector import ChangepointDetector, pelt, optimal_partitioning, elbow_select
from services.correlation_pipeline import CorrelationPipeline
from services.aggregator import Aggregator, EmpiricalCdf
from services.prefix_table import PrefixTable
from services.traceroute_validator import TracerouteValidator
from services.scenario_generator import ScenarioGenerator
from services.report_writer import ReportWriter

__all__ = [
    'Ingest',
    'ChangepointDetector',
    'pelt',
    'optimal_partitioning',
    'elbow_select',
    'CorrelationPipeline',
    'Aggregator',
    'EmpiricalCdf',
    'PrefixTable',
    'TracerouteValidator',
    'ScenarioGenerator',
    'ReportWriter'
]

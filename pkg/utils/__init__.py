"""
Utils package - contains utilities, constants and errors
"""
from utils.constants import (
    ExitCode,
    EntryStatus,
    UNKNOWN_ASN,
    NULL_HOP,
    SweepGrid,
    MeasurementDefaults,
    PenaltySchedule,
    PRIVATE_NETWORKS,
    OutputFiles,
    ScenarioFiles
)
from utils.exceptions import AnalysisError, IngestError, ParamsError, ScenarioError, DataError

__all__ = [
    'ExitCode',
    'EntryStatus',
    'UNKNOWN_ASN',
    'NULL_HOP',
    'SweepGrid',
    'MeasurementDefaults',
    'PenaltySchedule',
    'PRIVATE_NETWORKS',
    'OutputFiles',
    'ScenarioFiles',
    'AnalysisError',
    'IngestError',
    'ParamsError',
    'ScenarioError',
    'DataError'
]

"""
Schemas package - contains all Pydantic models for measurements and reports
"""
from schemas.measurements import RttMeasurement, RttSample, TracerouteMeasurement, Timestamp
from schemas.bgp import BgpUpdate, AsSequence, Quadruple, as_path_equal
from schemas.changepoints import Changepoint, Segmentation, ElbowRow, ElbowTrace
from schemas.params import Params
from schemas.reports import (
    MatchEntry, MatchReport, ValidationEntry, ValidationReport,
    ScoreSurface, EquivalenceClassing, TimelineRow
)
from schemas.scenario import Scenario, ScenarioEvent, GroundTruth, CorrelatedUpdate

__all__ = [
    'RttMeasurement',
    'RttSample',
    'TracerouteMeasurement',
    'Timestamp',
    'BgpUpdate',
    'AsSequence',
    'Quadruple',
    'as_path_equal',
    'Changepoint',
    'Segmentation',
    'ElbowRow',
    'ElbowTrace',
    'Params',
    'MatchEntry',
    'MatchReport',
    'ValidationEntry',
    'ValidationReport',
    'ScoreSurface',
    'EquivalenceClassing',
    'TimelineRow',
    'Scenario',
    'ScenarioEvent',
    'GroundTruth',
    'CorrelatedUpdate'
]

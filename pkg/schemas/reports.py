from ipaddress import IPv4Address, IPv4Network
from typing import Dict, List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator
from schemas.bgp import BgpUpdate, Quadruple
from schemas.changepoints import Changepoint
from schemas.params import Params


class MatchEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    update: BgpUpdate
    matched: bool
    matched_changepoints: List[Changepoint] = []


class MatchReport(BaseModel):
    """Matching outcome for one (probe, CP, target, prefix)"""

    model_config = ConfigDict(frozen=True)

    probe_id: str
    cp_id: str
    target: IPv4Address
    prefix: IPv4Network
    entries: List[MatchEntry] = []
    # Updates dropped by preprocessing (kept for validation)
    discarded: List[BgpUpdate] = []
    correlation_factor: float = Field(ge=0, le=1)
    insufficient_data: bool = False
    changepoint_count: int = 0
    params: Optional[Params] = None

    @model_validator(mode="after")
    def factor_matches_entries(self):
        if self.entries:
            expected = self.matched_count / len(self.entries)
            if abs(expected - self.correlation_factor) > 1e-12:
                raise ValueError("correlation_factor does not match entries")
        elif self.correlation_factor != 0:
            raise ValueError("empty report must have correlation_factor 0")
        return self

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.probe_id, self.cp_id)

    @property
    def matched_count(self) -> int:
        return sum(1 for entry in self.entries if entry.matched)

    def all_updates(self) -> List[Tuple[BgpUpdate, bool]]:
        """Every update of the pair as (update, valid), in timestamp order"""
        labeled = [(entry.update, True) for entry in self.entries]
        labeled += [(update, False) for update in self.discarded]
        return sorted(labeled, key=lambda item: item[0].timestamp)


class ValidationEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    quadruple: Quadruple
    in_q_plus: bool
    validated: bool


class ValidationReport(BaseModel):
    """Traceroute validation of one probe/CP pair"""

    model_config = ConfigDict(frozen=True)

    probe_id: str
    cp_id: str
    entries: List[ValidationEntry] = []
    bgp_rtt_correlation: float = Field(ge=0, le=1)
    # None when the denominator (|Q+| or |Q-|) is zero
    bgp_traceroute_correlation: Optional[float] = Field(default=None, ge=0, le=1)
    bgp_traceroute_false_negative: Optional[float] = Field(default=None, ge=0, le=1)
    q_plus_size: int = Field(ge=0)
    q_minus_size: int = Field(ge=0)

    @model_validator(mode="after")
    def sizes_cover_entries(self):
        if self.q_plus_size + self.q_minus_size != len(self.entries):
            raise ValueError("q_plus_size + q_minus_size must equal the quadruple count")
        return self

    @property
    def pair(self) -> Tuple[str, str]:
        return (self.probe_id, self.cp_id)


class ScoreSurface(BaseModel):
    """Correlation score per (elbow slope threshold, time shift) cell"""

    target: IPv4Address
    prefix: IPv4Network
    cells: Dict[Tuple[float, int], float] = {}

    @model_validator(mode="after")
    def scores_in_range(self):
        for cell, score in self.cells.items():
            if not 0 <= score <= 1:
                raise ValueError(f"score {score} of cell {cell} outside [0, 1]")
        return self

    def score(self, est: float, shift: int) -> float:
        return self.cells[(est, shift)]


class EquivalenceClassing(BaseModel):
    members: List[str]
    classes: List[List[str]]
    # similarity[i][j] = Jaccard(members[i], members[j])
    similarity: List[List[float]]
    threshold: float
    window_start: Optional[int] = None


class TimelineRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    timestamp: int
    ordinal: int
    probe_id: str
    cp_id: str
    matched: bool

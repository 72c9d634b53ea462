from ipaddress import IPv4Address, IPv4Network
from typing import List, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator
from schemas.bgp import Asn
from utils.constants import MeasurementDefaults


class ScenarioEvent(BaseModel):
    """A route change for the target prefix and its data-plane effect"""

    model_config = ConfigDict(frozen=True)

    timestamp: int = Field(ge=0)
    new_as_path: Tuple[Asn, ...]
    rtt_mean_delta: float
    # Data plane switches at timestamp + propagation_lag (may be negative)
    propagation_lag: int = 0


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 0
    start: int = Field(default=1325376000, ge=0)
    duration: int = Field(gt=0)
    rtt_period: int = Field(default=MeasurementDefaults.RTT_PERIOD, gt=0)
    traceroute_period: int = Field(default=MeasurementDefaults.TRACEROUTE_PERIOD, gt=0)
    events: List[ScenarioEvent] = []
    noise_sigma: float = Field(default=0.5, ge=0)
    base_rtt: float = Field(default=30.0, gt=0)
    decoy_prefixes: int = Field(default=3, ge=0)
    decoy_rate: float = Field(default=10800.0, gt=0)
    probes: int = Field(default=1, ge=1)
    collector_peers: int = Field(default=1, ge=1)
    target: IPv4Address = IPv4Address("193.0.14.129")
    prefix: IPv4Network = IPv4Network("193.0.14.0/24")
    probe_as: Asn = 3333
    initial_as_path: Tuple[Asn, ...] = (1103, 25152)
    loss_rate: float = Field(default=0.0, ge=0, lt=1)
    null_hop_rate: float = Field(default=0.0, ge=0, lt=1)
    ixp_asns: List[Asn] = [1200]

    @model_validator(mode="after")
    def check_events(self):
        for previous, current in zip(self.events, self.events[1:]):
            if current.timestamp <= previous.timestamp:
                raise ValueError("event timestamps must be strictly increasing")
        end = self.start + self.duration
        for event in self.events:
            if not self.start <= event.timestamp <= end:
                raise ValueError(f"event at {event.timestamp} outside the scenario span")
            if not event.new_as_path:
                raise ValueError("events must announce a non-empty AS path")
        if self.target not in self.prefix:
            raise ValueError(f"target {self.target} is not inside prefix {self.prefix}")
        return self

    @property
    def end(self) -> int:
        return self.start + self.duration


class CorrelatedUpdate(BaseModel):
    model_config = ConfigDict(frozen=True)

    cp_id: str
    prefix: IPv4Network
    timestamp: int


class GroundTruth(BaseModel):
    """What the generator injected"""

    target: IPv4Address
    prefix: IPv4Network
    # AS hosting the probes; the value validation needs as --probe-as
    probe_as: Asn
    decoy_prefixes: List[IPv4Network]
    probes: List[str]
    collector_peers: List[str]
    correlated_updates: List[CorrelatedUpdate]
    # Instants at which the data plane (RTT mean, traceroute path) switched
    change_instants: List[int]

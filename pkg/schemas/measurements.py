from ipaddress import IPv4Address
from typing import Annotated, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator
from utils.constants import NULL_HOP

# Unix epoch seconds, UTC
Timestamp = Annotated[int, Field(ge=0)]

RttValue = Annotated[float, Field(gt=0, allow_inf_nan=False)]


class RttMeasurement(BaseModel):
    """One periodic ping result (up to 3 RTT values, in ms)"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    probe_id: str = Field(alias="probe")
    target: IPv4Address
    timestamp: Timestamp = Field(alias="ts")
    rtts: Tuple[RttValue, ...] = Field(max_length=3)
    responded_ip: Optional[IPv4Address] = Field(default=None, alias="ip")


class RttSample(BaseModel):
    """Minimum RTT of a retained measurement, possibly time-shifted"""

    model_config = ConfigDict(frozen=True)

    timestamp: Timestamp
    value: RttValue


class TracerouteMeasurement(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    probe_id: str = Field(alias="probe")
    target: IPv4Address
    timestamp: Timestamp = Field(alias="ts")
    # None marks a null hop
    hops: Tuple[Optional[IPv4Address], ...] = ()

    @field_validator("hops", mode="before")
    @classmethod
    def parse_null_hops(cls, value):
        if isinstance(value, (list, tuple)):
            return tuple(None if hop == NULL_HOP else hop for hop in value)
        return value

    @field_serializer("hops")
    def serialize_hops(self, hops):
        return [NULL_HOP if hop is None else str(hop) for hop in hops]

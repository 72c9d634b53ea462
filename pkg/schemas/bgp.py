from ipaddress import IPv4Network
from typing import Annotated, Sequence, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from schemas.measurements import Timestamp

Asn = Annotated[int, Field(gt=0)]


def as_path_equal(a: Sequence[int], b: Sequence[int]) -> bool:
    """Element-wise AS-path comparison; two withdrawals compare equal"""
    return tuple(a) == tuple(b)


class BgpUpdate(BaseModel):
    """One routing change seen by a collector peer (empty as_path = withdrawal)"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    cp_id: str = Field(alias="cp")
    prefix: IPv4Network
    timestamp: Timestamp = Field(alias="ts")
    as_path: Tuple[Asn, ...] = ()

    @property
    def is_withdrawal(self) -> bool:
        return len(self.as_path) == 0


class AsSequence(BaseModel):
    """AS-level traceroute path; 0 marks an unknown AS"""

    model_config = ConfigDict(frozen=True)

    asns: Tuple[Annotated[int, Field(ge=0)], ...] = ()

    @field_validator("asns")
    @classmethod
    def no_consecutive_duplicates(cls, asns):
        for previous, current in zip(asns, asns[1:]):
            if previous == current:
                raise ValueError(f"consecutive duplicate AS {current}")
        return asns


class Quadruple(BaseModel):
    """(m_{i-1}, u_{i-1}, m_i, u_i) around a valid update u_i"""

    model_config = ConfigDict(frozen=True)

    m_prev: AsSequence
    u_prev: BgpUpdate
    m_cur: AsSequence
    u_cur: BgpUpdate

    @model_validator(mode="after")
    def updates_ordered(self):
        if self.u_prev.timestamp >= self.u_cur.timestamp:
            raise ValueError("u_prev must precede u_cur")
        return self

    @property
    def path_changed(self) -> bool:
        return not as_path_equal(self.u_prev.as_path, self.u_cur.as_path)

    @property
    def traceroute_changed(self) -> bool:
        return self.m_prev.asns != self.m_cur.asns

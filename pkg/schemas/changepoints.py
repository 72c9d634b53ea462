from typing import List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Changepoint(BaseModel):
    """Start of a new RTT regime, stamped with its first sample's timestamp"""

    model_config = ConfigDict(frozen=True)

    timestamp: int
    index: int = Field(ge=1)
    mean_before: float
    mean_after: float

    @model_validator(mode="after")
    def means_differ(self):
        if self.mean_before == self.mean_after:
            raise ValueError("changepoint must separate different means")
        return self


class Segmentation(BaseModel):
    model_config = ConfigDict(frozen=True)

    changepoint_indices: Tuple[int, ...] = ()
    total_cost: float
    penalty: float = Field(ge=0)

    @field_validator("changepoint_indices")
    @classmethod
    def strictly_increasing(cls, indices):
        for previous, current in zip(indices, indices[1:]):
            if current <= previous:
                raise ValueError("changepoint indices must be strictly increasing")
        return indices

    @property
    def changepoint_count(self) -> int:
        return len(self.changepoint_indices)


class ElbowRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    iteration: int = Field(ge=0)
    penalty: float
    changepoint_count: int = Field(ge=0)
    # None while the count did not drop (slope treated as +inf)
    difference_quotient: Optional[float] = None


class ElbowTrace(BaseModel):
    """Penalty / changepoint-count curve walked by the elbow method"""

    model_config = ConfigDict(frozen=True)

    rows: List[ElbowRow]
    selected_index: int
    converged: bool

    @model_validator(mode="after")
    def curve_is_monotone(self):
        for previous, current in zip(self.rows, self.rows[1:]):
            if current.penalty <= previous.penalty:
                raise ValueError("penalties must be strictly increasing")
            if current.changepoint_count > previous.changepoint_count:
                raise ValueError("changepoint counts must be nonincreasing")
        if not 0 <= self.selected_index < len(self.rows):
            raise ValueError("selected_index out of range")
        return self

    @property
    def selected_penalty(self) -> float:
        return self.rows[self.selected_index].penalty

from typing import Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, model_validator
from config import settings


class Params(BaseModel):
    """Tunable parameters of the correlation methodology"""

    model_config = ConfigDict(frozen=True)

    # Inclusive (start, end); None means unbounded
    time_window: Optional[Tuple[int, int]] = None
    time_shift: int = settings.TIME_SHIFT
    elbow_slope_threshold: float = Field(default=settings.ELBOW_SLOPE_THRESHOLD, gt=0)
    tolerance_window: int = Field(default=settings.TOLERANCE_WINDOW, gt=0)
    penalty_base: float = Field(default=settings.PENALTY_BASE, gt=1)
    penalty_offset: float = settings.PENALTY_OFFSET
    initial_penalty: float = Field(default=settings.INITIAL_PENALTY, gt=0)
    rtt_period: int = Field(default=settings.RTT_PERIOD, gt=0)
    max_elbow_iterations: int = Field(default=settings.MAX_ELBOW_ITERATIONS, ge=1)

    @model_validator(mode="after")
    def check_consistency(self):
        if self.tolerance_window <= self.rtt_period:
            raise ValueError(
                f"tolerance_window ({self.tolerance_window}s) must be larger than "
                f"rtt_period ({self.rtt_period}s)"
            )
        if self.penalty(1) <= self.initial_penalty:
            raise ValueError(
                f"first scheduled penalty {self.penalty(1)} must exceed "
                f"initial_penalty {self.initial_penalty}"
            )
        if self.time_window is not None and self.time_window[0] > self.time_window[1]:
            raise ValueError("time_window start is after its end")
        return self

    def penalty(self, iteration: int) -> float:
        """p_0 = initial_penalty, p_i = base**i + offset for i >= 1"""
        if iteration == 0:
            return self.initial_penalty
        return self.penalty_base ** iteration + self.penalty_offset

"""Real numbers stored as (sign, log|x|)."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SignedLog:
    sign: int
    log_abs: float

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_abs", -math.inf)
        elif math.isnan(self.log_abs) or self.log_abs == -math.inf:
            raise ValueError("nonzero SignedLog needs a finite or +inf log magnitude")

    @classmethod
    def from_float(cls, x: float) -> "SignedLog":
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def one(cls) -> "SignedLog":
        return cls(1, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0, -math.inf)
        return SignedLog(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero SignedLog")
        if self.sign == 0:
            return self
        return SignedLog(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.log_abs)

    def __abs__(self) -> "SignedLog":
        return SignedLog(abs(self.sign), self.log_abs)

    def to_float(self) -> float:
        """Materialize the value; may overflow to +-inf or underflow to 0."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf

"""Scaling-regime parameters shared by the codebook, channel and exponent modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

_CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class ScalingParams:
    """Knobs of one operating point of the storage system.

    M          molecules per codeword (stored strands)
    inner_size number of distinct molecules available (the inner codebook);
               must exceed M so that the derived alpha = log(inner_size)/log(M)
               is above 1
    N          number of sequencing reads
    J          number of messages (optional; arbitrary-precision int allowed)
    R0         outer rate as a fraction of capacity, in (0, 1) (optional)
    p_seq      per-read sequencing error probability
    beta, R_in optional molecule-length and inner-rate parameters; when given
               they must satisfy beta * R_in == alpha
    """

    M: int
    inner_size: int
    N: int
    J: int | None = None
    R0: float | None = None
    p_seq: float = 0.0
    beta: float | None = None
    R_in: float | None = None

    def __post_init__(self):
        if self.M < 2:
            raise DomainError("M must be at least 2")
        if self.inner_size <= self.M:
            raise DomainError(
                "inner_size must exceed M (alpha > 1); got "
                f"inner_size={self.inner_size}, M={self.M}"
            )
        if self.N < 1:
            raise DomainError("N must be a positive integer")
        if self.J is not None and self.J < 1:
            raise DomainError("J must be a positive integer")
        if self.R0 is not None and not 0.0 < self.R0 < 1.0:
            raise DomainError("R0 must lie in (0, 1)")
        if not 0.0 <= self.p_seq < 1.0:
            raise DomainError("p_seq must lie in [0, 1)")
        if (self.beta is None) != (self.R_in is None):
            raise DomainError("beta and R_in must be supplied together")
        if self.beta is not None:
            if self.beta <= 0 or self.R_in <= 0:
                raise DomainError("beta and R_in must be positive")
            if abs(self.beta * self.R_in - self.alpha) > _CONSISTENCY_TOL:
                raise DomainError(
                    f"beta * R_in = {self.beta * self.R_in} does not match "
                    f"alpha = {self.alpha}"
                )

    @property
    def alpha(self) -> float:
        """Inner codebook size expressed as an exponent of M."""
        return math.log(self.inner_size) / math.log(self.M)

    @property
    def coverage(self) -> float:
        """Reads per stored molecule, N / M."""
        return self.N / self.M

    @property
    def log_messages(self) -> float:
        """Natural log of the number of messages."""
        if self.J is not None:
            return math.log(self.J)
        if self.R0 is not None:
            return (self.alpha - 1.0) * self.R0 * self.M * math.log(self.M)
        raise DomainError("neither J nor R0 was supplied")

    @property
    def r0(self) -> float:
        """Outer rate fraction; derived from J when not given explicitly."""
        if self.R0 is not None:
            return self.R0
        if self.J is not None:
            return self.log_messages / ((self.alpha - 1.0) * self.M * math.log(self.M))
        raise DomainError("neither J nor R0 was supplied")

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "inner_size": self.inner_size,
            "N": self.N,
            "J": self.J,
            "R0": self.R0,
            "p_seq": self.p_seq,
            "beta": self.beta,
            "R_in": self.R_in,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingParams":
        return cls(
            M=int(d["M"]),
            inner_size=int(d["inner_size"]),
            N=int(d["N"]),
            J=None if d.get("J") is None else int(d["J"]),
            R0=d.get("R0"),
            p_seq=d.get("p_seq", 0.0),
            beta=d.get("beta"),
            R_in=d.get("R_in"),
        )

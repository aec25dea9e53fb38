"""Complex-multiplication budgets of the forward, backward and exhaustive decoders."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ComplexityModel:
    M: int
    P: int
    N: int
    T: int

    def __post_init__(self):
        if min(self.M, self.P, self.N, self.T) < 1 or self.T >= self.N:
            raise ValueError(f"need positive M, P, N, T with T < N, got {self}")

    @property
    def n_f(self) -> int:
        """Per-branch cost of the forward pass: P-tap filter plus two products."""
        return self.P + 2

    @property
    def n_b(self) -> int:
        return self.P**3 + 2 * self.P**2 + 5 * self.P

    @property
    def _branches(self) -> int:
        return 2 ** (self.M * self.P) * (self.N - self.T)

    @property
    def c_f(self) -> int:
        return self.n_f * self._branches

    @property
    def c_b(self) -> int:
        return self.n_b * self._branches

    @property
    def total(self) -> int:
        return self.c_f + self.c_b

    @property
    def conventional(self) -> int:
        return self.P * self._branches

    @property
    def exhaustive(self) -> int:
        return (self.n_f + self.n_b) * 2 ** (self.M * self.N + 1)


def complexity_model(M: int, P: int, N: int, T: int) -> ComplexityModel:
    return ComplexityModel(M=M, P=P, N=N, T=T)

"""Difficulty levels and the probability distribution passed between policy heads."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable


class Difficulty(IntEnum):
    """Ordered question difficulty. Comparisons follow the int value."""

    EASY = 0
    MEDIUM = 1
    HARD = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Difficulty":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown difficulty label: {label!r}") from None


DIFFICULTIES = (Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD)

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class DifficultyDistribution:
    """Probability vector over (Easy, Medium, Hard).

    Entries are non-negative and sum to 1 within 1e-9; `validate()` enforces it.
    """

    p: tuple[float, float, float]

    def __getitem__(self, d: Difficulty) -> float:
        return self.p[int(d)]

    def validate(self) -> "DifficultyDistribution":
        if any(v < 0.0 for v in self.p):
            raise ValueError(f"negative probability in {self.p}")
        total = sum(self.p)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"distribution sums to {total}, not 1")
        return self

    @classmethod
    def from_weights(cls, weights: Iterable[float]) -> "DifficultyDistribution":
        """Normalize non-negative weights into a distribution."""
        w = tuple(float(x) for x in weights)
        if len(w) != 3:
            raise ValueError("expected exactly three weights")
        total = sum(w)
        if total <= 0.0:
            raise ValueError("weights must have positive mass")
        return cls((w[0] / total, w[1] / total, w[2] / total))

    @classmethod
    def point_mass(cls, d: Difficulty) -> "DifficultyDistribution":
        p = [0.0, 0.0, 0.0]
        p[int(d)] = 1.0
        return cls(tuple(p))

    def sample(self, draw: float) -> Difficulty:
        """Inverse-CDF sample over the fixed (Easy, Medium, Hard) order.

        `draw` is a uniform [0, 1) variate. Cumulative rounding slack falls to
        the last difficulty.
        """
        cum = 0.0
        for d in DIFFICULTIES:
            cum += self.p[int(d)]
            if draw < cum:
                return d
        return Difficulty.HARD

    def as_dict(self) -> dict[str, float]:
        return {d.label: self.p[int(d)] for d in DIFFICULTIES}

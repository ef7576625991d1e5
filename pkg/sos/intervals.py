"""Finite unions of closed intervals inside [-1, 1]."""

from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

Interval = Tuple[float, float]

BOX: Interval = (-1.0, 1.0)


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint closed intervals [a_i, b_i] with -1 <= a_i <= b_i <= 1."""

    intervals: Tuple[Interval, ...] = ()

    def __post_init__(self) -> None:
        cleaned: List[Interval] = []
        for a, b in sorted((float(a), float(b)) for a, b in self.intervals):
            if a > b:
                raise ValueError(f"interval [{a}, {b}] is reversed")
            if a < -1.0 or b > 1.0:
                raise ValueError(f"interval [{a}, {b}] leaves [-1, 1]")
            if cleaned and a <= cleaned[-1][1]:
                cleaned[-1] = (cleaned[-1][0], max(cleaned[-1][1], b))
            else:
                cleaned.append((a, b))
        object.__setattr__(self, "intervals", tuple(cleaned))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "IntervalSet":
        return cls(tuple((float(p[0]), float(p[1])) for p in pairs))

    @classmethod
    def single(cls, a: float, b: float) -> "IntervalSet":
        return cls(((a, b),))

    @classmethod
    def full(cls) -> "IntervalSet":
        return cls((BOX,))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def is_full(self) -> bool:
        return self.intervals == (BOX,)

    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def contains(self, z: float) -> bool:
        return any(a <= z <= b for a, b in self.intervals)

    def indicator(self, z: Union[float, np.ndarray]) -> np.ndarray:
        zz = np.asarray(z, dtype=float)
        out = np.zeros(zz.shape, dtype=float)
        for a, b in self.intervals:
            out[(zz >= a) & (zz <= b)] = 1.0
        return out

    def to_list(self) -> List[List[float]]:
        return [[a, b] for a, b in self.intervals]

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        return " U ".join(f"[{a:g}, {b:g}]" for a, b in self.intervals)


def complement(target: IntervalSet) -> IntervalSet:
    """Closure of [-1, 1] minus the interiors of ``target``.

    Degenerate pieces (single points left between adjacent intervals) are dropped.
    """
    pieces: List[Interval] = []
    cursor = -1.0
    for a, b in target.intervals:
        if a > cursor:
            pieces.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < 1.0:
        pieces.append((cursor, 1.0))
    return IntervalSet(tuple(pieces))

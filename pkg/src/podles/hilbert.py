"""Truncated Hilbert space H(L_max): two copies of the sum of V_l, l <= L_max.

Basis order is frozen: every ``+`` vector precedes every ``-`` vector; within
a copy, ascending l, then ascending m.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .qcore import HalfInt, check_pair, is_spin_label

PLUS = +1
MINUS = -1


@dataclass(frozen=True, order=True)
class BasisIndex:
    sign: int
    l: HalfInt
    m: HalfInt

    def __post_init__(self):
        if self.sign not in (PLUS, MINUS):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if not is_spin_label(self.l):
            raise ValueError(f"l must be a positive half-odd-integer, got {self.l}")
        check_pair(self.l, self.m)

    def __str__(self) -> str:
        return f"|{self.l},{self.m}>{'+' if self.sign > 0 else '-'}"


@dataclass(frozen=True)
class HilbertSpec:
    """The truncated space, fixed by its top level ``l_max``."""

    l_max: HalfInt

    def __post_init__(self):
        if not is_spin_label(self.l_max):
            raise ValueError(f"l_max must be a positive half-odd-integer, got {self.l_max}")

    @classmethod
    def from_twice(cls, twice: int) -> HilbertSpec:
        return cls(HalfInt(twice))

    @property
    def levels(self) -> list[HalfInt]:
        return [HalfInt(t) for t in range(1, self.l_max.twice + 1, 2)]

    @property
    def half_dim(self) -> int:
        return sum(t + 1 for t in range(1, self.l_max.twice + 1, 2))

    @property
    def dim(self) -> int:
        return 2 * self.half_dim

    @cached_property
    def basis(self) -> tuple[BasisIndex, ...]:
        out = []
        for sign in (PLUS, MINUS):
            for l in self.levels:
                for mt in range(-l.twice, l.twice + 1, 2):
                    out.append(BasisIndex(sign, l, HalfInt(mt)))
        return tuple(out)

    @cached_property
    def _ordinals(self) -> dict[BasisIndex, int]:
        return {b: i for i, b in enumerate(self.basis)}

    @cached_property
    def level_twice(self) -> np.ndarray:
        """Doubled l of every basis vector, in basis order."""
        return np.array([b.l.twice for b in self.basis])

    @cached_property
    def m_twice(self) -> np.ndarray:
        return np.array([b.m.twice for b in self.basis])

    @cached_property
    def signs(self) -> np.ndarray:
        return np.array([b.sign for b in self.basis])

    def __iter__(self) -> Iterator[BasisIndex]:
        return iter(self.basis)

    def contains(self, idx: BasisIndex) -> bool:
        return idx in self._ordinals

    def ordinal(self, idx: BasisIndex) -> int:
        try:
            return self._ordinals[idx]
        except KeyError:
            raise IndexError(f"{idx} is not in H(L_max={self.l_max})") from None

    def index_at(self, ordinal: int) -> BasisIndex:
        if not 0 <= ordinal < self.dim:
            raise IndexError(f"ordinal {ordinal} out of range [0, {self.dim})")
        return self.basis[ordinal]

    def level_mask(self, l_set: Iterable[HalfInt]) -> np.ndarray:
        wanted = {l.twice for l in l_set}
        bad = wanted - {l.twice for l in self.levels}
        if bad:
            raise ValueError(f"levels {sorted(bad)} (doubled) not in this space")
        return np.isin(self.level_twice, sorted(wanted))

    def levels_up_to(self, l_top_twice: int) -> list[HalfInt]:
        return [l for l in self.levels if l.twice <= l_top_twice]


def grading(spec: HilbertSpec):
    from .operators import LinearOperator

    return LinearOperator(spec, np.diag(spec.signs.astype(complex)))


def level_projector(spec: HilbertSpec, l_set: Iterable[HalfInt]):
    from .operators import LinearOperator

    return LinearOperator(spec, np.diag(spec.level_mask(l_set).astype(complex)))


def Lq_operator(spec: HilbertSpec, q: float):
    """Diagonal operator with entry q^l on every vector of level l."""
    from .operators import LinearOperator

    return LinearOperator(spec, np.diag((q ** (spec.level_twice / 2)).astype(complex)))

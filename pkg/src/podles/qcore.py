"""Half-integer labels and q-numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-integer stored as its doubled value, so ``HalfInt(3)`` is 3/2."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, int) or isinstance(self.twice, bool):
            raise TypeError(f"twice must be an int, got {self.twice!r}")

    @property
    def value(self) -> float:
        return self.twice / 2

    def __float__(self) -> float:
        return self.twice / 2

    def __neg__(self) -> HalfInt:
        return HalfInt(-self.twice)

    def __add__(self, other: HalfInt) -> HalfInt:
        return HalfInt(self.twice + other.twice)

    def __sub__(self, other: HalfInt) -> HalfInt:
        return HalfInt(self.twice - other.twice)

    def __str__(self) -> str:
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"


def half_int(twice: int) -> HalfInt:
    return HalfInt(twice)


def parse_half(text: str) -> HalfInt:
    """Parse ``"21/2"``, ``"10.5"`` or ``"3"`` into a HalfInt.

    Raises ValueError if the value is not a multiple of 1/2.
    """
    text = text.strip()
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a half-integer: {text!r}") from exc
    doubled = frac * 2
    if doubled.denominator != 1:
        raise ValueError(f"not a half-integer: {text!r}")
    return HalfInt(int(doubled))


def is_spin_label(l: HalfInt) -> bool:
    """True for l in {1/2, 3/2, ...}."""
    return l.twice >= 1 and l.twice % 2 == 1


def valid_pair(l: HalfInt, m: HalfInt) -> bool:
    return abs(m.twice) <= l.twice and (m.twice - l.twice) % 2 == 0


def check_pair(l: HalfInt, m: HalfInt) -> None:
    if abs(m.twice) > l.twice:
        raise ValueError(f"|m| > l for (l={l}, m={m})")
    if (m.twice - l.twice) % 2:
        raise ValueError(f"parity mismatch for (l={l}, m={m})")


def check_q(q: float, *, allow_one: bool = False) -> float:
    q = float(q)
    upper_ok = q <= 1.0 if allow_one else q < 1.0
    if not (q > 0.0 and upper_ok):
        bound = "0 < q <= 1" if allow_one else "0 < q < 1"
        raise ValueError(f"q must satisfy {bound}, got {q}")
    return q


def q_number(n: float, q: float) -> float:
    """The q-number [n] = (q^n - q^-n) / (q - q^-1); equals n at q = 1."""
    if q == 1.0:
        return float(n)
    return (q**n - q ** (-n)) / (q - 1.0 / q)


def q_power_half(twice: int, q: float) -> float:
    """q raised to the half-integer twice/2."""
    return math.sqrt(q) ** twice

"""Concrete spectral data on H(L_max): pi = pi_+ (+) pi_-, the U_q(su(2))
representation rho, the real structure J and the Dirac operator D."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from . import algebra
from .algebra import A, ASTAR, B, AlgebraElement
from .hilbert import MINUS, PLUS, BasisIndex, HilbertSpec, grading
from .operators import AntilinearOperator, LinearOperator, residual_norm
from .qcore import HalfInt, check_q, q_number

GENERATORS = ("a", "a*", "b")
_LETTER = {"a": A, "a*": ASTAR, "b": B}
SYMMETRY_GENERATORS = ("k", "e", "f")

CALIBRATION_L_MAX = HalfInt(7)
CALIBRATION_TOL = 1e-9


def _sqrt0(x: float) -> float:
    # radicands vanish at the edges of V_l and may come out as -0.0 or -1e-17
    return math.sqrt(x) if x > 0 else 0.0


# -- pi_+ and pi_- ----------------------------------------------------------------


def half_matrices(spec: HilbertSpec, q: float, branch: int, paper_literal_index: bool = False):
    """pi_branch(a) and pi_branch(b) as matrices on one copy of H_h(L_max).

    The third term of pi(a) targets |l-1, m+1>; with ``paper_literal_index``
    it targets |l-1, m> instead, as printed.
    """
    if branch not in (PLUS, MINUS):
        raise ValueError("branch must be +1 or -1")
    n = spec.half_dim
    half = spec.basis[:n]
    pos = {(bi.l.twice, bi.m.twice): i for i, bi in enumerate(half)}
    pa = np.zeros((n, n))
    pb = np.zeros((n, n))
    qn = lambda x: q_number(x, q)  # noqa: E731

    def put(mat, lt, mt, col, value):
        row = pos.get((lt, mt))
        if row is not None:
            mat[row, col] += value

    for col, bi in enumerate(half):
        lt, mt = bi.l.twice, bi.m.twice
        l, m = lt / 2, mt / 2
        d_low, d_high = qn(2 * l), qn(2 * l + 2)
        put(pa, lt, mt + 2, col,
            branch * (1 + q * q) * q ** (m - 0.5) / (d_low * d_high) * _sqrt0(qn(l + m + 1) * qn(l - m)))
        put(pa, lt + 2, mt + 2, col,
            q ** (m - l - 0.5) / d_high * _sqrt0(qn(l + m + 1) * qn(l + m + 2)))
        put(pa, lt - 2, mt if paper_literal_index else mt + 2, col,
            -(q ** (m + l + 0.5)) / d_low * _sqrt0(qn(l - m) * qn(l - m - 1)))

        put(pb, lt, mt, col,
            branch / (d_low * d_high) * (qn(l - m + 1) * qn(l + m) - q * q * qn(l - m) * qn(l + m + 1)))
        put(pb, lt + 2, mt, col, -(q ** (m + 1)) / d_high * _sqrt0(qn(l - m + 1) * qn(l + m + 1)))
        put(pb, lt - 2, mt, col, -(q ** (m + 1)) / d_low * _sqrt0(qn(l - m) * qn(l + m)))
    return pa, pb


def _embed(spec: HilbertSpec, branch: int, mat: np.ndarray) -> LinearOperator:
    n = spec.half_dim
    full = np.zeros((spec.dim, spec.dim), dtype=complex)
    sl = slice(0, n) if branch == PLUS else slice(n, 2 * n)
    full[sl, sl] = mat
    return LinearOperator(spec, full)


def build_pi(spec: HilbertSpec, q: float, branch: int, paper_literal_index: bool = False):
    """(pi(a), pi(a*), pi(b)) for one branch, acting on the copy of H_h with
    gamma-eigenvalue ``branch`` and zero on the other copy."""
    pa, pb = half_matrices(spec, q, branch, paper_literal_index)
    op_a = _embed(spec, branch, pa)
    return op_a, op_a.H, _embed(spec, branch, pb)


# -- rho ----------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Candidate:
    """One reading of the conventions the construction does not print.

    coproduct: "A" is Delta(h) = h (x) k + k^-1 (x) h, "B" is h (x) k^-1 + k (x) h
        (h = e, f), with the matching antipode.
    e_lowers: whether rho(e) lowers m (otherwise it raises m).
    twist_twice: the ladder coefficients of e are multiplied by
        q^(twist * (m + m')) and those of f by q^(-twist * (m + m')),
        with twist = twist_twice / 2.
    """

    coproduct: str
    e_lowers: bool
    twist_twice: int

    @property
    def id(self) -> str:
        direction = "e-lowers" if self.e_lowers else "e-raises"
        return f"coproduct-{self.coproduct}/{direction}/twist{self.twist_twice:+d}"


DEFAULT_CANDIDATES: tuple[Candidate, ...] = tuple(
    Candidate(c, lowers, t) for c, lowers, t in itertools.product(("A", "B"), (True, False), (0, 1, -1))
)


@dataclass(frozen=True)
class ConventionChoice:
    coproduct: str
    antipode: str
    ladder: str
    t_modulus_power_twice: int
    equivariance_residual: float
    j_equivariance_residual: float
    candidate: Candidate = field(repr=False)

    @property
    def id(self) -> str:
        return self.candidate.id

    @property
    def residual(self) -> float:
        return max(self.equivariance_residual, self.j_equivariance_residual)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "coproduct": self.coproduct,
            "antipode": self.antipode,
            "ladder": self.ladder,
            "t_modulus_power": self.t_modulus_power_twice / 2,
            "equivariance_residual": self.equivariance_residual,
            "j_equivariance_residual": self.j_equivariance_residual,
        }


class CalibrationError(RuntimeError):
    pass


def _ladder(spec: HilbertSpec, q: float, raise_m: bool, twist_twice: int) -> np.ndarray:
    n = spec.dim
    out = np.zeros((n, n))
    for col, bi in enumerate(spec.basis):
        l, m = bi.l.twice / 2, bi.m.twice / 2
        step = 1 if raise_m else -1
        target = BasisIndex.__new__(BasisIndex)
        mt = bi.m.twice + 2 * step
        if abs(mt) > bi.l.twice:
            continue
        object.__setattr__(target, "sign", bi.sign)
        object.__setattr__(target, "l", bi.l)
        object.__setattr__(target, "m", HalfInt(mt))
        if raise_m:
            coeff = _sqrt0(q_number(l - m, q) * q_number(l + m + 1, q))
        else:
            coeff = _sqrt0(q_number(l + m, q) * q_number(l - m + 1, q))
        coeff *= q ** (twist_twice / 2 * (m + mt / 2))
        out[spec.ordinal(target), col] = coeff
    return out


def build_rho(spec: HilbertSpec, q: float, convention: ConventionChoice | Candidate) -> dict[str, LinearOperator]:
    """rho(k), rho(k^-1), rho(e), rho(f): block diagonal over levels, same on both copies."""
    cand = convention.candidate if isinstance(convention, ConventionChoice) else convention
    weights = q ** (spec.m_twice / 2)
    k = np.diag(weights)
    k_inv = np.diag(1 / weights)
    e = _ladder(spec, q, raise_m=not cand.e_lowers, twist_twice=cand.twist_twice)
    f = _ladder(spec, q, raise_m=cand.e_lowers, twist_twice=-cand.twist_twice)
    return {
        "k": LinearOperator(spec, k),
        "k_inv": LinearOperator(spec, k_inv),
        "e": LinearOperator(spec, e),
        "f": LinearOperator(spec, f),
    }


def antipode(rho: Mapping[str, LinearOperator], coproduct: str) -> dict[str, LinearOperator]:
    """rho(S h) for h in k, e, f."""
    k, k_inv = rho["k"], rho["k_inv"]
    if coproduct == "A":
        conj = lambda x: -(k @ x @ k_inv)  # noqa: E731
    else:
        conj = lambda x: -(k_inv @ x @ k)  # noqa: E731
    return {"k": k_inv, "e": conj(rho["e"]), "f": conj(rho["f"])}


# -- J and D ---------------------------------------------------------------------------


def build_J(spec: HilbertSpec) -> AntilinearOperator:
    """J |l,m>_+- = i^{2m} |l,-m>_-+ composed with complex conjugation."""
    n = spec.dim
    u = np.zeros((n, n), dtype=complex)
    for col, bi in enumerate(spec.basis):
        target = BasisIndex(-bi.sign, bi.l, -bi.m)
        u[spec.ordinal(target), col] = np.exp(1j * math.pi * bi.m.twice / 2)
    return AntilinearOperator(spec, u)


Profile = Callable[[HalfInt], float]


def dirac_profile(l: HalfInt) -> float:
    return l.twice / 2 + 0.5


def polynomial_profile(coeffs: Sequence[float]) -> Profile:
    """d_l = sum_i coeffs[i] * (l + 1/2)**i."""
    coeffs = tuple(float(c) for c in coeffs)

    def profile(l: HalfInt) -> float:
        k = l.twice / 2 + 0.5
        return sum(c * k**i for i, c in enumerate(coeffs))

    profile.coeffs = coeffs  # type: ignore[attr-defined]
    return profile


def _violator(l: HalfInt) -> float:
    return (-1) ** l.twice * (l.twice / 2 + 0.5) * (l.twice / 2)


PROFILES: dict[str, Profile] = {
    "dirac": dirac_profile,
    "affine5": polynomial_profile([0.0, 5.0]),
    "affine5-odd": polynomial_profile([-2.0, 5.0]),
    "neg-affine-odd": polynomial_profile([-3.0, -2.0]),
    "square": polynomial_profile([0.0, 0.0, 1.0]),
    "violator": _violator,
}


def resolve_profile(name: str) -> Profile:
    """Named profile, or ``poly:c0,c1,...`` for sum c_i (l+1/2)^i."""
    if name in PROFILES:
        return PROFILES[name]
    if name.startswith("poly:"):
        try:
            coeffs = [float(c) for c in name[5:].split(",") if c.strip()]
        except ValueError as exc:
            raise ValueError(f"bad polynomial profile {name!r}") from exc
        if not coeffs:
            raise ValueError(f"bad polynomial profile {name!r}")
        return polynomial_profile(coeffs)
    raise ValueError(f"unknown D profile {name!r}; known: {', '.join(PROFILES)} or poly:c0,c1,...")


def build_D(spec: HilbertSpec, profile: Profile = dirac_profile) -> LinearOperator:
    """D |l,m>_+- = d_l |l,m>_-+."""
    n = spec.dim
    d = np.zeros((n, n))
    half = spec.half_dim
    for i, bi in enumerate(spec.basis[:half]):
        value = float(profile(bi.l))
        d[i, half + i] = value
        d[half + i, i] = value
    return LinearOperator(spec, d)


# -- assembled data ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralData:
    spec: HilbertSpec
    q: float
    pi_a: LinearOperator
    pi_astar: LinearOperator
    pi_b: LinearOperator
    rho_k: LinearOperator
    rho_k_inv: LinearOperator
    rho_e: LinearOperator
    rho_f: LinearOperator
    J: AntilinearOperator
    gamma: LinearOperator
    D: LinearOperator
    convention: ConventionChoice
    paper_literal_index: bool = False
    _word_cache: dict = field(default_factory=dict, repr=False)

    @property
    def pi(self) -> dict[str, LinearOperator]:
        return {"a": self.pi_a, "a*": self.pi_astar, "b": self.pi_b}

    @property
    def rho(self) -> dict[str, LinearOperator]:
        return {"k": self.rho_k, "k_inv": self.rho_k_inv, "e": self.rho_e, "f": self.rho_f}

    def with_D(self, profile: Profile) -> SpectralData:
        return SpectralData(**{**self._fields(), "D": build_D(self.spec, profile), "_word_cache": self._word_cache})

    def _fields(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    def _word(self, word: tuple) -> np.ndarray:
        hit = self._word_cache.get(word)
        if hit is not None:
            return hit
        if not word:
            mat = np.eye(self.spec.dim, dtype=complex)
        elif len(word) == 1:
            mat = {A: self.pi_a, ASTAR: self.pi_astar, B: self.pi_b}[word[0]].entries
        else:
            mat = self._word(word[:-1]) @ self._word(word[-1:])
        self._word_cache[word] = mat
        return mat

    def represent(self, x: AlgebraElement) -> LinearOperator:
        """pi(x) on the truncation; exact only on compressions (see axioms)."""
        out = np.zeros((self.spec.dim, self.spec.dim), dtype=complex)
        for w, c in x.terms.items():
            out += c * self._word(w)
        return LinearOperator(self.spec, out)


def equivariance_residuals(
    spec: HilbertSpec,
    q: float,
    pi: Mapping[str, LinearOperator],
    rho: Mapping[str, LinearOperator],
    coproduct: str,
    margin: int = 1,
) -> dict[tuple[str, str], float]:
    """Relative residual of rho(h) pi(x) = pi(h_(1) |> x) rho(h_(2)) per (h, x).

    Evaluated on the compression to levels 2l <= 2 L_max - 2 * margin and
    normalized by max(1, ||rho(h)||).
    """
    top = spec.l_max.twice - 2 * margin
    letter_ops = {A: pi["a"], ASTAR: pi["a*"], B: pi["b"]}

    def rep(x: AlgebraElement) -> LinearOperator:
        out = LinearOperator.zeros(spec)
        for w, c in x.terms.items():
            if len(w) != 1:
                raise AssertionError(f"module action left the generator span: {x}")
            out = out + c * letter_ops[w[0]]
        return out

    if coproduct == "A":
        legs = {"e": ("k", "k_inv"), "f": ("k", "k_inv")}
    else:
        legs = {"e": ("k_inv", "k"), "f": ("k_inv", "k")}
    out = {}
    for h in SYMMETRY_GENERATORS:
        scale = max(1.0, _scale(rho[h].compress(top).entries))
        for name in GENERATORS:
            x = AlgebraElement.word((_LETTER[name],), q)
            lhs = rho[h] @ pi[name]
            hx = algebra.module_action(h, x, coproduct)
            if h == "k":
                rhs = rep(hx) @ rho["k"]
            else:
                right_k, left_k = legs[h]
                # Delta(h) = h (x) right_k + left_k (x) h
                rhs = rep(hx) @ rho[right_k] + rep(algebra.module_action(left_k, x, coproduct)) @ rho[h]
            out[(h, name)] = residual_norm((lhs - rhs).compress(top), atol=1e-14 * scale) / scale
    return out


def _scale(m: np.ndarray) -> float:
    # normalization only; the residual itself goes through op_norm
    return float(np.linalg.norm(m, 2))


T_POWER_GRID_TWICE = tuple(range(-4, 5))


def j_equivariance_residuals(
    spec: HilbertSpec, rho: Mapping[str, LinearOperator], coproduct: str, t_power_twice: int
) -> dict[str, float]:
    """Relative residual of rho(h) T = T rho(S h)^* with T = J rho(k)^p.

    T is antilinear with antiunitary part J; p = t_power_twice / 2.
    """
    u = build_J(spec).matrix
    kdiag = np.real(np.diag(rho["k"].entries))
    tmat = u * (kdiag ** (t_power_twice / 2))[None, :]
    srho = antipode(rho, coproduct)
    out = {}
    for h in SYMMETRY_GENERATORS:
        lhs = rho[h].entries @ tmat
        rhs = tmat @ srho[h].entries.T
        scale = max(1.0, _scale(lhs), _scale(rhs))
        out[h] = residual_norm(lhs - rhs, atol=1e-14 * scale) / scale
    return out


def evaluate_candidate(spec: HilbertSpec, q: float, cand: Candidate, pi: Mapping[str, LinearOperator]):
    rho = build_rho(spec, q, cand)
    eq = max(equivariance_residuals(spec, q, pi, rho, cand.coproduct).values())
    best_p, best_j = None, math.inf
    for p in T_POWER_GRID_TWICE:
        res = max(j_equivariance_residuals(spec, rho, cand.coproduct, p).values())
        if res < best_j:
            best_p, best_j = p, res
    return eq, best_j, best_p


def calibrate_conventions(
    q: float,
    spec_small: HilbertSpec | None = None,
    candidates: Sequence[Candidate] = DEFAULT_CANDIDATES,
    tol: float = CALIBRATION_TOL,
) -> ConventionChoice:
    """Pick the unique candidate passing both equivariance conditions.

    Raises CalibrationError when no candidate, or more than one, passes.
    """
    q = check_q(q)
    spec_small = spec_small or HilbertSpec(CALIBRATION_L_MAX)
    if not candidates:
        raise CalibrationError("empty candidate set")
    return _calibrate(q, spec_small, tuple(candidates), tol)


@lru_cache(maxsize=32)
def _calibrate(q: float, spec_small: HilbertSpec, candidates: tuple[Candidate, ...], tol: float) -> ConventionChoice:
    pi = _full_pi(spec_small, q, False)
    results = {c: evaluate_candidate(spec_small, q, c, pi) for c in candidates}
    winners = [c for c, (eq, jr, _) in results.items() if eq < tol and jr < tol]
    summary = "; ".join(f"{c.id}: eq={eq:.2e} J={jr:.2e}" for c, (eq, jr, _) in results.items())
    if not winners:
        raise CalibrationError(f"no candidate passes at tol {tol:g}: {summary}")
    if len(winners) > 1:
        raise CalibrationError(f"ambiguous calibration, {len(winners)} candidates pass: {summary}")
    win = winners[0]
    eq, jr, p = results[win]
    return ConventionChoice(
        coproduct="h(x)k + k^-1(x)h" if win.coproduct == "A" else "h(x)k^-1 + k(x)h",
        antipode="S(h) = -k h k^-1" if win.coproduct == "A" else "S(h) = -k^-1 h k",
        ladder=("e lowers m" if win.e_lowers else "e raises m") + f", twist {win.twist_twice / 2:+g}",
        t_modulus_power_twice=p,
        equivariance_residual=eq,
        j_equivariance_residual=jr,
        candidate=win,
    )


def _full_pi(spec: HilbertSpec, q: float, paper_literal_index: bool) -> dict[str, LinearOperator]:
    plus = build_pi(spec, q, PLUS, paper_literal_index)
    minus = build_pi(spec, q, MINUS, paper_literal_index)
    return {name: plus[i] + minus[i] for i, name in enumerate(GENERATORS)}


def build_spectral_data(
    spec: HilbertSpec,
    q: float,
    profile: Profile = dirac_profile,
    paper_literal_index: bool = False,
    convention: ConventionChoice | None = None,
) -> SpectralData:
    q = check_q(q)
    convention = convention or calibrate_conventions(q)
    pi = _full_pi(spec, q, paper_literal_index)
    rho = build_rho(spec, q, convention)
    return SpectralData(
        spec=spec,
        q=q,
        pi_a=pi["a"],
        pi_astar=pi["a*"],
        pi_b=pi["b"],
        rho_k=rho["k"],
        rho_k_inv=rho["k_inv"],
        rho_e=rho["e"],
        rho_f=rho["f"],
        J=build_J(spec),
        gamma=grading(spec),
        D=build_D(spec, profile),
        convention=convention,
        paper_literal_index=paper_literal_index,
    )


def commutant_dimension(spec: HilbertSpec, q: float, branch: int = PLUS, tol: float = 1e-9) -> int:
    """Dimension of {X : [X, pi_branch(g)] = 0 for g = a, a*, b} on H_h(L_max)."""
    pa, pb = half_matrices(spec, q, branch)
    n = spec.half_dim
    eye = np.eye(n)
    rows = []
    for g in (pa, pa.T, pb):
        # vec(X g - g X) = (g^T (x) I - I (x) g) vec(X), column-major vec
        rows.append(np.kron(g.T, eye) - np.kron(eye, g))
    s = np.linalg.svd(np.vstack(rows), compute_uv=False)
    return int(np.sum(s <= tol * s[0]))

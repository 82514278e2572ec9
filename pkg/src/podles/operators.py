"""Dense operators on H(L_max) and the norm/decay machinery behind the
"modulo K_q" checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .hilbert import HilbertSpec
from .qcore import HalfInt

DEFAULT_FLOOR = 1e-13
# K_q membership: fitted rate at most this fraction of ln q, log-space RMS below the bound.
KQ_RATE_FRACTION = 0.9
KQ_MAX_RESIDUAL = 0.5


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, gap: float):
        super().__init__(f"{message} (last gap {gap:.3e})")
        self.gap = gap


class InsufficientSamples(ValueError):
    pass


def _check_same(a: HilbertSpec, b: HilbertSpec) -> None:
    if a != b:
        raise ValueError(f"operators live on different spaces: L_max {a.l_max} vs {b.l_max}")


@dataclass(frozen=True, eq=False)
class LinearOperator:
    spec: HilbertSpec
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise ValueError(f"expected shape {(self.spec.dim,) * 2}, got {m.shape}")
        object.__setattr__(self, "entries", m)

    @classmethod
    def identity(cls, spec: HilbertSpec) -> LinearOperator:
        return cls(spec, np.eye(spec.dim, dtype=complex))

    @classmethod
    def zeros(cls, spec: HilbertSpec) -> LinearOperator:
        return cls(spec, np.zeros((spec.dim, spec.dim), dtype=complex))

    @property
    def H(self) -> LinearOperator:
        return LinearOperator(self.spec, self.entries.conj().T)

    adjoint = H

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _check_same(self.spec, other.spec)
            return LinearOperator(self.spec, self.entries @ other.entries)
        if isinstance(other, AntilinearOperator):
            _check_same(self.spec, other.spec)
            return AntilinearOperator(self.spec, self.entries @ other.matrix)
        if isinstance(other, np.ndarray):
            return self.entries @ other
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, LinearOperator):
            _check_same(self.spec, other.spec)
            return LinearOperator(self.spec, self.entries + other.entries)
        if np.isscalar(other):
            return LinearOperator(self.spec, self.entries + other * np.eye(self.spec.dim))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return LinearOperator(self.spec, scalar * self.entries)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return LinearOperator(self.spec, -self.entries)

    def compress(self, l_top_twice: int) -> LinearOperator:
        """P X P with P the projector onto levels 2l <= l_top_twice."""
        keep = self.spec.level_twice <= l_top_twice
        out = np.zeros_like(self.entries)
        ix = np.ix_(keep, keep)
        out[ix] = self.entries[ix]
        return LinearOperator(self.spec, out)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return bool(np.abs(self.entries - self.entries.conj().T).max(initial=0.0) < tol)


@dataclass(frozen=True, eq=False)
class AntilinearOperator:
    """v -> matrix @ conj(v). Treat as immutable: derived data is cached."""

    spec: HilbertSpec
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.spec.dim, self.spec.dim):
            raise ValueError(f"expected shape {(self.spec.dim,) * 2}, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def unitary_part(self) -> LinearOperator:
        return LinearOperator(self.spec, self.matrix)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(v)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)

    def __matmul__(self, other):
        if isinstance(other, AntilinearOperator):
            _check_same(self.spec, other.spec)
            return LinearOperator(self.spec, self.matrix @ other.matrix.conj())
        if isinstance(other, LinearOperator):
            _check_same(self.spec, other.spec)
            return AntilinearOperator(self.spec, self.matrix @ other.entries.conj())
        if isinstance(other, np.ndarray):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, AntilinearOperator):
            _check_same(self.spec, other.spec)
            return AntilinearOperator(self.spec, self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, AntilinearOperator):
            _check_same(self.spec, other.spec)
            return AntilinearOperator(self.spec, self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return AntilinearOperator(self.spec, -self.matrix)

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.abs(m.conj().T @ m - np.eye(len(m))).max())

    def square_defect(self) -> float:
        """max |J^2 + 1| entrywise (cached)."""
        cached = self.__dict__.get("_square_defect")
        if cached is None:
            m = self.matrix
            cached = float(np.abs(m @ m.conj() + np.eye(len(m))).max())
            object.__setattr__(self, "_square_defect", cached)
        return cached

    def monomial(self):
        """(src, phases) with U[r, src[r]] = phases[r] when U has one nonzero
        per row and column, else None."""
        if "_monomial" not in self.__dict__:
            m = self.matrix
            nz = m != 0
            result = None
            if np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1):
                src = np.argmax(nz, axis=1)
                result = (src, m[np.arange(len(m)), src])
            object.__setattr__(self, "_monomial", result)
        return self.__dict__["_monomial"]


Operand = Union[LinearOperator, np.ndarray]


def _as_array(a: Operand) -> np.ndarray:
    return a.entries if isinstance(a, LinearOperator) else np.asarray(a)


def op_norm(a: Operand, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """Largest singular value by power iteration on A*A with Rayleigh-Ritz
    extraction.

    The power iterates G^k v (G = A*A, or AA* when smaller) span a Krylov
    space; keeping them orthonormal and taking the top eigenvalue of G
    restricted to that space (Lanczos with full reorthogonalization) gives an
    estimate at least as good as the plain power iterate. This matters here:
    the commutators of interest have clusters of singular values accumulating
    geometrically at the top, where the plain iteration crawls.

    Convergence is declared when the top Ritz value changes by at most ``tol``
    relative, or when the Krylov space becomes invariant (then it is exact).
    Runs from the normalized all-ones vector and from a fixed pseudo-random
    vector; the larger estimate wins. ``max_iter`` caps the total number of
    products with G.
    """
    m = _as_array(a)
    if m.size == 0 or not np.any(m):
        return 0.0
    gram = m.conj().T @ m if m.shape[1] <= m.shape[0] else m @ m.conj().T
    n = gram.shape[0]
    scale = float(np.abs(gram).max())
    rng = np.random.default_rng(20051)
    alt = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    starts = [np.ones(n, dtype=complex), alt]
    steps = 0
    best = 0.0
    for v0 in starts:
        basis = np.empty((min(n, max_iter) + 1, n), dtype=complex)
        basis[0] = v0 / np.linalg.norm(v0)
        alphas: list[float] = []
        betas: list[float] = []
        theta_prev, gap = -math.inf, math.inf
        while True:
            if steps >= max_iter:
                raise ConvergenceError(f"power iteration did not converge in {max_iter} steps", gap)
            k = len(alphas)
            v = basis[k]
            w = gram @ v
            steps += 1
            alphas.append(float(np.real(np.vdot(v, w))))
            vs = basis[: k + 1]
            for _ in range(2):
                w = w - vs.T @ (vs.conj() @ w)
            beta = float(np.linalg.norm(w))
            k += 1
            exhausted = beta <= 1e-14 * scale * n or k == n
            # the tridiagonal eigenproblem is cheap early on; later, check every 8 steps
            if exhausted or k <= 32 or k % 8 == 0:
                evals, evecs = np.linalg.eigh(np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1))
                theta = float(evals[-1])
                gap = abs(theta - theta_prev)
                # beta times the last Ritz-vector component is the residual norm of the Ritz pair
                resid = beta * abs(evecs[-1, -1])
                if exhausted or (gap <= tol * abs(theta) and resid <= tol * abs(theta)):
                    break
                theta_prev = theta
            betas.append(beta)
            basis[k] = w / beta
        best = max(best, theta)
    return math.sqrt(max(best, 0.0))


def residual_norm(a: Operand, atol: float = 1e-14) -> float:
    """Operator norm of a residual that is expected to vanish.

    When the Frobenius norm (an upper bound on the operator norm) is already
    below ``atol`` it is returned as is: power iteration on round-off noise
    has near-degenerate singular values and converges arbitrarily slowly.
    """
    m = _as_array(a)
    fro = float(np.linalg.norm(m))
    if fro <= atol:
        return fro
    return op_norm(m)


def commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    _check_same(a.spec, b.spec)
    return LinearOperator(a.spec, a.entries @ b.entries - b.entries @ a.entries)


def anticommutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    _check_same(a.spec, b.spec)
    return LinearOperator(a.spec, a.entries @ b.entries + b.entries @ a.entries)


def conjugate_by(j: AntilinearOperator, a: LinearOperator, tol: float = 1e-12) -> LinearOperator:
    """The linear operator J A J^{-1}.

    With J v = U conj(v) and J^2 = -1 (so J^{-1} = -J) this is U conj(A) U^*.
    """
    _check_same(j.spec, a.spec)
    defect = j.square_defect()
    if defect > tol:
        raise ValueError(f"J^2 = -1 fails by {defect:.3e}")
    mono = j.monomial()
    if mono is None:
        u = j.matrix
        return LinearOperator(a.spec, u @ a.entries.conj() @ u.conj().T)
    # U = P diag(phases): (U conj(A) U^*)[r, c] = ph[r] conj(A)[src[r], src[c]] conj(ph[c])
    src, ph = mono
    out = ph[:, None] * a.entries.conj()[np.ix_(src, src)] * ph.conj()[None, :]
    return LinearOperator(a.spec, out)


# -- level blocks and decay fits ------------------------------------------------


def _level_indices(spec: HilbertSpec, l_top_twice: int | None) -> list[tuple[HalfInt, np.ndarray]]:
    out = []
    for l in spec.levels:
        if l_top_twice is not None and l.twice > l_top_twice:
            break
        out.append((l, np.flatnonzero(spec.level_twice == l.twice)))
    return out


def block_norms(a: LinearOperator, l_top_twice: int | None = None) -> list[tuple[HalfInt, HalfInt, float]]:
    """Operator norm of P_r A P_c for every pair of levels (both copies in each block).

    ``l_top_twice`` restricts to levels 2l <= l_top_twice (a compression).
    Block norms come from LAPACK's SVD; op_norm is reserved for whole operators.
    """
    idx = _level_indices(a.spec, l_top_twice)
    m = a.entries
    out = []
    for lr, rows in idx:
        sub = m[rows]
        for lc, cols in idx:
            block = sub[:, cols]
            norm = float(np.linalg.norm(block, 2)) if np.any(block) else 0.0
            out.append((lr, lc, norm))
    return out


def band_samples(blocks: Sequence[tuple[HalfInt, HalfInt, float]]) -> dict[int, list[tuple[float, float]]]:
    """Group block norms by band (row level minus column level, in whole levels).

    Each sample is (min(l_row, l_col), norm), sorted by l.
    """
    bands: dict[int, list[tuple[float, float]]] = {}
    for lr, lc, norm in blocks:
        band = (lr.twice - lc.twice) // 2
        bands.setdefault(band, []).append((min(lr.twice, lc.twice) / 2, norm))
    return {k: sorted(v) for k, v in sorted(bands.items())}


@dataclass(frozen=True)
class DecayFit:
    log_prefactor: float
    rate: float
    residual: float
    samples: tuple[tuple[float, float], ...]

    def in_Kq(self, q: float) -> bool:
        return kq_criterion(self.rate, self.residual, q)


def kq_criterion(rate: float, residual: float, q: float) -> bool:
    return rate <= KQ_RATE_FRACTION * math.log(q) and residual < KQ_MAX_RESIDUAL


def decay_fit(
    samples: Sequence[tuple[float, float]],
    floor: float = DEFAULT_FLOOR,
    l_start: float | None = None,
) -> DecayFit:
    """Least-squares line through (l, ln norm).

    Samples with norm <= floor are dropped as truncation noise, as are samples
    with l < l_start. ``residual`` is the RMS deviation in log space.
    """
    usable = [(l, v) for l, v in samples if v > floor and (l_start is None or l >= l_start)]
    if len(usable) < 3:
        raise InsufficientSamples(f"need >= 3 samples above floor {floor:g}, have {len(usable)}")
    ls = np.array([s[0] for s in usable])
    logs = np.log([s[1] for s in usable])
    design = np.column_stack([np.ones_like(ls), ls])
    (intercept, slope), *_ = np.linalg.lstsq(design, logs, rcond=None)
    resid = logs - (intercept + slope * ls)
    return DecayFit(
        log_prefactor=float(intercept),
        rate=float(slope),
        residual=float(np.sqrt(np.mean(resid**2))),
        samples=tuple((float(l), float(v)) for l, v in usable),
    )


# -- Hermitian eigenproblem -------------------------------------------------------


def eig_hermitian(
    a: Operand,
    vectors: bool = False,
    tol: float = 1e-12,
    max_sweeps: int = 100,
):
    """Eigenvalues (ascending) of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``w`` or ``(w, V)`` with ``A V = V diag(w)``.
    """
    m = np.array(_as_array(a), dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    if np.abs(m - m.conj().T).max(initial=0.0) >= 1e-10:
        raise ValueError("matrix is not Hermitian")
    m = (m + m.conj().T) / 2
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(m)))

    def off() -> float:
        return float(np.linalg.norm(m - np.diag(np.diag(m))))

    for _ in range(max_sweeps):
        if off() <= tol * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                beta = m[p, r]
                mag = abs(beta)
                if mag <= 1e-300:
                    continue
                phase = beta / mag
                tau = (m[r, r].real - m[p, p].real) / (2 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau  # tau^2 would overflow; t ~ 1/(2 tau)
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, r]
                m[:, cols] = m[:, cols] @ g
                m[cols, :] = g.conj().T @ m[cols, :]
                m[r, p] = 0.0
                m[p, r] = 0.0
                if vectors:
                    v[:, cols] = v[:, cols] @ g
    else:
        if off() > tol * scale:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", off())
    w = np.real(np.diag(m))
    order = np.argsort(w, kind="stable")
    if vectors:
        return w[order], v[:, order]
    return w[order]

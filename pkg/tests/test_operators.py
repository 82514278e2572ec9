import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from podles.hilbert import HilbertSpec, Lq_operator, grading
from podles.operators import (
    AntilinearOperator,
    ConvergenceError,
    InsufficientSamples,
    LinearOperator,
    anticommutator,
    band_samples,
    block_norms,
    commutator,
    conjugate_by,
    decay_fit,
    eig_hermitian,
    op_norm,
    residual_norm,
)
from podles.qcore import HalfInt
from podles.spectral import build_D, build_J, build_pi

SPEC = HilbertSpec.from_twice(5)


def random_op(rng, spec=SPEC):
    n = spec.dim
    return LinearOperator(spec, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    qm, r = np.linalg.qr(z)
    return qm * (np.diag(r) / np.abs(np.diag(r)))


def dense_J(rng, spec=SPEC):
    # conjugating the shipped J by a unitary keeps J^2 = -1 but spoils its monomial shape
    w = random_unitary(rng, spec.dim)
    return AntilinearOperator(spec, w @ build_J(spec).matrix @ w.T)


# -- op_norm -------------------------------------------------------------------


def test_op_norm_examples():
    spec = HilbertSpec.from_twice(1)
    assert op_norm(LinearOperator.identity(spec)) == pytest.approx(1.0, rel=1e-12)
    assert op_norm(np.diag([1.0, 2.0, 3.0])) == pytest.approx(3.0, rel=1e-12)
    assert op_norm(Lq_operator(HilbertSpec.from_twice(9), 0.5)) == pytest.approx(math.sqrt(0.5), rel=1e-12)
    assert op_norm(LinearOperator.zeros(spec)) == 0.0


@pytest.mark.parametrize("n", [1, 2, 7, 40, 150])
def test_op_norm_matches_svd(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert op_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)


def test_op_norm_rectangular(rng):
    a = rng.standard_normal((30, 8))
    assert op_norm(a) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)
    assert op_norm(a.T) == pytest.approx(np.linalg.norm(a, 2), rel=1e-10)


def test_op_norm_clustered_top():
    # singular values accumulating geometrically at the top, as in [D, pi(a)]
    # for a quadratic D profile
    s = 19.0 - 4.0 ** -np.arange(1, 60, dtype=float)
    rng = np.random.default_rng(5)
    u, v = random_unitary(rng, 59), random_unitary(rng, 59)
    a = (u * s) @ v.conj().T
    assert op_norm(a) == pytest.approx(s.max(), rel=1e-12)


def test_op_norm_cap_raises(rng):
    a = rng.standard_normal((60, 60))
    with pytest.raises(ConvergenceError) as err:
        op_norm(a, max_iter=2)
    assert err.value.gap > 0


def test_residual_norm_shortcut():
    tiny = np.full((50, 50), 1e-18)
    assert residual_norm(tiny) == pytest.approx(np.linalg.norm(tiny))
    assert residual_norm(np.diag([1.0, 2.0])) == pytest.approx(2.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_op_norm_adjoint_and_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    a, b = random_op(rng), random_op(rng)
    assert op_norm(a) == pytest.approx(op_norm(a.H), rel=1e-9)
    assert op_norm(a @ b) <= op_norm(a) * op_norm(b) * (1 + 1e-9)


# -- linear and antilinear algebra ------------------------------------------------------------


def test_commutators(rng):
    a = random_op(rng)
    assert not np.any(commutator(a, a).entries)
    spec = HilbertSpec.from_twice(1)
    x = LinearOperator(spec, np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex))
    y = LinearOperator(spec, np.eye(4, k=1, dtype=complex))
    # [diag(d), E_{i,i+1}] = (d_i - d_{i+1}) E_{i,i+1}
    assert np.allclose(commutator(x, y).entries, -np.eye(4, k=1))
    assert np.allclose(anticommutator(x, y).entries, np.eye(4, k=1) * np.array([3.0, 5.0, 7.0, 0.0])[:, None])


def test_gamma_D_commutator():
    spec = HilbertSpec.from_twice(7)
    g, d = grading(spec), build_D(spec)
    assert np.allclose(commutator(g, d).entries, 2 * (g @ d).entries)
    assert not np.any(anticommutator(g, d).entries)


def test_spec_mismatch_rejected():
    with pytest.raises(ValueError):
        commutator(LinearOperator.identity(HilbertSpec.from_twice(1)), LinearOperator.identity(SPEC))


def test_antilinear_application(rng):
    j = build_J(SPEC)
    v = rng.standard_normal(SPEC.dim) + 1j * rng.standard_normal(SPEC.dim)
    assert np.allclose(j(1j * v), -1j * j(v))
    assert np.allclose(j(j(v)), -v)
    assert (j @ j).entries == pytest.approx(-np.eye(SPEC.dim))
    assert j.unitarity_defect() < 1e-15


@pytest.mark.parametrize("make_J", [lambda rng: build_J(SPEC), dense_J], ids=["monomial", "dense"])
def test_conjugate_by_properties(rng, make_J):
    j = make_J(rng)
    ident = LinearOperator.identity(SPEC)
    assert np.allclose(conjugate_by(j, ident).entries, ident.entries)
    assert np.allclose(conjugate_by(j, ident * 1j).entries, -1j * ident.entries)
    a, b = random_op(rng), random_op(rng)
    assert np.allclose(conjugate_by(j, a @ b).entries, (conjugate_by(j, a) @ conjugate_by(j, b)).entries)
    assert np.allclose(conjugate_by(j, a * 1j).entries, -1j * conjugate_by(j, a).entries)
    # J A J^-1 applied to J v equals J (A v)
    v = rng.standard_normal(SPEC.dim) + 1j * rng.standard_normal(SPEC.dim)
    assert np.allclose(conjugate_by(j, a).entries @ j(v), j(a.entries @ v))


def test_conjugate_by_requires_J_squared_minus_one():
    with pytest.raises(ValueError):
        conjugate_by(AntilinearOperator(SPEC, np.eye(SPEC.dim, dtype=complex)), LinearOperator.identity(SPEC))


# -- block norms and decay fits -----------------------------------------------------------------


def test_block_norms_Lq():
    spec = HilbertSpec.from_twice(9)
    for lr, lc, norm in block_norms(Lq_operator(spec, 0.5)):
        expected = 0.5 ** lr.value if lr == lc else 0.0
        assert norm == pytest.approx(expected, abs=1e-15)


def test_block_norms_identity():
    blocks = block_norms(LinearOperator.identity(SPEC))
    assert all((n == pytest.approx(1.0)) if lr == lc else n == 0 for lr, lc, n in blocks)


def test_block_norms_pi_a_band_structure():
    spec = HilbertSpec.from_twice(9)
    a = build_pi(spec, 0.5, +1)[0]
    for lr, lc, norm in block_norms(a):
        if abs(lr.twice - lc.twice) > 2:
            assert norm == 0.0


def test_block_norms_compressed_levels():
    blocks = block_norms(LinearOperator.identity(SPEC), l_top_twice=3)
    assert {lr.twice for lr, _, _ in blocks} == {1, 3}


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_block_norms_reassembly(seed):
    rng = np.random.default_rng(seed)
    m = random_op(rng).entries
    lt = SPEC.level_twice
    m[np.abs(lt[:, None] - lt[None, :]) > 2] = 0  # banded, like the operators of interest
    a = LinearOperator(SPEC, m)
    blocks = block_norms(a)
    biggest = max(n for *_, n in blocks)
    bands = {lr.twice - lc.twice for lr, lc, n in blocks if n > 0}
    assert biggest <= op_norm(a) * (1 + 1e-12)
    assert op_norm(a) <= len(bands) * biggest * (1 + 1e-12)


def test_band_samples():
    spec = HilbertSpec.from_twice(9)
    bands = band_samples(block_norms(Lq_operator(spec, 0.5)))
    assert [l for l, _ in bands[0]] == [0.5, 1.5, 2.5, 3.5, 4.5]
    assert all(n == 0 for _, n in bands[1])


def test_decay_fit_recovers_rates():
    spec = HilbertSpec.from_twice(21)
    fit = decay_fit(band_samples(block_norms(Lq_operator(spec, 0.5)))[0])
    assert fit.rate == pytest.approx(math.log(0.5), abs=1e-6)
    assert fit.residual < 1e-10
    assert fit.in_Kq(0.5)
    sq = [(l, 0.3 ** (2 * l)) for l in np.arange(0.5, 10, 1.0)]
    assert decay_fit(sq).rate == pytest.approx(2 * math.log(0.3), abs=1e-6)
    const = decay_fit([(l, 2.0) for l in range(6)])
    assert const.rate == pytest.approx(0.0, abs=1e-12)
    assert not const.in_Kq(0.5)


def test_decay_fit_floor_and_window():
    samples = [(l, 0.5**l) for l in range(10)] + [(10, 1e-20), (11, 0.0)]
    fit = decay_fit(samples, l_start=3)
    assert [l for l, _ in fit.samples] == list(range(3, 10))
    with pytest.raises(InsufficientSamples):
        decay_fit(samples, l_start=8)
    with pytest.raises(InsufficientSamples):
        decay_fit([(0, 1.0), (1, 1e-14), (2, 1e-15)])


@given(st.floats(0.05, 0.95), st.floats(-3, 3))
def test_decay_fit_synthetic(q, logc):
    fit = decay_fit([(l, math.exp(logc) * q**l) for l in np.arange(0.5, 12, 1.0)])
    assert fit.rate == pytest.approx(math.log(q), abs=1e-6)
    assert fit.log_prefactor == pytest.approx(logc, abs=1e-6)


# -- eigenvalues ----------------------------------------------------------------------------


def test_eig_hermitian_examples():
    assert list(eig_hermitian(np.diag([3.0, -1.0, 2.0]))) == [-1.0, 2.0, 3.0]
    assert eig_hermitian(np.array([[0, 2.5], [2.5, 0]])) == pytest.approx([-2.5, 2.5])
    g = eig_hermitian(grading(SPEC))
    half = SPEC.dim // 2
    assert list(g) == [-1.0] * half + [1.0] * half


@pytest.mark.parametrize("n", [1, 5, 30, 90])
def test_eig_hermitian_matches_lapack(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = z + z.conj().T
    w, v = eig_hermitian(h, vectors=True)
    assert w == pytest.approx(np.linalg.eigvalsh(h), abs=1e-11 * np.abs(h).max() * n)
    assert np.allclose(h @ v, v * w, atol=1e-10)
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0, 1.0], [0, 0]]))

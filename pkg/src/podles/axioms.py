"""Verification suites: one per property of the spectral geometry, each
returning a VerificationReport with residuals, decay fits and a verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import algebra
from .algebra import A, ASTAR, B, AlgebraElement
from .hilbert import HilbertSpec
from .operators import (
    DEFAULT_FLOOR,
    KQ_MAX_RESIDUAL,
    KQ_RATE_FRACTION,
    InsufficientSamples,
    LinearOperator,
    band_samples,
    block_norms,
    commutator,
    conjugate_by,
    decay_fit,
    eig_hermitian,
    op_norm,
    residual_norm,
)
from .qcore import HalfInt, check_q
from .spectral import (
    GENERATORS,
    SYMMETRY_GENERATORS,
    Profile,
    SpectralData,
    build_D,
    build_spectral_data,
    dirac_profile,
    equivariance_residuals,
    j_equivariance_residuals,
    polynomial_profile,
)

EXACT_TOL = 1e-10
EQUIVARIANCE_TOL = 1e-9
STRUCTURE_TOL = 1e-12
NONVANISHING_MIN = 1e-3
STABILITY_TOL = 1e-6
SATURATION_TOL = 1e-6
# Blocks below l = w (w = total generator length of the pair) are pre-asymptotic:
# each factor carries q-number corrections of relative size q^(2l).
DECAY_BURN_IN_PER_FACTOR = 1.0

_LETTER = {"a": A, "a*": ASTAR, "b": B}
_NAME = {A: "a", ASTAR: "a*", B: "b"}


@dataclass(frozen=True)
class CompressionRule:
    """Checks on words of total generator length w are read off P X P, with
    P the projector onto levels l <= L_max - w * margin."""

    margin: int = 1

    def top_twice(self, spec: HilbertSpec, word_length: int) -> int:
        return spec.l_max.twice - 2 * word_length * self.margin


@dataclass
class VerificationReport:
    suite: str
    q: float | None
    l_max: Any
    items: list[dict] = field(default_factory=list)
    fits: list[dict] = field(default_factory=list)
    convention: str | None = None
    config: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "PASS" if all(item["pass"] for item in self.items) else "FAIL"

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def add(self, name: str, value: float, tolerance: float, passed: bool, **extra) -> dict:
        item = {"id": name, "value": value, "tolerance": tolerance, "pass": bool(passed), **extra}
        self.items.append(item)
        return item

    def item(self, name: str) -> dict:
        for it in self.items:
            if it["id"] == name:
                return it
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "q": self.q,
            "l_max": self.l_max,
            "verdict": self.verdict,
            "convention": self.convention,
            "items": self.items,
            "fits": self.fits,
            "config": self.config,
        }


def _half(l: HalfInt | int) -> str:
    return str(l if isinstance(l, HalfInt) else HalfInt(l))


# -- exact identities ---------------------------------------------------------------


def check_relations(data: SpectralData, rule: CompressionRule = CompressionRule()) -> VerificationReport:
    """The four defining relations in the representation, on the compression."""
    rep = VerificationReport(
        "relations", data.q, _half(data.spec.l_max), convention=data.convention.id,
        config={"margin": rule.margin, "paper_literal_index": data.paper_literal_index},
    )
    top = rule.top_twice(data.spec, 2)
    for name, rel in algebra.relations(data.q).items():
        res = residual_norm(data.represent(rel).compress(top))
        rep.add(name, res, EXACT_TOL, res < EXACT_TOL)
    return rep


def check_equivariance(data: SpectralData, rule: CompressionRule = CompressionRule()) -> VerificationReport:
    rep = VerificationReport(
        "equivariance", data.q, _half(data.spec.l_max), convention=data.convention.id,
        config={"margin": rule.margin},
    )
    residuals = equivariance_residuals(
        data.spec, data.q, data.pi, data.rho, data.convention.candidate.coproduct, margin=rule.margin
    )
    for (h, x), res in residuals.items():
        rep.add(f"{h}|>{x}", res, EQUIVARIANCE_TOL, res < EQUIVARIANCE_TOL)
    return rep


def check_structure_identities(data: SpectralData) -> VerificationReport:
    rep = VerificationReport("structure", data.q, _half(data.spec.l_max), convention=data.convention.id)
    J, g, D = data.J, data.gamma, data.D
    checks = {
        "J^2=-1": (J @ J).entries + np.eye(data.spec.dim),
        "gJ=-Jg": (g @ J + J @ g).matrix,
        "Dg=-gD": (D @ g + g @ D).entries,
        "JDJ^-1=D": (conjugate_by(J, D) - D).entries,
    }
    for h in SYMMETRY_GENERATORS:
        checks[f"[D,rho({h})]=0"] = commutator(D, data.rho[h]).entries
    for name, mat in checks.items():
        res = residual_norm(mat)
        rep.add(name, res, STRUCTURE_TOL, res < STRUCTURE_TOL)
    p = data.convention.t_modulus_power_twice
    jres = j_equivariance_residuals(data.spec, data.rho, data.convention.candidate.coproduct, p)
    for h, res in jres.items():
        rep.add(f"rho({h})T=T rho(S{h})^*", res, STRUCTURE_TOL, res < STRUCTURE_TOL, t_modulus_power=p / 2)
    return rep


# -- the commutant, exactly and modulo K_q ----------------------------------------------------


def _word_name(word: tuple) -> str:
    return "".join(_NAME[x] for x in word) if word else "1"


def generator_pairs() -> list[tuple[tuple, tuple]]:
    return [((_LETTER[x],), (_LETTER[y],)) for x in GENERATORS for y in GENERATORS]


def random_word_pairs(n: int, seed: int, max_length: int = 3) -> list[tuple[tuple, tuple]]:
    rng = np.random.default_rng(seed)
    letters = (A, ASTAR, B)

    def word():
        length = int(rng.integers(1, max_length + 1))
        return tuple(letters[int(i)] for i in rng.integers(0, 3, size=length))

    return [(word(), word()) for _ in range(n)]


def _word_op(data: SpectralData, word: tuple) -> LinearOperator:
    return data.represent(AlgebraElement.word(word, data.q))


def commutant_operator(data: SpectralData, x: tuple, y: tuple) -> LinearOperator:
    """[pi(x), J pi(y) J^-1]."""
    return commutator(_word_op(data, x), conjugate_by(data.J, _word_op(data, y)))


def first_order_operator(data: SpectralData, x: tuple, y: tuple) -> LinearOperator:
    """[J pi(x) J^-1, [D, pi(y)]]."""
    return commutator(conjugate_by(data.J, _word_op(data, x)), commutator(data.D, _word_op(data, y)))


def band_decay(
    op: LinearOperator,
    top_twice: int,
    q: float,
    floor: float = DEFAULT_FLOOR,
    l_start: float | None = None,
) -> dict:
    """Per-band decay fits of the level-block norms of ``op`` on a compression.

    Only blocks with l >= l_start enter a fit. Returns the worst (largest)
    rate, the largest log residual, per-band fits and the K_q verdict. Bands
    entirely below the floor are exact zeros; bands that sink below the floor
    inside the window count as decayed; any other band with fewer than three
    samples makes the verdict "insufficient samples".
    """
    bands = band_samples(block_norms(op, top_twice))
    fits, unfitted, dropped = {}, [], []
    any_above_floor = False
    for band, samples in bands.items():
        if not any(v > floor for _, v in samples):
            continue
        any_above_floor = True
        window = [(l, v) for l, v in samples if l_start is None or l >= l_start]
        try:
            fits[band] = decay_fit(window, floor)
        except InsufficientSamples:
            # a band that reaches the floor inside the window and stays there has decayed
            if window and window[-1][1] <= floor:
                dropped.append(band)
            else:
                unfitted.append(band)
    out: dict[str, Any] = {
        "bands": {str(b): {"rate": f.rate, "log_prefactor": f.log_prefactor, "residual": f.residual,
                           "n_samples": len(f.samples)} for b, f in fits.items()},
        "bands_below_floor": dropped,
        "unfitted_bands": unfitted,
        "threshold_rate": KQ_RATE_FRACTION * math.log(q),
        "max_residual": KQ_MAX_RESIDUAL,
    }
    if unfitted:
        out.update(rate=None, residual=None, status="insufficient samples", pass_=False)
    elif not fits:
        out.update(rate=None, residual=None, status="below floor", pass_=True)
        if any_above_floor:
            out["status"] = "below floor in fit window"
    else:
        rate = max(f.rate for f in fits.values())
        residual = max(f.residual for f in fits.values())
        ok = rate <= KQ_RATE_FRACTION * math.log(q) and residual < KQ_MAX_RESIDUAL
        out.update(rate=rate, residual=residual, status="fitted", pass_=ok)
    return out


def _decay_suite(
    suite: str,
    data: SpectralData,
    build,
    extra_length: int,
    random_pairs: int,
    seed: int,
    rule: CompressionRule,
    floor: float,
    burn_in: float,
) -> VerificationReport:
    q = check_q(data.q)
    rep = VerificationReport(
        suite, q, _half(data.spec.l_max), convention=data.convention.id,
        config={"margin": rule.margin, "random_pairs": random_pairs, "seed": seed, "floor": floor,
                "burn_in_per_factor": burn_in},
    )
    pairs = [("generator", p) for p in generator_pairs()]
    pairs += [("random", p) for p in random_word_pairs(random_pairs, seed)]
    for kind, (x, y) in pairs:
        top = rule.top_twice(data.spec, len(x) + len(y) + extra_length)
        w = len(x) + len(y)
        result = band_decay(build(data, x, y), top, q, floor, l_start=burn_in * w)
        name = f"({_word_name(x)},{_word_name(y)})"
        ok = result.pop("pass_")
        rep.add(name, result["rate"], result["threshold_rate"], ok, kind=kind,
                residual=result["residual"], status=result["status"])
        rep.fits.append({"id": name, **result})
    return rep


def check_commutant_mod_Kq(
    data: SpectralData,
    random_pairs: int = 0,
    seed: int = 0,
    rule: CompressionRule = CompressionRule(),
    floor: float = DEFAULT_FLOOR,
    burn_in: float = DECAY_BURN_IN_PER_FACTOR,
) -> VerificationReport:
    """[pi(x), J pi(y) J^-1] in K_q for the generator pairs and random word pairs."""
    return _decay_suite("commutant-mod-kq", data, commutant_operator, 0, random_pairs, seed, rule, floor, burn_in)


def check_first_order_mod_Kq(
    data: SpectralData,
    random_pairs: int = 0,
    seed: int = 0,
    rule: CompressionRule = CompressionRule(),
    floor: float = DEFAULT_FLOOR,
    burn_in: float = DECAY_BURN_IN_PER_FACTOR,
) -> VerificationReport:
    """[J pi(x) J^-1, [D, pi(y)]] in K_q. D moves no level, so only the words count toward w."""
    return _decay_suite("first-order-mod-kq", data, first_order_operator, 0, random_pairs, seed, rule, floor, burn_in)


def check_commutant_failure(
    datas: Sequence[SpectralData], rule: CompressionRule = CompressionRule()
) -> VerificationReport:
    """The exact commutant condition fails: some ||[pi(x), J pi(y) J^-1]|| stays
    away from zero, with the same value at every truncation."""
    if len(datas) < 2:
        raise ValueError("need at least two truncations")
    q = check_q(datas[0].q)
    rep = VerificationReport(
        "commutant-failure", q, [_half(d.spec.l_max) for d in datas], convention=datas[0].convention.id,
        config={"margin": rule.margin},
    )
    norms: dict[str, list[float]] = {}
    for data in datas:
        top = rule.top_twice(data.spec, 2)
        for x, y in generator_pairs():
            name = f"({_word_name(x)},{_word_name(y)})"
            norms.setdefault(name, []).append(op_norm(commutant_operator(data, x, y).compress(top)))
    maxima = [max(vals[i] for vals in norms.values()) for i in range(len(datas))]
    spread = max(maxima) - min(maxima)
    best_pair = max(norms, key=lambda k: norms[k][-1])
    rep.add("max-norm", maxima[-1], NONVANISHING_MIN, min(maxima) >= NONVANISHING_MIN,
            per_l_max=maxima, attained_by=best_pair, norms=norms)
    rep.add("stability", spread, STABILITY_TOL, spread <= STABILITY_TOL)
    return rep


def check_bounded_commutators(
    datas: Sequence[SpectralData],
    rule: CompressionRule = CompressionRule(),
    from_twice: int = 31,
) -> VerificationReport:
    """||[D, pi(x)]|| saturates as L_max grows: successive differences for
    truncations with 2 L_max >= ``from_twice`` stay below 1e-6."""
    if len(datas) < 3:
        raise ValueError("need at least three truncations")
    datas = sorted(datas, key=lambda d: d.spec.l_max)
    if sum(d.spec.l_max.twice >= from_twice for d in datas[1:]) == 0:
        raise ValueError(f"no truncation reaches L_max = {_half(from_twice)}")
    rep = VerificationReport(
        "bounded-commutators", datas[0].q, [_half(d.spec.l_max) for d in datas],
        convention=datas[0].convention.id, config={"margin": rule.margin, "from_l_max": _half(from_twice)},
    )
    unit = LinearOperator.identity(datas[-1].spec)
    rep.add("[D,1]", residual_norm(commutator(datas[-1].D, unit)), 0.0,
            not np.any(commutator(datas[-1].D, unit).entries))
    for name in GENERATORS:
        seq = [op_norm(commutator(d.D, d.pi[name]).compress(rule.top_twice(d.spec, 1))) for d in datas]
        diffs = [abs(b - a) for a, b, d in zip(seq, seq[1:], datas[1:]) if d.spec.l_max.twice >= from_twice]
        worst = max(diffs) if diffs else math.inf
        rep.add(f"[D,{name}]", worst, SATURATION_TOL, worst < SATURATION_TOL, norms=seq)
    return rep


# -- spectrum --------------------------------------------------------------------------


def counting_function(profile: Profile, lam_max: float, l_cap_twice: int = 4001) -> list[tuple[float, int]]:
    """N(Lambda) = number of eigenvalues of |D| (with multiplicity) at most Lambda,
    sampled at Lambda = 1, 2, ..., floor(lam_max). Each level l contributes
    2(2l+1) eigenvalues of modulus |d_l|."""
    mods = []
    for t in range(1, l_cap_twice + 1, 2):
        mods.append((abs(profile(HalfInt(t))), 2 * (t + 1)))
    out = []
    for lam in range(1, int(lam_max) + 1):
        out.append((float(lam), sum(mult for d, mult in mods if d <= lam + 1e-12)))
    return out


def check_spectrum_and_dimension(
    profile: Profile = dirac_profile, K: int = 200, small_l_max: HalfInt = HalfInt(3)
) -> VerificationReport:
    if K < 20:
        raise ValueError("K must be at least 20")
    rep = VerificationReport("spectrum", None, _half(small_l_max), config={"K": K})
    spec = HilbertSpec(small_l_max)
    D = build_D(spec, profile)
    eig = eig_hermitian(D)
    expected = []
    for l in spec.levels:
        d = profile(l)
        expected += [-abs(d)] * (l.twice + 1) + [abs(d)] * (l.twice + 1)
    expected = np.sort(expected)
    err = float(np.abs(eig - expected).max())
    mods, counts = np.unique(np.round(np.abs(eig), 9), return_counts=True)
    rep.add("D-eigenvalues", err, EXACT_TOL, err < EXACT_TOL,
            abs_spectrum=[[float(m), int(c)] for m, c in zip(mods, counts)])
    mult_ok = all(abs(c - 4 * m) < 1e-9 for m, c in zip(mods, counts))
    rep.add("multiplicity-4k", float(max(abs(c - 4 * m) for m, c in zip(mods, counts))), 0.0, mult_ok)

    samples = counting_function(profile, K)
    lam = np.array([s[0] for s in samples])
    n = np.array([s[1] for s in samples], dtype=float)
    # asymptotic window: the upper half of the range, where N ~ 2 Lambda^2 dominates
    # the linear correction
    keep = (n > 0) & (lam >= lam[-1] / 2)
    slope, intercept = np.polyfit(np.log(lam[keep]), np.log(n[keep]), 1)
    rep.add("spectral-dimension", float(slope), 0.05, abs(slope - 2.0) <= 0.05,
            prefactor=float(math.exp(intercept)), window=[float(lam[keep][0]), float(lam[-1])], N_10=int(n[9]) if len(n) >= 10 else None)

    resolvent = [1 / math.sqrt(1 + profile(HalfInt(t)) ** 2) for t in range(1, 2 * K, 2)]
    decreasing = all(b <= a + 1e-15 for a, b in zip(resolvent, resolvent[1:]))
    rep.add("resolvent-compact", resolvent[-1], 1.0 / K, decreasing and resolvent[-1] <= 1.0 / K)
    return rep


# -- uniqueness of D ------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileCase:
    name: str
    profile: Profile
    admissible: bool


def default_profile_cases() -> list[ProfileCase]:
    return [
        ProfileCase("l+1/2", dirac_profile, True),
        ProfileCase("5(l+1/2)", polynomial_profile([0.0, 5.0]), True),
        ProfileCase("5(l+1/2)-2", polynomial_profile([-2.0, 5.0]), True),
        ProfileCase("(l+1/2)^2", polynomial_profile([0.0, 0.0, 1.0]), False),
        ProfileCase("(-1)^(2l)(l+1/2)l", lambda l: (-1) ** l.twice * (l.twice / 2 + 0.5) * (l.twice / 2), False),
    ]


def uniqueness_scan(
    q: float,
    cases: Sequence[ProfileCase] | None = None,
    l_max_values: Sequence[int] = (21, 31, 41),
    rule: CompressionRule = CompressionRule(),
) -> VerificationReport:
    """For each D profile: first-order decay verdict (at the largest truncation)
    and bounded-commutator verdict. Admissible profiles must pass both,
    violators must fail at least one."""
    q = check_q(q)
    cases = list(cases) if cases is not None else default_profile_cases()
    names = {c.admissible for c in cases}
    if True not in names or sum(not c.admissible for c in cases) < 2:
        raise ValueError("need an admissible profile and at least two violators")
    base = [build_spectral_data(HilbertSpec.from_twice(t), q) for t in sorted(l_max_values)]
    rep = VerificationReport("uniqueness", q, [_half(t) for t in sorted(l_max_values)],
                             convention=base[0].convention.id, config={"margin": rule.margin})
    for case in cases:
        datas = [d.with_D(case.profile) for d in base]
        fo = check_first_order_mod_Kq(datas[-1], rule=rule)
        bounded = check_bounded_commutators(datas, rule=rule, from_twice=sorted(l_max_values)[1])
        ok = (fo.passed and bounded.passed) if case.admissible else not (fo.passed and bounded.passed)
        rep.add(case.name, None, None, ok, admissible=case.admissible,
                first_order=fo.verdict, bounded=bounded.verdict,
                failing_pairs=[it["id"] for it in fo.items if not it["pass"]])
    return rep


SUITES = (
    "relations",
    "equivariance",
    "structure",
    "commutant-failure",
    "commutant-mod-kq",
    "first-order-mod-kq",
    "bounded-commutators",
    "spectrum",
    "uniqueness",
)
DECAY_SUITES = {"commutant-failure", "commutant-mod-kq", "first-order-mod-kq", "bounded-commutators", "uniqueness"}

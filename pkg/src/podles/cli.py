"""Command line entry point.

    podles --q 0.5 --lmax 21/2 --suite all --format json --out reports/
    podles --dump spectrum --lmax 3/2 --out tables/

Exit status: 0 when every selected suite passes, 1 when one fails, 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, axioms
from .axioms import CompressionRule, VerificationReport
from .hilbert import HilbertSpec, Lq_operator
from .operators import block_norms, commutator, conjugate_by, eig_hermitian
from .qcore import HalfInt, parse_half
from .spectral import GENERATORS, build_D, build_spectral_data, resolve_profile

OUT_ENV = "PODLES_OUT"
SCHEMA_VERSION = "1.0"
REPORT_CSV_COLUMNS = ("suite", "q", "l_max", "item", "value", "tolerance", "pass")
SPECTRUM_CSV_COLUMNS = ("eigenvalue", "multiplicity")
BLOCK_CSV_COLUMNS = ("operator", "l_row", "l_col", "norm")
OPERATOR_CSV_COLUMNS = ("row", "col", "re", "im")
DUMPS = ("spectrum", "block-norms", "operator")
# truncations used by suites that compare several sizes: L_max, L_max + 5, L_max + 10
SEQUENCE_STEPS_TWICE = (0, 10, 20)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    q: list[float]
    l_max: HalfInt
    suites: list[str]
    d_profile: str = "dirac"
    seed: int = 0
    out: Path = Path("reports")
    format: str = "json"
    paper_literal_index: bool = False
    margin: int = 1
    random_pairs: int = 0
    dump: str | None = None
    operators: list[str] = field(default_factory=list)

    def validate(self) -> None:
        for q in self.q:
            if not 0 < q <= 1:
                raise ConfigError(f"q must lie in (0, 1], got {q}")
        needs_q_below_one = [s for s in self.suites if s != "spectrum"]
        if needs_q_below_one and any(q >= 1 for q in self.q):
            if any(s in axioms.DECAY_SUITES for s in needs_q_below_one):
                raise ConfigError("decay suites require q < 1")
            raise ConfigError("suites other than spectrum require q < 1")
        if self.dump and self.dump != "spectrum" and any(q >= 1 for q in self.q):
            raise ConfigError("operator dumps require q < 1")
        if any(s in axioms.DECAY_SUITES for s in self.suites) and self.l_max.twice < 7:
            raise ConfigError("decay suites require L_max >= 7/2")
        if self.margin < 1:
            raise ConfigError("margin must be >= 1")
        if self.random_pairs < 0:
            raise ConfigError("random pair count must be >= 0")
        try:
            resolve_profile(self.d_profile)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def echo(self) -> dict:
        return {
            "q": self.q,
            "l_max": str(self.l_max),
            "suites": self.suites,
            "d_profile": self.d_profile,
            "seed": self.seed,
            "format": self.format,
            "paper_literal_index": self.paper_literal_index,
            "margin": self.margin,
            "random_pairs": self.random_pairs,
        }


def _parse_suites(values: Sequence[str]) -> list[str]:
    out: list[str] = []
    for value in values:
        for name in value.split(","):
            name = name.strip()
            if not name:
                continue
            if name == "all":
                out.extend(s for s in axioms.SUITES if s not in out)
            elif name in axioms.SUITES:
                if name not in out:
                    out.append(name)
            else:
                raise ConfigError(f"unknown suite {name!r}; choose from: all, {', '.join(axioms.SUITES)}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="podles", description=__doc__.split("\n\n")[0])
    p.add_argument("--q", action="append", type=float, help="deformation parameter; repeat for several")
    p.add_argument("--lmax", default="21/2", help="top level, as p/2 or a decimal ending in .5")
    p.add_argument("--suite", action="append", default=None,
                   help=f"suite id, comma list, or 'all' (ids: {', '.join(axioms.SUITES)})")
    p.add_argument("--d-profile", default="dirac", help="named D profile or poly:c0,c1,... in powers of l+1/2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-pairs", type=int, default=0, help="random word pairs added to the decay suites")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./reports)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--paper-literal-index", action="store_true",
                   help="use the printed |l-1,m> target in pi(a) instead of |l-1,m+1>")
    p.add_argument("--margin", type=int, default=1, help="levels trimmed per generator in compressions")
    p.add_argument("--dump", choices=DUMPS, default=None, help="write a table instead of running suites")
    p.add_argument("--operator", action="append", default=None,
                   help="operator id for --dump block-norms/operator, e.g. Lq, D, pi(a), [D,pi(b)], "
                        "commutant(a,b), first-order(a,b)")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        l_max = parse_half(args.lmax)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if l_max.twice < 1 or l_max.twice % 2 == 0:
        raise ConfigError(f"L_max must be a positive half-odd-integer, got {args.lmax}")
    suites = _parse_suites(args.suite) if args.suite is not None else []
    if args.suite is None and args.dump is None:
        suites = list(axioms.SUITES)
    out = Path(args.out or os.environ.get(OUT_ENV) or "reports")
    return RunConfig(
        q=args.q or [0.5],
        l_max=l_max,
        suites=suites,
        d_profile=args.d_profile,
        seed=args.seed,
        out=out,
        format=args.format,
        paper_literal_index=args.paper_literal_index,
        margin=args.margin,
        random_pairs=args.random_pairs,
        dump=args.dump,
        operators=args.operator or [],
    )


# -- running suites -------------------------------------------------------------------


def run_suite(name: str, q: float | None, config: RunConfig) -> VerificationReport:
    rule = CompressionRule(config.margin)
    profile = resolve_profile(config.d_profile)
    if name == "spectrum":
        return axioms.check_spectrum_and_dimension(profile)
    spec = HilbertSpec(config.l_max)
    if name in ("commutant-failure", "bounded-commutators", "uniqueness"):
        twices = [config.l_max.twice + s for s in SEQUENCE_STEPS_TWICE]
        if name == "uniqueness":
            return axioms.uniqueness_scan(q, l_max_values=twices, rule=rule)
        datas = [build_spectral_data(HilbertSpec.from_twice(t), q, profile, config.paper_literal_index)
                 for t in twices]
        if name == "commutant-failure":
            return axioms.check_commutant_failure(datas, rule)
        return axioms.check_bounded_commutators(datas, rule, from_twice=twices[1])
    data = build_spectral_data(spec, q, profile, config.paper_literal_index)
    if name == "relations":
        return axioms.check_relations(data, rule)
    if name == "equivariance":
        return axioms.check_equivariance(data, rule)
    if name == "structure":
        return axioms.check_structure_identities(data)
    if name == "commutant-mod-kq":
        return axioms.check_commutant_mod_Kq(data, config.random_pairs, config.seed, rule)
    if name == "first-order-mod-kq":
        return axioms.check_first_order_mod_Kq(data, config.random_pairs, config.seed, rule)
    raise ConfigError(f"unknown suite {name!r}")


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        f = float(value)
        return f if math.isfinite(f) else str(f)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def report_document(report: VerificationReport, config: RunConfig) -> dict:
    doc = report.to_dict()
    doc["schema_version"] = SCHEMA_VERSION
    doc["library_version"] = __version__
    doc["run_config"] = config.echo()
    return _clean(doc)


def _report_stem(suite: str, q: float | None) -> str:
    return suite if q is None else f"{suite}_q{q:g}"


def write_report(report: VerificationReport, config: RunConfig, q: float | None) -> Path:
    config.out.mkdir(parents=True, exist_ok=True)
    stem = _report_stem(report.suite, q)
    if config.format == "json":
        path = config.out / f"{stem}.json"
        path.write_text(json.dumps(report_document(report, config), indent=2, sort_keys=True) + "\n")
    else:
        path = config.out / f"{stem}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_CSV_COLUMNS)
            l_max = report.l_max if isinstance(report.l_max, str) else ";".join(report.l_max)
            for item in report.items:
                writer.writerow([report.suite, "" if q is None else f"{q:g}", l_max, item["id"],
                                 _csv_num(item["value"]), _csv_num(item["tolerance"]), int(item["pass"])])
    return path


def _csv_num(v) -> str:
    return "" if v is None else repr(float(v))


def run(config: RunConfig, stream=sys.stdout) -> int:
    all_pass = True
    for suite in config.suites:
        qs: list[float | None] = [None] if suite == "spectrum" else list(config.q)
        for q in qs:
            report = run_suite(suite, q, config)
            path = write_report(report, config, q)
            all_pass &= report.passed
            print(f"{report.verdict}  {_report_stem(suite, q)}  -> {path}", file=stream)
    return 0 if all_pass else 1


# -- dumps ----------------------------------------------------------------------------------


def _pair(text: str) -> tuple[str, str]:
    x, y = (s.strip() for s in text.split(","))
    if x not in GENERATORS or y not in GENERATORS:
        raise ConfigError(f"unknown generator in {text!r}")
    return x, y


def resolve_operator(name: str, config: RunConfig, q: float):
    spec = HilbertSpec(config.l_max)
    if name == "Lq":
        return Lq_operator(spec, q)
    if name == "D":
        return build_D(spec, resolve_profile(config.d_profile))
    data = build_spectral_data(spec, q, resolve_profile(config.d_profile), config.paper_literal_index)
    if name == "gamma":
        return data.gamma
    if name.startswith("pi(") and name.endswith(")") and name[3:-1] in GENERATORS:
        return data.pi[name[3:-1]]
    if name.startswith("[D,pi(") and name.endswith(")]") and name[6:-2] in GENERATORS:
        return commutator(data.D, data.pi[name[6:-2]])
    if name.startswith("commutant(") and name.endswith(")"):
        x, y = _pair(name[10:-1])
        return commutator(data.pi[x], conjugate_by(data.J, data.pi[y]))
    if name.startswith("first-order(") and name.endswith(")"):
        x, y = _pair(name[12:-1])
        return commutator(conjugate_by(data.J, data.pi[x]), commutator(data.D, data.pi[y]))
    raise ConfigError(f"unknown operator {name!r}")


def dump(config: RunConfig) -> list[Path]:
    config.out.mkdir(parents=True, exist_ok=True)
    q = config.q[0]
    paths = []
    if config.dump == "spectrum":
        D = build_D(HilbertSpec(config.l_max), resolve_profile(config.d_profile))
        values, counts = np.unique(np.round(eig_hermitian(D), 10), return_counts=True)
        path = config.out / "spectrum.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SPECTRUM_CSV_COLUMNS)
            for v, c in zip(values, counts):
                w.writerow([repr(float(v) + 0.0), int(c)])
        paths.append(path)
    elif config.dump == "block-norms":
        names = config.operators or ["Lq", "pi(a)", "pi(a*)", "pi(b)", "D"]
        path = config.out / "block_norms.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(BLOCK_CSV_COLUMNS)
            for name in names:
                for lr, lc, norm in block_norms(resolve_operator(name, config, q)):
                    w.writerow([name, str(lr), str(lc), repr(norm)])
        paths.append(path)
    elif config.dump == "operator":
        names = config.operators or ["D"]
        for name in names:
            op = resolve_operator(name, config, q)
            safe = "".join(ch if ch.isalnum() else "_" for ch in name).strip("_")
            path = config.out / f"operator_{safe}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(OPERATOR_CSV_COLUMNS)
                m = op.entries
                for r in range(m.shape[0]):
                    for c in range(m.shape[1]):
                        z = m[r, c]
                        w.writerow([r, c, repr(float(z.real) + 0.0), repr(float(z.imag) + 0.0)])
            paths.append(path)
    return paths


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        config.validate()
        if config.dump:
            for path in dump(config):
                print(f"wrote {path}")
            return 0
        return run(config)
    except ConfigError as exc:
        print(f"podles: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands
-----------
analyze    weights, Milnor number, monomial basis, ellipticity verdict
pairing    residue pairing and its u-extension on the monomial basis
frobenius  flat potential of the universal unfolding + WDVV residual
spectrum   low spectrum of the twisted Laplacian on a grid (+ CSV export)
verify     fast cross-module invariant suite; exit 0 only if all pass

Settings resolve in three layers: command-line flags override values
from an optional ``key = value`` config file (``--config``), which
override built-in defaults.  Reports are deterministic for a fixed
(config, seed) pair: JSON is emitted with sorted keys and exact
rationals serialize as ``"p/q"`` strings.

Exit codes: 0 success, 1 computation failure, 2 usage error,
3 precondition unmet.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .brieskorn import BrieskornLattice
from .ellipticity import (check_laurent_nondegenerate,
                          check_quasihomogeneous_ellipticity,
                          growth_table_csv, numeric_growth_table)
from .frobenius import build_flat_potential, universal_unfolding, wdvv_residual
from .groebner import milnor_ring
from .poly import PolyError, Polynomial, infer_weights, parse_polynomial
from .util import ComputeError, PrecondError, dump_json, frac_str, jsonable

SCHEMA_VERSION = 1

_DEFAULTS = {
    "f": None,
    "vars": None,
    "laurent": False,
    "order": 8,
    "t_order": 5,
    "grid": 65,
    "radius": 4.0,
    "tol": 1e-3,
    "seed": 7,
    "out": None,
    "plot_dir": None,
}

_CONVERTERS = {
    "f": str,
    "vars": str,
    "laurent": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "order": int,
    "t_order": int,
    "grid": int,
    "radius": float,
    "tol": float,
    "seed": int,
    "out": str,
    "plot_dir": str,
}


class UsageError(ValueError):
    """Bad invocation: unknown key, contradictory settings, missing input."""


@dataclass
class RunConfig:
    command: str
    f: str | None = None
    vars: tuple[str, ...] | None = None
    laurent: bool = False
    order: int = 8
    t_order: int = 5
    grid: int = 65
    radius: float = 4.0
    tol: float = 1e-3
    seed: int = 7
    out: str | None = None
    plot_dir: str | None = None
    explicit: frozenset = frozenset()

    def describe(self) -> dict:
        return {
            "command": self.command,
            "f": self.f,
            "vars": list(self.vars) if self.vars else None,
            "laurent": self.laurent,
            "order": self.order,
            "t_order": self.t_order,
            "grid": self.grid,
            "radius": self.radius,
            "tol": self.tol,
            "seed": self.seed,
        }


@dataclass
class Report:
    command: str
    config: RunConfig
    results: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    exit_status: int = 0
    tables: dict = field(default_factory=dict)  # name -> CSV text (plot data)

    def describe(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config.describe(),
            "results": jsonable(self.results),
            "warnings": list(self.warnings),
            "exit_status": self.exit_status,
        }


# -- configuration --------------------------------------------------------


def _read_config_file(path: str) -> dict:
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unknown setting {key!r}")
        try:
            values[key] = _CONVERTERS[key](val.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lg",
        description="Exact lattice algebra and spectral probes for "
                    "polynomial superpotentials.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("analyze", "weights, Milnor number, basis, ellipticity"),
            ("pairing", "residue pairing and u-extension"),
            ("frobenius", "flat potential and WDVV residual"),
            ("spectrum", "low spectrum of the twisted Laplacian"),
            ("verify", "run the invariant suite")):
        p = sub.add_parser(name, help=helptext)
        if name != "verify":
            p.add_argument("poly", nargs="?", default=None,
                           help="polynomial text (alternative to --f)")
        p.add_argument("--f", dest="f", default=None,
                       help="polynomial text")
        p.add_argument("--vars", default=None,
                       help="comma-separated variable names")
        p.add_argument("--laurent", action="store_true", default=None,
                       help="allow negative exponents")
        p.add_argument("--order", type=int, default=None,
                       help="u-series truncation order")
        p.add_argument("--t-order", type=int, default=None, dest="t_order",
                       help="deformation-parameter truncation order")
        p.add_argument("--grid", type=int, default=None,
                       help="grid points per axis")
        p.add_argument("--radius", type=float, default=None,
                       help="grid half-width")
        p.add_argument("--tol", type=float, default=None,
                       help="kernel-counting threshold")
        p.add_argument("--seed", type=int, default=None,
                       help="random seed for probe vectors")
        p.add_argument("--out", default=None, help="write JSON report here")
        p.add_argument("--plot-dir", default=None, dest="plot_dir",
                       help="write CSV plot data into this directory")
        p.add_argument("--config", default=None,
                       help="key = value settings file")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Flags override config-file values override defaults."""
    ns = _build_parser().parse_args(argv)
    file_values = _read_config_file(ns.config) if ns.config else {}
    merged = {}
    explicit = set()
    for key, default in _DEFAULTS.items():
        flag = getattr(ns, key, None)
        if flag is not None:
            merged[key] = flag
            explicit.add(key)
        elif key in file_values:
            merged[key] = file_values[key]
            explicit.add(key)
        else:
            merged[key] = default
    positional = getattr(ns, "poly", None)
    if positional is not None:
        if merged["f"] is not None and merged["f"] != positional:
            raise UsageError("polynomial given twice (positional and --f) "
                             "with different values")
        merged["f"] = positional
    if merged["vars"] is not None and isinstance(merged["vars"], str):
        merged["vars"] = tuple(
            v.strip() for v in merged["vars"].split(",") if v.strip())
    if merged["order"] < 0 or merged["t_order"] < 0:
        raise UsageError("truncation orders must be nonnegative")
    if merged["tol"] <= 0:
        raise UsageError("tolerance must be positive")
    if merged["grid"] < 2:
        raise UsageError("grid needs at least two points per axis")
    if merged["radius"] <= 0:
        raise UsageError("grid half-width must be positive")
    return RunConfig(command=ns.command, explicit=frozenset(explicit),
                     **merged)


def _require_poly(cfg: RunConfig) -> Polynomial:
    if not cfg.f:
        raise UsageError(f"command {cfg.command!r} needs a polynomial "
                         "(positional or --f)")
    return parse_polynomial(cfg.f, cfg.vars, laurent=cfg.laurent)


# -- commands --------------------------------------------------------------


def _cmd_analyze(cfg: RunConfig) -> Report:
    f = _require_poly(cfg)
    report = Report("analyze", cfg)
    results: dict = {"f": str(f), "variables": list(f.names),
                     "ring": f.mode}
    weights = infer_weights(f)
    results["weights"] = ([frac_str(q) for q in weights.q]
                          if weights is not None else None)
    if f.mode == "poly":
        ring = milnor_ring(f)
        if ring.basis is None:
            results["milnor_number"] = "infinite"
            results["monomial_basis"] = []
            report.warnings.append(
                "groebner:milnor-ring positive-dimensional critical locus; "
                "no finite basis")
        else:
            results["milnor_number"] = ring.mu
            results["monomial_basis"] = [
                str(Polynomial.monomial(m, 1, f.names)) for m in ring.basis]
        ell = check_quasihomogeneous_ellipticity(f)
    else:
        results["milnor_number"] = None
        results["monomial_basis"] = []
        ell = check_laurent_nondegenerate(f, seed=cfg.seed)
    results["ellipticity"] = {
        "verdict": ell.verdict,
        "reason": ell.reason,
        "witness": ell.witness,
    }
    if ell.table is not None:
        results["growth_table"] = [
            {"k": k, "radius": radius, "min_margin": margin}
            for k, radius, margin in ell.table]
    if ell.verdict == "LikelySatisfied":
        report.warnings.append(
            "ellipticity:randomized-search verdict is numeric-only")
    if cfg.plot_dir:
        numeric = numeric_growth_table(f, seed=cfg.seed)
        if numeric.table is not None:
            report.tables["growth_table.csv"] = growth_table_csv(numeric)
    report.results = results
    return report


def _series_dict(series) -> dict:
    return {str(k): frac_str(v) for k, v in sorted(series.coeffs.items())}


def _cmd_pairing(cfg: RunConfig) -> Report:
    f = _require_poly(cfg)
    report = Report("pairing", cfg)
    lattice = BrieskornLattice(f, order=cfg.order)
    results = lattice.describe()
    results["higher_residue_matrix"] = [
        [_series_dict(entry) for entry in row]
        for row in lattice.pairing_matrix()]
    report.results = results
    return report


def _cmd_frobenius(cfg: RunConfig) -> Report:
    f = _require_poly(cfg)
    report = Report("frobenius", cfg)
    unfolding = universal_unfolding(f)
    nt = cfg.t_order
    if "order" in cfg.explicit and "t_order" not in cfg.explicit:
        nt = cfg.order  # one truncation knob given: use it for the family
    data = build_flat_potential(unfolding, nt=nt)
    results = data.describe()
    results["wdvv_residual"] = wdvv_residual(data)
    report.results = results
    return report


def _cmd_spectrum(cfg: RunConfig) -> Report:
    from .spectral import build_grid, eigensolve_lowest
    from .spectral.analysis import (write_eigenvalues_csv,
                                    write_harmonic_profile_csv)
    f = _require_poly(cfg)
    report = Report("spectrum", cfg)
    grid = build_grid(cfg.radius, cfg.grid)
    result = eigensolve_lowest(f, grid, degree=1, k=8, backend="fd1",
                               seed=cfg.seed, gap_threshold=cfg.tol)
    report.results = result.describe()
    for note in result.notes:
        report.warnings.append(f"spectral:eigensolve {note}")
    if not result.reliable:
        report.warnings.append(
            "spectral:eigensolve kernel count not certified; see notes")
    if cfg.plot_dir:
        outdir = Path(cfg.plot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_eigenvalues_csv(result, outdir / "eigenvalues.csv")
        if result.eigenforms:
            write_harmonic_profile_csv(result, outdir / "harmonic_profile.csv")
    return report


# -- verify suite -----------------------------------------------------------


def _check_milnor_numbers():
    ring = milnor_ring(parse_polynomial("z^3/3", ("z",)))
    if ring.mu != 2:
        return False, f"cusp Milnor number {ring.mu} != 2"
    ring = milnor_ring(parse_polynomial("x^3+y^3", ("x", "y")))
    if ring.mu != 4:
        return False, f"x^3+y^3 Milnor number {ring.mu} != 4"
    return True, "mu(z^3/3)=2, mu(x^3+y^3)=4"


def _check_lattice_reduction():
    lattice = BrieskornLattice(parse_polynomial("z^3/3", ("z",)), order=6)
    el = lattice.reduce(parse_polynomial("z^2", ("z",)))
    if any(any(x != 0 for x in vec) for vec in el.coords.values()):
        return False, "[z^2] did not reduce to zero"
    el = lattice.reduce(parse_polynomial("z^3", ("z",)))
    expected = {1: (Fraction(-1), Fraction(0))}
    got = {k: v for k, v in el.coords.items()
           if any(x != 0 for x in v)}
    if got != expected:
        return False, f"[z^3] reduced to {got}, expected -u*[1]"
    return True, "reduce(z^2)=0 and reduce(z^3)=-u*[1]"


def _check_residue_pairing():
    lattice = BrieskornLattice(parse_polynomial("z^3/3", ("z",)), order=6)
    matrix = lattice.pairing_matrix()
    for p in range(2):
        for q in range(2):
            coeffs = matrix[p][q].coeffs
            if any(k >= 1 and v != 0 for k, v in coeffs.items()):
                return False, "u-corrections present on the cusp basis"
            res = coeffs.get(0, Fraction(0))
            if (p + q == 1) != (res != 0):
                return False, "residue matrix is not antidiagonal"
    quartic = BrieskornLattice(parse_polynomial("z^4/4", ("z",)), order=4)
    if quartic.residue_matrix_rank() != 3:
        return False, "z^4/4 residue rank != 3"
    return True, "cusp pairing antidiagonal and u-exact; quartic rank 3"


def _check_connection_spectrum():
    lattice = BrieskornLattice(parse_polynomial("z^3/3", ("z",)), order=6)
    spectrum = lattice.connection_spectrum()
    expected = [Fraction(1, 3), Fraction(2, 3)]
    if spectrum is None or sorted(spectrum) != expected:
        return False, f"u-connection eigenvalues {spectrum} != {{1/3, 2/3}}"
    return True, "u-connection eigenvalues {1/3, 2/3}"


def _check_wdvv():
    unfolding = universal_unfolding(parse_polynomial("z^3/3", ("z",)))
    data = build_flat_potential(unfolding, nt=4)
    residual = wdvv_residual(data)
    if residual != 0:
        return False, f"cusp WDVV residual {residual} != 0"
    single = universal_unfolding(parse_polynomial("z^2/2", ("z",)))
    pot = build_flat_potential(single, nt=4).potential
    cubic = {(3,): Fraction(1, 6)}
    if dict(pot.coeffs) != cubic:
        return False, f"node potential {pot} != s^3/6"
    return True, "cusp WDVV residual 0; node potential s^3/6"


def _check_ellipticity():
    report = check_quasihomogeneous_ellipticity(
        parse_polynomial("z^2/2", ("z",)))
    if report.verdict != "Satisfied":
        return False, f"z^2/2 verdict {report.verdict}"
    bad = check_laurent_nondegenerate(
        parse_polynomial("z+2+z^-1", ("z",), laurent=True))
    if bad.verdict != "Violated" or bad.witness is None:
        return False, f"z+2+z^-1 verdict {bad.verdict} without witness"
    good = check_laurent_nondegenerate(
        parse_polynomial("z+z^-1", ("z",), laurent=True))
    if good.verdict != "Satisfied":
        return False, f"z+z^-1 verdict {good.verdict}"
    return True, "quasi-homogeneous and torus checks give expected verdicts"


def _check_adjoints(seed: int):
    import numpy as np
    from .spectral import DiscreteForm, build_grid, inner
    from .spectral.operators import Operators
    rng = np.random.default_rng(seed)
    grid = build_grid(3.0, 17)
    f = parse_polynomial("z^3/3", ("z",))
    worst = 0.0
    for backend in ("fd1", "fd2", "spectral"):
        ops = Operators(grid, f, backend)
        for kind in ("dbar_f", "d_f", "partial_f"):
            a = DiscreteForm(grid, rng.standard_normal((4, 17, 17))
                             + 1j * rng.standard_normal((4, 17, 17)))
            b = DiscreteForm(grid, rng.standard_normal((4, 17, 17))
                             + 1j * rng.standard_normal((4, 17, 17)))
            lhs = inner(ops.apply(kind, a), b)
            rhs = inner(a, ops.apply(kind + "_star", b))
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
    if worst > 1e-12:
        return False, f"adjoint defect {worst:.2e}"
    return True, f"constructed adjoints exact (worst defect {worst:.2e})"


def _check_laplacian_flavors():
    import numpy as np
    from .spectral import build_grid
    from .spectral.operators import Operators
    grid = build_grid(3.0, 17)
    f = parse_polynomial("z^3/3", ("z",))
    ops = Operators(grid, f, "fd2")
    for degree in (0, 1, 2):
        dol = ops.laplacian_matrix("dbar_f", degree)
        hol = ops.laplacian_matrix("partial_f", degree)
        diff = abs(dol - hol)
        if not isinstance(diff, np.ndarray):
            diff = diff.toarray()
            dol = abs(dol).toarray()
        rel = diff.max() / abs(dol).max()
        if rel > 1e-12:
            return False, (f"degree {degree}: flavor Laplacians differ "
                           f"by {rel:.2e} relative")
    return True, ("antiholomorphic- and holomorphic-twist Laplacians agree "
                  "to rounding")


def _check_hodge(seed: int):
    import numpy as np
    from .spectral import DiscreteForm, build_grid, hodge_decompose
    from .spectral.analysis import SpectralContext
    f = parse_polynomial("z^2/2", ("z",))
    grid = build_grid(4.0, 33)
    ctx = SpectralContext(f, grid, backend="fd1", seed=seed)
    rng = np.random.default_rng(seed)
    worst_residual = worst_cross = 0.0
    for _ in range(3):
        form = DiscreteForm(grid, rng.standard_normal((4, 33, 33))
                            + 1j * rng.standard_normal((4, 33, 33)))
        split = hodge_decompose(None, None, form, context=ctx)
        worst_residual = max(worst_residual, split.relative_residual)
        worst_cross = max(worst_cross, split.max_cross)
    if worst_residual > 1e-9 or worst_cross > 1e-9:
        return False, (f"residual {worst_residual:.2e}, "
                       f"cross {worst_cross:.2e}")
    return True, (f"split residual {worst_residual:.2e}, "
                  f"orthogonality {worst_cross:.2e}")


def _check_kernel_count(seed: int):
    from .spectral import build_grid, eigensolve_lowest
    f = parse_polynomial("z^2/2", ("z",))
    base = eigensolve_lowest(f, build_grid(4.0, 65), degree=1, k=6,
                             backend="fd1", seed=seed)
    bigger = eigensolve_lowest(f, build_grid(5.0, 81), degree=1, k=6,
                               backend="fd1", seed=seed)
    if base.kernel_dim != 1 or bigger.kernel_dim != 1:
        return False, (f"kernel dims {base.kernel_dim} (R=4), "
                       f"{bigger.kernel_dim} (R=5); expected 1")
    if not (base.reliable and bigger.reliable):
        return False, "kernel count not certified"
    return True, "degree-1 kernel is 1-dimensional and stable under R, m"


def _cmd_verify(cfg: RunConfig) -> Report:
    report = Report("verify", cfg)
    checks = [
        ("groebner:milnor-number", _check_milnor_numbers),
        ("brieskorn:reduction", _check_lattice_reduction),
        ("brieskorn:residue-pairing", _check_residue_pairing),
        ("brieskorn:u-connection", _check_connection_spectrum),
        ("frobenius:wdvv", _check_wdvv),
        ("ellipticity:verdicts", _check_ellipticity),
        ("spectral:adjoints", lambda: _check_adjoints(cfg.seed)),
        ("spectral:flavor-laplacians", _check_laplacian_flavors),
        ("spectral:hodge-split", lambda: _check_hodge(cfg.seed)),
        ("spectral:kernel-count", lambda: _check_kernel_count(cfg.seed)),
    ]
    ledger = []
    all_passed = True
    for name, check in checks:
        try:
            passed, detail = check()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        ledger.append({"check": name, "passed": passed, "detail": detail})
        all_passed = all_passed and passed
        if not passed:
            report.warnings.append(f"{name} failed: {detail}")
    report.warnings.append(
        "spectral:kernel-count verdict is numeric-only evidence")
    report.results = {"checks": ledger, "all_passed": all_passed}
    report.exit_status = 0 if all_passed else 1
    return report


_COMMANDS = {
    "analyze": _cmd_analyze,
    "pairing": _cmd_pairing,
    "frobenius": _cmd_frobenius,
    "spectrum": _cmd_spectrum,
    "verify": _cmd_verify,
}


def execute_command(cfg: RunConfig) -> Report:
    return _COMMANDS[cfg.command](cfg)


# -- report emission ---------------------------------------------------------


def _render_value(value, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key in value:
            sub = value[key]
            if isinstance(sub, (dict, list)) and sub:
                lines.append(f"{pad}{key}:")
                lines.extend(_render_value(sub, indent + 1))
            else:
                lines.append(f"{pad}{key}: {sub}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_render_value(item, indent + 1))
            else:
                lines.append(f"{pad}- {item}")
    else:
        lines.append(f"{pad}{value}")
    return lines


def emit_report(report: Report, cfg: RunConfig) -> None:
    print(f"[{report.command}]")
    body = jsonable(report.results)
    for line in _render_value(body):
        print(line)
    for warning in report.warnings:
        print(f"warning: {warning}")
    if cfg.out:
        dump_json(report.describe(), cfg.out)
        print(f"report written to {cfg.out}")
    if cfg.plot_dir and report.tables:
        outdir = Path(cfg.plot_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, text in report.tables.items():
            (outdir / name).write_text(text)
            print(f"plot data written to {outdir / name}")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        report = execute_command(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except PolyError as exc:
        print(f"usage error: [{cfg.command}] {exc}", file=sys.stderr)
        return 2
    except PrecondError as exc:
        print(f"precondition unmet: [{cfg.command}] {exc}", file=sys.stderr)
        return 3
    except ComputeError as exc:
        print(f"computation failed: [{cfg.command}] {exc}", file=sys.stderr)
        return 1
    emit_report(report, cfg)
    return report.exit_status


if __name__ == "__main__":
    raise SystemExit(main())

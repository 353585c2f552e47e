"""Command-line front end for the effilab toolkit.

Every record-producing command emits CSV (default) or JSON-lines with
all floats rendered at 17 significant digits so downstream tools can
reproduce internal values exactly.  Exit codes: 0 success, 1 usage
error, 2 numerical failure (quadrature / Newton / bracket), 3
verification-suite failure.

A flat ``key=value`` config file may supply any long flag (dashes or
underscores); flags given on the command line override file values.
When ``--seed`` is absent, the EFFILAB_SEED environment variable is
used, defaulting to 0.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .densities import Family, LocationDensity
from .errors import (BracketError, NumericalError, SimulationError,
                     VerificationError)
from .expansions import (cf_quantile, deficiency, epsilon_tilde,
                         std_normal_quantile)
from .functionals import (DEFAULT_QUADRATURE, DomainMap, QuadratureSpec,
                          cs_gap, eta_set, expectation, identity_suite,
                          third_order_coeff)
from .mle_simulator import SimConfig, empirical_quantile, simulate
from .np_envelope import solve_epsilon

__all__ = ["main"]

_FAMILIES = {
    "gumbel": Family.GUMBEL_MIN,
    "gumbel-min": Family.GUMBEL_MIN,
    "normal": Family.NORMAL,
    "logistic": Family.LOGISTIC,
}

_SCAN_COLUMNS = ("u", "v", "n", "z_u", "z_v", "cf_v", "cf_u", "eps_tilde",
                 "order_one", "order_three_halves", "total")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures map to exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _fmt(value) -> str:
    """Render one record field; floats at 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _json_line(record: dict) -> str:
    parts = []
    for key, value in record.items():
        if isinstance(value, str):
            rendered = json.dumps(value)
        else:
            rendered = _fmt(value)
        parts.append(f"{json.dumps(key)}: {rendered}")
    return "{" + ", ".join(parts) + "}"


def _emit(args, records: list[dict]) -> None:
    """Write records as CSV or JSON lines to --out or standard output."""
    out = sys.stdout
    close = False
    if args.out:
        out = open(args.out, "w", encoding="utf-8", newline="")
        close = True
    try:
        if args.format == "json":
            for rec in records:
                out.write(_json_line(rec) + "\n")
        else:
            writer = csv.writer(out, lineterminator="\n")
            if records:
                writer.writerow(records[0].keys())
            for rec in records:
                writer.writerow(_fmt(v) for v in rec.values())
    finally:
        if close:
            out.close()


def _density(args) -> LocationDensity:
    return LocationDensity(family=_FAMILIES[args.dist],
                           alpha=args.alpha, beta=args.beta)


def _quadrature(args) -> QuadratureSpec:
    if args.rel_tol is None and args.abs_tol is None:
        return DEFAULT_QUADRATURE
    return QuadratureSpec(
        rel_tol=DEFAULT_QUADRATURE.rel_tol if args.rel_tol is None else args.rel_tol,
        abs_tol=DEFAULT_QUADRATURE.abs_tol if args.abs_tol is None else args.abs_tol,
    )


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("EFFILAB_SEED", "0"))


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(
            f"probability must lie strictly in (0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _require_u_lt_v(u: float, v: float) -> None:
    if not u < v:
        raise _UsageError(f"need u < v, got u={u}, v={v}")


# ---------------------------------------------------------------------------
# command handlers


def _cmd_etas(args) -> int:
    d = _density(args)
    e = eta_set(d, _quadrature(args))
    _emit(args, [{
        "family": args.dist, "alpha": d.alpha, "beta": d.beta,
        "I": e.I, "eta2": e.eta2, "eta3": e.eta3, "eta4": e.eta4,
        "eta5": e.eta5, "eta6": e.eta6,
    }])
    return 0


def _cmd_cf_quantile(args) -> int:
    d = _density(args)
    e = eta_set(d, _quadrature(args))
    _emit(args, [{
        "family": args.dist, "alpha": d.alpha, "beta": d.beta,
        "n": args.n, "v": args.v,
        "z_v": std_normal_quantile(args.v),
        "cf": cf_quantile(e, args.n, args.v),
    }])
    return 0


def _cmd_epsilon(args) -> int:
    _require_u_lt_v(args.u, args.v)
    d = _density(args)
    e = eta_set(d, _quadrature(args))
    _emit(args, [{
        "family": args.dist, "alpha": d.alpha, "beta": d.beta,
        "n": args.n, "u": args.u, "v": args.v,
        "z_u": std_normal_quantile(args.u),
        "z_v": std_normal_quantile(args.v),
        "eps_tilde": epsilon_tilde(e, args.n, args.u, args.v),
    }])
    return 0


def _cmd_deficiency(args) -> int:
    _require_u_lt_v(args.u, args.v)
    d = _density(args)
    e = eta_set(d, _quadrature(args))
    rep = deficiency(e, args.n, args.u, args.v)
    _emit(args, [{
        "family": args.dist, "alpha": d.alpha, "beta": d.beta,
        "n": args.n, "u": args.u, "v": args.v,
        "z_u": rep.z_u, "z_v": rep.z_v,
        "order_half": rep.order_half,
        "order_one": rep.order_one,
        "order_three_halves": rep.order_three_halves,
        "total": rep.total,
    }])
    return 0


def _cmd_np_solve(args) -> int:
    _require_u_lt_v(args.u, args.v)
    d = _density(args)
    seed = _seed(args)
    sol = solve_epsilon(d, args.n, args.u, args.v, args.reps, seed,
                        quadrature=_quadrature(args))
    _emit(args, [{
        "family": args.dist, "alpha": d.alpha, "beta": d.beta,
        "n": sol.n, "u": args.u, "v": args.v,
        "reps": sol.reps, "seed": seed,
        "epsilon": sol.epsilon, "log_c": sol.log_c,
        "u_hat": sol.u_hat, "v_hat": sol.v_hat,
        "se_u": sol.se_u, "se_v": sol.se_v,
        "a_n": sol.a_n, "widened": sol.widened, "steps": len(sol.trace),
    }])
    return 0


def _cmd_simulate(args) -> int:
    d = _density(args)
    seed = _seed(args)
    cfg = SimConfig(density=d, n=args.n, reps=args.reps,
                    theta=args.theta, seed=seed)
    result = simulate(cfg)
    records = []
    for u in args.probe:
        if not 0.0 < u < 1.0:
            raise _UsageError(f"probe probabilities must lie in (0, 1), got {u}")
        records.append({
            "family": args.dist, "alpha": d.alpha, "beta": d.beta,
            "n": args.n, "reps": args.reps, "seed": seed,
            "theta": args.theta,
            "newton_failures": result.newton_failures,
            "u": u, "quantile": empirical_quantile(result, u),
        })
    _emit(args, records)
    return 0


def _cmd_scan(args) -> int:
    d = _density(args)
    e = eta_set(d, _quadrature(args))
    records = []
    for n in args.n:
        if n < 1:
            raise _UsageError(f"n values must be positive, got {n}")
        for u in args.u:
            for v in args.v:
                if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
                    raise _UsageError(
                        f"scan probabilities must lie in (0, 1), got u={u}, v={v}")
                if u >= v:
                    continue  # off-grid corner; documented skip
                rep = deficiency(e, n, u, v)
                records.append(dict(zip(_SCAN_COLUMNS, (
                    u, v, n, rep.z_u, rep.z_v,
                    cf_quantile(e, n, v), cf_quantile(e, n, u),
                    epsilon_tilde(e, n, u, v),
                    rep.order_one, rep.order_three_halves, rep.total,
                ))))
    _emit(args, records)
    return 0


# ---------------------------------------------------------------------------
# verify suite


def _verify_checks(quad: QuadratureSpec):
    """Yield (name, ok, detail) for the fast invariant suite."""
    families = {
        "gumbel": LocationDensity(Family.GUMBEL_MIN),
        "normal": LocationDensity(Family.NORMAL),
        "logistic": LocationDensity(Family.LOGISTIC),
    }

    two_sided = QuadratureSpec(rel_tol=quad.rel_tol, abs_tol=quad.abs_tol,
                               domain_map=DomainMap.TWO_SIDED_EXPONENTIAL)
    worst = 0.0
    for fam in Family:
        for alpha in (-1.0, 0.0, 2.0):
            for beta in (0.5, 1.0, 3.0):
                d = LocationDensity(fam, alpha=alpha, beta=beta)
                worst = max(worst, abs(expectation(d, lambda x: 1.0, two_sided) - 1.0))
    yield ("normalization (all families, alpha/beta grid)",
           worst <= 1e-10, f"max |integral - 1| = {worst:.3e}")

    golden = {"I": 1.0, "eta2": 5.0, "eta3": -2.0, "eta4": 9.0,
              "eta5": -44.0, "eta6": -13.0}
    e_gum = eta_set(families["gumbel"], quad)
    dev = max(abs(getattr(e_gum, k) - val) for k, val in golden.items())
    yield ("minimum-Gumbel golden functionals",
           dev <= 1e-8, f"max deviation = {dev:.3e}")

    for name, d in families.items():
        res = identity_suite(d, quad).max_abs()
        yield (f"integration-by-parts identities ({name})",
               res <= 1e-8, f"max residual = {res:.3e}")

    gaps = {name: cs_gap(eta_set(d, quad)) for name, d in families.items()}
    yield ("quadratic-gap zero at the equality family",
           abs(gaps["gumbel"]) <= 1e-10, f"gap = {gaps['gumbel']:.3e}")
    yield ("quadratic-gap zero for the normal family",
           abs(gaps["normal"]) <= 1e-10, f"gap = {gaps['normal']:.3e}")
    yield ("quadratic-gap value for the logistic family",
           abs(gaps["logistic"] - 0.2) <= 1e-8, f"gap = {gaps['logistic']:.12f}")
    yield ("quadratic gap nonnegative everywhere tested",
           all(g >= -1e-10 for g in gaps.values()),
           "gaps: " + ", ".join(f"{k}={v:.3e}" for k, v in gaps.items()))

    worst = 0.0
    for name, d in families.items():
        e = eta_set(d, quad)
        worst = max(worst, abs(third_order_coeff(e) + 12.0 * cs_gap(e)))
    yield ("third-order coefficient = -12 x quadratic gap",
           worst <= 1e-9, f"max |mismatch| = {worst:.3e}")

    worst = 0.0
    for n in (10, 100, 1000):
        for u in (0.05, 0.1, 0.3):
            for v in (0.6, 0.8, 0.975):
                worst = max(worst, abs(deficiency(e_gum, n, u, v).total))
    yield ("expansion difference cancels at the equality family",
           worst <= 1e-12, f"max |total| = {worst:.3e}")

    worst = 0.0
    for name, d in families.items():
        e = eta_set(d, quad)
        for n in (10, 100):
            for u in (0.05, 0.2, 0.4):
                worst = max(worst, abs(deficiency(e, n, u, 1.0 - u).total))
    yield ("expansion difference cancels at mirrored quantiles",
           worst <= 1e-12, f"max |total| = {worst:.3e}")

    e_norm = eta_set(families["normal"], quad)
    dev = abs(epsilon_tilde(e_norm, 50, 0.1, 0.8)
              - (std_normal_quantile(0.8) - std_normal_quantile(0.1)))
    yield ("envelope expansion exact for the normal family",
           dev <= 1e-12, f"|deviation| = {dev:.3e}")


def _cmd_verify(args) -> int:
    failures = 0
    for name, ok, detail in _verify_checks(_quadrature(args)):
        tag = "ok  " if ok else "FAIL"
        print(f"{tag} - {name} ({detail})")
        failures += 0 if ok else 1

    # Informational only: the truncated quantile expansion is not
    # guaranteed monotone at small n; report, never fail.
    e_gum = eta_set(LocationDensity(Family.GUMBEL_MIN), _quadrature(args))
    grid = [i / 1000.0 for i in range(1, 1000)]
    values = [cf_quantile(e_gum, 10, v) for v in grid]
    inversions = sum(1 for a, b in zip(values, values[1:]) if b < a)
    print(f"note - quantile expansion monotone on (0.001..0.999, n=10): "
          f"{'yes' if inversions == 0 else f'no ({inversions} inversions)'}")

    if failures:
        print(f"{failures} verification check(s) failed")
        return 3
    print("all verification checks passed")
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(p: _Parser, *, dist: bool = True) -> None:
    if dist:
        p.add_argument("--dist", choices=sorted(_FAMILIES), default="gumbel",
                       help="density family (default: gumbel)")
        p.add_argument("--alpha", type=float, default=0.0,
                       help="location offset of the base density (default 0)")
        p.add_argument("--beta", type=float, default=1.0,
                       help="scale, must be > 0 (default 1)")
    p.add_argument("--rel-tol", type=float, default=None,
                   help="quadrature relative tolerance override")
    p.add_argument("--abs-tol", type=float, default=None,
                   help="quadrature absolute tolerance override")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="record output format (default csv)")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker hint; engines are vectorized in-process, so "
                        "results never depend on this value")
    p.add_argument("--config", default=None,
                   help="flat key=value file supplying defaults for any flag")


def _build_parser() -> _Parser:
    parser = _Parser(prog="effilab",
                     description="Expansions, envelopes and Monte Carlo checks "
                                 "for the standardized location MLE.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("etas", help="Fisher information and cumulant ratios")
    _add_common(p)
    p.set_defaults(handler=_cmd_etas)

    p = sub.add_parser("cf-quantile", help="truncated quantile expansion")
    _add_common(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--v", type=_probability, required=True)
    p.set_defaults(handler=_cmd_cf_quantile)

    p = sub.add_parser("epsilon", help="envelope-width expansion")
    _add_common(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--u", type=_probability, required=True)
    p.add_argument("--v", type=_probability, required=True)
    p.set_defaults(handler=_cmd_epsilon)

    p = sub.add_parser("deficiency",
                       help="per-order expansion difference report")
    _add_common(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--u", type=_probability, required=True)
    p.add_argument("--v", type=_probability, required=True)
    p.set_defaults(handler=_cmd_deficiency)

    p = sub.add_parser("np-solve",
                       help="Monte Carlo solve of the threshold system")
    _add_common(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--u", type=_probability, required=True)
    p.add_argument("--v", type=_probability, required=True)
    p.add_argument("--reps", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: EFFILAB_SEED or 0)")
    p.set_defaults(handler=_cmd_np_solve)

    p = sub.add_parser("simulate", help="standardized-MLE Monte Carlo")
    _add_common(p)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--reps", type=_positive_int, default=100_000)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: EFFILAB_SEED or 0)")
    p.add_argument("--probe", type=_float_list, default=(0.1, 0.5, 0.9),
                   help="comma-separated quantile probabilities to report")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("verify", help="fast analytic invariant suite")
    _add_common(p)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("scan",
                       help="Cartesian (u, v, n) grid of expansion records; "
                            "cells with u >= v are skipped")
    _add_common(p)
    p.add_argument("--n", type=_int_list, default=(10, 100, 1000),
                   help="comma-separated sample sizes")
    p.add_argument("--u", type=_float_list, default=(0.05, 0.1, 0.3),
                   help="comma-separated lower probabilities")
    p.add_argument("--v", type=_float_list, default=(0.6, 0.8, 0.975),
                   help="comma-separated upper probabilities")
    p.set_defaults(handler=_cmd_scan)

    return parser


def _config_args(path: str) -> list[str]:
    """Translate a key=value config file into a flag list."""
    flags: list[str] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(
                    f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            key = key.strip().replace("_", "-")
            if key == "config":
                raise _UsageError(f"{path}:{lineno}: config cannot nest itself")
            flags.extend([f"--{key}", value.strip()])
    return flags


def _parse(argv: list[str]):
    parser = _build_parser()
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
            break
        if token.startswith("--config="):
            path = token.split("=", 1)[1]
            break
    if path is not None:
        try:
            extra = _config_args(path)
        except OSError as exc:
            raise _UsageError(f"cannot read config file: {exc}") from exc
        for i, token in enumerate(argv):
            if not token.startswith("-"):
                # Splice config-derived flags directly after the command
                # name; explicit command-line flags come later and win.
                argv = argv[:i + 1] + extra + argv[i + 1:]
                break
        else:
            raise _UsageError("--config requires a command")
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, SimulationError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

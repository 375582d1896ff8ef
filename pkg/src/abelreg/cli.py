"""Command-line front end.

Subcommands read one JSON configuration file and write CSV tables and a
JSON summary into the output directory. Exit codes: 0 when every check
passes, 2 when a regularity or residual check fails, 1 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from abelreg import abelcore, oracle, regprobe
from abelreg.errors import AbelError, RegularityViolation, StageError
from abelreg.functions import Interval, from_callable, power_polynomial, zero
from abelreg.singular import left_integral_identity_check

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_REGULARITY = 2

DEFAULT_TOLERANCES = {
    "residual": 1e-6,
    "representation": 1e-6,
    "identity": 1e-6,
    "ctilde": 1e-5,
    "oracle": 1e-2,
    "compare": 1e-2,
}


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


# {{{ configuration


@dataclass(frozen=True)
class RunConfig:
    interval: Interval
    alpha: float
    beta: float
    mu: float
    sigma: float
    f: dict[str, Any]
    c: float | None
    output_points: int
    ladder: tuple[int, ...]
    tolerances: dict[str, float] = field(default_factory=dict)
    source: str = "<config>"

    def problem(self) -> abelcore.ProblemSpec:
        return build_problem(self)


def _require(cfg: dict, key: str, source: str, where: str = "") -> Any:
    if key not in cfg:
        raise ConfigError(f"{source}: missing required key '{where}{key}'")
    return cfg[key]


def _number(value: Any, key: str, source: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{source}: key '{key}' must be a number, got {value!r}")
    if not np.isfinite(value):
        raise ConfigError(f"{source}: key '{key}' must be finite, got {value!r}")
    return float(value)


def load_config(path: str | os.PathLike) -> RunConfig:
    source = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{source}: cannot read config: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return parse_config(raw, source)


def parse_config(raw: dict, source: str = "<config>") -> RunConfig:
    ends = _require(raw, "interval", source)
    if not (isinstance(ends, list) and len(ends) == 2):
        raise ConfigError(f"{source}: key 'interval' must be a list [a, b]")
    a, b = (_number(v, "interval", source) for v in ends)
    if not a < b:
        raise ConfigError(f"{source}: key 'interval' requires a < b, got [{a}, {b}]")

    alpha = _number(_require(raw, "alpha", source), "alpha", source)
    beta = _number(_require(raw, "beta", source), "beta", source)
    mu = _number(_require(raw, "mu", source), "mu", source)
    sigma = _number(_require(raw, "sigma", source), "sigma", source)
    try:
        abelcore.validate_coefficients(alpha, beta, mu)
    except AbelError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if not 0.0 < sigma < 1.0:
        raise ConfigError(f"{source}: key 'sigma' must lie in (0, 1), got {sigma}")

    fdesc = _require(raw, "f", source)
    if not isinstance(fdesc, dict):
        raise ConfigError(f"{source}: key 'f' must be an object")
    family = _require(fdesc, "family", source, "f.")
    if family not in ("power-poly", "zero", "manufactured"):
        raise ConfigError(
            f"{source}: key 'f.family' must be one of power-poly, zero, manufactured; got {family!r}"
        )
    c = raw.get("c")
    if c is not None:
        c = _number(c, "c", source)

    grid = raw.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError(f"{source}: key 'grid' must be an object")
    npts = grid.get("output_points", 65)
    if isinstance(npts, bool) or not isinstance(npts, int) or npts < 2:
        raise ConfigError(f"{source}: key 'grid.output_points' must be an integer >= 2")
    ladder = grid.get("ladder", [64, 128, 256, 512])
    if not (isinstance(ladder, list) and ladder and all(isinstance(n, int) and n >= 16 for n in ladder)):
        raise ConfigError(f"{source}: key 'grid.ladder' must be a list of integers >= 16")

    tolerances = dict(DEFAULT_TOLERANCES)
    for key, val in raw.get("tolerances", {}).items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"{source}: unknown key 'tolerances.{key}'")
        tolerances[key] = _number(val, f"tolerances.{key}", source)

    return RunConfig(
        Interval(a, b), alpha, beta, mu, sigma, fdesc, c, npts, tuple(ladder), tolerances, source
    )


def _coefficients(desc: dict, source: str) -> list[float]:
    coefs = desc.get("coefficients", [1.0])
    if not (isinstance(coefs, list) and coefs):
        raise ConfigError(f"{source}: key 'f.coefficients' must be a non-empty list")
    return [_number(v, "f.coefficients", source) for v in coefs]


def _manufactured(cfg: RunConfig) -> oracle.ManufacturedSolution:
    desc, source = cfg.f, cfg.source
    q_a = _number(_require(desc, "q_a", source, "f."), "f.q_a", source)
    q_b = _number(_require(desc, "q_b", source, "f."), "f.q_b", source)
    try:
        return oracle.manufacture_solution(
            cfg.interval, cfg.mu, q_a, q_b, _coefficients(desc, source), cfg.alpha, cfg.beta
        )
    except AbelError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def build_problem(cfg: RunConfig) -> abelcore.ProblemSpec:
    desc, source = cfg.f, cfg.source
    family = desc["family"]
    c = 0.0 if cfg.c is None else cfg.c
    if family == "zero":
        f = zero(cfg.interval)
    elif family == "power-poly":
        p_a = _number(desc.get("p_a", 0.0), "f.p_a", source)
        p_b = _number(desc.get("p_b", 0.0), "f.p_b", source)
        if p_a <= -1.0 or p_b <= -1.0:
            raise ConfigError(f"{source}: keys 'f.p_a' and 'f.p_b' must exceed -1")
        f = power_polynomial(cfg.interval, p_a, p_b, _coefficients(desc, source))
    else:
        made = _manufactured(cfg)
        f = made.f
        c = made.c if cfg.c is None else c
    return abelcore.ProblemSpec(cfg.interval, cfg.alpha, cfg.beta, cfg.mu, f, c)


def manufactured_companion(cfg: RunConfig) -> oracle.ManufacturedSolution:
    """Problem with a known solution at the configured coefficients."""
    if cfg.f["family"] == "manufactured":
        return _manufactured(cfg)
    q = 0.5 * (1.0 + cfg.mu) + 0.1
    return oracle.manufacture_solution(
        cfg.interval, cfg.mu, q, q, [1.0, 0.5, -0.25], cfg.alpha, cfg.beta
    )


# }}}


# {{{ output


def fmt(x: float) -> str:
    """Shortest round-trip representation, at most 17 significant digits."""
    x = float(x)
    if x == 0.0:
        return "0.0"
    return repr(x)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_outputs(outdir: Path, files: dict[str, str]) -> None:
    """Write every file via a temporary sibling and an atomic rename."""
    outdir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=outdir)
            staged.append((tmp, outdir / name))
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(text)
        for tmp, dest in staged:
            os.replace(tmp, dest)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _report_dict(rep: regprobe.RegularityReport) -> dict:
    return {
        "endpoint": rep.endpoint,
        "fitted_exponent": rep.fitted_exponent,
        "predicted_exponent": rep.predicted_exponent,
        "fit_r2": rep.fit_r2,
        "window": list(rep.window),
        "verdict": rep.verdict,
    }


# }}}


# {{{ commands


def _solve_bundle(cfg: RunConfig, spec: abelcore.ProblemSpec):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        bundle = abelcore.solve(spec, cfg.sigma)
    return bundle, sorted({str(w.message) for w in caught})


def _h_star_dict(f) -> dict:
    check = regprobe.verify_H_star(f)
    # an identically zero field is trivially integrable; its fits are inconclusive
    passed = check.passed or f.is_zero
    return {"left": _report_dict(check.left), "right": _report_dict(check.right), "passed": passed}


def _lower_bound_dict(f) -> dict:
    # the declared exponent is a lower bound; cancellations may raise the true order
    rep = regprobe.fit_endpoint_exponent(f, "left")
    out = _report_dict(rep)
    if rep.verdict != "inconclusive":
        ok = rep.fitted_exponent >= rep.predicted_exponent - regprobe.EXPONENT_TOL
        out["verdict"] = "pass" if ok and rep.fit_r2 >= regprobe.MIN_R2 else "fail"
    return out


def _regularity(bundle) -> dict:
    return {
        "K_sigma": _h_star_dict(bundle.K_sigma),
        "J": _h_star_dict(bundle.J),
        "psi_left": _lower_bound_dict(bundle.psi),
    }


def cmd_solve(cfg: RunConfig, outdir: Path, args) -> tuple[int, dict]:
    spec = cfg.problem()
    tol = cfg.tolerances["residual"] * args.tol
    try:
        bundle, notes = _solve_bundle(cfg, spec)
    except StageError as exc:
        if isinstance(exc.cause, RegularityViolation):
            summary = {"command": "solve", "status": "regularity_violation", "error": str(exc)}
            write_outputs(outdir, {"summary.json": dumps_json(summary)})
            return EXIT_REGULARITY, summary
        raise

    npts = args.grid if args.grid else cfg.output_points
    x = spec.interval.probes(npts)
    rows = zip(x, bundle.J(x), bundle.K_sigma(x), bundle.psi(x))
    table = csv_text(["x", "J", "K_sigma", "psi"], list(rows))

    regularity = _regularity(bundle)
    residual_ok = bundle.residual <= tol * max(1.0, abs(bundle.c_hat))
    passed = regularity["K_sigma"]["passed"] and regularity["J"]["passed"] and residual_ok
    summary = {
        "command": "solve",
        "interval": [spec.interval.a, spec.interval.b],
        "alpha": spec.alpha,
        "beta": spec.beta,
        "mu": spec.mu,
        "sigma": bundle.sigma,
        "A": bundle.angle.A,
        "B": bundle.angle.B,
        "theta": bundle.angle.theta,
        "theta_norm": bundle.angle.theta_norm,
        "representation": {
            "index": bundle.choice.index,
            "exp_a": bundle.choice.exp_a,
            "exp_b": bundle.choice.exp_b,
        },
        "residual": bundle.residual,
        "residual_tolerance": tol,
        "residual_ok": residual_ok,
        "c_hat": bundle.c_hat,
        "solvability_moment": abelcore.solvability_moment(spec),
        "regularity": regularity,
        "warnings": notes,
        "status": "pass" if passed else "regularity_violation",
        "files": ["solution.csv", "summary.json"],
    }
    write_outputs(outdir, {"solution.csv": table, "summary.json": dumps_json(summary)})
    return (EXIT_OK if passed else EXIT_REGULARITY), summary


def _angle_window_check(n: int = 1000, seed: int = 20240101) -> float:
    """Worst violation of the angle window over deterministic random draws."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for alpha, mu in zip(rng.uniform(1e-3, 1 - 1e-3, n), rng.uniform(1e-3, 1 - 1e-3, n)):
        ang = abelcore.compute_angle(alpha, 1.0 - alpha, mu)
        ratio = (ang.A - 1j * ang.B) / (ang.A + 1j * ang.B)
        worst = max(worst, abs(np.exp(1j * ang.theta) - ratio))
        if not mu < ang.theta_norm < 1.0:
            return float("inf")
    return float(worst)


def cmd_verify(cfg: RunConfig, outdir: Path, args) -> tuple[int, dict]:
    scale = args.tol
    tols = {k: v * scale for k, v in cfg.tolerances.items()}
    interval = cfg.interval
    made = manufactured_companion(cfg)
    mspec = made.spec
    angle = abelcore.compute_angle(cfg.alpha, cfg.beta, cfg.mu)
    checks = {}

    def record(name: str, value: float, tol: float) -> None:
        checks[name] = {"discrepancy": value, "tolerance": tol, "passed": bool(value <= tol)}

    record("angle_window", _angle_window_check(), 1e-12 * scale)

    choice = abelcore.select_representation(cfg.sigma, angle, cfg.mu)
    violation = max(
        0.0,
        choice.exp_a - cfg.sigma,
        choice.exp_b - cfg.sigma,
        (cfg.sigma - 1.0) - choice.exp_a,
        (cfg.sigma - 1.0) - choice.exp_b,
    )
    record("case_admissibility", violation, 0.0)

    record("representation_equivalence", abelcore.representation_spread(mspec), tols["representation"])

    g = from_callable(
        interval,
        lambda t: np.exp((t - interval.a) / interval.length) * np.cos(2 * (t - interval.a) / interval.length),
    )
    record("left_right_identity", left_integral_identity_check(g, cfg.mu), tols["identity"])
    record("ctilde_identity", abelcore.ctilde_check(interval, cfg.alpha, cfg.beta, cfg.mu), tols["ctilde"])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bundle = abelcore.solve(mspec, cfg.sigma)
    n = args.grid if args.grid else 256
    colloc = oracle.collocation_solve(mspec, n)
    record("oracle_comparison", oracle.relative_l2_error(colloc, bundle.psi, interval), tols["oracle"])
    record("manufactured_residual", bundle.residual, tols["residual"])

    passed = all(c["passed"] for c in checks.values())
    summary = {
        "command": "verify",
        "alpha": cfg.alpha,
        "beta": cfg.beta,
        "mu": cfg.mu,
        "sigma": cfg.sigma,
        "theta_norm": angle.theta_norm,
        "tolerance_scale": scale,
        "collocation_n": n,
        "checks": checks,
        "status": "pass" if passed else "fail",
        "files": ["verify.json"],
    }
    write_outputs(outdir, {"verify.json": dumps_json(summary)})
    return (EXIT_OK if passed else EXIT_REGULARITY), summary


def cmd_compare(cfg: RunConfig, outdir: Path, args) -> tuple[int, dict]:
    spec = cfg.problem()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        bundle = abelcore.solve(spec, cfg.sigma)
    ladder = (args.grid,) if args.grid else cfg.ladder
    rows = []
    for n in ladder:
        sol = oracle.collocation_solve(spec, n)
        rows.append((n, oracle.relative_l2_error(sol, bundle.psi, spec.interval), sol.condition))
    bound = cfg.tolerances["compare"] * args.tol
    passed = rows[-1][1] <= bound
    table = csv_text(["n", "relative_l2_error", "condition_estimate"], [(str(n), e, k) for n, e, k in rows])
    summary = {
        "command": "compare",
        "bound": bound,
        "rows": [{"n": n, "relative_l2_error": e, "condition_estimate": k} for n, e, k in rows],
        "status": "pass" if passed else "fail",
        "files": ["compare.csv", "compare.json"],
    }
    write_outputs(outdir, {"compare.csv": table, "compare.json": dumps_json(summary)})
    return (EXIT_OK if passed else EXIT_REGULARITY), summary


def cmd_probe(cfg: RunConfig, outdir: Path, args) -> tuple[int, dict]:
    spec = cfg.problem()
    bundle, notes = _solve_bundle(cfg, spec)
    regularity = _regularity(bundle)
    rhs = {
        "left": _report_dict(regprobe.fit_endpoint_exponent(spec.f, "left")) if not spec.f.is_zero else None,
        "right": _report_dict(regprobe.fit_endpoint_exponent(spec.f, "right")) if not spec.f.is_zero else None,
    }
    passed = regularity["K_sigma"]["passed"] and regularity["J"]["passed"]
    summary = {
        "command": "probe",
        "sigma": cfg.sigma,
        "representation": bundle.choice.index,
        "f": rhs,
        "regularity": regularity,
        "warnings": notes,
        "status": "pass" if passed else "regularity_violation",
        "files": ["probe.json"],
    }
    write_outputs(outdir, {"probe.json": dumps_json(summary)})
    return (EXIT_OK if passed else EXIT_REGULARITY), summary


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "compare": cmd_compare, "probe": cmd_probe}


# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abelreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH", help="JSON problem configuration")
        p.add_argument("--out", default="out", metavar="DIR", help="output directory")
        p.add_argument("--grid", type=int, default=None, metavar="N",
                       help="output points (solve) or collocation size (verify, compare)")
        p.add_argument("--tol", type=float, default=1.0, metavar="X",
                       help="multiplier applied to every tolerance")
        p.add_argument("--json", action="store_true", help="print the JSON summary to stdout")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None and not (np.isfinite(args.tol) and args.tol > 0):
        print(f"abelreg: --tol must be positive, got {args.tol}", file=sys.stderr)
        return EXIT_INPUT
    if args.grid is not None and args.grid < 2:
        print(f"abelreg: --grid must be at least 2, got {args.grid}", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = load_config(args.config)
        code, summary = COMMANDS[args.command](cfg, Path(args.out), args)
    except ConfigError as exc:
        print(f"abelreg: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RegularityViolation as exc:
        print(f"abelreg: regularity violation: {exc}", file=sys.stderr)
        return EXIT_REGULARITY
    except AbelError as exc:
        print(f"abelreg: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        sys.stdout.write(dumps_json(summary))
    return code


if __name__ == "__main__":
    sys.exit(main())

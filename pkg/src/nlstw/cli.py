"""Batch command-line front end.

Commands
--------
solve     run one constrained minimization, write the field + sidecar +
          identity reports
curve     trace a dispersion curve, write CSV + shape-check reports
kp        compute the KP-I lump and its identity residuals
diagnose  load a stored field and run every identity check against it
ansatz    emit a comparison field (modulation or transonic family) and its
          expansion table

Configuration comes from an optional TOML file with sections
[nonlinearity], [grid], [problem], [solver], [output]; every key can be
overridden by a same-named command-line flag.  Unknown keys are rejected.

Exit codes: 0 success; 1 configuration or input error; 2 the solver did
not converge; 3 a converged result failed an identity check.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np
import tomli

from . import physics
from .ansatz import (
    ModulationParams,
    TransonicParams,
    default_bump,
    modulation_ansatz,
    transonic_ansatz,
)
from .diagnostics import (
    curve_checks,
    madelung_identities,
    multiplier_relation,
    pohozaev,
    pohozaev_transverse,
)
from .errors import (
    ConfigError,
    IterationDiverged,
    KineticAboveKInfinity,
    ModulusTooSmall,
    MultiplierNonnegative,
    NonzeroWinding,
    NotConverged,
    PotentialBarrierStuck,
    PotentialNonnegativeEverywhere,
    PotentialNotNonnegative,
)
from .fieldio import read_field, write_field
from .grid import ComplexField, Grid
from .kp1 import solve_kp_ground_state
from .minimize import (
    FixedKinetic,
    FixedMomentum,
    MinimizationProblem,
    SharpLocal,
    StationaryBubble,
    _tw_rel_residual,
    minimize_bubble,
    minimize_fixed_kinetic,
    minimize_fixed_momentum,
    minimize_sharp,
    trace_curve,
)
from .physics import Nonlinearity

SOUND_SPEED = float(np.sqrt(2.0))

_ALLOWED_KEYS = {
    "nonlinearity": {"name", "alpha5", "coeffs"},
    "grid": {"L1", "L2", "n1", "n2", "L", "n"},
    "problem": {"variant", "q", "k", "qs", "ks", "gamma", "eps"},
    "solver": {"tol", "max_iter", "warm_start", "seed"},
    "output": {"dir"},
}


@dataclasses.dataclass
class RunConfig:
    """Merged TOML + command-line configuration, validated key-by-key."""

    nonlinearity: dict
    grid: dict
    problem: dict
    solver: dict
    output: dict

    @classmethod
    def load(cls, args) -> "RunConfig":
        sections = {k: {} for k in _ALLOWED_KEYS}
        if args.config is not None:
            try:
                with open(args.config, "rb") as fh:
                    data = tomli.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except tomli.TOMLDecodeError as exc:
                raise ConfigError(f"malformed TOML: {exc}") from exc
            for section, body in data.items():
                if section not in _ALLOWED_KEYS:
                    raise ConfigError(f"unknown config section [{section}]")
                if not isinstance(body, dict):
                    raise ConfigError(f"[{section}] must be a table")
                for key in body:
                    if key not in _ALLOWED_KEYS[section]:
                        raise ConfigError(
                            f"unknown key '{key}' in section [{section}]"
                        )
                sections[section].update(body)

        flag_map = {
            ("nonlinearity", "name"): args.nl,
            ("nonlinearity", "alpha5"): args.alpha5,
            ("grid", "L"): args.L,
            ("grid", "n"): args.n,
            ("problem", "variant"): getattr(args, "problem", None),
            ("problem", "q"): args.q,
            ("problem", "k"): args.k,
            ("problem", "qs"): args.qs,
            ("problem", "ks"): args.ks,
            ("problem", "gamma"): args.gamma,
            ("problem", "eps"): args.eps,
            ("solver", "tol"): args.tol,
            ("solver", "max_iter"): args.max_iter,
            ("solver", "seed"): args.seed,
            ("output", "dir"): args.out,
        }
        for (section, key), val in flag_map.items():
            if val is not None:
                sections[section][key] = val
        if args.no_warm_start:
            sections["solver"]["warm_start"] = False
        return cls(**sections)


def _build_nonlinearity(cfg: RunConfig) -> Nonlinearity:
    name = cfg.nonlinearity.get("name", "gp")
    if name == "gp":
        return Nonlinearity.gross_pitaevskii()
    if name == "cubic_quintic":
        return Nonlinearity.cubic_quintic(float(cfg.nonlinearity.get("alpha5", 3.0)))
    if name == "poly":
        coeffs = cfg.nonlinearity.get("coeffs")
        if coeffs is None:
            raise ConfigError("poly nonlinearity needs 'coeffs'")
        return Nonlinearity.polynomial(tuple(float(c) for c in coeffs))
    raise ConfigError(f"unknown nonlinearity '{name}'")


def _build_grid(cfg: RunConfig, default_L=64.0, default_n=256) -> Grid:
    gs = cfg.grid
    L = float(gs.get("L", default_L))
    n = int(gs.get("n", default_n))
    return Grid(
        L1=float(gs.get("L1", L)),
        L2=float(gs.get("L2", L)),
        n1=int(gs.get("n1", n)),
        n2=int(gs.get("n2", n)),
    )


def _build_problem(cfg: RunConfig, variant) -> MinimizationProblem:
    sv = cfg.solver
    seed = None
    seed_spec = sv.get("seed", "ansatz")
    if isinstance(seed_spec, str) and seed_spec.startswith("file:"):
        loaded = read_field(seed_spec[5:])
        if not isinstance(loaded, ComplexField):
            raise ConfigError("seed file must hold a complex field")
        seed = loaded
    elif seed_spec != "ansatz":
        raise ConfigError("seed must be 'ansatz' or 'file:PATH'")
    try:
        return MinimizationProblem(
            variant=variant,
            grad_tol=float(sv.get("tol", 1e-6)),
            max_iter=int(sv.get("max_iter", 200_000)),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _workers() -> int:
    raw = os.environ.get("NLSTW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _outdir(cfg: RunConfig) -> str:
    d = cfg.output.get("dir", ".")
    os.makedirs(d, exist_ok=True)
    return d


def _jsonable(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _write_jsonl(path, records) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, default=_jsonable) + "\n")
    os.replace(tmp, path)


def _write_json(path, record) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(record, fh, indent=2, default=_jsonable)
        fh.write("\n")
    os.replace(tmp, path)


def _identity_suite(psi, nl, c):
    """All identity checks applicable to a wave; lifting ones best-effort."""
    reports = [pohozaev(psi, nl, c), pohozaev_transverse(psi, nl, c)]
    records = [dataclasses.asdict(r) for r in reports]
    mandatory = [r.passed for r in reports]
    try:
        for rep in madelung_identities(psi, nl, c):
            records.append(dataclasses.asdict(rep))
            mandatory.append(rep.passed)
        mrep = multiplier_relation(psi, nl, c)
        records.append(
            {"name": "density-multiplier", **dataclasses.asdict(mrep)}
        )
        mandatory.append(mrep.passed)
    except (ModulusTooSmall, NonzeroWinding) as exc:
        records.append({"name": "lifting", "skipped": str(exc)})
    return records, all(mandatory)


def _print_reports(records) -> None:
    for rec in records:
        if "skipped" in rec:
            print(f"{rec['name']:28s} SKIP  ({rec['skipped']})")
        elif "rel_residual" in rec:
            status = "PASS" if rec.get("passed") else "FAIL"
            print(
                f"{rec['name']:28s} {status}  rel={rec['rel_residual']:.3e}"
                f" tol={rec['tolerance']:.0e}"
            )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig) -> int:
    nl = _build_nonlinearity(cfg)
    grid = _build_grid(cfg)
    variant_name = cfg.problem.get("variant", "momentum")
    outdir = _outdir(cfg)

    if variant_name == "momentum":
        pb = _build_problem(cfg, FixedMomentum(q=float(cfg.problem.get("q", 1.0))))
        sol = minimize_fixed_momentum(pb, nl, grid)
    elif variant_name == "sharp":
        pb = _build_problem(cfg, SharpLocal(q=float(cfg.problem.get("q", 1.0))))
        sol = minimize_sharp(pb, nl, grid)
    elif variant_name == "kinetic":
        pb = _build_problem(cfg, FixedKinetic(k=float(cfg.problem.get("k", 1.0))))
        sol = minimize_fixed_kinetic(pb, nl, grid)
    elif variant_name == "bubble":
        pb = _build_problem(cfg, StationaryBubble())
        sol, threshold = minimize_bubble(pb, nl, grid)
    else:
        raise ConfigError(f"unknown problem variant '{variant_name}'")

    sol.save(
        os.path.join(outdir, "wave.nlstw1"),
        os.path.join(outdir, "wave.json"),
        label=variant_name,
    )
    if variant_name == "bubble":
        _write_json(
            os.path.join(outdir, "threshold.json"), {"T": threshold}
        )
    records, checks_ok = _identity_suite(sol.psi, nl, sol.speed)
    _write_jsonl(os.path.join(outdir, "diag.jsonl"), records)
    _print_reports(records)
    if not sol.converged:
        return 2
    return 0 if checks_ok else 3


def cmd_curve(cfg: RunConfig) -> int:
    nl = _build_nonlinearity(cfg)
    grid = _build_grid(cfg)
    variant_name = cfg.problem.get("variant", "momentum")
    outdir = _outdir(cfg)

    if variant_name in ("momentum", "sharp"):
        family = "momentum"
        raw = cfg.problem.get("qs")
    elif variant_name == "kinetic":
        family = "kinetic"
        raw = cfg.problem.get("ks")
    else:
        raise ConfigError(f"problem variant '{variant_name}' has no curve")
    if raw is None:
        raise ConfigError("curve needs an abscissa list (qs or ks)")
    if isinstance(raw, str):
        raw = [tok for tok in raw.split(",") if tok.strip()]
    try:
        absc = [float(x) for x in raw]
    except ValueError as exc:
        raise ConfigError(f"bad abscissa list: {exc}") from exc

    pb = _build_problem(cfg, FixedMomentum(q=1.0))
    warm = bool(cfg.solver.get("warm_start", True))
    try:
        curve = trace_curve(
            family,
            absc,
            nl,
            grid=grid,
            warm_start=warm,
            pb=pb,
            workers=_workers(),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    csv_path = os.path.join(outdir, "curve.csv")
    tmp = csv_path + ".tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write("abscissa,value,speed,converged\n")
        for x, v, c, ok in zip(
            curve.abscissae, curve.values, curve.speeds, curve.converged
        ):
            fh.write(
                f"{float(x)!r},{float(v)!r},{float(c)!r},"
                f"{str(bool(ok)).lower()}\n"
            )
    os.replace(tmp, csv_path)
    _write_json(
        os.path.join(outdir, "curve.json"),
        {
            "family": curve.family,
            "q0_estimate": curve.q0_estimate,
            "k0_estimate": curve.k0_estimate,
            "k_inf_estimate": curve.k_inf_estimate,
        },
    )
    if int(np.sum(curve.converged)) < 3:
        return 2
    reports = curve_checks(curve, nl)
    records = [dataclasses.asdict(r) for r in reports]
    _write_jsonl(os.path.join(outdir, "checks.jsonl"), records)
    _print_reports(records)
    if not all(curve.converged):
        return 2
    return 0 if all(r.passed for r in reports) else 3


def cmd_kp(cfg: RunConfig) -> int:
    gamma = float(cfg.problem.get("gamma", 6.0))
    grid = _build_grid(cfg, default_L=40.0, default_n=256)
    outdir = _outdir(cfg)
    try:
        state = solve_kp_ground_state(
            gamma,
            grid,
            tol=float(cfg.solver.get("tol", 1e-13)),
            max_iter=int(cfg.solver.get("max_iter", 500)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_field(os.path.join(outdir, "lump.nlstw1"), state.w)
    a, b, c, d = state.integrals
    record = {
        "gamma": gamma,
        "action": state.action,
        "r1": state.r1,
        "r2": state.r2,
        "r3": state.r3,
        "equation_residual": state.residual,
        "integrals": {"a": a, "b": b, "c": c, "d": d},
        "boundary_terms": {"e2": state.e2, "e3": state.e3},
    }
    _write_json(os.path.join(outdir, "kp.json"), record)
    worst = max(state.r1, state.r2, state.r3)
    print(
        f"lump: action={state.action:.6f} identity residuals "
        f"{state.r1:.2e} {state.r2:.2e} {state.r3:.2e}"
    )
    return 0 if worst < 1e-4 else 3


def cmd_diagnose(cfg: RunConfig, field_path: str, c: float | None) -> int:
    nl = _build_nonlinearity(cfg)
    outdir = _outdir(cfg)
    try:
        psi = read_field(field_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not isinstance(psi, ComplexField):
        raise ConfigError("diagnose expects a complex field")
    if c is None:
        c = physics.extract_speed(psi, nl)
    _, b2 = physics.pohozaev_boundary_terms(psi, nl, c)
    E = physics.energy(psi, nl)
    summary = {
        "c": c,
        "E": E,
        "Q": physics.momentum(psi),
        "kinetic": physics.kinetic(psi),
        "potential": physics.potential_integral(psi, nl),
        "EGL": physics.gl_energy(psi),
        "pohozaev_residual": abs(physics.P_c(psi, nl, c, 2) - b2)
        / (abs(E) + 1e-300),
        "tw_residual": _tw_rel_residual(psi, nl, c),
    }
    records, checks_ok = _identity_suite(psi, nl, c)
    _write_json(os.path.join(outdir, "diagnose.json"), summary)
    _write_jsonl(os.path.join(outdir, "diag.jsonl"), records)
    _print_reports(records)
    return 0 if checks_ok else 3


def cmd_ansatz(cfg: RunConfig, family: str) -> int:
    outdir = _outdir(cfg)
    eps = float(cfg.problem.get("eps", 0.1))
    if eps <= 0:
        raise ConfigError("eps must be positive")
    ladder = [eps, eps / 2.0, eps / 4.0]

    if family == "transonic":
        gamma = float(cfg.problem.get("gamma", 6.0))
        grid = _build_grid(cfg, default_L=40.0, default_n=256)
        try:
            state = solve_kp_ground_state(gamma, grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        S = state.action
        rows = []
        field_out = None
        for e in ladder:
            U = transonic_ansatz(TransonicParams(w=state.w, gamma=gamma, eps=e))
            if field_out is None:
                field_out = U
            nl = _build_nonlinearity(cfg)
            E = physics.energy(U, nl)
            Q = physics.momentum(U)
            q_pred = 3.0 * SOUND_SPEED**3 * S * e - (6.0 / gamma) * SOUND_SPEED * S * e**3
            rows.append((e, E, Q, E - SOUND_SPEED * Q, (E - SOUND_SPEED * Q) / e**3, q_pred))
        header = "eps,energy,momentum,excess,excess_per_eps3,momentum_predicted"
    elif family == "modulation":
        grid = _build_grid(cfg)
        base = Grid(grid.L1 / 2.0, grid.L2 / 2.0, grid.n1, grid.n2)
        chi = default_bump(base, radius=0.7 * base.L1)
        nl = _build_nonlinearity(cfg)
        rows = []
        field_out = None
        for e in ladder:
            U = modulation_ansatz(
                ModulationParams(chi=chi, eps=e, lam=2.0, sigma=2.0)
            )
            if field_out is None:
                field_out = U
            E = physics.energy(U, nl)
            Q = physics.momentum(U)
            rows.append((e, E, Q, E - SOUND_SPEED * Q, E / max(Q, 1e-300)))
        header = "eps,energy,momentum,excess,energy_per_momentum"
    else:
        raise ConfigError(f"unknown ansatz family '{family}'")

    write_field(os.path.join(outdir, "ansatz.nlstw1"), field_out)
    csv_path = os.path.join(outdir, "expansion.csv")
    tmp = csv_path + ".tmp"
    with open(tmp, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    os.replace(tmp, csv_path)
    for row in rows:
        print(", ".join(f"{float(x):.6g}" for x in row))
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nlstw", description="traveling-wave solvers and diagnostics"
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_problem=True):
        sp.add_argument("config", nargs="?", default=None, help="TOML config")
        sp.add_argument("--nl", choices=["gp", "cubic_quintic", "poly"])
        sp.add_argument("--alpha5", type=float)
        if with_problem:
            sp.add_argument(
                "--problem", choices=["momentum", "kinetic", "sharp", "bubble"]
            )
        sp.add_argument("--q", type=float)
        sp.add_argument("--k", type=float)
        sp.add_argument("--qs", type=str, help="comma-separated momenta")
        sp.add_argument("--ks", type=str, help="comma-separated kinetic values")
        sp.add_argument("--L", type=float)
        sp.add_argument("--n", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--max-iter", type=int, dest="max_iter")
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--eps", type=float)
        sp.add_argument("--out", type=str)
        sp.add_argument("--seed", type=str)
        sp.add_argument("--no-warm-start", action="store_true")

    common(sub.add_parser("solve", help="one constrained minimization"))
    common(sub.add_parser("curve", help="trace a dispersion curve"))
    common(sub.add_parser("kp", help="KP-I lump"), with_problem=False)

    d = sub.add_parser("diagnose", help="check a stored field")
    d.add_argument("field", help="NLSTW1 field file")
    d.add_argument("--c", type=float, default=None, help="wave speed")
    common(d, with_problem=False)

    a = sub.add_parser("ansatz", help="comparison field families")
    a.add_argument("family", choices=["modulation", "transonic"])
    common(a, with_problem=False)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "curve":
            return cmd_curve(cfg)
        if args.command == "kp":
            return cmd_kp(cfg)
        if args.command == "diagnose":
            return cmd_diagnose(cfg, args.field, args.c)
        if args.command == "ansatz":
            return cmd_ansatz(cfg, args.family)
        raise ConfigError(f"unknown command {args.command}")
    except (
        ConfigError,
        PotentialNotNonnegative,
        PotentialNonnegativeEverywhere,
        KineticAboveKInfinity,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        NotConverged,
        IterationDiverged,
        PotentialBarrierStuck,
        MultiplierNonnegative,
    ) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

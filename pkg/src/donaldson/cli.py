"""Batch front end: ``donaldson <subcommand> --config FILE [--grid N] [--tol X] [--out DIR]``.

The config is a JSON object.  Unknown keys are rejected.  Exit status is 0 on
success, 1 for configuration errors and 2 for numerical failures (artifacts
written so far are kept).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import checks
from .dynamics import (
    FlowRecord,
    GeodesicState,
    LeftSpaceError,
    StepSizeCollapse,
    gradient_flow,
    integrate_geodesic,
)
from .energy import energy_report, hessian_report, x_grad_residuals
from .fields4 import exterior_d, omega_std
from .hyperkahler import hessian_form_hk
from .io import dump_field
from .metric import SolverError, SolverOptions, associated_vector_field
from .rho_geometry import DegenerateStateError, SymplecticState
from .sampling import mode_potential
from .spectral_hodge import NotExactError

log = logging.getLogger("donaldson")

EXPERIMENTS = ("check", "energy", "flow", "geodesic", "hessian")
_MODE_KEYS = {"component", "wavevector", "amplitude", "phase"}
_SOLVER_KEYS = {"rel_tol", "max_iter", "preconditioner"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    grid_n: int = 8
    experiment: str | None = None
    initial_modes: list = field(default_factory=list)
    perturbation_modes: list = field(default_factory=list)
    dt: float = 1e-3
    steps: int = 10
    solver: dict = field(default_factory=dict)
    seed: int = 42
    output_dir: str = "out"
    dump_fields: bool = False

    def solver_options(self) -> SolverOptions:
        return SolverOptions(**self.solver)


def _check_mode(m, where):
    if not isinstance(m, dict):
        raise ConfigError(f"{where}: a mode must be an object")
    extra = set(m) - _MODE_KEYS
    if extra:
        raise ConfigError(f"{where}: unknown mode keys {sorted(extra)}")
    missing = {"component", "wavevector", "amplitude"} - set(m)
    if missing:
        raise ConfigError(f"{where}: missing mode keys {sorted(missing)}")
    if not isinstance(m["component"], int) or not 1 <= m["component"] <= 4:
        raise ConfigError(f"{where}: component must be an integer 1..4")
    wv = m["wavevector"]
    if not isinstance(wv, list) or len(wv) != 4 or not all(isinstance(k, int) for k in wv):
        raise ConfigError(f"{where}: wavevector must be 4 integers")
    for key in ("amplitude", "phase"):
        if key in m and not isinstance(m[key], (int, float)):
            raise ConfigError(f"{where}: {key} must be a number")


def _groups(perturbation_modes):
    """Each entry is one mode or a list of modes; either way one rhohat."""
    return [e if isinstance(e, list) else [e] for e in perturbation_modes]


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    cfg = RunConfig(**raw)
    if not isinstance(cfg.grid_n, int) or cfg.grid_n < 4 or cfg.grid_n % 2:
        raise ConfigError(f"grid_n must be an even integer >= 4, got {cfg.grid_n!r}")
    if cfg.experiment is not None and cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    if not isinstance(cfg.solver, dict) or set(cfg.solver) - _SOLVER_KEYS:
        raise ConfigError(f"solver accepts only {sorted(_SOLVER_KEYS)}")
    try:
        cfg.solver_options()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from None
    for i, m in enumerate(cfg.initial_modes):
        _check_mode(m, f"initial_modes[{i}]")
    for i, group in enumerate(_groups(cfg.perturbation_modes)):
        for j, m in enumerate(group):
            _check_mode(m, f"perturbation_modes[{i}][{j}]")
    if not isinstance(cfg.dt, (int, float)) or cfg.dt == 0:
        raise ConfigError("dt must be a nonzero number")
    if not isinstance(cfg.steps, int) or cfg.steps < 0:
        raise ConfigError("steps must be a non-negative integer")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed must be an integer")
    return cfg


def load_config(path, grid=None, tol=None, out=None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if isinstance(raw, dict):
        if grid is not None:
            raw["grid_n"] = grid
        if tol is not None:
            raw["solver"] = dict(raw.get("solver", {}), rel_tol=tol)
        if out is not None:
            raw["output_dir"] = str(out)
    return parse_config(raw)


def initial_state(cfg: RunConfig) -> SymplecticState:
    rho = omega_std(cfg.grid_n)
    if cfg.initial_modes:
        rho = rho + exterior_d(mode_potential(cfg.grid_n, cfg.initial_modes))
    try:
        return SymplecticState(rho)
    except DegenerateStateError as exc:
        raise ConfigError(f"initial_modes give an invalid rho_0: {exc}") from None


def perturbations(cfg: RunConfig):
    return [exterior_d(mode_potential(cfg.grid_n, g)) for g in _groups(cfg.perturbation_modes)]


# --- experiments -----------------------------------------------------------

def _write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2) + "\n")


def _write_csv(path, records):
    with open(path, "w") as fh:
        fh.write(FlowRecord.CSV_HEADER + "\n")
        for r in records:
            fh.write(r.csv_row() + "\n")


def run_check(cfg, out):
    results = checks.run_checks(cfg.grid_n, cfg.seed, cfg.solver_options())
    (out / "check_report.json").write_text(checks.report_json(results, cfg.grid_n, cfg.seed))
    sys.stdout.write(checks.report_text(results))
    return 0 if all(r.passed for r in results) else 2


def run_energy(cfg, out):
    state = initial_state(cfg)
    rep = energy_report(state)
    r1, r2 = x_grad_residuals(state, rep.x_grad, rep.theta)
    _write_json(out / "energy_summary.json", {
        "grid_n": cfg.grid_n,
        "energy": rep.value,
        "grad_norm": rep.grad_norm,
        "min_u": state.min_u,
        "class_residual": state.class_residual(),
        "x_grad_residuals": [r1, r2],
    })
    if cfg.dump_fields:
        dump_field(state.rho, out / "rho.dgf")
        dump_field(rep.theta, out / "theta.dgf")
        dump_field(rep.grad, out / "grad.dgf")
    return 0


def _summary(records, final_t, status, message=""):
    last = records[-1] if records else None
    return {
        "status": status,
        "message": message,
        "steps_completed": last.step if last else 0,
        "t_final": final_t,
        "energy_initial": records[0].energy if records else None,
        "energy_final": last.energy if last else None,
        "min_u_final": last.min_u if last else None,
    }


def _partial(out, name, exc):
    """Keep what a failed run produced before re-raising."""
    records = getattr(exc, "records", [])
    _write_csv(out / name, records)
    t = records[-1].t if records else 0.0
    _write_json(out / "summary.json", _summary(records, t, "failed", str(exc)))


def run_flow(cfg, out):
    state = initial_state(cfg)
    try:
        records, final = gradient_flow(state, cfg.dt, cfg.steps, cfg.solver_options())
    except (LeftSpaceError, StepSizeCollapse) as exc:
        _partial(out, "flow.csv", exc)
        raise
    _write_csv(out / "flow.csv", records)
    _write_json(out / "summary.json", _summary(records, records[-1].t, "ok"))
    if cfg.dump_fields:
        dump_field(final.rho, out / "rho_final.dgf")
    return 0


def run_geodesic(cfg, out):
    state = initial_state(cfg)
    vel = state.grid.zeros(2)
    for p in perturbations(cfg):
        vel = vel + p
    try:
        records, final = integrate_geodesic(GeodesicState(state.rho, vel), cfg.dt, cfg.steps,
                                             cfg.solver_options())
    except (LeftSpaceError, SolverError) as exc:
        _partial(out, "geodesic.csv", exc)
        raise
    _write_csv(out / "geodesic.csv", records)
    summ = _summary(records, final.t, "ok")
    speeds = [r.speed for r in records]
    summ["speed_initial"] = speeds[0]
    summ["speed_max_drift"] = max(abs(v - speeds[0]) for v in speeds)
    _write_json(out / "summary.json", summ)
    if cfg.dump_fields:
        dump_field(final.rho, out / "rho_final.dgf")
        dump_field(final.rhodot, out / "rhodot_final.dgf")
    return 0


def run_hessian(cfg, out):
    state = initial_state(cfg)
    opts = cfg.solver_options()
    entries = []
    for i, rh in enumerate(perturbations(cfg)):
        a = associated_vector_field(state, rh, opts)
        rep = hessian_report(state, a)
        hk = hessian_form_hk(state, a)
        scale = max(abs(rep.form_value), abs(rep.operator_paired), 1e-300)
        entries.append({
            "index": i,
            "form_value": rep.form_value,
            "operator_paired": rep.operator_paired,
            "relative_difference": abs(rep.form_value - rep.operator_paired) / scale,
            "form_value_hk": hk,
            "hk_relative_difference": abs(hk - rep.form_value) / max(abs(rep.form_value), 1e-300),
            "solver_iterations": a.report.iterations,
        })
        if cfg.dump_fields:
            dump_field(rep.operator_value, out / f"hessian_{i}.dgf")
            dump_field(rep.theta_hat, out / f"theta_hat_{i}.dgf")
    _write_json(out / "hessian.json", {"grid_n": cfg.grid_n, "entries": entries})
    return 0


RUNNERS = {
    "check": run_check,
    "energy": run_energy,
    "flow": run_flow,
    "geodesic": run_geodesic,
    "hessian": run_hessian,
}


def build_parser():
    p = argparse.ArgumentParser(prog="donaldson", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--grid", type=int)
        s.add_argument("--tol", type=float, help="solver relative tolerance")
        s.add_argument("--out", type=Path, help="output directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.grid, args.tol, args.out)
        if cfg.experiment is not None and cfg.experiment != args.command:
            raise ConfigError(f"config is for {cfg.experiment!r}, not {args.command!r}")
        out = Path(cfg.output_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory: {exc}") from None
        if args.command == "flow" and cfg.dt <= 0:
            raise ConfigError("flow needs dt > 0")
        if args.command != "check":
            initial_state(cfg)  # validate rho_0 before any run
        return RUNNERS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateStateError, SolverError, NotExactError, ArithmeticError,
            RuntimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

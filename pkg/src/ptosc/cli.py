"""Command-line front end: spectrum, evolve, density, and verify workflows.

Output is bit-stable: floats are rendered with 17 significant digits, key
order is fixed, and all randomized checks run from a fixed seed, so identical
configurations produce byte-identical CSV/JSON.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import metric as met
from . import model as mod
from . import position as pos
from .errors import BranchError, ConfigError, PtoscError
from .verify import DEFAULT_SEED, run_verification

AUTO_HALF = "auto_half"
AUTO_INTEGER = "auto_integer"
EXPLICIT = "explicit"

_THETA_MODES = (AUTO_HALF, AUTO_INTEGER, EXPLICIT)


def fmt(x: float) -> str:
    """Fixed 17-significant-digit rendering used for every emitted float."""
    return "%.17g" % float(x)


def parse_complex(text: str) -> complex:
    """Parse a complex literal in either ``a+bi`` or ``a,b`` form."""
    raw = text.strip().replace(" ", "")
    if not raw:
        raise ConfigError("empty complex literal")
    try:
        if "," in raw:
            re_part, im_part = raw.split(",")
            value = complex(float(re_part), float(im_part))
        else:
            value = complex(raw.replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"malformed complex literal {text!r}: "
                          "expected 'a+bi' or 'a,b'") from exc
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ConfigError(f"complex literal {text!r} is not finite")
    return value


def format_complex(value: complex) -> str:
    return f"{fmt(value.real)},{fmt(value.imag)}"


def parse_state_spec(text: str) -> tuple[tuple[int, complex], ...]:
    """Parse ``level:amplitude`` pairs separated by commas at the top level.

    Amplitudes may themselves be complex in ``a+bi`` form (the ``a,b`` form is
    reserved for the separator here).
    """
    entries = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(f"state entry {chunk!r} must look like 'level:amplitude'")
        level_text, amp_text = chunk.split(":", 1)
        try:
            level = int(level_text)
        except ValueError as exc:
            raise ConfigError(f"state level {level_text!r} is not an integer") from exc
        if level < 0:
            raise ConfigError(f"state level {level} must be nonnegative")
        entries.append((level, parse_complex(amp_text)))
    if not entries:
        raise ConfigError("state specification is empty")
    if all(amp == 0 for _, amp in entries):
        raise ConfigError("state specification has no nonzero amplitude")
    return tuple(entries)


def format_state_spec(spec: tuple[tuple[int, complex], ...]) -> str:
    parts = []
    for level, amp in spec:
        if amp.imag == 0.0:
            parts.append(f"{level}:{fmt(amp.real)}")
        else:
            sign = "+" if amp.imag >= 0 else "-"
            parts.append(f"{level}:{fmt(amp.real)}{sign}{fmt(abs(amp.imag))}i")
    return ",".join(parts)


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration shared by all four workflows."""

    z_re: float = 0.3
    z_im: float = 0.2
    theta_mode: str = AUTO_HALF
    theta: float | None = None
    cutoff: int = 64
    margin: int = 8
    t_min: float = 0.0
    t_max: float = 4.0 * math.pi
    t_steps: int = 513
    state_spec: tuple[tuple[int, complex], ...] = ((1, 1.0 + 0.0j),)
    state_basis: str = "a"
    grid_min: float = -6.0
    grid_max: float = 6.0
    grid_steps: int = 481
    output: str | None = None
    format: str = "csv"
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.theta_mode not in _THETA_MODES:
            raise ConfigError(f"unknown theta mode {self.theta_mode!r}")
        if self.theta_mode == EXPLICIT and self.theta is None:
            raise ConfigError("explicit theta mode requires a theta value")
        if self.cutoff < 8:
            raise ConfigError(f"cutoff must be at least 8, got {self.cutoff}")
        if self.t_steps < 2:
            raise ConfigError(f"t_steps must be at least 2, got {self.t_steps}")
        if self.grid_steps < 2:
            raise ConfigError(f"grid_steps must be at least 2, got {self.grid_steps}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {self.format!r}")
        if self.state_basis not in ("a", "b"):
            raise ConfigError(f"state basis must be 'a' or 'b', got {self.state_basis!r}")
        if not self.state_spec:
            raise ConfigError("state specification is empty")
        for level, _ in self.state_spec:
            if level >= self.cutoff:
                raise ConfigError(f"state level {level} exceeds the cutoff {self.cutoff}")

    @property
    def z_star(self) -> complex:
        return complex(self.z_re, self.z_im)

    def model_params(self) -> mod.ModelParams:
        lam = math.atan2(self.z_im, self.z_re) if self.z_star != 0 else 0.0
        if self.theta_mode == AUTO_HALF:
            theta = lam + math.pi / 2
        elif self.theta_mode == AUTO_INTEGER:
            theta = lam
        else:
            theta = float(self.theta)
        try:
            params = mod.ModelParams(z_star=self.z_star, theta=theta,
                                     cutoff=self.cutoff, margin=self.margin)
            params.branch  # validate the phase family eagerly
        except (BranchError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return params


_CONFIG_KEYS = {
    "z": "z", "theta_mode": "theta_mode", "theta": "theta", "n": "cutoff",
    "margin": "margin", "t_min": "t_min", "t_max": "t_max", "t_steps": "t_steps",
    "state": "state", "state_basis": "state_basis", "grid_min": "grid_min",
    "grid_max": "grid_max", "grid_steps": "grid_steps", "output": "output",
    "format": "format", "seed": "seed",
}


def _apply_entry(values: dict, key: str, raw: str, where: str) -> None:
    if key not in _CONFIG_KEYS:
        raise ConfigError(f"unknown key {key!r} {where}")
    try:
        if key == "z":
            z = parse_complex(raw)
            values["z_re"], values["z_im"] = z.real, z.imag
        elif key == "theta_mode":
            values["theta_mode"] = raw.strip()
        elif key == "theta":
            values["theta"] = float(raw)
            values["theta_mode"] = EXPLICIT
        elif key in ("n", "margin", "t_steps", "grid_steps", "seed"):
            values[_CONFIG_KEYS[key]] = int(raw)
        elif key in ("t_min", "t_max", "grid_min", "grid_max"):
            values[key] = float(raw)
        elif key == "state":
            values["state_spec"] = parse_state_spec(raw)
        else:
            values[_CONFIG_KEYS[key]] = raw.strip()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for key {key!r} {where}") from exc


def load_config_file(path: str) -> dict:
    """Read a flat ``key = value`` configuration file into override values."""
    values: dict = {}
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        _apply_entry(values, key.strip(), raw.strip(), f"at {path}:{lineno}")
    return values


def serialize_config(cfg: RunConfig) -> str:
    """Render a RunConfig as the flat text form; round-trips exactly."""
    lines = [
        f"z = {format_complex(cfg.z_star)}",
        f"theta_mode = {cfg.theta_mode}",
    ]
    if cfg.theta is not None:
        lines.append(f"theta = {fmt(cfg.theta)}")
    lines += [
        f"n = {cfg.cutoff}",
        f"margin = {cfg.margin}",
        f"t_min = {fmt(cfg.t_min)}",
        f"t_max = {fmt(cfg.t_max)}",
        f"t_steps = {cfg.t_steps}",
        f"state = {format_state_spec(cfg.state_spec)}",
        f"state_basis = {cfg.state_basis}",
        f"grid_min = {fmt(cfg.grid_min)}",
        f"grid_max = {fmt(cfg.grid_max)}",
        f"grid_steps = {cfg.grid_steps}",
        f"format = {cfg.format}",
        f"seed = {cfg.seed}",
    ]
    if cfg.output is not None:
        lines.append(f"output = {cfg.output}")
    return "\n".join(lines) + "\n"


def parse_config(args: argparse.Namespace) -> RunConfig:
    """Merge config file and flags (flags win) into a validated RunConfig."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for flag, key in (("z", "z"), ("theta", "theta"), ("theta_mode", "theta_mode"),
                      ("n", "n"), ("margin", "margin"), ("t_min", "t_min"),
                      ("t_max", "t_max"), ("t_steps", "t_steps"), ("state", "state"),
                      ("state_basis", "state_basis"), ("grid_min", "grid_min"),
                      ("grid_max", "grid_max"), ("grid_steps", "grid_steps"),
                      ("output", "output"), ("format", "format"), ("seed", "seed")):
        raw = getattr(args, flag, None)
        if raw is not None:
            _apply_entry(values, key, str(raw), "on the command line")
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# deterministic emission helpers

def emit_json(obj, indent: int = 0) -> str:
    """Minimal JSON writer with %.17g floats and insertion key order."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{k}": {emit_json(v, indent + 1)}' for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {emit_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return '"nan"'
        if math.isinf(value):
            return '"inf"' if value > 0 else '"-inf"'
        return fmt(value)
    if obj is None:
        return "null"
    text = str(obj).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


def _write(text: str, cfg: RunConfig) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _csv_table(header: list[str], rows: list[list[str]]) -> str:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _warn_envelope(cfg: RunConfig) -> None:
    z_abs = abs(cfg.z_star)
    if z_abs > 1.0:
        print(f"warning: |z| = {z_abs:.3g} exceeds the recommended envelope "
              "(|z| <= 1); truncation error grows rapidly", file=sys.stderr)
    if cfg.cutoff < 64:
        print(f"warning: cutoff N = {cfg.cutoff} is below the recommended 64; "
              "interior tolerances may not hold", file=sys.stderr)


def _build_state(cfg: RunConfig, system: mod.BiorthogonalSystem) -> np.ndarray:
    psi = np.zeros(cfg.cutoff, dtype=complex)
    for level, amp in cfg.state_spec:
        if cfg.state_basis == "a":
            psi[level] += amp
        else:
            psi += amp * system.basis[:, level]
    if np.linalg.norm(psi) == 0.0:
        raise ConfigError("state specification collapsed to the zero vector")
    return psi


def _is_first_excited(cfg: RunConfig) -> bool:
    nonzero = [(lvl, amp) for lvl, amp in cfg.state_spec if amp != 0]
    return cfg.state_basis == "a" and nonzero == [(1, 1.0 + 0.0j)]


# ---------------------------------------------------------------------------
# workflows

def _run_spectrum(cfg: RunConfig) -> int:
    params = cfg.model_params()
    ops = mod.build_operators(params)
    system = mod.build_system(params, ops)

    h_res = ops.h @ system.basis - system.basis * system.energies
    d_res = ops.h_dag @ system.duals - system.duals * system.energies
    eig = np.sort_complex(np.linalg.eigvals(ops.h))
    rows = []
    entries = []
    for n in range(params.cutoff):
        state_res = float(np.linalg.norm(h_res[:, n]) / np.linalg.norm(system.basis[:, n]))
        dual_res = float(np.linalg.norm(d_res[:, n]) / np.linalg.norm(system.duals[:, n]))
        eig_dev = float(abs(eig[n] - system.energies[n]))
        rows.append([str(n), fmt(system.energies[n]), fmt(state_res),
                     fmt(dual_res), fmt(eig_dev)])
        entries.append({"n": n, "energy": float(system.energies[n]),
                        "state_residual": state_res, "dual_residual": dual_res,
                        "eigensolver_dev": eig_dev})

    if cfg.format == "csv":
        _write(_csv_table(
            ["n", "energy", "state_residual", "dual_residual", "eigensolver_dev"],
            rows), cfg)
    else:
        _write(emit_json({"schema": 1, "command": "spectrum",
                          "levels": entries}) + "\n", cfg)
    return 0


def _run_evolve(cfg: RunConfig) -> int:
    params = cfg.model_params()
    ops = mod.build_operators(params)
    system = mod.build_system(params, ops)
    bundle = met.build_metric(params, ops, system)
    t_grid = np.linspace(cfg.t_min, cfg.t_max, cfg.t_steps)

    closed = _is_first_excited(cfg)
    if closed:
        traj = met.energy_trajectory(params, t_grid, ops=ops, system=system,
                                     bundle=bundle)
        l2_vals, eta_vals = traj.l2_values, traj.eta_values
        l2_closed, eta_closed = traj.l2_closed, traj.eta_closed
    else:
        psi0 = _build_state(cfg, system)
        l2_vals = np.empty(len(t_grid), dtype=complex)
        eta_vals = np.empty(len(t_grid), dtype=complex)
        for i, t in enumerate(t_grid):
            psi_t = met.evolve(psi0, float(t), system)
            l2_vals[i] = met.expectation(ops.h, psi_t, "l2")
            eta_vals[i] = met.expectation(ops.h, psi_t, "eta", bundle)

    header = ["t", "l2_re", "l2_im", "eta_re", "eta_im"]
    if closed:
        header += ["l2_closed_re", "l2_closed_im", "eta_closed_re",
                   "eta_closed_im", "l2_dev", "eta_dev"]
    rows = []
    for i, t in enumerate(t_grid):
        row = [fmt(t), fmt(l2_vals[i].real), fmt(l2_vals[i].imag),
               fmt(eta_vals[i].real), fmt(eta_vals[i].imag)]
        if closed:
            row += [fmt(l2_closed[i].real), fmt(l2_closed[i].imag),
                    fmt(eta_closed[i].real), fmt(eta_closed[i].imag),
                    fmt(abs(l2_vals[i] - l2_closed[i])),
                    fmt(abs(eta_vals[i] - eta_closed[i]))]
        rows.append(row)

    if cfg.format == "csv":
        _write(_csv_table(header, rows), cfg)
    else:
        payload = {"schema": 1, "command": "evolve", "columns": header,
                   "rows": [[float(v) for v in row] for row in rows]}
        _write(emit_json(payload) + "\n", cfg)
    return 0


def _run_density(cfg: RunConfig) -> int:
    params = cfg.model_params()
    ops = mod.build_operators(params)
    system = mod.build_system(params, ops)
    bundle = met.build_metric(params, ops, system)
    psi = _build_state(cfg, system)
    grid = np.linspace(cfg.grid_min, cfg.grid_max, cfg.grid_steps)

    profiles = {label: pos.density(psi, label, grid, system, bundle)
                for label in ("x", "X")}

    if cfg.format == "csv":
        tables = {}
        for label, prof in profiles.items():
            rows = [[fmt(c), fmt(v)] for c, v in zip(prof.grid, prof.values)]
            tables[label] = _csv_table(["coordinate", "density"], rows)
        if cfg.output is None:
            sys.stdout.write(f"# representation: x  (total = {fmt(profiles['x'].total)})\n")
            sys.stdout.write(tables["x"])
            sys.stdout.write(f"# representation: X  (total = {fmt(profiles['X'].total)})\n")
            sys.stdout.write(tables["X"])
        else:
            stem = cfg.output
            if stem.endswith(".csv"):
                stem = stem[:-4]
            for label, suffix in (("x", "_position.csv"), ("X", "_pseudo_position.csv")):
                with open(stem + suffix, "w", encoding="utf-8", newline="") as handle:
                    handle.write(tables[label])
    else:
        payload = {"schema": 1, "command": "density"}
        for label, prof in profiles.items():
            key = "position" if label == "x" else "pseudo_position"
            payload[key] = {
                "total": prof.total,
                "coordinate": [float(c) for c in prof.grid],
                "density": [float(v) for v in prof.values],
            }
        _write(emit_json(payload) + "\n", cfg)
    return 0


def _run_verify(cfg: RunConfig) -> int:
    params = cfg.model_params()
    report = run_verification(params, seed=cfg.seed)
    _write(emit_json(report.to_dict()) + "\n", cfg)
    return 0 if report.all_passed else 1


_COMMANDS = {
    "spectrum": _run_spectrum,
    "evolve": _run_evolve,
    "density": _run_density,
    "verify": _run_verify,
}


def run(command: str, cfg: RunConfig) -> int:
    """Execute one workflow; returns the process exit code."""
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    _warn_envelope(cfg)
    return _COMMANDS[command](cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptosc",
        description="Verification toolkit for the PT-symmetric shifted oscillator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("spectrum", "emit the ladder spectrum with eigenpair residuals"),
            ("evolve", "emit the energy-expectation trajectory in both inner products"),
            ("density", "emit both probability-density profiles"),
            ("verify", "run every invariant check and emit the JSON report")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="flat key = value configuration file")
        cmd.add_argument("--z", help="complex shift z*, as 'a+bi' or 'a,b'")
        cmd.add_argument("--theta", type=float, help="explicit ladder phase")
        cmd.add_argument("--theta-mode", dest="theta_mode",
                         choices=[AUTO_HALF, AUTO_INTEGER],
                         help="automatic phase selection rule")
        cmd.add_argument("--n", type=int, help="Fock-space cutoff (>= 8)")
        cmd.add_argument("--margin", type=int, help="corner margin for interior checks")
        cmd.add_argument("--t-min", dest="t_min", type=float)
        cmd.add_argument("--t-max", dest="t_max", type=float)
        cmd.add_argument("--t-steps", dest="t_steps", type=int)
        cmd.add_argument("--state", help="state as 'level:amp,level:amp,...'")
        cmd.add_argument("--state-basis", dest="state_basis", choices=["a", "b"])
        cmd.add_argument("--grid-min", dest="grid_min", type=float)
        cmd.add_argument("--grid-max", dest="grid_max", type=float)
        cmd.add_argument("--grid-steps", dest="grid_steps", type=int)
        cmd.add_argument("--output", help="output path (default: stdout)")
        cmd.add_argument("--format", choices=["csv", "json"])
        cmd.add_argument("--seed", type=int, help="seed for the randomized checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args)
        code = run(args.command, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PtoscError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())

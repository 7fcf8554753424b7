"""Scenario-driven command line front end.

``flyq simulate|design|optimize|validate --config <path> [--out <dir>]
[--seed <u64>] [--threads <n>]`` reads a JSON scenario config, runs the
requested pipeline and writes CSV curves/ladders plus a JSON diagnostics
file.  Configs use explicit [re, im] pairs for complex numbers and typed
segment lists for control schedules; unknown keys are rejected before any
computation starts.

Exit codes: 0 success, 2 configuration/validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
import warnings

import jsonschema
import numpy as np

from .errors import (
    CapacityError,
    ConditioningError,
    DivergenceError,
    FlyqError,
    SingularMatrixError,
    ValidationError,
)
from .network import SourceDesign, design_source, transformation_scenario
from .operators import ControlSchedule, Impulse, Segment, SLHSystem, Waveform, pauli_ops, qubit_system
from .optimize import GAConfig, Objective, PulseParametrization, PulseScenario, run_ga
from .propagator import propagate
from .wavepacket import output_amplitudes, photon_probabilities

__all__ = ["main", "load_config", "run_config"]

SCHEMA_VERSION = 1

_NUMBER = {"type": "number"}
_COMPLEX = {
    "oneOf": [
        _NUMBER,
        {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
    ]
}

_SEGMENT_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "type": {"const": "const"},
                "t0": _NUMBER,
                "t1": _NUMBER,
                "value": _COMPLEX,
            },
            "required": ["type", "t0", "t1", "value"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "type": {"const": "linear"},
                "t0": _NUMBER,
                "t1": _NUMBER,
                "start": _COMPLEX,
                "stop": _COMPLEX,
            },
            "required": ["type", "t0", "t1", "start", "stop"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "type": {"const": "exp"},
                "t0": _NUMBER,
                "t1": _NUMBER,
                "value": _COMPLEX,
                "rate": _NUMBER,
            },
            "required": ["type", "t0", "t1", "value", "rate"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "type": {"const": "samples"},
                "t0": _NUMBER,
                "t1": _NUMBER,
                "times": {"type": "array", "items": _NUMBER, "minItems": 2},
                "values": {"type": "array", "items": _COMPLEX, "minItems": 2},
            },
            "required": ["type", "t0", "t1", "times", "values"],
            "additionalProperties": False,
        },
    ],
}

_WAVEFORM_SCHEMA = {
    "type": "object",
    "properties": {
        "segments": {"type": "array", "items": _SEGMENT_SCHEMA, "minItems": 1},
        "tail": {"enum": ["zero", "hold"]},
    },
    "required": ["segments"],
    "additionalProperties": False,
}

_IMPULSE_SCHEMA = {
    "type": "object",
    "properties": {
        "time": _NUMBER,
        "pulse": {"enum": ["sigma_x"]},
        "unitary": {
            "type": "array",
            "items": {"type": "array", "items": _COMPLEX, "minItems": 1},
            "minItems": 1,
        },
    },
    "required": ["time"],
    "additionalProperties": False,
}

_SYSTEM_SCHEMA = {
    "type": "object",
    "properties": {
        "initially_excited": {"type": "boolean"},
        "controls": {
            "type": "object",
            "properties": {
                "u": _WAVEFORM_SCHEMA,
                "epsilon": _WAVEFORM_SCHEMA,
                "gamma": _WAVEFORM_SCHEMA,
            },
            "required": ["gamma"],
            "additionalProperties": False,
        },
        "impulses": {"type": "array", "items": _IMPULSE_SCHEMA},
    },
    "required": ["controls"],
    "additionalProperties": False,
}

_PACKET_SCHEMA = {
    "type": "object",
    "properties": {
        "grid": {
            "type": "object",
            "properties": {"start": _NUMBER, "stop": _NUMBER, "num": {"type": "integer", "minimum": 3}},
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
        "nu": {
            "type": "object",
            "oneOf": [
                {
                    "properties": {
                        "type": {"const": "gaussian"},
                        "center": _NUMBER,
                        "width": _NUMBER,
                    },
                    "required": ["type", "center", "width"],
                    "additionalProperties": False,
                },
                {
                    "properties": {"type": {"const": "exponential"}, "rate": _NUMBER},
                    "required": ["type", "rate"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "type": {"const": "samples"},
                        "values": {"type": "array", "items": _NUMBER, "minItems": 3},
                    },
                    "required": ["type", "values"],
                    "additionalProperties": False,
                },
            ],
        },
        "phi": {
            "type": "object",
            "oneOf": [
                {
                    "properties": {"type": {"const": "linear"}, "slope": _NUMBER},
                    "required": ["type", "slope"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "type": {"const": "samples"},
                        "values": {"type": "array", "items": _NUMBER, "minItems": 3},
                    },
                    "required": ["type", "values"],
                    "additionalProperties": False,
                },
            ],
        },
        "gamma_max": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["grid", "nu"],
    "additionalProperties": False,
}

_SIMULATION_SCHEMA = {
    "type": "object",
    "properties": {
        "step": {"type": "number", "exclusiveMinimum": 0},
        "t_final": {"type": "number", "exclusiveMinimum": 0},
        "ell_max": {"type": "integer", "minimum": 0, "maximum": 4},
        "level_nodes": {
            "type": "object",
            "patternProperties": {"^[0-9]+$": {"type": "integer", "minimum": 3}},
            "additionalProperties": False,
        },
        "integrator": {"enum": ["expm_midpoint", "rk4"]},
    },
    "additionalProperties": False,
}

_OPTIMIZATION_SCHEMA = {
    "type": "object",
    "properties": {
        "parametrization": {
            "type": "object",
            "properties": {
                "basis": {"enum": ["piecewise_constant", "piecewise_linear"]},
                "n_bins": {"type": "integer", "minimum": 1},
                "t0": _NUMBER,
                "t1": _NUMBER,
                "channels": {
                    "type": "array",
                    "items": {"enum": ["u_x", "u_y", "epsilon", "gamma"]},
                    "minItems": 1,
                },
                "bounds": {
                    "type": "object",
                    "patternProperties": {
                        "^(u_x|u_y|epsilon|gamma)$": {
                            "type": "array",
                            "items": _NUMBER,
                            "minItems": 2,
                            "maxItems": 2,
                        }
                    },
                    "additionalProperties": False,
                },
            },
            "required": ["n_bins", "t1", "channels", "bounds"],
            "additionalProperties": False,
        },
        "objective": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["maximize_P", "match_shape"]},
                "ell": {"type": "integer", "minimum": 0, "maximum": 4},
                "target_times": {"type": "array", "items": _NUMBER, "minItems": 2},
                "target_nu": {"type": "array", "items": _NUMBER, "minItems": 2},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "ga": {
            "type": "object",
            "properties": {
                "population": {"type": "integer", "minimum": 2},
                "generations": {"type": "integer", "minimum": 0},
                "crossover_rate": {"type": "number", "minimum": 0, "maximum": 1},
                "mutation_rate": {"type": "number", "minimum": 0, "maximum": 1},
                "mutation_scale": {"type": "number", "exclusiveMinimum": 0},
                "mutation_scale_final": {"type": "number", "exclusiveMinimum": 0},
                "elitism": {"type": "integer", "minimum": 0},
                "tournament": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "required": ["parametrization", "objective"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": ["generate", "transform", "design_source", "optimize"]},
        "system": _SYSTEM_SCHEMA,
        "incoming": _PACKET_SCHEMA,
        "design": _PACKET_SCHEMA,
        "simulation": _SIMULATION_SCHEMA,
        "optimization": _OPTIMIZATION_SCHEMA,
        "output": {
            "type": "object",
            "properties": {"prefix": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "mode"],
    "additionalProperties": False,
}

_MODE_BLOCKS = {
    "generate": {"need": ["system"], "forbid": ["incoming", "design", "optimization"]},
    "transform": {"need": ["system", "incoming"], "forbid": ["design", "optimization"]},
    "design_source": {"need": ["design"], "forbid": ["system", "incoming", "optimization"]},
    "optimize": {"need": ["system", "optimization"], "forbid": ["design"]},
}


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _as_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def _parse_segment(d: dict) -> Segment:
    kind = d["type"]
    if kind == "const":
        return Segment(d["t0"], d["t1"], "const", a=_as_complex(d["value"]))
    if kind == "linear":
        return Segment(d["t0"], d["t1"], "linear", a=_as_complex(d["start"]), b=_as_complex(d["stop"]))
    if kind == "exp":
        return Segment(d["t0"], d["t1"], "exp", a=_as_complex(d["value"]), rate=float(d["rate"]))
    return Segment(
        d["t0"], d["t1"], "samples",
        times=tuple(float(t) for t in d["times"]),
        values=tuple(_as_complex(v) for v in d["values"]),
    )


def _parse_waveform(d: dict | None, horizon: float, tail: str = "zero") -> Waveform:
    if d is None:
        return Waveform.constant(0.0, horizon, tail=tail)
    return Waveform(
        tuple(_parse_segment(s) for s in d["segments"]),
        tail=d.get("tail", tail),
    )


def _parse_impulse(d: dict) -> Impulse:
    if ("pulse" in d) == ("unitary" in d):
        raise ValidationError("impulse needs exactly one of 'pulse' or 'unitary'")
    if "pulse" in d:
        _, _, sx = pauli_ops()
        return Impulse(float(d["time"]), sx)
    u = np.array([[_as_complex(v) for v in row] for row in d["unitary"]])
    return Impulse(float(d["time"]), u)


def _build_system(block: dict) -> SLHSystem:
    controls = block["controls"]
    gamma = _parse_waveform(controls["gamma"], 0.0, tail="hold")
    horizon = gamma.t_end
    schedule = ControlSchedule(
        u=_parse_waveform(controls.get("u"), horizon),
        epsilon=_parse_waveform(controls.get("epsilon"), horizon),
        gamma=gamma,
        impulses=tuple(_parse_impulse(d) for d in block.get("impulses", ())),
    )
    system = qubit_system(schedule)
    if block.get("initially_excited", False):
        psi = np.array([0.0, 1.0], dtype=complex)
        system = dataclasses.replace(system, initial_state=psi)
    return system


def _packet_arrays(block: dict):
    g = block["grid"]
    times = np.linspace(float(g["start"]), float(g["stop"]), int(g["num"]))
    if abs(times[0]) > 1e-12:
        raise ValidationError("packet grid must start at t=0")
    nu_spec = block["nu"]
    if nu_spec["type"] == "gaussian":
        nu = np.exp(-0.5 * ((times - nu_spec["center"]) / nu_spec["width"]) ** 2)
    elif nu_spec["type"] == "exponential":
        r = float(nu_spec["rate"])
        if r <= 0:
            raise ValidationError("exponential packet rate must be positive")
        nu = np.sqrt(2.0 * r) * np.exp(-r * times)
    else:
        nu = np.asarray(nu_spec["values"], dtype=float)
        if nu.shape != times.shape:
            raise ValidationError(
                f"nu samples ({nu.size}) must match the packet grid ({times.size})"
            )
    phi_spec = block.get("phi")
    if phi_spec is None:
        phi = None
    elif phi_spec["type"] == "linear":
        phi = float(phi_spec["slope"]) * times
    else:
        phi = np.asarray(phi_spec["values"], dtype=float)
        if phi.shape != times.shape:
            raise ValidationError(
                f"phi samples ({phi.size}) must match the packet grid ({times.size})"
            )
    return times, nu, phi


def _build_incoming(block: dict, notes: list[str] | None = None) -> SourceDesign:
    times, nu, phi = _packet_arrays(block)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        design = design_source(times, nu, phi, gamma_max=block.get("gamma_max", 1e3))
    if notes is not None:
        notes.extend(str(w.message) for w in caught)
    return design


def load_config(path: str) -> dict:
    """Read and fully validate a scenario config; raises ValidationError."""
    try:
        with open(path) as f:
            cfg = json.load(f)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config invalid at {loc}: {exc.message}") from exc

    blocks = _MODE_BLOCKS[cfg["mode"]]
    for key in blocks["need"]:
        if key not in cfg:
            raise ValidationError(f"mode {cfg['mode']!r} requires a {key!r} block")
    for key in blocks["forbid"]:
        if key in cfg:
            raise ValidationError(f"mode {cfg['mode']!r} does not accept a {key!r} block")

    def finite(obj, where="config"):
        if isinstance(obj, dict):
            for k, v in obj.items():
                finite(v, f"{where}/{k}")
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                finite(v, f"{where}[{i}]")
        elif isinstance(obj, float) and not math.isfinite(obj):
            raise ValidationError(f"non-finite number at {where}")

    finite(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    """Physics validation beyond the schema, without running anything."""
    if "system" in cfg:
        system = _build_system(cfg["system"])
        system.check_hermitian(tol=1e-9)
    if cfg["mode"] == "transform":
        times, nu, _ = _packet_arrays(cfg["incoming"])
        if float(np.trapezoid(nu**2, times)) <= 1e-12:
            raise ValidationError("incoming packet is unnormalizable")
    if cfg["mode"] == "design_source":
        times, nu, _ = _packet_arrays(cfg["design"])
        if float(np.trapezoid(nu**2, times)) <= 1e-12:
            raise ValidationError("design target is unnormalizable")
    if cfg["mode"] == "optimize":
        opt = cfg["optimization"]
        p = opt["parametrization"]
        PulseParametrization(
            basis=p.get("basis", "piecewise_constant"),
            n_bins=p["n_bins"],
            t0=p.get("t0", 0.0),
            t1=p["t1"],
            channels=tuple(p["channels"]),
            bounds={k: tuple(v) for k, v in p["bounds"].items()},
        )
        obj = opt["objective"]
        if obj["kind"] == "match_shape" and ("target_times" not in obj or "target_nu" not in obj):
            raise ValidationError("match_shape objective needs target_times and target_nu")


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------

def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


def _write_bundle(outdir: str, prefix: str, system: SLHSystem, table, tensor, ladder,
                  diagnostics: dict) -> list[str]:
    files = []

    def path(name):
        p = os.path.join(outdir, f"{prefix}{name}")
        files.append(p)
        return p

    _write_csv(
        path("ladder.csv"),
        ["ell", "probability"],
        [(ell, float(p)) for ell, p in enumerate(ladder.probs)],
    )

    grid = table.grid
    uvals = np.empty(grid.size, dtype=complex)
    evals = np.empty(grid.size)
    gvals = np.empty(grid.size)
    sp, sm, _ = pauli_ops()
    for i, t in enumerate(grid):
        h = system.hamiltonian(float(t))
        l = system.coupling(float(t))
        uvals[i] = 2.0 * h[system.dim - 1, 0] if system.dim == 2 else 0.0
        evals[i] = float(np.real(h[-1, -1]))
        gvals[i] = float(np.real(np.vdot(l, l))) / 2.0
    _write_csv(
        path("controls.csv"),
        ["t", "u_re", "u_im", "epsilon", "gamma"],
        [
            (float(t), float(u.real), float(u.imag), float(e), float(g))
            for t, u, e, g in zip(grid, uvals, evals, gvals)
        ],
    )

    for ell, lv in tensor.levels.items():
        cols = [f"tau{j + 1}" for j in range(ell)] + ["re", "im"]
        rows = [
            tuple(float(lv.times[i]) for i in idx) + (float(v.real), float(v.imag))
            for idx, v in zip(lv.indices, lv.values)
        ]
        _write_csv(path(f"wavepacket_l{ell}.csv"), cols, rows)

    with open(path("diagnostics.json"), "w") as f:
        json.dump(diagnostics, f, indent=2, sort_keys=True)
        f.write("\n")
    return files


def _simulate_system(system: SLHSystem, sim: dict):
    step = sim.get("step")
    t_final = sim.get("t_final")
    ell_max = sim.get("ell_max", 2)
    level_nodes = {int(k): int(v) for k, v in sim.get("level_nodes", {}).items()}
    integrator = sim.get("integrator", "expm_midpoint")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = propagate(system, step=step, integrator=integrator, t_final=t_final)
        tensor = output_amplitudes(table, system, ell_max, level_nodes=level_nodes)
        ladder = photon_probabilities(tensor)
    notes = sorted({str(w.message) for w in caught})
    return table, tensor, ladder, notes


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _diag_base(cfg: dict, seed, start: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": cfg["mode"],
        "seed": seed,
        "config_echo": cfg,
        "runtime_seconds": round(time.time() - start, 3),
    }


def cmd_simulate(cfg: dict, outdir: str, seed, threads: int) -> list[str]:
    start = time.time()
    build_notes: list[str] = []
    if cfg["mode"] == "transform":
        incoming = _build_incoming(cfg["incoming"], build_notes)
        b = _build_system(cfg["system"])
        if b.horizon < incoming.support_end:
            b = dataclasses.replace(b, horizon=incoming.support_end)
        system = transformation_scenario(incoming, b).composed
    else:
        system = _build_system(cfg["system"])
    table, tensor, ladder, notes = _simulate_system(system, cfg.get("simulation", {}))
    notes = sorted(set(build_notes) | set(notes))
    diagnostics = _diag_base(cfg, seed, start)
    diagnostics.update(
        residual_excitation=tensor.residual_excitation,
        quadrature_error_estimate=ladder.quadrature_error_estimate,
        probability_residual=ladder.residual,
        warnings=notes,
    )
    prefix = cfg.get("output", {}).get("prefix", "")
    return _write_bundle(outdir, prefix, system, table, tensor, ladder, diagnostics)


def cmd_design(cfg: dict, outdir: str, seed, threads: int) -> list[str]:
    start = time.time()
    build_notes: list[str] = []
    design = _build_incoming(cfg["design"], build_notes)
    sim = dict(cfg.get("simulation", {}))
    sim.setdefault("ell_max", 1)
    table, tensor, ladder, notes = _simulate_system(design.system, sim)
    notes = sorted(set(build_notes) | set(notes))

    # round-trip error of the forward simulation against the target packet
    lv = tensor.levels[1]
    target = np.interp(lv.times, design.times, design.nu, left=0.0, right=0.0)
    l2_err = float(np.sqrt(np.trapezoid((np.abs(lv.values) - target) ** 2, lv.times)))
    target_phi = np.interp(lv.times, design.times, design.phi)
    mask = target > 0.05
    phase_err = 0.0
    if np.any(mask):
        dphi = np.angle(lv.values[mask] * np.exp(-1j * target_phi[mask]))
        phase_err = float(np.max(np.abs(dphi)))

    diagnostics = _diag_base(cfg, seed, start)
    diagnostics.update(
        residual_excitation=tensor.residual_excitation,
        quadrature_error_estimate=ladder.quadrature_error_estimate,
        probability_residual=ladder.residual,
        clipped_mass=design.clipped_mass,
        roundtrip_l2_error=l2_err,
        roundtrip_phase_error=phase_err,
        warnings=notes,
    )
    prefix = cfg.get("output", {}).get("prefix", "")
    files = _write_bundle(outdir, prefix, design.system, table, tensor, ladder, diagnostics)
    sched_path = os.path.join(outdir, f"{prefix}designed_schedule.csv")
    _write_csv(
        sched_path,
        ["tau", "nu", "phi", "gamma", "epsilon"],
        [
            (float(t), float(n), float(p), float(g), float(e))
            for t, n, p, g, e in zip(design.times, design.nu, design.phi, design.gamma, design.epsilon)
        ],
    )
    files.append(sched_path)
    return files


def cmd_optimize(cfg: dict, outdir: str, seed, threads: int) -> list[str]:
    start = time.time()
    opt = cfg["optimization"]
    p = opt["parametrization"]
    parametrization = PulseParametrization(
        basis=p.get("basis", "piecewise_constant"),
        n_bins=p["n_bins"],
        t0=p.get("t0", 0.0),
        t1=p["t1"],
        channels=tuple(p["channels"]),
        bounds={k: tuple(v) for k, v in p["bounds"].items()},
    )
    base = _build_system(cfg["system"])
    controls = cfg["system"]["controls"]
    horizon = _parse_waveform(controls["gamma"], 0.0, tail="hold").t_end
    sim = cfg.get("simulation", {})
    build_notes: list[str] = []
    incoming = _build_incoming(cfg["incoming"], build_notes) if "incoming" in cfg else None
    scenario = PulseScenario(
        gamma=_parse_waveform(controls["gamma"], horizon, tail="hold"),
        epsilon=_parse_waveform(controls.get("epsilon"), horizon),
        incoming=incoming,
        initially_excited=cfg["system"].get("initially_excited", False),
    )
    obj_cfg = opt["objective"]
    objective = Objective(
        kind=obj_cfg["kind"],
        ell=obj_cfg.get("ell", 1),
        target_times=np.asarray(obj_cfg["target_times"], dtype=float)
        if "target_times" in obj_cfg else None,
        target_nu=np.asarray(obj_cfg["target_nu"], dtype=float)
        if "target_nu" in obj_cfg else None,
        step=sim.get("step", 0.01),
        t_final=sim.get("t_final"),
        ell_max=sim.get("ell_max", 2),
        level_nodes={int(k): int(v) for k, v in sim.get("level_nodes", {}).items()},
    )
    ga_cfg = dict(opt.get("ga", {}))
    if seed is not None:
        ga_cfg["seed"] = seed
    config = GAConfig(**ga_cfg)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_ga(config, parametrization, scenario, objective, threads=threads)
        best_system = scenario.build(result.best_params, parametrization)
        table, tensor, ladder, notes = _simulate_system(
            best_system,
            {**sim, "step": objective.step, "t_final": objective.t_final,
             "ell_max": objective.ell_max},
        )

    diagnostics = _diag_base(cfg, config.seed, start)
    diagnostics.update(
        residual_excitation=tensor.residual_excitation,
        quadrature_error_estimate=ladder.quadrature_error_estimate,
        probability_residual=ladder.residual,
        best_score=result.best_score,
        best_params=[float(x) for x in result.best_params],
        converged=result.converged,
        warnings=sorted(set(build_notes) | set(notes)),
    )
    prefix = cfg.get("output", {}).get("prefix", "")
    files = _write_bundle(outdir, prefix, best_system, table, tensor, ladder, diagnostics)
    hist_path = os.path.join(outdir, f"{prefix}history.csv")
    _write_csv(
        hist_path,
        ["generation", "best_so_far", "generation_best", "mean"],
        [(int(g), float(b), float(gb), float(m)) for g, b, gb, m in result.history],
    )
    files.append(hist_path)
    return files


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMAND_MODES = {
    "simulate": ("generate", "transform"),
    "design": ("design_source",),
    "optimize": ("optimize",),
}


def run_config(command: str, cfg: dict, outdir: str, seed=None, threads: int = 1) -> list[str]:
    """Validate and execute one command; returns the list of written files."""
    validate_config(cfg)
    if command == "validate":
        return []
    if cfg["mode"] not in _COMMAND_MODES[command]:
        raise ValidationError(
            f"config mode {cfg['mode']!r} cannot be run with 'flyq {command}'"
        )
    os.makedirs(outdir, exist_ok=True)
    runner = {"simulate": cmd_simulate, "design": cmd_design, "optimize": cmd_optimize}[command]
    return runner(cfg, outdir, seed, threads)


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="flyq",
        description="Flying-qubit control: simulate, design, and optimize "
        "photon-emission scenarios from JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("simulate", "run a generation or transformation scenario"),
        ("design", "design source schedules for a target packet"),
        ("optimize", "run the genetic pulse optimization"),
        ("validate", "validate a config without running it"),
    ):
        sp = sub.add_parser(name, help=desc)
        sp.add_argument("--config", required=True, help="path to the JSON scenario config")
        sp.add_argument("--out", default="flyq_out", help="output directory (default: flyq_out)")
        sp.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        sp.add_argument(
            "--threads", type=int, default=None,
            help="worker threads for fitness evaluation (default: FLYQ_THREADS or 1)",
        )
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    threads = args.threads
    if threads is None:
        try:
            threads = int(os.environ.get("FLYQ_THREADS", "1"))
        except ValueError:
            print("flyq: FLYQ_THREADS must be an integer", file=sys.stderr)
            return 2
    if threads < 1:
        print("flyq: --threads must be >= 1", file=sys.stderr)
        return 2
    if args.seed is not None and args.seed < 0:
        print("flyq: --seed must be a nonnegative integer", file=sys.stderr)
        return 2

    try:
        cfg = load_config(args.config)
        files = run_config(args.command, cfg, args.out, seed=args.seed, threads=threads)
    except (DivergenceError, ConditioningError, SingularMatrixError, CapacityError) as exc:
        print(f"flyq: numeric failure: {exc}", file=sys.stderr)
        return 3
    except FlyqError as exc:
        print(f"flyq: config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"{args.config}: ok")
    else:
        for f in files:
            print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())

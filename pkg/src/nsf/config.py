"""Run configuration: INI parsing, validation and scenario construction.

Every key is optional except where noted in ``SCHEMA``; unknown sections or
keys are rejected. All problems found are reported together.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .constitutive import (
    GasEOS,
    TransportLaws,
    boyle_mariotte_P,
    iconic_P,
    make_laws,
    tabulated_P,
    validate_table,
)
from .expr import Expression, ExpressionError
from .minprinciple import M_VARIANTS, TOL_VIOLATION
from .solver1d import CFL, MECHANICS, Grid1D, Scenario

EOS_PRESETS = ("boyle-mariotte", "iconic", "radiative", "tabulated")
ETA_KINDS = ("min", "constant", "zero")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _floats(text):
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _record(text):
    v = text.strip().lower()
    if v in ("step", "every", "all"):
        return None
    return float(v)


# section -> key -> (converter, default)
SCHEMA = {
    "grid": {"n_cells": (int, 128), "x_left": (float, 0.0), "x_right": (float, 1.0)},
    "eos": {"preset": (str, "iconic"), "Z_bar": (float, 1.0), "a": (float, 0.0),
            "table_Z": (_floats, ()), "table_P": (_floats, ())},
    "transport": {"beta": (float, 7.0), "mu0": (float, 1.0), "mu1": (float, 1.0),
                  "eta": (str, "min"), "eta_scale": (float, 1.0),
                  "kappa_half": (float, 1.0), "kappa_beta": (float, 1.0),
                  "mu_lower_form": (str, "max")},
    "regularization": {"eps": (float, 0.0), "delta": (float, 0.0), "Gamma": (float, 4.0)},
    "initial": {"rho": (str, "1"), "theta": (str, "1"), "u": (str, "0")},
    "boundary": {"theta_left": (str, "1"), "theta_right": (str, "1"),
                 "theta_lb": (float, 0.0), "samples": (int, 1001)},
    "forcing": {"g": (str, "0")},
    "time": {"T_end": (float, 1.0), "dt_max": (float, 1e-2), "cfl": (float, CFL),
             "record_every": (_record, None), "mechanics": (str, "coupled"),
             "implicit_iterations": (int, 0)},
    "checks": {"minprinciple": (_bool, True), "diagnostics": (_bool, True),
               "oracle": (_bool, False), "tol_violation": (float, TOL_VIOLATION),
               "M_variant": (str, "derived"), "derivative": (str, "backward"),
               "oracle_intervals": (int, 2048), "oracle_dt": (float, 2e-5)},
    "output": {"directory": (str, "nsf-out"), "plots": (_bool, True)},
    "mollify": {"enabled": (_bool, False), "delta": (float, 0.1), "z_max": (float, 10.0),
                "points": (int, 400), "use_in_solver": (_bool, False)},
    "sweep": {"eps": (_floats, ()), "delta": (_floats, ()), "n_cells": (_floats, ()),
              "workers": (int, 0)},
}


def _section_class(name, keys):
    fields = [(k, object, dataclasses.field(default=d)) for k, (_, d) in keys.items()]
    return dataclasses.make_dataclass(name.capitalize() + "Section", fields, frozen=True)


SECTION_TYPES = {name: _section_class(name, keys) for name, keys in SCHEMA.items()}


@dataclass(frozen=True)
class RunConfig:
    grid: object
    eos: object
    transport: object
    regularization: object
    initial: object
    boundary: object
    forcing: object
    time: object
    checks: object
    output: object
    mollify: object
    sweep: object
    source: str = ""
    path: Optional[str] = None

    def as_dict(self) -> dict:
        return {name: dataclasses.asdict(getattr(self, name)) for name in SCHEMA}

    def override(self, section: str, **values) -> "RunConfig":
        sec = dataclasses.replace(getattr(self, section), **values)
        return dataclasses.replace(self, **{section: sec})


def parse_config_text(text: str, path: Optional[str] = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive (Z_bar, T_end)
    try:
        parser.read_string(text, source=path or "<config>")
    except configparser.Error as exc:
        raise ConfigError([f"syntax error: {exc}"]) from None
    errors: list[str] = []
    sections = {}
    for name in parser.sections():
        if name not in SCHEMA:
            errors.append(f"unknown section [{name}]")
    for name, keys in SCHEMA.items():
        values = {}
        if parser.has_section(name):
            for key, raw in parser.items(name):
                if key not in keys:
                    errors.append(f"unknown key {key!r} in [{name}]")
                    continue
                conv = keys[key][0]
                try:
                    values[key] = conv(raw)
                except ValueError as exc:
                    errors.append(f"[{name}] {key}: {exc}")
        sections[name] = SECTION_TYPES[name](**values)
    cfg = RunConfig(**sections, source=text, path=path)
    errors.extend(validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError([f"config file not found: {p}"])
    return parse_config_text(p.read_text(), str(p))


def _expr_error(errors, label, source, variables):
    try:
        return Expression(source, variables)
    except ExpressionError as exc:
        errors.append(f"{label}: {exc}")
        return None


def validate(cfg: RunConfig) -> list[str]:
    """Return every constraint violation of ``cfg``."""
    errors = []
    g, eos, tr, reg, tm = cfg.grid, cfg.eos, cfg.transport, cfg.regularization, cfg.time
    if g.n_cells < 8:
        errors.append("grid.n_cells must be at least 8")
    if not g.x_right > g.x_left:
        errors.append("grid.x_right must exceed grid.x_left")
    if eos.preset not in EOS_PRESETS:
        errors.append(f"eos.preset must be one of {EOS_PRESETS}")
    if not eos.Z_bar > 0:
        errors.append("eos.Z_bar must be positive")
    if eos.a < 0:
        errors.append("eos.a must be nonnegative")
    if eos.preset == "radiative" and not eos.a > 0:
        errors.append("eos.preset 'radiative' requires a > 0")
    if eos.preset == "tabulated":
        errors.extend("eos table: " + m for m in
                      validate_table(np.asarray(eos.table_Z), np.asarray(eos.table_P)))
    if not tr.beta > 6:
        errors.append(f"transport.beta = {tr.beta:g} violates the heat-conductivity "
                      "growth requirement beta > 6")
    if tr.eta not in ETA_KINDS:
        errors.append(f"transport.eta must be one of {ETA_KINDS}")
    if tr.mu_lower_form not in ("max", "sum"):
        errors.append("transport.mu_lower_form must be 'max' or 'sum'")
    for key in ("mu0", "mu1", "kappa_half", "kappa_beta"):
        if not getattr(tr, key) > 0:
            errors.append(f"transport.{key} must be positive")
    if tr.eta_scale < 0:
        errors.append("transport.eta_scale must be nonnegative")
    if reg.eps < 0:
        errors.append("regularization.eps must be nonnegative")
    if reg.delta < 0:
        errors.append("regularization.delta must be nonnegative")
    if reg.Gamma < 2:
        errors.append(f"regularization.Gamma = {reg.Gamma:g} must be at least 2")
    if not tm.T_end > 0:
        errors.append("time.T_end must be positive")
    if not tm.dt_max > 0:
        errors.append("time.dt_max must be positive")
    if not 0 < tm.cfl <= 1:
        errors.append("time.cfl must lie in (0, 1]")
    if tm.record_every is not None and not tm.record_every > 0:
        errors.append("time.record_every must be positive or 'step'")
    if tm.mechanics not in MECHANICS:
        errors.append(f"time.mechanics must be one of {MECHANICS}")
    if tm.implicit_iterations < 0:
        errors.append("time.implicit_iterations must be nonnegative")
    ch = cfg.checks
    if ch.M_variant not in M_VARIANTS:
        errors.append(f"checks.M_variant must be one of {M_VARIANTS}")
    if ch.derivative not in ("backward", "centered"):
        errors.append("checks.derivative must be 'backward' or 'centered'")
    if ch.tol_violation < 0:
        errors.append("checks.tol_violation must be nonnegative")
    if cfg.mollify.delta <= 0:
        errors.append("mollify.delta must be positive")
    if cfg.sweep.workers < 0:
        errors.append("sweep.workers must be nonnegative")
    if any(v < 8 or v != int(v) for v in cfg.sweep.n_cells):
        errors.append("sweep.n_cells entries must be integers >= 8")
    if any(v < 0 for v in cfg.sweep.eps + cfg.sweep.delta):
        errors.append("sweep eps/delta entries must be nonnegative")

    xs = np.linspace(g.x_left, g.x_right, 2 * max(g.n_cells, 8) + 1) if g.x_right > g.x_left \
        else np.zeros(1)
    ini = cfg.initial
    for key in ("rho", "theta"):
        ex = _expr_error(errors, f"initial.{key}", getattr(ini, key), ("x",))
        if ex is not None:
            vals = ex(xs)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                errors.append(f"initial.{key} must be finite and positive on the interval")
    ex = _expr_error(errors, "initial.u", ini.u, ("x",))
    if ex is not None and not np.all(np.isfinite(ex(xs))):
        errors.append("initial.u must be finite on the interval")
    _expr_error(errors, "forcing.g", cfg.forcing.g, ("t", "x"))
    bd = cfg.boundary
    if bd.samples < 2:
        errors.append("boundary.samples must be at least 2")
    ts = boundary_times(cfg)
    for key in ("theta_left", "theta_right"):
        ex = _expr_error(errors, f"boundary.{key}", getattr(bd, key), ("t",))
        if ex is not None and tm.T_end > 0:
            vals = ex(ts)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                errors.append(f"boundary.{key} must be strictly positive on [0, T_end]")
            elif np.any(vals < bd.theta_lb):
                errors.append(f"boundary.{key} falls below theta_lb = {bd.theta_lb:g}")
    return errors


def boundary_times(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, max(cfg.time.T_end, 0.0), max(cfg.boundary.samples, 2))


def build_structural(cfg: RunConfig):
    e = cfg.eos
    if e.preset == "boyle-mariotte":
        base = boyle_mariotte_P()
    elif e.preset == "tabulated":
        base = tabulated_P(e.table_Z, e.table_P)
    else:
        base = iconic_P(e.Z_bar)
    return base


def build_eos(cfg: RunConfig) -> GasEOS:
    base = build_structural(cfg)
    if cfg.mollify.enabled and cfg.mollify.use_in_solver:
        from .mollifier import make_kernel, mollify
        base = mollify(base, make_kernel(cfg.mollify.delta)).as_structural()
    return GasEOS(base, cfg.eos.a)


def build_laws(cfg: RunConfig) -> TransportLaws:
    t = cfg.transport
    return make_laws(mu0=t.mu0, mu1=t.mu1, eta_kind=t.eta, eta_scale=t.eta_scale,
                     kappa_half=t.kappa_half, kappa_beta=t.kappa_beta, beta=t.beta,
                     mu_lower_form=t.mu_lower_form)


def build_scenario(cfg: RunConfig) -> Scenario:
    ini, bd, reg, tm = cfg.initial, cfg.boundary, cfg.regularization, cfg.time
    return Scenario(
        grid=Grid1D(cfg.grid.n_cells, cfg.grid.x_left, cfg.grid.x_right),
        eos=build_eos(cfg), laws=build_laws(cfg),
        rho0=Expression(ini.rho, ("x",)), theta0=Expression(ini.theta, ("x",)),
        u0=Expression(ini.u, ("x",)),
        thetaB_left=Expression(bd.theta_left, ("t",)),
        thetaB_right=Expression(bd.theta_right, ("t",)),
        g=Expression(cfg.forcing.g, ("t", "x")),
        eps=reg.eps, delta_p=reg.delta, Gamma=reg.Gamma,
        T_end=tm.T_end, dt_max=tm.dt_max, cfl=tm.cfl, record_every=tm.record_every,
        mechanics=tm.mechanics, implicit_iterations=tm.implicit_iterations,
    )


def render_config(cfg_dict: dict) -> str:
    """Write a section dict back to INI text (used for manifests and sweeps)."""
    lines = []
    for name, values in cfg_dict.items():
        lines.append(f"[{name}]")
        for key, val in values.items():
            if isinstance(val, (tuple, list)):
                if not val:
                    continue
                val = ", ".join(repr(float(v)) for v in val)
            elif val is None:
                val = "step"
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        lines.append("")
    return "\n".join(lines)

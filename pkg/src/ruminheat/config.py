"""Flat key-value run configuration with sections.

The file format is INI-style: diff-able experiment records with every knob
explicit.  `default_config()` holds the full schema; `--print-config` on the
CLI dumps it.  Unknown sections or keys are rejected with the offending name
so typos fail loudly (exit code 2 at the CLI).
"""

from __future__ import annotations

import configparser
import io
from typing import Dict, Optional

from .heat import HeatConfig

DEFAULTS: Dict[str, Dict[str, str]] = {
    "grid": {
        "n": "1",
        "points": "33",
        "half_width": "4.0",
        "t_half_width": "",          # blank: auto (half_width squared)
    },
    "heat": {
        "degree": "0",
        "dt": "0.004",
        "t_final": "0.2",
        "stepper": "crank-nicolson",
        "solver": "direct-t",
        "solver_tol": "1e-10",
        "boundary_threshold": "1e-4",
    },
    "suite": {
        "resolutions": "41,49,65",
        "s": "0.05",
        "r": "2.0",
        "eps_cells": "2.5",
        "eps_cells_t": "2.0",
        "semigroup_s": "0.09",
        "semigroup_sigma": "0.045",
        "bump_width": "0.5",
        "m_final": "14.0",
    },
    "calderon": {
        "s_max": "8.0",
        "rho": "1.25",
        "sign": "1",
        "width_scale": "0.22",
        "smooth_time": "0.04",
        "compare_intertwined": "true",
    },
    "run": {
        "outdir": "out",
        "plots": "true",
        "seed": "1234",
        "snapshot_times": "",
    },
}


class ConfigError(ValueError):
    pass


def default_config() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_dict(DEFAULTS)
    return cp


def load_config(path: Optional[str]) -> configparser.ConfigParser:
    cp = default_config()
    if path:
        read = cp.read(path)
        if not read:
            raise ConfigError("cannot read config file %r" % path)
        for section in cp.sections():
            if section not in DEFAULTS:
                raise ConfigError("unknown config section [%s]" % section)
            for key in cp[section]:
                if key not in DEFAULTS[section]:
                    raise ConfigError("unknown key %r in section [%s]" % (key, section))
    return cp


def render_config(cp: configparser.ConfigParser) -> str:
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def config_dict(cp: configparser.ConfigParser) -> Dict[str, Dict[str, str]]:
    return {s: dict(cp[s]) for s in cp.sections()}


def _float_or_none(raw: str):
    raw = raw.strip()
    return None if raw == "" else float(raw)


def heat_config(cp: configparser.ConfigParser, degree: Optional[int] = None) -> HeatConfig:
    g = cp["grid"]
    h = cp["heat"]
    try:
        return HeatConfig(
            n=g.getint("n"),
            degree=degree if degree is not None else h.getint("degree"),
            points=g.getint("points"),
            half_width=g.getfloat("half_width"),
            t_half_width=_float_or_none(g.get("t_half_width")),
            dt=h.getfloat("dt"),
            t_final=h.getfloat("t_final"),
            stepper=h.get("stepper"),
            solver=h.get("solver"),
            solver_tol=h.getfloat("solver_tol"),
            boundary_threshold=h.getfloat("boundary_threshold"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def int_list(raw: str):
    return [int(tok) for tok in raw.replace(" ", "").split(",") if tok]

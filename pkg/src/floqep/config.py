"""Run configuration: YAML files with unit-suffixed quantities.

A config file is a nested key/value document; every physical quantity is a
"value unit" string so no bare numbers with implicit units can slip in.
The `model` section defines the two electronic curves, the transition
dipole and the reduced mass; the remaining sections configure the grid,
the eigensolver, EP searches, control loops and the wave-packet oracle.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .floquet import AbsorbingPotential, ExteriorScaling, RadialGrid
from .potentials import (ConstantDipole, ExponentialDipole, MorseCurve,
                         MorseLongRangeCurve, TabulatedCurve)
from .units import UnitError, parse_quantity


class ConfigError(ValueError):
    """Malformed or physically invalid configuration."""


def _get(section: dict, key: str, context: str):
    if key not in section:
        raise ConfigError(f"missing key {context}.{key}")
    return section[key]


def _qty(section: dict, key: str, dimension: str, context: str) -> float:
    try:
        return parse_quantity(_get(section, key, context), dimension).to_au()
    except UnitError as exc:
        raise ConfigError(f"{context}.{key}: {exc}") from exc


def _curve(section: dict, context: str):
    form = _get(section, "form", context)
    if form == "morse":
        return MorseCurve(
            well_depth=_qty(section, "well_depth", "energy", context),
            equilibrium_distance=_qty(section, "equilibrium_distance", "length", context),
            range_parameter=_qty(section, "range_parameter", "inverse_length", context),
            asymptote=_qty(section, "asymptote", "energy", context),
        )
    if form == "morse_long_range":
        return MorseLongRangeCurve(
            well_depth=_qty(section, "well_depth", "energy", context),
            equilibrium_distance=_qty(section, "equilibrium_distance", "length", context),
            range_parameter=_qty(section, "range_parameter", "inverse_length", context),
            asymptote=_qty(section, "asymptote", "energy", context),
            c3=_qty(section, "c3", "c3", context),
        )
    if form == "tabulated":
        r = [parse_quantity(x, "length").to_au() for x in _get(section, "r", context)]
        v = [parse_quantity(x, "energy").to_au() for x in _get(section, "v", context)]
        return TabulatedCurve(r_values=np.asarray(r), v_values=np.asarray(v),
                              asymptote=float(v[-1]))
    raise ConfigError(f"{context}.form: unknown curve form {form!r}")


def _dipole(section: dict, context: str):
    form = _get(section, "form", context)
    if form == "constant":
        return ConstantDipole(mu0=_qty(section, "mu0", "dipole", context))
    if form == "exponential":
        return ExponentialDipole(
            mu0=_qty(section, "mu0", "dipole", context),
            mu_atomic=_qty(section, "mu_atomic", "dipole", context),
            r_ref=_qty(section, "r_ref", "length", context),
            decay_length=_qty(section, "decay_length", "length", context),
        )
    raise ConfigError(f"{context}.form: unknown dipole form {form!r}")


@dataclass(frozen=True)
class MolecularModel:
    """Two calibrated electronic curves, a transition dipole, and the mass."""

    lower: object
    upper: object
    dipole: object
    mass: float
    name: str = "unnamed"

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigError("reduced mass must be positive")


@dataclass(frozen=True)
class LoopSettings:
    lambda0_nm: float
    delta_lambda_nm: float
    i_max_w_cm2: float
    t_f_au: float
    n_steps: int = 400
    direction: str = "forward"
    start_level: int = 4

    def __post_init__(self):
        if self.i_max_w_cm2 < 0:
            raise ConfigError("loop.i_max must be >= 0")
        if self.direction not in ("forward", "reverse"):
            raise ConfigError("loop.direction must be forward or reverse")
        if self.n_steps < 8:
            raise ConfigError("loop.n_steps must be at least 8")


@dataclass(frozen=True)
class EPSearchSettings:
    lambda_min_nm: float
    lambda_max_nm: float
    i_min_w_cm2: float
    i_max_w_cm2: float
    seed_levels: tuple[int, int] = (3, 4)
    coarse_shape: tuple[int, int] = (7, 7)


@dataclass(frozen=True)
class TDSESettings:
    r_min: float
    r_max: float
    n: int
    absorber_eta: float
    absorber_onset: float
    absorber_order: int = 2
    mode: str = "rwa"
    dt_au: float = 10.0
    steps_per_cycle: int = 20

    def __post_init__(self):
        if self.mode not in ("rwa", "carrier"):
            raise ConfigError("tdse.mode must be rwa or carrier")


@dataclass(frozen=True)
class RunConfig:
    model_type: str
    model: object  # MolecularModel or benchmarks.TwoLevelModel
    grid: RadialGrid | None
    levels_count: int
    loop: LoopSettings | None
    ep: EPSearchSettings | None
    tdse: TDSESettings | None
    solver: dict
    raw: dict = field(repr=False, default_factory=dict)


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply dotted key=value overrides ("grid.n=800") to a config tree."""
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, value = item.split("=", 1)
        keys = path.split(".")
        node = doc
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigError(f"override {item!r}: no section {k!r}")
            node = node[k]
        if not isinstance(node, dict):
            raise ConfigError(f"override {item!r}: {keys[-2]!r} is not a section")
        node[keys[-1]] = yaml.safe_load(value)
    return doc


def _grid(section: dict) -> RadialGrid:
    kind = section.get("scaling", {}).get("kind", "none")
    scaling = None
    if kind == "ecs":
        sc = section["scaling"]
        scaling = ExteriorScaling(theta=float(_get(sc, "theta", "grid.scaling")),
                                  r_start=_qty(sc, "r_start", "length", "grid.scaling"),
                                  switch_width=_qty(sc, "switch_width", "length",
                                                    "grid.scaling"))
    elif kind == "cap":
        sc = section["scaling"]
        scaling = AbsorbingPotential(eta=float(_get(sc, "eta", "grid.scaling")),
                                     r_onset=_qty(sc, "r_onset", "length", "grid.scaling"),
                                     order=int(sc.get("order", 2)))
    elif kind != "none":
        raise ConfigError(f"grid.scaling.kind: unknown kind {kind!r}")
    try:
        return RadialGrid(r_min=_qty(section, "r_min", "length", "grid"),
                          r_max=_qty(section, "r_max", "length", "grid"),
                          n=int(_get(section, "n", "grid")), scaling=scaling)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc


def load_config(path: str | Path | None = None, text: str | None = None,
                overrides: list[str] | None = None) -> RunConfig:
    """Load and validate a run configuration from a YAML file or string."""
    if text is None:
        if path is None:
            raise ConfigError("need a config path or text")
        text = Path(path).read_text()
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    if overrides:
        doc = apply_overrides(doc, overrides)

    msec = _get(doc, "model", "config")
    mtype = msec.get("type", "molecular")
    if mtype == "molecular":
        channels = _get(msec, "channels", "model")
        model = MolecularModel(
            lower=_curve(_get(channels, "lower", "model.channels"), "model.channels.lower"),
            upper=_curve(_get(channels, "upper", "model.channels"), "model.channels.upper"),
            dipole=_dipole(_get(msec, "dipole", "model"), "model.dipole"),
            mass=_qty(msec, "reduced_mass", "mass", "model"),
            name=str(msec.get("name", "unnamed")),
        )
        grid = _grid(_get(doc, "grid", "config"))
    elif mtype == "twolevel":
        from .benchmarks import TwoLevelModel

        model = TwoLevelModel(
            gamma=_qty(msec, "gamma", "energy", "model"),
            slope=_qty(msec, "detuning_slope", "energy", "model"),
            coupling_per_sqrt_i=_qty(msec, "coupling_per_sqrt_intensity", "energy",
                                     "model"),
            lambda_ep_nm=parse_quantity(_get(msec, "lambda_ep", "model"),
                                        "length").to("nm").magnitude,
            e_ref=_qty(msec, "e_ref", "energy", "model"),
        )
        grid = None
    else:
        raise ConfigError(f"model.type: unknown type {mtype!r}")

    loop = None
    if "loop" in doc:
        ls = doc["loop"]
        loop = LoopSettings(
            lambda0_nm=parse_quantity(_get(ls, "lambda0", "loop"), "length").to("nm").magnitude,
            delta_lambda_nm=parse_quantity(_get(ls, "delta_lambda", "loop"),
                                           "length").to("nm").magnitude,
            i_max_w_cm2=parse_quantity(_get(ls, "i_max", "loop"),
                                       "intensity").to("W/cm^2").magnitude,
            t_f_au=_qty(ls, "t_f", "time", "loop"),
            n_steps=int(ls.get("n_steps", 400)),
            direction=str(ls.get("direction", "forward")),
            start_level=int(ls.get("start_level", 4)),
        )

    ep = None
    if "ep" in doc:
        es = doc["ep"]
        ep = EPSearchSettings(
            lambda_min_nm=parse_quantity(_get(es, "lambda_min", "ep"), "length").to("nm").magnitude,
            lambda_max_nm=parse_quantity(_get(es, "lambda_max", "ep"), "length").to("nm").magnitude,
            i_min_w_cm2=parse_quantity(_get(es, "i_min", "ep"), "intensity").to("W/cm^2").magnitude,
            i_max_w_cm2=parse_quantity(_get(es, "i_max", "ep"), "intensity").to("W/cm^2").magnitude,
            seed_levels=tuple(es.get("seed_levels", (3, 4))),
            coarse_shape=tuple(es.get("coarse", (7, 7))),
        )

    tdse = None
    if "tdse" in doc:
        ts = doc["tdse"]
        ab = _get(ts, "absorber", "tdse")
        tdse = TDSESettings(
            r_min=_qty(ts, "r_min", "length", "tdse"),
            r_max=_qty(ts, "r_max", "length", "tdse"),
            n=int(_get(ts, "n", "tdse")),
            absorber_eta=float(_get(ab, "eta", "tdse.absorber")),
            absorber_onset=_qty(ab, "r_onset", "length", "tdse.absorber"),
            absorber_order=int(ab.get("order", 2)),
            mode=str(ts.get("mode", "rwa")),
            dt_au=_qty(ts, "dt", "time", "tdse") if "dt" in ts else 10.0,
            steps_per_cycle=int(ts.get("steps_per_cycle", 20)),
        )

    return RunConfig(
        model_type=mtype,
        model=model,
        grid=grid,
        levels_count=int(doc.get("levels", {}).get("count", 10)),
        loop=loop,
        ep=ep,
        tdse=tdse,
        solver=dict(doc.get("solver", {})),
        raw=doc,
    )


def packaged_config(name: str) -> str:
    """Text of one of the model files shipped inside the package."""
    return resources.files("floqep.data").joinpath(name).read_text()

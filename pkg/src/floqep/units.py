"""Unit-tagged quantities and the conversions the pipeline needs.

Lab-facing quantities (nm, GW/cm^2, fs, cm^-1) are converted to Hartree
atomic units on input and back on output; no general-purpose unit algebra
is attempted. A quantity in a config file is a string "value unit",
e.g. "562.53 nm" or "0.4 GW/cm^2".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import constants as const


class UnitError(ValueError):
    """Unknown unit, dimension mismatch, or out-of-domain magnitude."""


# unit name -> (dimension, factor such that value_in_au = value * factor)
_UNITS: dict[str, tuple[str, float]] = {
    # length
    "bohr": ("length", 1.0),
    "angstrom": ("length", 1.0 / const.BOHR_ANGSTROM),
    "nm": ("length", 1.0 / const.BOHR_NM),
    "m": ("length", 1.0 / const.BOHR_M),
    # inverse length (Morse range parameters)
    "1/bohr": ("inverse_length", 1.0),
    "1/angstrom": ("inverse_length", const.BOHR_ANGSTROM),
    # energy
    "hartree": ("energy", 1.0),
    "cm^-1": ("energy", 1.0 / const.HARTREE_WAVENUMBER),
    "eV": ("energy", 1.0 / const.HARTREE_EV),
    # intensity
    "au_intensity": ("intensity", 1.0),
    "W/cm^2": ("intensity", 1.0 / const.ATOMIC_INTENSITY_W_CM2),
    "GW/cm^2": ("intensity", 1e9 / const.ATOMIC_INTENSITY_W_CM2),
    "TW/cm^2": ("intensity", 1e12 / const.ATOMIC_INTENSITY_W_CM2),
    # time
    "au_time": ("time", 1.0),
    "fs": ("time", 1.0 / const.ATOMIC_TIME_FS),
    "ps": ("time", 1e3 / const.ATOMIC_TIME_FS),
    # field amplitude
    "au_field": ("field", 1.0),
    # mass
    "m_e": ("mass", 1.0),
    "amu": ("mass", const.AMU_ME),
    # dipole moment
    "e*bohr": ("dipole", 1.0),
    "debye": ("dipole", 0.3934303),
    # C3 long-range coefficient
    "hartree*bohr^3": ("c3", 1.0),
    # dimensionless
    "1": ("dimensionless", 1.0),
}


@dataclass(frozen=True)
class UnitValue:
    """A magnitude tagged with one of the supported physical units."""

    magnitude: float
    unit: str

    def __post_init__(self):
        if self.unit not in _UNITS:
            raise UnitError(f"unknown unit {self.unit!r}")

    @property
    def dimension(self) -> str:
        return _UNITS[self.unit][0]

    def to_au(self) -> float:
        return self.magnitude * _UNITS[self.unit][1]

    def to(self, unit: str) -> "UnitValue":
        if unit not in _UNITS:
            raise UnitError(f"unknown unit {unit!r}")
        dim, factor = _UNITS[unit]
        if dim != self.dimension:
            raise UnitError(f"cannot convert {self.unit} to {unit}")
        return UnitValue(self.to_au() / factor, unit)


def from_au(value: float, unit: str) -> UnitValue:
    """Wrap an atomic-unit value as a UnitValue in the requested unit."""
    if unit not in _UNITS:
        raise UnitError(f"unknown unit {unit!r}")
    return UnitValue(value / _UNITS[unit][1], unit)


def parse_quantity(text, dimension: str | None = None) -> UnitValue:
    """Parse "562.53 nm" style strings; optionally check the dimension."""
    if isinstance(text, UnitValue):
        qty = text
    else:
        if not isinstance(text, str):
            raise UnitError(
                f"expected 'value unit' string, got {text!r}; bare numbers are "
                "not accepted for physical quantities"
            )
        parts = text.split()
        if len(parts) != 2:
            raise UnitError(f"expected 'value unit', got {text!r}")
        try:
            mag = float(parts[0])
        except ValueError as exc:
            raise UnitError(f"bad magnitude in {text!r}") from exc
        qty = UnitValue(mag, parts[1])
    if dimension is not None and qty.dimension != dimension:
        raise UnitError(f"{text!r} has dimension {qty.dimension}, expected {dimension}")
    return qty


def intensity_to_field(intensity_w_cm2: float) -> float:
    """Field amplitude eps0 in a.u. for a cycle-averaged intensity in W/cm^2.

    I = I_au * eps0^2, so eps0 = sqrt(I / I_au).
    """
    if intensity_w_cm2 < 0:
        raise UnitError(f"intensity must be >= 0, got {intensity_w_cm2}")
    return math.sqrt(intensity_w_cm2 / const.ATOMIC_INTENSITY_W_CM2)


def wavelength_to_photon_energy(wavelength_nm: float) -> float:
    """Photon energy hbar*omega in Hartree for a vacuum wavelength in nm."""
    if wavelength_nm <= 0:
        raise UnitError(f"wavelength must be > 0, got {wavelength_nm}")
    return const.HARTREE_WAVELENGTH_NM / wavelength_nm


@dataclass(frozen=True)
class LaserPoint:
    """One point in the control plane: wavelength (nm) and intensity (W/cm^2)."""

    wavelength_nm: float
    intensity_w_cm2: float

    def __post_init__(self):
        if self.wavelength_nm <= 0:
            raise UnitError(f"wavelength must be > 0, got {self.wavelength_nm}")
        if self.intensity_w_cm2 < 0:
            raise UnitError(f"intensity must be >= 0, got {self.intensity_w_cm2}")

    @property
    def field_au(self) -> float:
        return intensity_to_field(self.intensity_w_cm2)

    @property
    def photon_energy_au(self) -> float:
        return wavelength_to_photon_energy(self.wavelength_nm)

    @property
    def intensity_gw_cm2(self) -> float:
        return self.intensity_w_cm2 * 1e-9


@lru_cache(maxsize=None)
def known_units() -> tuple[str, ...]:
    return tuple(sorted(_UNITS))

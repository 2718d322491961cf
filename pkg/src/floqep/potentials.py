"""Model potential curves, transition dipole, dressed channels, and
field-free vibrational spectra.

All curves are analytic in R (except tabulated ones), so they can be
evaluated on the complex contour used by exterior complex scaling.
Energies, lengths and masses are atomic units throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.interpolate import CubicSpline

from .dvr import grid_points, kinetic
from .units import LaserPoint


class PotentialError(ValueError):
    pass


class InsufficientBoundStates(RuntimeError):
    def __init__(self, requested: int, found: int):
        super().__init__(f"requested {requested} bound levels, found {found}")
        self.requested = requested
        self.found = found


def _check_r(r):
    if np.any(np.real(np.atleast_1d(r)) <= 0):
        raise PotentialError("R must be positive")


@dataclass(frozen=True)
class MorseCurve:
    """V(R) = asymptote + D_e [(1 - exp(-a (R - R_e)))^2 - 1]."""

    well_depth: float
    equilibrium_distance: float
    range_parameter: float
    asymptote: float = 0.0
    form = "morse"
    analytic = True

    def __post_init__(self):
        if self.well_depth < 0 or self.range_parameter <= 0 or self.equilibrium_distance <= 0:
            raise PotentialError("Morse parameters must be positive")

    def value(self, r):
        _check_r(r)
        x = 1.0 - np.exp(-self.range_parameter * (np.asarray(r) - self.equilibrium_distance))
        return self.asymptote + self.well_depth * (x * x - 1.0)


@dataclass(frozen=True)
class MorseLongRangeCurve:
    """Morse core plus a C3/R^3 tail approaching the asymptote.

    With C3 > 0 the curve comes down to the asymptote from above, which is
    the geometry of the repulsive long-range branch reached by a
    blue-detuned photon.
    """

    well_depth: float
    equilibrium_distance: float
    range_parameter: float
    asymptote: float
    c3: float
    form = "morse_long_range"
    analytic = True

    def value(self, r):
        _check_r(r)
        r = np.asarray(r)
        x = 1.0 - np.exp(-self.range_parameter * (r - self.equilibrium_distance))
        return self.asymptote + self.well_depth * (x * x - 1.0) + self.c3 / r**3


@dataclass(frozen=True, eq=False)
class TabulatedCurve:
    """Cubic-spline interpolation of tabulated (R, V) samples.

    Not analytic: cannot be continued onto a complex-scaling contour, use a
    complex absorbing potential with it instead.
    """

    r_values: np.ndarray
    v_values: np.ndarray
    asymptote: float
    form = "tabulated"
    analytic = False
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=float)
        v = np.asarray(self.v_values, dtype=float)
        if r.ndim != 1 or r.size < 4 or np.any(np.diff(r) <= 0):
            raise PotentialError("tabulated curve needs >= 4 strictly increasing R values")
        object.__setattr__(self, "_spline", CubicSpline(r, v, extrapolate=False))

    def value(self, r):
        _check_r(r)
        if np.iscomplexobj(r):
            raise PotentialError("tabulated curves cannot be evaluated at complex R")
        out = self._spline(np.asarray(r, dtype=float))
        return np.where(np.isnan(out), self.asymptote, out)


def eval_potential(curve, r):
    """Evaluate a potential curve; scalar in, scalar out."""
    out = curve.value(r)
    return out.item() if np.isscalar(r) or np.ndim(r) == 0 else out


@dataclass(frozen=True)
class ConstantDipole:
    mu0: float
    form = "constant"
    analytic = True

    def value(self, r):
        return np.full(np.shape(r), self.mu0)


@dataclass(frozen=True)
class ExponentialDipole:
    """mu(R) = mu_atomic + (mu0 - mu_atomic) exp(-(R - R_ref)/decay_length)."""

    mu0: float
    mu_atomic: float
    r_ref: float
    decay_length: float
    form = "exponential"
    analytic = True

    def value(self, r):
        r = np.asarray(r)
        return self.mu_atomic + (self.mu0 - self.mu_atomic) * np.exp(
            -(r - self.r_ref) / self.decay_length
        )


@dataclass(frozen=True)
class DressedChannelPair:
    """Field-dressed diabatic channels and their radiative coupling.

    The lower channel keeps its Born-Oppenheimer curve; the upper one is
    shifted down by one photon energy; the off-diagonal coupling is
    W(R) = -eps0 mu(R) / 2.
    """

    lower: object  # BO curve of the bound channel
    upper: object  # BO curve of the excited channel
    dipole: object
    laser: LaserPoint

    def v_lower(self, r):
        return np.asarray(self.lower.value(r))

    def v_upper(self, r):
        return np.asarray(self.upper.value(r)) - self.laser.photon_energy_au

    def coupling(self, r):
        return -0.5 * self.laser.field_au * np.asarray(self.dipole.value(r))

    def crossing_radius(self, r_lo: float, r_hi: float) -> float:
        """The single radius where the dressed channels are degenerate."""
        from scipy.optimize import brentq

        def gap(r):
            return float(np.real(self.v_lower(r) - self.v_upper(r)))

        r_scan = np.linspace(r_lo, r_hi, 2001)
        g = self.v_lower(r_scan) - self.v_upper(r_scan)
        sign_changes = np.nonzero(np.diff(np.sign(g)) != 0)[0]
        if len(sign_changes) != 1:
            raise PotentialError(
                f"expected exactly one channel crossing in [{r_lo}, {r_hi}], "
                f"found {len(sign_changes)}"
            )
        i = sign_changes[0]
        return brentq(gap, r_scan[i], r_scan[i + 1], xtol=1e-12)


def dressed_channels(lower, upper, dipole, laser: LaserPoint) -> DressedChannelPair:
    return DressedChannelPair(lower=lower, upper=upper, dipole=dipole, laser=laser)


def adiabatic_potentials(pair: DressedChannelPair, r):
    """Pointwise eigenvalues (V_minus, V_plus) of the dressed 2x2 matrix."""
    vu = pair.v_lower(r)
    vg = pair.v_upper(r)
    w = pair.coupling(r)
    mean = 0.5 * (vu + vg)
    rad = np.sqrt((0.5 * (vu - vg)) ** 2 + w * w)
    return mean - rad, mean + rad


def mixing_angle(pair: DressedChannelPair, r):
    """Rotation angle taking the diabatic pair into the adiabatic one.

    The upper adiabatic state is cos(a)|upper> + sin(a)|lower> with
    a -> 0 wherever the upper diabatic channel already lies above.
    """
    vu = pair.v_lower(r)
    vg = pair.v_upper(r)
    w = pair.coupling(r)
    return 0.5 * np.arctan2(2.0 * w, vg - vu)


@dataclass(frozen=True, eq=False)
class VibLevel:
    v: int
    energy: float
    wavefunction: np.ndarray  # values on the grid, sum |psi|^2 dr = 1
    grid: np.ndarray
    dr: float

    def nodes(self) -> int:
        """Interior sign changes, ignoring numerically dead tails."""
        psi = self.wavefunction
        live = np.abs(psi) > 1e-8 * np.abs(psi).max()
        signs = np.sign(psi[live])
        return int(np.sum(signs[:-1] * signs[1:] < 0))


def bound_levels(curve, mass: float, count: int, r_min: float, r_max: float,
                 n: int) -> list[VibLevel]:
    """Lowest `count` bound eigenpairs of T + V with Dirichlet boundaries."""
    if mass <= 0:
        raise PotentialError("mass must be positive")
    r, dr = grid_points(r_min, r_max, n)
    h = kinetic(n, dr, mass) + np.diag(np.real(curve.value(r)))
    energies, vectors = sla.eigh(h)
    asym = getattr(curve, "asymptote", 0.0)
    n_bound = int(np.sum(energies < asym))
    if n_bound < count:
        raise InsufficientBoundStates(count, n_bound)
    levels = []
    for v in range(count):
        psi = vectors[:, v] / np.sqrt(dr)
        # fix the overall sign: positive lobe first
        lead = psi[np.argmax(np.abs(psi) > 1e-3 * np.abs(psi).max())]
        if lead < 0:
            psi = -psi
        levels.append(VibLevel(v=v, energy=float(energies[v]), wavefunction=psi,
                               grid=r, dr=dr))
    return levels


def morse_level_energy(curve: MorseCurve, mass: float, v: int) -> float:
    """Closed-form Morse eigenvalue (relative to the curve's asymptote)."""
    we = curve.range_parameter * np.sqrt(2.0 * curve.well_depth / mass)
    wexe = curve.range_parameter**2 / (2.0 * mass)
    x = v + 0.5
    return curve.asymptote - curve.well_depth + we * x - wexe * x * x


def morse_bound_count(curve: MorseCurve, mass: float) -> int:
    lam = np.sqrt(2.0 * mass * curve.well_depth) / curve.range_parameter
    return int(np.floor(lam - 0.5)) + 1

"""Two-channel Floquet operator on a radial grid with outgoing-wave
boundary conditions, and extraction of complex resonance quasienergies.

The operator is complex symmetric (not Hermitian). Outgoing-wave character
is imposed either by smooth exterior complex scaling of the coordinate or
by a polynomial complex absorbing potential; eigenvectors are normalized
under the bilinear c-product (no conjugation).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, eigs

from .dvr import first_derivative, grid_points, kinetic
from .potentials import DressedChannelPair, VibLevel, bound_levels, mixing_angle
from .units import LaserPoint

FESHBACH = "feshbach"
SHAPE = "shape"
UNASSIGNED = "unassigned"

# eigenvalues this far into the upper half plane are treated as numerically
# real; anything further up is a discarded artifact
UPPER_HALF_TOL = 1e-10


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExteriorScaling:
    """Smooth exterior complex scaling R -> F(R).

    F'(R) ramps from 1 to exp(i theta) over [r_start, r_start + switch_width]
    through a quintic smoothstep, so no derivative discontinuity is
    introduced at the turn-on radius.
    """

    theta: float
    r_start: float
    switch_width: float = 6.0
    kind = "ecs"

    def path_derivative(self, r: np.ndarray) -> np.ndarray:
        u = np.clip((r - self.r_start) / self.switch_width, 0.0, 1.0)
        s = u**3 * (10.0 - 15.0 * u + 6.0 * u * u)
        return 1.0 + (np.exp(1j * self.theta) - 1.0) * s

    def path(self, r: np.ndarray) -> np.ndarray:
        u = np.clip((r - self.r_start) / self.switch_width, 0.0, 1.0)
        # integral of the smoothstep: 2.5 u^4 - 3 u^5 + u^6
        s_int = self.switch_width * (2.5 * u**4 - 3.0 * u**5 + u**6)
        s_int = s_int + np.clip(r - self.r_start - self.switch_width, 0.0, None)
        return r + (np.exp(1j * self.theta) - 1.0) * s_int


@dataclass(frozen=True)
class AbsorbingPotential:
    """-i eta ((R - r_onset)/(R_max - r_onset))^order beyond the onset."""

    eta: float
    r_onset: float
    order: int = 2
    kind = "cap"

    def values(self, r: np.ndarray, r_max: float) -> np.ndarray:
        x = np.clip((r - self.r_onset) / (r_max - self.r_onset), 0.0, None)
        return self.eta * x**self.order


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    n: int
    scaling: ExteriorScaling | AbsorbingPotential | None = None

    def __post_init__(self):
        if self.n < 200:
            raise ValueError("radial grid needs at least 200 points")
        if self.r_min <= 0 or self.r_max <= self.r_min:
            raise ValueError("require 0 < r_min < r_max")
        if self.scaling is not None:
            r_on = getattr(self.scaling, "r_start", None) or self.scaling.r_onset
            if not self.r_min < r_on < self.r_max:
                raise ValueError("scaling onset must lie inside the grid")

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.r_min, self.r_max, self.n)[0]

    @property
    def dr(self) -> float:
        return grid_points(self.r_min, self.r_max, self.n)[1]

    def with_scaling_scaled(self, factor: float) -> "RadialGrid":
        """Same grid with theta (or eta) multiplied by `factor`."""
        if self.scaling is None:
            raise ValueError("grid has no scaling to rescale")
        if self.scaling.kind == "ecs":
            new = replace(self.scaling, theta=self.scaling.theta * factor)
        else:
            new = replace(self.scaling, eta=self.scaling.eta * factor)
        return replace(self, scaling=new)


@lru_cache(maxsize=16)
def scaled_kinetic(grid: RadialGrid, mass: float) -> np.ndarray:
    """Single-channel kinetic block, including the scaling transformation.

    With exterior scaling the operator is the symmetrized form
    -1/(2M) f^(-1/2) d/dR f^(-1) d/dR f^(-1/2); it is assembled as the
    exact unscaled kinetic matrix plus the weak-form difference between the
    scaled and unscaled quadratic forms, so it reduces to the exact matrix
    wherever f = 1.
    """
    r, dr = grid_points(grid.r_min, grid.r_max, grid.n)
    t = kinetic(grid.n, dr, mass).astype(complex)
    if grid.scaling is None or grid.scaling.kind == "cap":
        return t
    f = grid.scaling.path_derivative(r)
    d1 = first_derivative(grid.n, dr)
    s = np.diag(1.0 / np.sqrt(f))
    g = np.diag(1.0 / f)
    weak_scaled = s @ (d1.T @ g @ d1) @ s
    weak_plain = d1.T @ d1
    return t + 0.5 / mass * (weak_scaled - weak_plain)


@dataclass(frozen=True, eq=False)
class FloquetOperator:
    """Dense complex-symmetric Floquet matrix over photon-dressed channels.

    `blocks` lists (channel, photon index) in matrix order; the default
    truncation is [("lower", 0), ("upper", -1)].
    """

    matrix: np.ndarray
    grid: RadialGrid
    mass: float
    pair: DressedChannelPair
    blocks: tuple = (("lower", 0), ("upper", -1))

    @property
    def n_channels(self) -> int:
        return len(self.blocks)


def build_operator(pair: DressedChannelPair, grid: RadialGrid, mass: float,
                   n_window: tuple[int, int] | None = None) -> FloquetOperator:
    """Assemble the dressed two-channel Floquet matrix.

    `n_window = (n_lo, n_hi)` widens the photon-block truncation for
    convergence checks; the default keeps only (lower, 0) and (upper, -1).
    """
    if mass <= 0:
        raise SolverError("mass must be positive")
    r, dr = grid_points(grid.r_min, grid.r_max, grid.n)
    scaling = grid.scaling
    if scaling is not None and scaling.kind == "ecs":
        if not (getattr(pair.lower, "analytic", False)
                and getattr(pair.upper, "analytic", False)):
            raise SolverError(
                "exterior scaling needs analytic curves; use a CAP with "
                "tabulated potentials"
            )
        r_eval = scaling.path(r)
    else:
        r_eval = r

    if n_window is None:
        blocks = [("lower", 0), ("upper", -1)]
    else:
        n_lo, n_hi = n_window
        if n_lo > -1 or n_hi < 0:
            raise SolverError("photon window must contain n = -1 and n = 0")
        # single-photon parity: the lower channel sits on even photon
        # indices, the upper channel on odd ones
        blocks = [("lower", n) for n in range(n_lo, n_hi + 1) if n % 2 == 0]
        blocks += [("upper", n) for n in range(n_lo, n_hi + 1) if n % 2 != 0]
        blocks.sort(key=lambda b: (b[1], b[0]))

    omega = pair.laser.photon_energy_au
    t = scaled_kinetic(grid, mass)
    w = pair.coupling(r_eval).astype(complex)
    cap = None
    if scaling is not None and scaling.kind == "cap":
        cap = scaling.values(r, grid.r_max)

    nb = len(blocks)
    n = grid.n
    h = np.zeros((nb * n, nb * n), dtype=complex)
    bo = {"lower": np.asarray(pair.lower.value(r_eval), dtype=complex),
          "upper": np.asarray(pair.upper.value(r_eval), dtype=complex)}
    for i, (chan, nph) in enumerate(blocks):
        sl = slice(i * n, (i + 1) * n)
        diag = bo[chan] + nph * omega
        if cap is not None:
            diag = diag - 1j * cap
        h[sl, sl] = t + np.diag(diag)
        for j, (chan2, nph2) in enumerate(blocks):
            if chan2 != chan and abs(nph2 - nph) == 1:
                h[sl, j * n:(j + 1) * n] = np.diag(w)
    return FloquetOperator(matrix=h, grid=grid, mass=mass, pair=pair,
                           blocks=tuple(blocks))


@dataclass
class Resonance:
    """A complex Floquet quasienergy E_F = E_R - i Gamma_R / 2."""

    energy: complex
    vector: np.ndarray  # c-normalized, channels stacked
    n_channels: int = 2
    label: int | None = None
    label_overlap: float | None = None
    character: str = UNASSIGNED

    @property
    def position(self) -> float:
        return float(self.energy.real)

    @property
    def width(self) -> float:
        return max(-2.0 * self.energy.imag, 0.0)

    def channel(self, i: int) -> np.ndarray:
        n = self.vector.size // self.n_channels
        return self.vector[i * n:(i + 1) * n]


def c_product(x: np.ndarray, y: np.ndarray, weight: float = 1.0) -> complex:
    """Bilinear inner product sum(x * y) * weight — no conjugation."""
    return complex(np.sum(x * y) * weight)


def c_normalize(vec: np.ndarray, weight: float = 1.0) -> np.ndarray:
    norm2 = c_product(vec, vec, weight)
    vec = vec / np.sqrt(norm2)
    # fix the residual sign freedom: make the largest component's real part positive
    k = int(np.argmax(np.abs(vec)))
    if vec[k].real < 0 or (vec[k].real == 0 and vec[k].imag < 0):
        vec = -vec
    return vec


@dataclass
class SolveDiagnostics:
    n_eigenvalues: int = 0
    n_in_window: int = 0
    n_upper_half_discarded: int = 0
    n_unstable_discarded: int = 0


def _select_window(energies, window):
    re_lo, re_hi, im_lo, im_hi = window
    keep = ((energies.real >= re_lo) & (energies.real <= re_hi)
            & (energies.imag >= im_lo) & (energies.imag <= im_hi))
    return np.nonzero(keep)[0]


def solve_resonances(op: FloquetOperator, window: tuple[float, float, float, float],
                     stability_check: bool = True, stability_tol: float = 1e-6,
                     stability_factor: float = 1.2,
                     diagnostics: SolveDiagnostics | None = None) -> list[Resonance]:
    """All resonances inside a complex-energy box (re_lo, re_hi, im_lo, im_hi).

    Uses a dense eigensolve; candidates in the upper half plane (beyond
    roundoff) are discarded, and with `stability_check` the scaling
    parameter is varied by +/-20% to reject rotated-continuum eigenvalues.
    """
    if op.grid.scaling is None:
        raise SolverError("resonance solve requires active scaling (ECS or CAP)")
    diag = diagnostics if diagnostics is not None else SolveDiagnostics()
    try:
        energies, vectors = sla.eig(op.matrix)
    except sla.LinAlgError as exc:
        cond = np.linalg.cond(op.matrix)
        raise SolverError(f"dense eigensolve failed (condition ~ {cond:.3e})") from exc
    diag.n_eigenvalues = energies.size
    order = np.argsort(energies.real)
    energies, vectors = energies[order], vectors[:, order]

    idx = _select_window(energies, window)
    diag.n_in_window = idx.size
    upper = energies[idx].imag > UPPER_HALF_TOL
    diag.n_upper_half_discarded = int(upper.sum())
    idx = idx[~upper]

    if stability_check and idx.size:
        op2 = build_operator(op.pair, op.grid.with_scaling_scaled(stability_factor),
                             op.mass)
        energies2 = sla.eigvals(op2.matrix)
        keep = []
        for i in idx:
            if np.min(np.abs(energies2 - energies[i])) < stability_tol:
                keep.append(i)
        diag.n_unstable_discarded = idx.size - len(keep)
        idx = np.asarray(keep, dtype=int)

    dr = op.grid.dr
    out = []
    for i in idx:
        e = energies[i]
        if e.imag > 0:
            e = complex(e.real, 0.0)  # roundoff above the axis, clamp
        vec = c_normalize(vectors[:, i], dr)
        out.append(Resonance(energy=e, vector=vec, n_channels=op.n_channels))
    out.sort(key=lambda res: res.position)
    return out


def solve_near(op: FloquetOperator, sigma: complex, k: int = 6,
               v0: np.ndarray | None = None) -> list[Resonance]:
    """The k eigenpairs closest to `sigma` via shift-invert Arnoldi."""
    if op.grid.scaling is None:
        raise SolverError("resonance solve requires active scaling (ECS or CAP)")
    a = op.matrix
    m = a.shape[0]
    # bias the shift slightly into the lower half plane, where resonances live
    if sigma.imag == 0:
        sigma = complex(sigma.real, -1e-7)
    try:
        lu = sla.lu_factor(a - sigma * np.eye(m))
    except sla.LinAlgError as exc:
        raise SolverError(f"LU factorization failed at shift {sigma}") from exc
    opinv = LinearOperator((m, m), matvec=lambda x: sla.lu_solve(lu, x),
                           dtype=complex)
    if v0 is None:
        v0 = np.ones(m, dtype=complex)
    try:
        nu, vecs = eigs(opinv, k=k, which="LM", v0=v0, tol=0)
    except Exception as exc:  # ARPACK failures surface as various types
        raise SolverError(f"shift-invert Arnoldi failed near {sigma}") from exc
    energies = sigma + 1.0 / nu
    dr = op.grid.dr
    out = []
    for i in range(energies.size):
        e = energies[i]
        if e.imag > UPPER_HALF_TOL:
            continue
        if e.imag > 0:
            e = complex(e.real, 0.0)
        out.append(Resonance(energy=e, vector=c_normalize(vecs[:, i], dr),
                             n_channels=op.n_channels))
    out.sort(key=lambda res: abs(res.energy - sigma))
    return out


def assign_label(res: Resonance, levels: list[VibLevel], dr: float,
                 threshold: float = 0.5) -> Resonance:
    """Label a resonance by its dominant field-free vibrational parent.

    The score is the magnitude of the c-product between the bound-channel
    component and each field-free wavefunction; below `threshold` the
    resonance stays unlabeled.
    """
    comp = res.channel(0)
    overlaps = np.array([abs(c_product(comp, lvl.wavefunction, dr)) for lvl in levels])
    best = int(np.argmax(overlaps))
    if overlaps[best] < threshold:
        res.label = None
        res.label_overlap = float(overlaps[best])
    else:
        res.label = levels[best].v
        res.label_overlap = float(overlaps[best])
    return res


def classify_character(res: Resonance, pair: DressedChannelPair, grid: RadialGrid,
                       margin: float = 0.1) -> str:
    """Feshbach vs shape character from the adiabatic decomposition.

    Projects the two-channel eigenvector onto the adiabatic basis; dominant
    upper-sheet population means a Feshbach-type (closed-channel) resonance,
    dominant lower-sheet population a shape-type one. Projections within
    `margin` of each other, or vanishing coupling, give "unassigned".
    """
    if pair.laser.field_au == 0.0:
        return UNASSIGNED
    r = grid.points
    ang = mixing_angle(pair, r)
    phi_u, phi_g = res.channel(0), res.channel(1)
    plus = np.sin(ang) * phi_u + np.cos(ang) * phi_g
    minus = np.cos(ang) * phi_u - np.sin(ang) * phi_g
    p_plus = float(np.sum(np.abs(plus) ** 2))
    p_minus = float(np.sum(np.abs(minus) ** 2))
    total = p_plus + p_minus
    if total == 0 or abs(p_plus - p_minus) <= margin * total:
        return UNASSIGNED
    return FESHBACH if p_plus > p_minus else SHAPE

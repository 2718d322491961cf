"""Locate exceptional points in the control plane, follow closed contours
around them, and integrate the adiabatic survival probability.

The EP search is a two-stage gap minimization: a coarse grid of
continuity-tracked pair gaps, then a derivative-free simplex refinement,
validated by fitting the square-root exponent of the gap along two
transects through the optimum.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.optimize import minimize

from .continuation import BranchBroken, ParameterPath, ResonanceBranch, track
from .floquet import Resonance
from .units import LaserPoint


@dataclass(frozen=True)
class EPEstimate:
    wavelength_nm: float
    intensity_w_cm2: float
    residual_gap_au: float
    fit_exponent: float
    fit_exponent_spread: float
    confirmed: bool


@dataclass(frozen=True)
class LoopSpec:
    """Closed control contour I = I_max sin(phi/2), lambda = lambda0 +
    dlambda sin(phi), traversed linearly in time over t_f."""

    lambda0_nm: float
    delta_lambda_nm: float
    i_max_w_cm2: float
    t_f_au: float
    n_steps: int = 400
    direction: str = "forward"

    def __post_init__(self):
        if self.i_max_w_cm2 < 0 or self.t_f_au <= 0 or self.n_steps < 8:
            raise ValueError("loop spec needs i_max >= 0, t_f > 0, n_steps >= 8")
        if self.direction not in ("forward", "reverse"):
            raise ValueError("direction must be 'forward' or 'reverse'")

    def phi(self, s: float) -> float:
        """Contour angle at path parameter s in [0, 1]."""
        phi = 2.0 * math.pi * s
        if self.direction == "reverse":
            phi = 2.0 * math.pi - phi
        return phi

    def point_at_phi(self, phi: float, i_floor: float = 0.0) -> LaserPoint:
        lam = self.lambda0_nm + self.delta_lambda_nm * math.sin(phi)
        intensity = self.i_max_w_cm2 * math.sin(0.5 * phi)
        return LaserPoint(lam, max(intensity, i_floor))

    def reversed(self) -> "LoopSpec":
        other = "reverse" if self.direction == "forward" else "forward"
        return replace(self, direction=other)


@dataclass
class SurvivalTrace:
    times: np.ndarray
    phis: np.ndarray
    points: list[LaserPoint]
    energies: np.ndarray  # complex quasienergy along the loop
    p_nd: np.ndarray
    start_label: int
    end_label: int | None
    exchanged: bool
    encloses_ep: bool | None = None

    @property
    def widths(self) -> np.ndarray:
        return np.maximum(-2.0 * self.energies.imag, 0.0)

    @property
    def survival(self) -> float:
        return float(self.p_nd[-1])


def survival_probability(times: np.ndarray, widths: np.ndarray) -> np.ndarray:
    """exp(-(1/hbar) int_0^t Gamma dt') on the given samples (hbar = 1)."""
    times = np.asarray(times, dtype=float)
    widths = np.asarray(widths, dtype=float)
    if times.ndim != 1 or times.size != widths.size:
        raise ValueError("times and widths must be 1-d arrays of equal length")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ordered")
    if np.any(widths < 0):
        raise ValueError("negative width sample violates the resonance invariant")
    integral = cumulative_trapezoid(widths, times, initial=0.0)
    return np.exp(-integral)


def polygon_contains(vertices: list[tuple[float, float]], x: float, y: float) -> bool:
    """Even-odd rule point-in-polygon test."""
    inside = False
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > x:
                inside = not inside
    return inside


def loop_encloses(spec: LoopSpec, wavelength_nm: float, intensity_w_cm2: float,
                  n_vertices: int = 720) -> bool:
    """Does the contour enclose the given control-plane point?

    Wavelength and intensity are rescaled by the loop extents before the
    polygon test so the two axes are comparable.
    """
    lam_scale = max(spec.delta_lambda_nm, 1e-12)
    i_scale = max(spec.i_max_w_cm2, 1e-300)
    vertices = []
    for k in range(n_vertices):
        p = spec.point_at_phi(2.0 * math.pi * k / n_vertices)
        vertices.append((p.wavelength_nm / lam_scale, p.intensity_w_cm2 / i_scale))
    return polygon_contains(vertices, wavelength_nm / lam_scale,
                            intensity_w_cm2 / i_scale)


def generate_loop(spec: LoopSpec, i_floor_fraction: float = 1e-3) -> ParameterPath:
    """Time-stamped path along the contour.

    The I = 0 endpoints are lifted to a small intensity floor: at zero
    field the two channels decouple and the branch endpoints could not be
    identified against field-free levels otherwise.
    """
    i_floor = i_floor_fraction * spec.i_max_w_cm2
    s_nodes = np.linspace(0.0, 1.0, spec.n_steps + 1)
    points = [spec.point_at_phi(spec.phi(s), i_floor) for s in s_nodes]
    times = list(spec.t_f_au * s_nodes)
    return ParameterPath(points=points, times=times,
                         point_fn=lambda s: spec.point_at_phi(spec.phi(s), i_floor))


def _segment_path(a: LaserPoint, b: LaserPoint, n_steps: int) -> ParameterPath:
    pts = [LaserPoint(a.wavelength_nm + (b.wavelength_nm - a.wavelength_nm) * k / n_steps,
                      a.intensity_w_cm2 + (b.intensity_w_cm2 - a.intensity_w_cm2) * k / n_steps)
           for k in range(n_steps + 1)]
    dedup = [pts[0]]
    for p in pts[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    return ParameterPath(points=dedup, max_depth=14)


def _pair_gap_tracked(solver, seed_a: Resonance, seed_b: Resonance,
                      anchor: LaserPoint, target: LaserPoint, n_steps: int = 3):
    """Track the seed pair from the anchor to the target; unordered gap there.

    Identity swaps between the two members do not affect the gap, so the
    tracking runs without tie refinement; distinctness of the final pair is
    enforced explicitly.
    """
    if target == anchor:
        return abs(seed_a.energy - seed_b.energy), (seed_a, seed_b)
    path = _segment_path(anchor, target, n_steps)
    ends = []
    for seed in (seed_a, seed_b):
        br = track(solver, path, seed, tie_margin=0.0, overlap_threshold=0.4)
        if br.broken is not None:
            raise BranchBroken(f"gap evaluation broke: {br.broken}")
        ends.append(br.nodes[-1].resonance)
    res_a, res_b = ends
    if abs(res_a.energy - res_b.energy) < 1e-14:
        # both tracks collapsed onto one eigenpair; pull the distinct partner
        cands = solver.solve_near(target, res_a.energy, k=6)
        others = [c for c in cands if abs(c.energy - res_a.energy) > 1e-14]
        if others:
            res_b = max(others, key=lambda c: abs(solver.overlap(seed_b.vector,
                                                                 c.vector)))
    return abs(res_a.energy - res_b.energy), (res_a, res_b)


def locate_ep(solver, seed_a: Resonance, seed_b: Resonance, anchor: LaserPoint,
              box: tuple[float, float, float, float],
              coarse_shape: tuple[int, int] = (7, 7),
              gap_tol_au: float | None = None,
              level_spacing_au: float | None = None,
              max_workers: int = 1) -> EPEstimate:
    """Two-stage search for the coalescence point of a resonance pair.

    `box` is (lambda_min_nm, lambda_max_nm, i_min_w_cm2, i_max_w_cm2); the
    seeds must be the two labeled resonances solved at `anchor` (inside or
    near the box). Stage one scans a coarse grid of continuity-tracked pair
    gaps, stage two runs a Nelder-Mead simplex from the best grid node, and
    the result is validated by fitting |gap| ~ distance^p along two
    transects (p should be 1/2 at a square-root branch point).
    """
    lam_lo, lam_hi, i_lo, i_hi = box
    spacing = level_spacing_au or abs(seed_a.energy.real - seed_b.energy.real)
    if gap_tol_au is None:
        gap_tol_au = 1e-6 * spacing
    lam_span = max(lam_hi - lam_lo, 1e-12)
    i_span = max(i_hi - i_lo, 1e-300)

    # evaluated points double as anchors: later evaluations track the pair
    # from the nearest one instead of walking in from the far-away seed
    anchors: list[tuple[LaserPoint, Resonance, Resonance]] = [(anchor, seed_a,
                                                               seed_b)]
    cache: dict[tuple[float, float], float] = {}

    def gap(lam: float, ii: float) -> float:
        lam = min(max(lam, lam_lo), lam_hi)
        ii = min(max(ii, i_lo), i_hi)
        key = (round(lam, 9), round(ii, 3))
        if key not in cache:
            target = LaserPoint(lam, ii)

            def dist(entry):
                p = entry[0]
                return np.hypot((p.wavelength_nm - lam) / lam_span,
                                (p.intensity_w_cm2 - ii) / i_span)

            near_point, near_a, near_b = min(anchors, key=dist)
            g, (res_a, res_b) = _pair_gap_tracked(solver, near_a, near_b,
                                                  near_point, target)
            cache[key] = g
            anchors.append((target, res_a, res_b))
        return cache[key]

    n_lam, n_i = coarse_shape
    lams = np.linspace(lam_lo, lam_hi, n_lam)
    iis = np.linspace(i_lo, i_hi, n_i)
    grid_pts = [(lam, ii) for lam in lams for ii in iis]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            gaps = list(pool.map(lambda p: gap(*p), grid_pts))
    else:
        gaps = [gap(*p) for p in grid_pts]
    best = grid_pts[int(np.argmin(gaps))]

    lam_scale = (lam_hi - lam_lo) / max(n_lam - 1, 1)
    i_scale = (i_hi - i_lo) / max(n_i - 1, 1)

    def objective(x):
        return gap(best[0] + x[0] * lam_scale, best[1] + x[1] * i_scale)

    opt = minimize(objective, [0.0, 0.0], method="Nelder-Mead",
                   options={"xatol": 1e-7, "fatol": 0.0, "maxiter": 200,
                            "initial_simplex": [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]})
    lam_ep = best[0] + opt.x[0] * lam_scale
    i_ep = best[1] + opt.x[1] * i_scale
    residual = float(opt.fun)

    # square-root exponent along two transects through the optimum
    exponents = []
    for dlam, di in ((lam_scale, 0.0), (0.0, i_scale)):
        ds = np.array([0.08, 0.16, 0.32, 0.64])
        gv = []
        dd = []
        for d in ds:
            for sign in (+1.0, -1.0):
                lam = lam_ep + sign * d * dlam
                ii = i_ep + sign * d * di
                if lam_lo <= lam <= lam_hi and i_lo <= ii <= i_hi:
                    gv.append(gap(lam, ii))
                    dd.append(d)
        if len(dd) >= 3:
            slope = np.polyfit(np.log(dd), np.log(gv), 1)[0]
            exponents.append(float(slope))
    exponent = float(np.mean(exponents)) if exponents else float("nan")
    spread = float(np.ptp(exponents)) / 2.0 if len(exponents) > 1 else float("nan")

    confirmed = residual < gap_tol_au and abs(exponent - 0.5) <= 0.1
    return EPEstimate(wavelength_nm=float(lam_ep), intensity_w_cm2=float(i_ep),
                      residual_gap_au=residual, fit_exponent=exponent,
                      fit_exponent_spread=spread, confirmed=confirmed)


class TraceAborted(RuntimeError):
    pass


def follow_loop(solver, spec: LoopSpec, start_level: int,
                ep: EPEstimate | None = None,
                i_floor_fraction: float = 1e-3,
                gamma_refine_fraction: float = 0.05) -> SurvivalTrace:
    """Follow one resonance branch around the contour and integrate the
    survival probability from its instantaneous widths.

    The start resonance is the branch labeled `start_level` at the contour
    start (evaluated at the intensity floor); the end label is assigned the
    same way after a full turn. A loop that does not enclose the located EP
    legitimately returns with `exchanged` False.
    """
    path = generate_loop(spec, i_floor_fraction)
    seed = solver.seed_from_level(path.points[0], start_level)
    branch = track(solver, path, seed)
    if branch.broken is not None:
        raise TraceAborted(f"loop trace aborted: {branch.broken}")

    # refine segments where the width changes too abruptly for quadrature
    gamma_scale = max(n.resonance.width for n in branch.nodes)
    for _ in range(4):
        widths = np.array([n.resonance.width for n in branch.nodes])
        if gamma_scale <= 0 or np.all(np.abs(np.diff(widths))
                                      <= gamma_refine_fraction * gamma_scale):
            break
        jumps = np.nonzero(np.abs(np.diff(widths))
                           > gamma_refine_fraction * gamma_scale)[0]
        inserted = False
        for j in reversed(jumps):
            a, b = branch.nodes[j], branch.nodes[j + 1]
            if b.s - a.s < 1e-6:
                continue
            s_mid = 0.5 * (a.s + b.s)
            point = path.point_at(s_mid)
            cands = solver.solve_near(point, a.resonance.energy, k=6)
            if not cands:
                continue
            mid = max(cands, key=lambda r: abs(solver.overlap(a.resonance.vector,
                                                              r.vector)))
            solver.label_resonance(mid)
            branch.nodes.insert(j + 1, type(a)(s=s_mid, point=point, resonance=mid,
                                               time=path.time_at(s_mid), refined=True))
            inserted = True
        if not inserted:
            break

    nodes = branch.nodes
    times = np.array([n.time for n in nodes])
    energies = np.array([n.resonance.energy for n in nodes])
    widths = np.maximum(-2.0 * energies.imag, 0.0)
    p_nd = survival_probability(times, widths)

    end_label = nodes[-1].resonance.label
    exchanged = end_label is not None and end_label != start_level
    encloses = None
    if ep is not None:
        encloses = loop_encloses(spec, ep.wavelength_nm, ep.intensity_w_cm2)
    phis = np.array([spec.phi(n.s) for n in nodes])
    return SurvivalTrace(times=times, phis=phis, points=[n.point for n in nodes],
                         energies=energies, p_nd=p_nd, start_label=start_level,
                         end_label=end_label, exchanged=exchanged,
                         encloses_ep=encloses)

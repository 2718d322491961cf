"""Track labeled resonances along paths in the (wavelength, intensity)
plane, keeping branch identity through near-degeneracies.

Identity is decided by eigenvector c-product overlap, not eigenvalue
proximity: energies nearly touch close to an exceptional point while the
eigenvectors still disambiguate (except exactly at the EP, where a
tie-break plus refinement policy applies).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .floquet import Resonance
from .units import LaserPoint

ENERGIES_CROSS = "energies-cross-widths-avoid"
WIDTHS_CROSS = "widths-cross-energies-avoid"
COALESCENT = "coalescent"


class BranchBroken(RuntimeError):
    pass


@dataclass
class ParameterPath:
    """An ordered walk through laser points, refinable along its own curve.

    If `point_fn` is given it maps the path parameter s in [0, 1] onto the
    control plane and refinement samples the true curve; otherwise refined
    points interpolate linearly between neighbors.
    """

    points: list[LaserPoint]
    times: list[float] | None = None
    point_fn: Callable[[float], LaserPoint] | None = None
    max_energy_jump: float = np.inf
    max_depth: int = 12
    s_values: np.ndarray = field(init=False)

    def __post_init__(self):
        if len(self.points) < 1:
            raise ValueError("path needs at least one point")
        for a, b in zip(self.points, self.points[1:]):
            if a == b:
                raise ValueError("consecutive path points must differ")
        if self.times is not None and len(self.times) != len(self.points):
            raise ValueError("times and points must have equal length")
        n = len(self.points)
        self.s_values = np.linspace(0.0, 1.0, n) if n > 1 else np.array([0.0])

    def point_at(self, s: float) -> LaserPoint:
        if self.point_fn is not None:
            return self.point_fn(s)
        sv = self.s_values
        lam = float(np.interp(s, sv, [p.wavelength_nm for p in self.points]))
        ii = float(np.interp(s, sv, [p.intensity_w_cm2 for p in self.points]))
        return LaserPoint(lam, ii)

    def time_at(self, s: float) -> float | None:
        if self.times is None:
            return None
        return float(np.interp(s, self.s_values, self.times))


@dataclass
class BranchNode:
    s: float
    point: LaserPoint
    resonance: Resonance
    time: float | None = None
    refined: bool = False
    tie_flagged: bool = False


@dataclass
class BreakInfo:
    s_from: float
    s_to: float
    best_overlap: float
    energy_jump: float

    def __str__(self):
        return (f"segment s=[{self.s_from:.6f}, {self.s_to:.6f}]: best overlap "
                f"{self.best_overlap:.3f}, energy jump {self.energy_jump:.3e}")


@dataclass
class ResonanceBranch:
    path: ParameterPath
    nodes: list[BranchNode]
    broken: BreakInfo | None = None

    @property
    def start_label(self):
        return self.nodes[0].resonance.label

    @property
    def end_label(self):
        return self.nodes[-1].resonance.label

    def samples(self) -> list[BranchNode]:
        """The nodes at the path's own points (refinements excluded)."""
        return [n for n in self.nodes if not n.refined]

    def energies(self, refined=True) -> np.ndarray:
        nodes = self.nodes if refined else self.samples()
        return np.array([n.resonance.energy for n in nodes])


def track(solver, path: ParameterPath, seed: Resonance,
          overlap_threshold: float = 0.7, tie_margin: float = 0.05,
          k: int = 6) -> ResonanceBranch:
    """Continue `seed` along `path` by maximal eigenvector overlap.

    A step is accepted when the best candidate's overlap magnitude beats
    the threshold, the energy jump stays under the path bound, and the
    runner-up is not within `tie_margin` of the winner; otherwise the step
    is bisected along the path curve up to `path.max_depth` levels. An
    exhausted tie accepts the max-overlap candidate and flags the node; an
    exhausted overlap/jump failure breaks the branch.
    """
    if solver.label_resonance is not None:
        solver.label_resonance(seed)
    nodes = [BranchNode(s=path.s_values[0], point=path.points[0], resonance=seed,
                        time=path.time_at(path.s_values[0]))]
    branch = ResonanceBranch(path=path, nodes=nodes)

    def advance(s_target: float, refined: bool, depth: int) -> bool:
        prev = nodes[-1]
        point = path.point_at(s_target)
        if point == prev.point:  # degenerate segment, reuse the resonance
            nodes.append(BranchNode(s=s_target, point=point, resonance=prev.resonance,
                                    time=path.time_at(s_target), refined=refined))
            return True
        cands = solver.solve_near(point, prev.resonance.energy, k=k)
        if not cands:
            branch.broken = BreakInfo(prev.s, s_target, 0.0, np.nan)
            return False
        ovs = np.array([abs(solver.overlap(prev.resonance.vector, c.vector))
                        for c in cands])
        order = np.argsort(ovs)[::-1]
        best = cands[order[0]]
        jump = abs(best.energy - prev.resonance.energy)
        ok = ovs[order[0]] >= overlap_threshold and jump <= path.max_energy_jump
        tie = (len(cands) > 1
               and ovs[order[0]] - ovs[order[1]] <= tie_margin * ovs[order[0]])
        if (not ok or tie) and depth < path.max_depth:
            s_mid = 0.5 * (prev.s + s_target)
            if not advance(s_mid, True, depth + 1):
                return False
            return advance(s_target, refined, depth + 1)
        if not ok:
            branch.broken = BreakInfo(prev.s, s_target, float(ovs[order[0]]), jump)
            return False
        solver.label_resonance(best)
        nodes.append(BranchNode(s=s_target, point=point, resonance=best,
                                time=path.time_at(s_target), refined=refined,
                                tie_flagged=tie))
        return True

    for s in path.s_values[1:]:
        if not advance(float(s), False, 0):
            break
    return branch


def classify_crossing(branch_a: ResonanceBranch, branch_b: ResonanceBranch,
                      coalescence_tol: float = 0.0) -> str:
    """Crossing topology of two branches over the same sampled path.

    Detects a sign change of the position difference (energy crossing)
    versus one of the width difference (width crossing); exactly one is
    expected away from an exceptional point, both simultaneously (or a
    complex gap below `coalescence_tol`) mean the pair coalesced.
    """
    if branch_a.broken is not None or branch_b.broken is not None:
        raise BranchBroken("cannot classify: a branch is broken")
    sa, sb = branch_a.samples(), branch_b.samples()
    if len(sa) != len(sb) or any(na.point != nb.point for na, nb in zip(sa, sb)):
        raise ValueError("branches were not tracked over the same samples")
    ea = np.array([n.resonance.energy for n in sa])
    eb = np.array([n.resonance.energy for n in sb])
    de = ea.real - eb.real
    dg = (-2.0 * ea.imag) - (-2.0 * eb.imag)
    if coalescence_tol > 0 and np.min(np.abs(ea - eb)) < coalescence_tol:
        return COALESCENT
    e_cross = bool(np.any(np.sign(de[:-1]) * np.sign(de[1:]) < 0))
    g_cross = bool(np.any(np.sign(dg[:-1]) * np.sign(dg[1:]) < 0))
    if e_cross and g_cross:
        return COALESCENT
    if e_cross:
        return ENERGIES_CROSS
    if g_cross:
        return WIDTHS_CROSS
    raise ValueError("no crossing of energies or widths in the sampled range")

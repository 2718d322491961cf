"""High-level resonance solver over a calibrated molecular model.

Bundles the dressed-channel construction, the Floquet eigensolves, the
field-free vibrational basis used for labeling, and the c-product overlap
convention, behind the small interface the continuation and EP-search
layers expect.
"""
from __future__ import annotations

import numpy as np

from .floquet import (FloquetOperator, RadialGrid, Resonance, SolveDiagnostics,
                      assign_label, build_operator, c_product, classify_character,
                      solve_near, solve_resonances)
from .potentials import bound_levels, dressed_channels
from .units import LaserPoint


class DressedFloquetSolver:
    """Resonance provider for one molecular model on one radial grid."""

    n_channels = 2

    def __init__(self, model, grid: RadialGrid, n_levels: int = 12,
                 label_threshold: float = 0.5):
        self.model = model
        self.grid = grid
        self.label_threshold = label_threshold
        self.levels = bound_levels(model.lower, model.mass, n_levels,
                                   grid.r_min, grid.r_max, grid.n)
        self._last_vector: np.ndarray | None = None

    # -- operator assembly -------------------------------------------------

    def pair(self, point: LaserPoint):
        return dressed_channels(self.model.lower, self.model.upper,
                                self.model.dipole, point)

    def operator(self, point: LaserPoint,
                 n_window: tuple[int, int] | None = None) -> FloquetOperator:
        return build_operator(self.pair(point), self.grid, self.model.mass,
                              n_window=n_window)

    # -- interface used by continuation / ep_loop ---------------------------

    def solve_near(self, point: LaserPoint, sigma: complex, k: int = 6,
                   v0: np.ndarray | None = None) -> list[Resonance]:
        if v0 is None:
            v0 = self._last_vector
        out = solve_near(self.operator(point), sigma, k=k, v0=v0)
        if out:
            self._last_vector = out[0].vector
        return out

    def overlap(self, a: np.ndarray, b: np.ndarray) -> complex:
        return c_product(a, b, self.grid.dr)

    def label_resonance(self, res: Resonance) -> Resonance:
        return assign_label(res, self.levels, self.grid.dr,
                            threshold=self.label_threshold)

    def seed_from_level(self, point: LaserPoint, v: int) -> Resonance:
        """The resonance at `point` labeled by field-free level v."""
        if v >= len(self.levels):
            raise ValueError(f"level {v} outside the computed field-free set")
        sigma = complex(self.levels[v].energy)
        for k in (6, 10, 16):
            for res in self.solve_near(point, sigma, k=k):
                self.label_resonance(res)
                if res.label == v:
                    return res
        raise ValueError(f"no resonance labeled v={v} found at {point}")

    # -- extras -------------------------------------------------------------

    def solve_window(self, point: LaserPoint,
                     window: tuple[float, float, float, float],
                     stability_check: bool | None = None,
                     diagnostics: SolveDiagnostics | None = None) -> list[Resonance]:
        check = True if stability_check is None else stability_check
        out = solve_resonances(self.operator(point), window,
                               stability_check=check, diagnostics=diagnostics)
        for res in out:
            self.label_resonance(res)
            res.character = self.classify(res, point)
        return out

    def classify(self, res: Resonance, point: LaserPoint) -> str:
        return classify_character(res, self.pair(point), self.grid)

    def labeled_pair(self, point: LaserPoint, va: int, vb: int):
        return self.seed_from_level(point, va), self.seed_from_level(point, vb)

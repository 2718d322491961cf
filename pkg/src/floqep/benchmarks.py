"""Reference problems with method-independent answers.

Two fixtures used across the test and acceptance suites:

* a single-channel barrier potential whose lowest shape resonance is the
  standard benchmark for outgoing-wave solvers, and
* an analytic 2x2 complex-symmetric model whose exceptional point, branch
  structure and loop monodromy are known in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .floquet import Resonance, c_normalize
from .units import LaserPoint


@dataclass(frozen=True)
class ExpBarrierCurve:
    """V(R) = strength * R^2 exp(-decay R); supports one sharp shape resonance.

    With mass 1 and the default parameters the lowest resonance sits near
    3.426393 - 0.012778i.
    """

    strength: float = 7.5
    decay: float = 1.0
    asymptote: float = 0.0
    form = "exp_barrier"
    analytic = True

    def value(self, r):
        r = np.asarray(r)
        return self.strength * r * r * np.exp(-self.decay * r)


@dataclass(frozen=True)
class TwoLevelModel:
    """Analytic 2x2 complex-symmetric model with a known exceptional point.

    H(lambda, I) = [[delta - i gamma / 2, c], [c, -delta]] + e_ref,
    with detuning delta = slope * (lambda - lambda_ep) driven by the
    wavelength and coupling c = coupling_per_sqrt_i * sqrt(I) driven by the
    intensity. The eigenvalues coalesce exactly at delta = 0, c = gamma/4,
    i.e. at (lambda_ep, i_ep = (gamma / (4 coupling_per_sqrt_i))^2).
    """

    gamma: float = 4e-5
    slope: float = 2e-5          # detuning per nm
    coupling_per_sqrt_i: float = 1e-9  # coupling per sqrt(W/cm^2)
    lambda_ep_nm: float = 562.53
    e_ref: float = -4.5e-4

    @property
    def i_ep_w_cm2(self) -> float:
        return (self.gamma / (4.0 * self.coupling_per_sqrt_i)) ** 2

    def hamiltonian(self, point: LaserPoint) -> np.ndarray:
        delta = self.slope * (point.wavelength_nm - self.lambda_ep_nm)
        c = self.coupling_per_sqrt_i * np.sqrt(point.intensity_w_cm2)
        return np.array([[delta - 0.5j * self.gamma + self.e_ref, c],
                         [c, -delta + self.e_ref]], dtype=complex)

    def eigenvalues(self, point: LaserPoint) -> np.ndarray:
        """Closed-form eigenvalue pair (no matrix diagonalization)."""
        delta = self.slope * (point.wavelength_nm - self.lambda_ep_nm)
        c = self.coupling_per_sqrt_i * np.sqrt(point.intensity_w_cm2)
        mean = 0.5 * delta - 0.25j * self.gamma + self.e_ref
        rad = np.sqrt((delta - 0.25j * self.gamma) ** 2 + c * c) * 0.5
        return np.array([mean - rad, mean + rad])


class TwoLevelSolver:
    """Resonance-provider interface over the analytic 2x2 model.

    Pseudo vibrational labels 0 and 1 are the two basis states, which the
    eigenvectors approach in the zero-coupling limit.
    """

    n_channels = 2

    def __init__(self, model: TwoLevelModel):
        self.model = model
        self.weight = 1.0

    def solve_near(self, point: LaserPoint, sigma: complex, k: int = 2,
                   v0=None) -> list[Resonance]:
        h = self.model.hamiltonian(point)
        energies, vectors = np.linalg.eig(h)
        out = [Resonance(energy=complex(energies[i]),
                         vector=c_normalize(vectors[:, i]),
                         n_channels=2)
               for i in range(2)]
        out.sort(key=lambda res: abs(res.energy - sigma))
        return out

    def solve_all(self, point: LaserPoint) -> list[Resonance]:
        return sorted(self.solve_near(point, 0.0), key=lambda r: r.position)

    def overlap(self, a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.sum(a * b))

    def label_resonance(self, res: Resonance) -> Resonance:
        overlaps = np.abs(res.vector)
        best = int(np.argmax(overlaps))
        res.label = best
        res.label_overlap = float(overlaps[best])
        return res

    def seed_from_level(self, point: LaserPoint, v: int) -> Resonance:
        if v not in (0, 1):
            raise ValueError("two-level model has labels 0 and 1")
        for res in self.solve_all(point):
            self.label_resonance(res)
        candidates = [r for r in self.solve_all(point)
                      if self.label_resonance(r).label == v]
        if not candidates:
            raise ValueError(f"no eigenstate labeled {v} at {point}")
        return candidates[0]

"""Heat and wave equations on the cell graph, solved in the eigenbasis.

All inner products use the uniform probability measure mu(x) = 8^-m, under
which the eigenvectors phi_i are orthonormal.  With that normalisation the
heat kernel h_t(x, y) = sum_i exp(-lambda_i t) phi_i(x) phi_i(y) tends to 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PartialBasis
from .spectral import GROUP_RTOL, Spectrum, group_multiplicities

ZERO_TOL = 1e-9


@dataclass(frozen=True)
class Measure:
    level: int

    @property
    def n_cells(self) -> int:
        return 8**self.level

    @property
    def weight(self) -> float:
        return 8.0**-self.level

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n_cells, self.weight)

    def integrate(self, f) -> float:
        return float(np.sum(f) * self.weight)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    spectrum: Spectrum

    def __post_init__(self):
        s = self.spectrum
        if s.mode != "full" or s.eigenvectors is None or len(s) != s.n_cells:
            raise PartialBasis("a complete eigenbasis with eigenvectors is required")

    @property
    def level(self) -> int:
        return self.spectrum.level

    @property
    def measure(self) -> Measure:
        return Measure(self.level)

    @property
    def values(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def phi(self) -> np.ndarray:
        return self.spectrum.eigenvectors

    def coefficients(self, f) -> np.ndarray:
        """<f, phi_i>_mu for every i."""
        return self.phi.T @ np.asarray(f, dtype=float) * self.measure.weight

    def synthesize(self, coef) -> np.ndarray:
        return self.phi @ coef

    def groups(self, rtol: float = GROUP_RTOL):
        return group_multiplicities(self.values, rtol)

    def projector(self, group_index: int, rtol: float = GROUP_RTOL) -> np.ndarray:
        """P_lambda(x, y) = sum over the group of phi_i(x) phi_i(y)."""
        idx = list(self.groups(rtol)[group_index].indices)
        p = self.phi[:, idx]
        return p @ p.T


def _check_basis(basis) -> SpectralBasis:
    if isinstance(basis, Spectrum):
        basis = SpectralBasis(basis)
    if not isinstance(basis, SpectralBasis):
        raise PartialBasis("expected a SpectralBasis")
    return basis


def heat_kernel(basis, t: float, x0: int) -> np.ndarray:
    """h_t(., x0)."""
    basis = _check_basis(basis)
    if t < 0:
        raise ValueError("t must be >= 0")
    return basis.phi @ (np.exp(-basis.values * t) * basis.phi[x0])


def heat_kernel_matrix(basis, t: float) -> np.ndarray:
    basis = _check_basis(basis)
    return (basis.phi * np.exp(-basis.values * t)) @ basis.phi.T


@dataclass(frozen=True, eq=False)
class HeatSolution:
    level: int
    initial: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (len(times), N)

    def mass(self) -> np.ndarray:
        return self.values.sum(axis=1) * 8.0**-self.level


def heat_solve(basis, f, times: Sequence[float]) -> HeatSolution:
    """u(., t) = sum_i exp(-lambda_i t) <f, phi_i> phi_i."""
    basis = _check_basis(basis)
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    f = np.asarray(f, dtype=float)
    c = basis.coefficients(f)
    decay = np.exp(-np.outer(times, basis.values))
    return HeatSolution(basis.level, f, times, (decay * c) @ basis.phi.T)


@dataclass(frozen=True, eq=False)
class WaveSolution:
    level: int
    f0: np.ndarray
    f1: np.ndarray
    times: np.ndarray
    values: np.ndarray
    velocities: np.ndarray
    laplacian_values: np.ndarray  # L u at each time, for the energy

    def energy(self) -> np.ndarray:
        w = 8.0**-self.level
        return (np.sum(self.velocities**2, axis=1) + np.sum(self.values * self.laplacian_values, axis=1)) * w


def wave_solve(basis, f0, f1, times: Sequence[float]) -> WaveSolution:
    """u_tt + L u = 0 with u(0) = f0, u_t(0) = f1.

    Each mode evolves as cos(t w) a + sin(t w)/w b with w = sqrt(lambda); for
    lambda = 0 the second factor is replaced by its limit t.
    """
    basis = _check_basis(basis)
    times = np.asarray(times, dtype=float)
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    a, b = basis.coefficients(f0), basis.coefficients(f1)
    lam = np.clip(basis.values, 0.0, None)
    w = np.sqrt(lam)
    zero = lam <= ZERO_TOL
    tw = np.outer(times, w)
    cos, sin = np.cos(tw), np.sin(tw)
    safe_w = np.where(zero, 1.0, w)
    sinc = np.where(zero[None, :], times[:, None], sin / safe_w)
    dsinc = np.where(zero[None, :], 1.0, cos)
    coef_u = cos * a + sinc * b
    coef_v = -sin * w * a + dsinc * b
    u = coef_u @ basis.phi.T
    v = coef_v @ basis.phi.T
    lu = (coef_u * lam) @ basis.phi.T
    return WaveSolution(basis.level, f0, f1, times, u, v, lu)


def delta(m: int, cell: int = 0) -> np.ndarray:
    """Indicator f(cell) = 1, zero elsewhere."""
    f = np.zeros(8**m)
    f[cell] = 1.0
    return f


def solution_to_csv(times, values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "cell_index", "value"])
    for t, row in zip(times, values):
        for i, v in enumerate(row):
            w.writerow([f"{t:.10g}", i, f"{v:.10g}"])
    return buf.getvalue()

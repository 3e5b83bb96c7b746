"""Sampled inequality checks and the Hermite-from-coherent reconstruction.

Every check returns the sampled ratio ``lhs / rhs``; an inequality holds with
slack ``s`` when every ratio is at most ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, pi

import numpy as np

from ..fock.basis import build_basis
from ..fock.operators import (
    dgamma_matrix,
    number_diagonal,
    quartic_diagonal,
    symmetric_product_norm,
    wick_rank_one_expectation,
)
from ..fock.states import coherent_state, hermite_state, required_n_max
from ..fock.tensors import sector_from_tensor, symmetrize
from ..fock.vector import FockVector, LadderConvention
from ..space import Field, Grid, laplacian_matrix

# the periodic analogue of the diagonal-trace inequality loses a factor
# coth(L / (2 alpha)); a long box keeps it within the slack for alpha <= 10
INEQUALITY_LENGTH = 60.0
INEQUALITY_SITES = 32
BAND_LIMIT = 6


@dataclass(frozen=True)
class SampledCheck:
    name: str
    ratios: np.ndarray
    slack: float

    @property
    def worst(self) -> float:
        return float(np.max(self.ratios)) if self.ratios.size else 0.0

    @property
    def passed(self) -> bool:
        return bool(self.ratios.size) and self.worst <= self.slack


def random_band_limited_tensor(rng: np.random.Generator, grid: Grid, n: int, band: int) -> np.ndarray:
    """Symmetric grid samples ``Psi(x_1..x_n)`` with Fourier support ``|k_i| <= band``."""
    if 4 * band >= grid.m:
        raise ValueError(f"band limit {band} aliases on {grid.m} sites (need 4*band < m)")
    shape = (2 * band + 1,) * n
    coef = (rng.normal(size=shape) + 1j * rng.normal(size=shape))
    ks = np.arange(-band, band + 1)
    # random spectral decay so that samples range from smooth to rough
    decay = rng.uniform(0.0, 2.0)
    weight = np.ones(shape)
    for axis in range(n):
        w = (1.0 + ks ** 2) ** (-decay / 2)
        weight = weight * w.reshape([-1 if a == axis else 1 for a in range(n)])
    coef = symmetrize(coef * weight)
    full = np.zeros((grid.m,) * n, dtype=np.complex128)
    idx = np.ix_(*[ks % grid.m] * n)
    full[idx] = coef
    return np.fft.ifftn(full) * grid.m ** n


def diagonal_trace(values: np.ndarray, grid: Grid) -> float:
    """``int |Psi(x, x, x_3, ..)|^2 dx dx_3 ..`` as a Riemann sum."""
    n = values.ndim
    diag = np.diagonal(values, axis1=0, axis2=1)
    return float(grid.dx ** (n - 1) * np.sum(np.abs(diag) ** 2))


def first_slot_kinetic(values: np.ndarray, grid: Grid) -> float:
    """``<D_{x_1}^2 Psi, Psi>`` with the spectral derivative."""
    n = values.ndim
    lam = (2.0 * pi * np.fft.fftfreq(grid.m, d=1.0 / grid.m) / grid.length) ** 2
    coef = np.fft.fft(values, axis=0)
    shape = [-1] + [1] * (n - 1)
    return float(grid.dx ** n * np.sum(lam.reshape(shape) * np.abs(coef) ** 2) / grid.m)


def diagonal_trace_ratio(values: np.ndarray, grid: Grid, alpha: float) -> float:
    norm2 = float(grid.dx ** values.ndim * np.sum(np.abs(values) ** 2))
    rhs = alpha / np.sqrt(2.0) * first_slot_kinetic(values, grid) + norm2 / (2.0 * np.sqrt(2.0) * alpha)
    return diagonal_trace(values, grid) / rhs


def check_diagonal_trace_bound(rng: np.random.Generator, samples: int, alphas, slack: float,
                   grid: Grid | None = None, band: int = BAND_LIMIT) -> SampledCheck:
    grid = grid or Grid(INEQUALITY_SITES, INEQUALITY_LENGTH)
    ratios = []
    for i in range(samples):
        n = 2 + i % 2
        psi = random_band_limited_tensor(rng, grid, n, band)
        ratios.extend(diagonal_trace_ratio(psi, grid, a) for a in alphas)
    return SampledCheck("diagonal_trace", np.array(ratios), slack)


def _sector_sample(rng, conv: LadderConvention, basis, n: int, band: int) -> FockVector:
    values = random_band_limited_tensor(rng, conv.grid, n, band)
    return sector_from_tensor(basis, values * conv.grid.dx ** (n / 2))


def quartic_form_ratio(conv: LadderConvention, psi: FockVector, phi: FockVector, kinetic) -> float:
    quartic = quartic_diagonal(conv, psi.basis)
    lhs = abs(np.vdot(psi.coeffs, quartic * phi.coeffs))
    n3 = number_diagonal(conv, psi.basis) ** 3

    def weight(v):
        return np.sqrt(max(float(np.real(np.vdot(v.coeffs, kinetic @ v.coeffs + n3 * v.coeffs))), 0.0))

    return float(lhs / (0.25 * weight(psi) * weight(phi)))


def check_quartic_form_bound(rng: np.random.Generator, samples: int, slack: float, epsilons=(1.0, 0.25),
                grid: Grid | None = None, band: int = 3) -> SampledCheck:
    """Quartic form bound on random band-limited sector data, spectral Laplacian."""
    grid = grid or Grid(16, INEQUALITY_LENGTH)
    basis = build_basis(grid.m, 3, 2)
    ratios = []
    kinetic = {}
    for i in range(samples):
        eps = epsilons[i % len(epsilons)]
        conv = LadderConvention(eps, grid)
        if eps not in kinetic:
            kinetic[eps] = dgamma_matrix(conv, basis, laplacian_matrix(grid, "spectral"))
        n = 2 + (i // len(epsilons)) % 2
        psi = _sector_sample(rng, conv, basis, n, band)
        phi = _sector_sample(rng, conv, basis, n, band)
        ratios.append(quartic_form_ratio(conv, psi, phi, kinetic[eps]))
    return SampledCheck("quartic_form", np.array(ratios), slack)


def _random_fields(rng, grid: Grid, count: int) -> list[Field]:
    return [Field(grid, rng.normal(size=grid.m) + 1j * rng.normal(size=grid.m)) for _ in range(count)]


def check_number_bound(rng: np.random.Generator, samples: int, slack: float,
                     m: int = 3, n_max: int = 6) -> SampledCheck:
    """Bound on rank-one Wick monomials of degree ``p`` in ``N^{p/2}`` norms."""
    grid = Grid(m, 1.0)
    basis = build_basis(m, n_max)
    ratios = []
    for i in range(samples):
        p = 1 + i % 3
        conv = LadderConvention(float(rng.choice([1.0, 0.5, 0.1])), grid)
        fs, gs = _random_fields(rng, grid, p), _random_fields(rng, grid, p)
        psi = FockVector(basis, rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim))
        phi = FockVector(basis, rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim))
        lhs = abs(wick_rank_one_expectation(conv, psi, fs, gs, phi))
        nw = number_diagonal(conv, basis) ** (p / 2)
        rhs = (symmetric_product_norm(fs) * symmetric_product_norm(gs)
               * np.linalg.norm(nw * psi.coeffs) * np.linalg.norm(nw * phi.coeffs))
        ratios.append(lhs / rhs)
    return SampledCheck("number_bound", np.array(ratios), slack)


def gamma_n(n: int) -> float:
    """Normalization turning the phase average of coherent states into ``phi^{(x) n}``
    (for ``||phi|| = 1`` and ``eps = 1/n``)."""
    return float(np.exp(0.5 * n + 0.5 * lgamma(n + 1) - 0.5 * n * np.log(n)))


def hermite_from_coherent(grid: Grid, phi0: Field, n: int, tail_threshold: float = 1e-8,
                          n_max: int | None = None) -> tuple[FockVector, FockVector]:
    """Uniform-angle reconstruction of the Hermite state from ``E(e^{i theta} phi0)``.

    Returns ``(reconstruction, hermite_state)`` in the same basis. The
    integrand is a trigonometric polynomial of degree ``n_max`` in ``theta``,
    so ``2 n_max + 1`` equispaced nodes integrate it exactly.
    """
    eps = 1.0 / n
    conv = LadderConvention(eps, grid)
    phi0 = phi0.normalized(1.0)
    if n_max is None:
        n_max = max(n, required_n_max(1.0 / eps, tail_threshold))
    basis = build_basis(grid.m, n_max)
    nodes = 2 * n_max + 1
    acc = np.zeros(basis.dim, dtype=np.complex128)
    for j in range(nodes):
        theta = 2.0 * pi * j / nodes
        e = coherent_state(conv, basis, phi0 * np.exp(1j * theta), tail_threshold=tail_threshold)
        acc += np.exp(-1j * theta * n) * e.coeffs
    recon = FockVector(basis, gamma_n(n) / nodes * acc)
    return recon, hermite_state(conv, basis, phi0, n)

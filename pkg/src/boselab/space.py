"""Periodic 1D lattice, one-body fields and discrete Laplacians.

A field ``f`` on a grid of ``m`` sites with spacing ``dx`` is identified with
the orthonormal site-mode vector ``f(x_j) * sqrt(dx)``; the L2 pairing is the
Riemann sum ``dx * sum(conj(f) * g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np

from .errors import GridMismatchError, ValidationError

LaplacianKind = Literal["finite_difference", "spectral"]
LAPLACIAN_KINDS = ("finite_difference", "spectral")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``x_j = j * dx`` on ``[0, length)``."""

    m: int
    length: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValidationError(f"grid needs m >= 2 sites, got {self.m}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ValidationError(f"grid length must be positive, got {self.length}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.m

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.m) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        """Signed angular wavenumbers ``2*pi*k/L`` in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.m, d=1.0 / self.m) / self.length


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a one-body wavefunction on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.grid.m:
            raise ValidationError(
                f"field has {v.shape[0]} samples, grid has {self.grid.m} sites")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.m, dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: Grid, modes) -> "Field":
        """Inverse of :meth:`modes`."""
        return cls(grid, np.asarray(modes, dtype=np.complex128) / np.sqrt(grid.dx))

    def modes(self) -> np.ndarray:
        """Amplitudes against the orthonormal site modes, ``f(x) * sqrt(dx)``."""
        return self.values * np.sqrt(self.grid.dx)

    def norm(self) -> float:
        return float(np.sqrt(self.grid.dx * np.sum(np.abs(self.values) ** 2)))

    def normalized(self, mass: float = 1.0) -> "Field":
        """Rescale so that ``||f||**2 == mass``."""
        nrm = self.norm()
        if nrm == 0:
            raise ValidationError("cannot normalize the zero field")
        return Field(self.grid, self.values * (np.sqrt(mass) / nrm))

    def conj(self) -> "Field":
        return Field(self.grid, np.conj(self.values))

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(self.grid, -self.values)


def _same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise GridMismatchError(f"fields live on different grids: {f.grid} vs {g.grid}")


def plane_wave(grid: Grid, k: int, amplitude: complex = 1.0) -> Field:
    """``amplitude * exp(2*pi*i*k*x/L)``."""
    return Field(grid, amplitude * np.exp(2j * np.pi * k * grid.x / grid.length))


def inner_product(f: Field, g: Field) -> complex:
    """``<f, g> = dx * sum(conj(f) * g)``, conjugate-linear in ``f``."""
    _same_grid(f, g)
    return complex(f.grid.dx * np.vdot(f.values, g.values))


def laplacian_eigenvalues(grid: Grid, kind: LaplacianKind = "finite_difference") -> np.ndarray:
    """Eigenvalues of ``-Delta`` on the plane waves, in FFT order."""
    if kind == "finite_difference":
        k = np.fft.fftfreq(grid.m, d=1.0 / grid.m)
        return (2.0 / grid.dx) ** 2 * np.sin(np.pi * k / grid.m) ** 2
    if kind == "spectral":
        return grid.wavenumbers ** 2
    raise ValidationError(f"unknown Laplacian kind {kind!r}; expected one of {LAPLACIAN_KINDS}")


def laplacian_apply(kind: LaplacianKind, f: Field) -> Field:
    """Apply the positive semidefinite operator ``-Delta`` to ``f``."""
    v = f.values
    if kind == "finite_difference":
        out = -(np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / f.grid.dx ** 2
    elif kind == "spectral":
        out = np.fft.ifft(f.grid.wavenumbers ** 2 * np.fft.fft(v))
    else:
        raise ValidationError(f"unknown Laplacian kind {kind!r}; expected one of {LAPLACIAN_KINDS}")
    return Field(f.grid, out)


def laplacian_matrix(grid: Grid, kind: LaplacianKind = "finite_difference") -> np.ndarray:
    """Dense matrix of ``-Delta`` in the orthonormal site modes (real symmetric)."""
    if kind == "finite_difference":
        lap = np.zeros((grid.m, grid.m))
        idx = np.arange(grid.m)
        lap[idx, idx] = 2.0
        lap[idx, (idx + 1) % grid.m] -= 1.0
        lap[idx, (idx - 1) % grid.m] -= 1.0
        return lap / grid.dx ** 2
    # F^{-1} diag(k^2) F is real for a symmetric multiplier
    eye = np.eye(grid.m)
    lap = np.fft.ifft(grid.wavenumbers[:, None] ** 2 * np.fft.fft(eye, axis=0), axis=0)
    lap = lap.real
    return 0.5 * (lap + lap.T)


def kinetic_flow(f: Field, tau: float, kind: LaplacianKind = "finite_difference") -> Field:
    """Exact free evolution ``exp(-i tau (-Delta)) f`` via the DFT."""
    lam = laplacian_eigenvalues(f.grid, kind)
    return Field(f.grid, np.fft.ifft(np.exp(-1j * tau * lam) * np.fft.fft(f.values)))


def spectral_derivative(f: Field) -> Field:
    """``d/dx`` by Fourier multiplication (Nyquist mode zeroed for even ``m``)."""
    k = f.grid.wavenumbers.copy()
    if f.grid.m % 2 == 0:
        k[f.grid.m // 2] = 0.0
    return Field(f.grid, np.fft.ifft(1j * k * np.fft.fft(f.values)))

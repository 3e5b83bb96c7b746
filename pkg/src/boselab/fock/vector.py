"""Fock-space vectors and the epsilon-scaled ladder convention."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from ..errors import GridMismatchError, ValidationError
from ..space import Field, Grid
from .basis import OccupationBasis


@dataclass(frozen=True)
class LadderConvention:
    """Semiclassical parameter and the grid whose sites are the modes.

    ``a(f) = sqrt(epsilon) * sum_x conj(f_x) c_x`` with ``f_x = f(x) sqrt(dx)``,
    so ``[a(f), a*(g)] = epsilon <f, g>``.
    """

    epsilon: float
    grid: Grid

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1.0):
            raise ValidationError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    def check(self, basis: OccupationBasis) -> None:
        if basis.m != self.grid.m:
            raise GridMismatchError(f"basis has {basis.m} modes, grid has {self.grid.m} sites")

    def modes(self, f: Field) -> np.ndarray:
        if f.grid != self.grid:
            raise GridMismatchError("field lives on a different grid than the ladder convention")
        return f.modes()


@dataclass(frozen=True, eq=False)
class FockVector:
    basis: OccupationBasis
    coeffs: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if c.shape[0] != self.basis.dim:
            raise ValidationError(f"{c.shape[0]} coefficients for a basis of dimension {self.basis.dim}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, basis: OccupationBasis) -> "FockVector":
        return cls(basis, np.zeros(basis.dim, dtype=np.complex128))

    @classmethod
    def vacuum(cls, basis: OccupationBasis) -> "FockVector":
        if basis.n_min != 0:
            raise ValidationError("basis does not contain the vacuum sector")
        c = np.zeros(basis.dim, dtype=np.complex128)
        c[0] = 1.0
        return cls(basis, c)

    @classmethod
    def basis_state(cls, basis: OccupationBasis, occ) -> "FockVector":
        c = np.zeros(basis.dim, dtype=np.complex128)
        c[basis.index_of(occ)] = 1.0
        return cls(basis, c)

    def _check(self, other: "FockVector") -> None:
        if not self.basis.same_layout(other.basis):
            raise GridMismatchError(f"vectors live in different bases: {self.basis} vs {other.basis}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def vdot(self, other: "FockVector") -> complex:
        """``<self, other>``, conjugate-linear in ``self``."""
        self._check(other)
        return complex(np.vdot(self.coeffs, other.coeffs))

    def normalized(self) -> "FockVector":
        nrm = self.norm()
        if nrm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return FockVector(self.basis, self.coeffs / nrm)

    def sector(self, n: int) -> "FockVector":
        """Projection onto the ``n``-particle sector."""
        out = np.zeros_like(self.coeffs)
        sl = self.basis.sector_slice(n)
        out[sl] = self.coeffs[sl]
        return FockVector(self.basis, out)

    def sector_weights(self) -> dict[int, float]:
        return {n: float(np.sum(np.abs(self.coeffs[self.basis.sector_slice(n)]) ** 2))
                for n in self.basis.sectors()}

    def support(self, tol: float = 0.0) -> list[int]:
        """Sectors carrying squared weight above ``tol``."""
        return [n for n, w in self.sector_weights().items() if w > tol]

    def embed(self, target: OccupationBasis) -> tuple["FockVector", float]:
        """Re-express in another basis of the same modes; returns the squared norm dropped."""
        if target.m != self.basis.m:
            raise GridMismatchError("cannot embed between different mode counts")
        if target.same_layout(self.basis):
            return FockVector(target, self.coeffs.copy()), 0.0
        rows = target.index(self.basis.states)
        keep = rows >= 0
        out = np.zeros(target.dim, dtype=np.complex128)
        out[rows[keep]] = self.coeffs[keep]
        lost = float(np.sum(np.abs(self.coeffs[~keep]) ** 2))
        return FockVector(target, out), lost

    def __add__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        return FockVector(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "FockVector") -> "FockVector":
        self._check(other)
        return FockVector(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "FockVector":
        return FockVector(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "FockVector":
        return FockVector(self.basis, -self.coeffs)

"""Sparse assembly of the many-boson Hamiltonian and the quadratic generator."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import ValidationError
from .fock.basis import OccupationBasis
from .fock.operators import quartic_diagonal
from .fock.vector import FockVector, LadderConvention
from .space import Field, laplacian_matrix

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SparseHermitianOperator:
    """A Hermitian matrix in an occupation basis.

    ``time_scale`` is the factor dividing physical time in the exponent:
    ``exp(-i t H / time_scale)``. It is ``epsilon`` for ``H_eps`` and 1 for
    the epsilon-independent quadratic generator. ``leak`` (optional) maps the
    basis into the sectors just above the cutoff and holds the part of the
    untruncated operator that the compression drops.
    """

    basis: OccupationBasis
    matrix: sp.csr_matrix = dc_field(repr=False)
    time_scale: float = 1.0
    leak: sp.csr_matrix | None = dc_field(default=None, repr=False)
    hermiticity_defect: float = dc_field(init=False)

    def __post_init__(self):
        mat = sp.csr_matrix(self.matrix)
        if mat.shape != (self.basis.dim, self.basis.dim):
            raise ValidationError(f"matrix shape {mat.shape} does not match basis dimension {self.basis.dim}")
        mat.sort_indices()
        object.__setattr__(self, "matrix", mat)
        diff = mat - mat.conj().T
        defect = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0
        scale = float(np.max(np.abs(mat.data))) if mat.nnz else 0.0
        if defect > HERMITICITY_TOL * max(scale, 1.0):
            raise ValidationError(f"assembled operator is not Hermitian (defect {defect:.3e})")
        object.__setattr__(self, "hermiticity_defect", defect)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def apply(self, psi: FockVector) -> FockVector:
        if not psi.basis.same_layout(self.basis):
            raise ValidationError("vector and operator live in different bases")
        return FockVector(self.basis, self.matrix @ psi.coeffs)

    def expectation(self, psi: FockVector) -> float:
        return float(np.real(np.vdot(psi.coeffs, self.matrix @ psi.coeffs)))

    def export_matrix_market(self, path) -> None:
        """Write the matrix as Matrix Market text (debugging aid for small instances)."""
        scipy.io.mmwrite(str(Path(path)), self.matrix, comment=f"{self.basis!r}", precision=17)


def assemble_h_epsilon(conv: LadderConvention, basis: OccupationBasis,
                       laplacian_kind: str = "finite_difference") -> SparseHermitianOperator:
    """``H_eps = dGamma(-Delta) + P^Wick`` (number conserving)."""
    conv.check(basis)
    kinetic = conv.epsilon * basis.one_body_matrix(laplacian_matrix(conv.grid, laplacian_kind))
    mat = kinetic + sp.diags(quartic_diagonal(conv, basis))
    return SparseHermitianOperator(basis, mat.astype(np.complex128), time_scale=conv.epsilon)


def assemble_number(conv: LadderConvention, basis: OccupationBasis) -> SparseHermitianOperator:
    conv.check(basis)
    diag = conv.epsilon * basis.totals.astype(float)
    return SparseHermitianOperator(basis, sp.diags(diag).astype(np.complex128), time_scale=conv.epsilon)


class QuadraticGenerator:
    """Assembles ``A2`` for many condensate fields on one basis.

    The sparsity pattern does not depend on the field, so the kinetic part and
    the pair-creation matrices are computed once and only rescaled per call.
    """

    def __init__(self, conv: LadderConvention, basis: OccupationBasis,
                 laplacian_kind: str = "finite_difference"):
        conv.check(basis)
        self.conv = conv
        self.basis = basis
        self.laplacian_kind = laplacian_kind
        self._kinetic = basis.one_body_matrix(laplacian_matrix(conv.grid, laplacian_kind)).tocsr()
        self._occ = basis.states.astype(float)
        self._pairs = self._stack([basis.shift_matrix(x, +2) for x in range(basis.m)])
        above = basis.above(2)
        self._above_dim = above.dim
        self._leaks = self._stack([basis.shift_matrix(x, +2, target=above) for x in range(basis.m)])

    @staticmethod
    def _stack(mats):
        rows, cols, vals, site = [], [], [], []
        for x, mat in enumerate(mats):
            coo = mat.tocoo()
            rows.append(coo.row)
            cols.append(coo.col)
            vals.append(coo.data)
            site.append(np.full(coo.nnz, x))
        return tuple(np.concatenate(a) for a in (rows, cols, vals, site))

    def __call__(self, phi_t: Field) -> SparseHermitianOperator:
        if phi_t.grid != self.conv.grid:
            raise ValidationError("condensate field lives on a different grid")
        p = phi_t.values
        coef = 0.5 * p ** 2
        dim = self.basis.dim
        rows, cols, vals, site = self._pairs
        pair = sp.csr_matrix((vals * coef[site], (rows, cols)), shape=(dim, dim))
        mat = self._kinetic + sp.diags(self._occ @ (2.0 * np.abs(p) ** 2)) + pair + pair.conj().T
        rows, cols, vals, site = self._leaks
        leak = sp.csr_matrix((vals * coef[site], (rows, cols)), shape=(self._above_dim, dim))
        return SparseHermitianOperator(self.basis, mat.tocsr(), time_scale=1.0, leak=leak)


def assemble_a2(conv: LadderConvention, basis: OccupationBasis, phi_t: Field,
                laplacian_kind: str = "finite_difference") -> SparseHermitianOperator:
    """The epsilon-independent quadratic generator around ``phi_t``.

    ``A2 = sum (-Delta)_xy c_x^+ c_y + sum_x [2|phi(x)|^2 n_x
    + (phi(x)^2 (c_x^+)^2 + conj(phi(x))^2 c_x^2) / 2]``, normalized so that
    ``<E(z), eps A2 E(z)> = <z, -Delta z> + Re int conj(z)^2 phi^2 + 2 int |z|^2 |phi|^2``.
    ``conv.epsilon`` is only used for grid bookkeeping; the matrix does not depend on it.
    Pair creation out of the top two sectors is kept in ``leak``.
    """
    return QuadraticGenerator(conv, basis, laplacian_kind)(phi_t)

"""Reduced density matrices and trace-norm distances.

Matrices live in orthonormal site-mode coordinates: a grid function ``f``
corresponds to the vector ``f(x) sqrt(dx)``. Multi-index ``(x_1..x_k)`` is
flattened in C order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations
from math import factorial, lgamma
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import GridMismatchError, ValidationError
from .fock.basis import build_basis
from .fock.operators import wick_rank_one_expectation
from .fock.vector import FockVector, LadderConvention
from .space import Field

SECTOR_LEAK_TOL = 1e-20


@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    k: int
    m: int
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if mat.shape != (self.m ** self.k, self.m ** self.k):
            raise ValidationError(f"matrix shape {mat.shape} does not fit k={self.k}, m={self.m}")
        object.__setattr__(self, "matrix", mat)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def symmetry_defect(self) -> float:
        """Largest deviation from commuting with index permutations."""
        shape = (self.m,) * (2 * self.k)
        t = self.matrix.reshape(shape)
        worst = 0.0
        for perm in permutations(range(self.k)):
            axes = list(perm) + [self.k + p for p in perm]
            worst = max(worst, float(np.max(np.abs(t.transpose(axes) - t))))
        return worst

    def check(self, tol: float = 1e-10) -> list[str]:
        """Names of violated invariants (empty when all hold)."""
        bad = []
        if self.hermiticity_defect() > 1e-12:
            bad.append("hermitian")
        if self.eigenvalues().min() < -tol:
            bad.append("positive")
        if abs(self.trace() - 1.0) > tol:
            bad.append("trace")
        if self.symmetry_defect() > tol:
            bad.append("symmetric")
        return bad

    def partial_trace(self) -> "ReducedDensityMatrix":
        """Trace out the last particle slot."""
        if self.k < 2:
            raise ValidationError("need k >= 2 to trace out a slot")
        d = self.m ** (self.k - 1)
        t = self.matrix.reshape(d, self.m, d, self.m)
        return ReducedDensityMatrix(self.k - 1, self.m, np.einsum("aibi->ab", t))

    def to_json(self) -> dict:
        iu = np.triu_indices(self.matrix.shape[0])
        upper = self.matrix[iu]
        return {
            "k": self.k,
            "m": self.m,
            "shape": list(self.matrix.shape),
            "upper_triangle": [[float(z.real), float(z.imag)] for z in upper],
            "trace": self.trace(),
            "eigenvalues": [float(v) for v in self.eigenvalues()],
        }

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")


def _sector_of(psi: FockVector) -> int:
    weights = psi.sector_weights()
    total = sum(weights.values())
    if total == 0:
        raise ValidationError("zero vector has no reduced density matrix")
    occupied = [n for n, w in weights.items() if w > SECTOR_LEAK_TOL * total]
    if len(occupied) != 1:
        raise ValidationError(f"state must live in a single particle-number sector, found {occupied}")
    return occupied[0]


def _lowered_stack(coeffs: np.ndarray, m: int, n: int, k: int) -> np.ndarray:
    """Columns ``c_{x_k} ... c_{x_1} psi`` for all ``(x_1..x_k)`` in C order."""
    vecs = coeffs[:, None]
    for j in range(k):
        src = build_basis(m, n - j, n - j)
        dst = build_basis(m, n - j - 1, n - j - 1)
        lowers = [src.shift_matrix(x, -1, target=dst) for x in range(m)]
        vecs = np.stack([low @ vecs for low in lowers], axis=2)
        vecs = vecs.reshape(dst.dim, -1)
    return vecs


def reduced_density(conv: LadderConvention, psi: FockVector, k: int) -> ReducedDensityMatrix:
    """``gamma_k[x, y] = <psi, c_y^+ ... c_x psi> (n-k)!/n!`` normalized to unit trace."""
    conv.check(psi.basis)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    n = _sector_of(psi)
    if k > n:
        raise ValidationError(f"cannot take a {k}-particle marginal of an {n}-particle state")
    sec = psi.coeffs[psi.basis.sector_slice(n)]
    norm2 = float(np.vdot(sec, sec).real)
    w = _lowered_stack(sec, psi.basis.m, n, k)
    scale = np.exp(lgamma(n - k + 1) - lgamma(n + 1)) / norm2
    return ReducedDensityMatrix(k, psi.basis.m, scale * (w.T @ w.conj()))


def trace_distance(gamma: ReducedDensityMatrix, rho: ReducedDensityMatrix) -> float:
    """Full trace norm ``||gamma - rho||_1``."""
    if (gamma.k, gamma.m) != (rho.k, rho.m):
        raise ValidationError(f"cannot compare k={gamma.k}, m={gamma.m} with k={rho.k}, m={rho.m}")
    diff = gamma.matrix - rho.matrix
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def _tensor_power(v: np.ndarray, k: int) -> np.ndarray:
    out = np.ones(1, dtype=np.complex128)
    for _ in range(k):
        out = np.kron(out, v)
    return out


def hartree_projector(phi: Field, k: int) -> ReducedDensityMatrix:
    nrm = phi.norm()
    if nrm == 0:
        raise ValidationError("hartree projector needs a nonzero field")
    v = _tensor_power(phi.modes() / nrm, k)
    return ReducedDensityMatrix(k, phi.grid.m, np.outer(v, v.conj()))


def symmetrizer(m: int, p: int) -> np.ndarray:
    """Orthogonal projector onto the symmetric subspace of ``(C^m)^{(x) p}``."""
    d = m ** p
    idx = np.arange(d).reshape((m,) * p)
    out = np.zeros((d, d))
    for perm in permutations(range(p)):
        out[idx.transpose(perm).reshape(-1), np.arange(d)] += 1.0
    return out / factorial(p)


def wick_vs_rdm_crosscheck(conv: LadderConvention, psi: FockVector, fs: Sequence[Field],
                           gs: Sequence[Field]) -> tuple[complex, complex]:
    """The Wick expectation of ``prod <z, f_i><g_i, z>`` computed two ways.

    Second value: ``eps^p n!/(n-p)! Tr[gamma_p B]`` with ``B`` the symmetrized
    kernel of ``|f_1..f_p><g_1..g_p|``.
    """
    p = len(fs)
    if p != len(gs) or p < 1:
        raise ValidationError("need equally many (>= 1) f and g fields")
    for f in list(fs) + list(gs):
        if f.grid != conv.grid:
            raise GridMismatchError("test field lives on a different grid")
    lhs = wick_rank_one_expectation(conv, psi, fs, gs)
    n = _sector_of(psi)
    if p > n:
        return lhs, 0.0j
    gamma = reduced_density(conv, psi, p)
    fvec = np.ones(1, dtype=np.complex128)
    gvec = np.ones(1, dtype=np.complex128)
    for f, g in zip(fs, gs):
        fvec = np.kron(fvec, f.modes())
        gvec = np.kron(gvec, g.modes())
    sym = symmetrizer(conv.grid.m, p)
    kernel = sym @ np.outer(fvec, gvec.conj()) @ sym
    factor = conv.epsilon ** p * np.exp(lgamma(n + 1) - lgamma(n - p + 1)) * psi.norm() ** 2
    return lhs, complex(factor * np.trace(gamma.matrix @ kernel))

"""Epsilon-scaled ladder operators, second quantization and Weyl operators.

All operators act on coefficient arrays in a fixed :class:`OccupationBasis`.
Creation-type operators cannot represent amplitude pushed above ``n_max``;
it is dropped and its squared norm is returned as the truncation loss.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import TruncationError, ValidationError
from ..krylov import KrylovInfo, lanczos_expmv
from ..space import Field
from .basis import OccupationBasis
from .vector import FockVector, LadderConvention

DEFAULT_WEYL_LOSS_CEILING = 1e-6


def annihilation_matrix(conv: LadderConvention, basis: OccupationBasis, f: Field) -> sp.csr_matrix:
    """``a(f) = sqrt(eps) sum_x conj(f_x) c_x`` inside ``basis``."""
    conv.check(basis)
    fx = conv.modes(f)
    out = sp.csr_matrix((basis.dim, basis.dim), dtype=np.complex128)
    for x in range(basis.m):
        if fx[x] != 0:
            out = out + np.conj(fx[x]) * basis.lowering(x)
    return (np.sqrt(conv.epsilon) * out).tocsr()


def creation_matrix(conv: LadderConvention, basis: OccupationBasis, f: Field) -> sp.csr_matrix:
    """Compression of ``a*(f)`` to ``basis`` (the adjoint of :func:`annihilation_matrix`)."""
    return annihilation_matrix(conv, basis, f).conj().T.tocsr()


def creation_overflow(conv: LadderConvention, basis: OccupationBasis, f: Field) -> sp.csr_matrix:
    """The part of ``a*(f)`` mapping the top sector to ``n_max + 1``."""
    conv.check(basis)
    fx = conv.modes(f)
    above = basis.above(1)
    out = sp.csr_matrix((above.dim, basis.dim), dtype=np.complex128)
    for x in range(basis.m):
        if fx[x] != 0:
            out = out + fx[x] * basis.shift_matrix(x, +1, target=above)
    return (np.sqrt(conv.epsilon) * out).tocsr()


def annihilate(conv: LadderConvention, f: Field, psi: FockVector) -> FockVector:
    return FockVector(psi.basis, annihilation_matrix(conv, psi.basis, f) @ psi.coeffs)


def create(conv: LadderConvention, f: Field, psi: FockVector) -> tuple[FockVector, float]:
    """``a*(f) psi`` and the squared norm lost above the cutoff."""
    out = creation_matrix(conv, psi.basis, f) @ psi.coeffs
    lost = creation_overflow(conv, psi.basis, f) @ psi.coeffs
    return FockVector(psi.basis, out), float(np.vdot(lost, lost).real)


def _check_hermitian(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"one-body operator must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ValidationError("one-body operator is not Hermitian")
    return a


def dgamma_matrix(conv: LadderConvention, basis: OccupationBasis, a: np.ndarray) -> sp.csr_matrix:
    """Second quantization ``eps * sum_xy a[x, y] c_x^dagger c_y``."""
    conv.check(basis)
    a = _check_hermitian(a)
    if a.shape[0] != basis.m:
        raise ValidationError(f"one-body operator has size {a.shape[0]}, basis has {basis.m} modes")
    if np.all(a.imag == 0):
        a = a.real
    return (conv.epsilon * basis.one_body_matrix(a)).tocsr()


def dGamma_apply(conv: LadderConvention, a: np.ndarray, psi: FockVector) -> FockVector:
    return FockVector(psi.basis, dgamma_matrix(conv, psi.basis, a) @ psi.coeffs)


def number_diagonal(conv: LadderConvention, basis: OccupationBasis) -> np.ndarray:
    """Diagonal of the scaled number operator ``N = dGamma(1)``."""
    return conv.epsilon * basis.totals.astype(float)


def number_apply(conv: LadderConvention, psi: FockVector) -> FockVector:
    return FockVector(psi.basis, number_diagonal(conv, psi.basis) * psi.coeffs)


def number_power_norm(conv: LadderConvention, psi: FockVector, p: float) -> float:
    """``||N^{p/2} psi||``."""
    w = number_diagonal(conv, psi.basis) ** p
    return float(np.sqrt(np.sum(w * np.abs(psi.coeffs) ** 2)))


def quartic_diagonal(conv: LadderConvention, basis: OccupationBasis) -> np.ndarray:
    """Diagonal of ``P^Wick``: ``eps^2/(2 dx) sum_x n_x (n_x - 1)``."""
    conv.check(basis)
    st = basis.states.astype(float)
    return conv.epsilon ** 2 / (2.0 * conv.grid.dx) * np.sum(st * (st - 1.0), axis=1)


def quartic_onsite_apply(conv: LadderConvention, psi: FockVector) -> FockVector:
    return FockVector(psi.basis, quartic_diagonal(conv, psi.basis) * psi.coeffs)


def weyl_generator(conv: LadderConvention, basis: OccupationBasis, f: Field):
    """Hermitian ``B = (a*(f) + a(f)) / sqrt(2)`` and its overflow part."""
    if basis.n_min != 0:
        raise ValidationError("Weyl operators need a basis that starts at the vacuum")
    lower = annihilation_matrix(conv, basis, f)
    gen = (lower + lower.conj().T) / np.sqrt(2.0)
    leak = creation_overflow(conv, basis, f) / np.sqrt(2.0)
    return gen.tocsr(), leak.tocsr()


def weyl_apply(conv: LadderConvention, f: Field, psi: FockVector, tol: float = 1e-10,
               max_loss: float = DEFAULT_WEYL_LOSS_CEILING) -> tuple[FockVector, float]:
    """``W(f) psi = exp(i B) psi`` with ``B = (a*(f) + a(f)) / sqrt(2)``.

    The compressed generator is Hermitian, so the result is exactly unitary on
    the truncated space; the returned loss is the squared Duhamel bound on the
    distance to the untruncated result.
    """
    if np.all(f.values == 0):
        return FockVector(psi.basis, psi.coeffs.copy()), 0.0
    gen, leak = weyl_generator(conv, psi.basis, f)
    out, info = lanczos_expmv(gen.dot, psi.coeffs, -1.0, tol=tol, leak=leak.dot)
    loss = info.truncation_loss
    if loss > max_loss:
        raise TruncationError(f"Weyl operator truncation loss {loss:.3e} exceeds {max_loss:.1e}", loss)
    return FockVector(psi.basis, out), loss


def weyl_apply_info(conv: LadderConvention, f: Field, psi: FockVector,
                    tol: float = 1e-10) -> tuple[FockVector, KrylovInfo]:
    """Like :func:`weyl_apply` but returns the full Krylov bookkeeping and never raises on loss."""
    gen, leak = weyl_generator(conv, psi.basis, f)
    out, info = lanczos_expmv(gen.dot, psi.coeffs, -1.0, tol=tol, leak=leak.dot)
    return FockVector(psi.basis, out), info


def wick_rank_one_expectation(conv: LadderConvention, psi: FockVector, fs: Sequence[Field],
                              gs: Sequence[Field], phi: FockVector | None = None) -> complex:
    """``<psi, prod_i a*(f_i) prod_j a(g_j) phi>`` (``phi`` defaults to ``psi``).

    This is the Wick quantization of ``b(z) = prod_i <z, f_i> <g_i, z>``.
    """
    if len(fs) != len(gs) or len(fs) < 1:
        raise ValidationError("need equally many (>= 1) creation and annihilation fields")
    phi = psi if phi is None else phi
    psi._check(phi)
    u = psi.coeffs
    for f in fs:
        u = annihilation_matrix(conv, psi.basis, f) @ u
    v = phi.coeffs
    for g in gs:
        v = annihilation_matrix(conv, phi.basis, g) @ v
    return complex(np.vdot(u, v))


def symmetric_product_norm(fields: Sequence[Field]) -> float:
    """``||S_p(f_1 x ... x f_p)||`` = sqrt(perm(<f_i, f_j>) / p!)."""
    from itertools import permutations
    from math import factorial

    from ..space import inner_product

    p = len(fields)
    gram = np.array([[inner_product(fi, fj) for fj in fields] for fi in fields])
    total = 0.0 + 0.0j
    for sigma in permutations(range(p)):
        total += np.prod([gram[i, sigma[i]] for i in range(p)])
    return float(np.sqrt(max(total.real, 0.0) / factorial(p)))

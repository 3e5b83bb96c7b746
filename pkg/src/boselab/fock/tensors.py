"""Conversion between symmetric n-particle tensors and occupation coefficients.

A tensor ``T[x_1, ..., x_n]`` holds amplitudes against orthonormal site
modes. Its occupation coefficient is ``sqrt(n! / prod n_x!) * T[rep]`` where
``rep`` is any index tuple with those occupations.
"""

from __future__ import annotations

from math import lgamma

import numpy as np

from ..errors import ValidationError
from .basis import OccupationBasis
from .vector import FockVector


def _all_tuples(m: int, n: int) -> np.ndarray:
    return np.indices((m,) * n).reshape(n, -1).T


def _occupations(tuples: np.ndarray, m: int) -> np.ndarray:
    occ = np.zeros((tuples.shape[0], m), dtype=np.int64)
    for col in tuples.T:
        occ[np.arange(tuples.shape[0]), col] += 1
    return occ


def _multinomial_sqrt(occ: np.ndarray, n: int) -> np.ndarray:
    logs = lgamma(n + 1) - np.sum([[lgamma(v + 1) for v in row] for row in occ], axis=1)
    return np.exp(0.5 * logs)


def symmetrize(tensor: np.ndarray) -> np.ndarray:
    from itertools import permutations
    from math import factorial

    n = tensor.ndim
    out = np.zeros_like(tensor, dtype=np.complex128)
    for perm in permutations(range(n)):
        out += tensor.transpose(perm)
    return out / factorial(n)


def sector_from_tensor(basis: OccupationBasis, tensor: np.ndarray) -> FockVector:
    """Fock vector supported on sector ``n = tensor.ndim``; ``tensor`` must be symmetric."""
    n = tensor.ndim
    m = basis.m
    if tensor.shape != (m,) * n:
        raise ValidationError(f"tensor shape {tensor.shape} does not match {m} modes")
    if np.max(np.abs(symmetrize(tensor) - tensor), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(tensor))):
        raise ValidationError("tensor is not symmetric under particle exchange")
    sl = basis.sector_slice(n)
    states = basis.states[sl]
    # representative tuple: sites listed with multiplicity, ascending
    reps = np.array([np.repeat(np.arange(m), row) for row in states], dtype=np.int64).reshape(-1, n)
    coeffs = np.zeros(basis.dim, dtype=np.complex128)
    vals = tensor[tuple(reps.T)] if n > 0 else np.array([tensor[()]])
    coeffs[sl] = _multinomial_sqrt(states, n) * vals
    return FockVector(basis, coeffs)


def tensor_from_sector(psi: FockVector, n: int) -> np.ndarray:
    """The symmetric tensor of the ``n``-particle component of ``psi``."""
    m = psi.basis.m
    if n == 0:
        return np.array(psi.coeffs[psi.basis.sector_slice(0)][0])
    tuples = _all_tuples(m, n)
    occ = _occupations(tuples, m)
    idx = psi.basis.index(occ)
    if np.any(idx < 0):
        raise ValidationError(f"sector {n} is not in {psi.basis}")
    vals = psi.coeffs[idx] / _multinomial_sqrt(occ, n)
    return vals.reshape((m,) * n)

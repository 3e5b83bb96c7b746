"""Coherent and Hermite (product) states in an occupation basis."""

from __future__ import annotations

from math import lgamma

import numpy as np
from scipy.stats import poisson

from ..errors import CapacityError, ValidationError
from ..space import Field
from .basis import OccupationBasis
from .operators import weyl_apply
from .vector import FockVector, LadderConvention

DEFAULT_TAIL_THRESHOLD = 1e-8


def poisson_tail(mean: float, n_max: int) -> float:
    """Probability that a Poisson(mean) count exceeds ``n_max``."""
    if mean == 0:
        return 0.0
    return float(poisson.sf(n_max, mean))


def required_n_max(mean: float, threshold: float = DEFAULT_TAIL_THRESHOLD) -> int:
    """Smallest cutoff whose Poisson tail is at most ``threshold``."""
    n = int(mean)
    while poisson_tail(mean, n) > threshold:
        n += 1
    return n


def _power_table(amps: np.ndarray, n_max: int) -> np.ndarray:
    # table[x, k] = amps[x]^k / sqrt(k!)
    table = np.ones((amps.shape[0], n_max + 1), dtype=np.complex128)
    for k in range(1, n_max + 1):
        table[:, k] = table[:, k - 1] * amps / np.sqrt(k)
    return table


def _product_coefficients(basis: OccupationBasis, amps: np.ndarray) -> np.ndarray:
    table = _power_table(amps, basis.n_max)
    out = np.ones(basis.dim, dtype=np.complex128)
    for x in range(basis.m):
        out *= table[x, basis.states[:, x]]
    return out


def coherent_state(conv: LadderConvention, basis: OccupationBasis, phi: Field,
                   tail_threshold: float = DEFAULT_TAIL_THRESHOLD,
                   method: str = "series") -> FockVector:
    """``E(phi)``: displaced vacuum with mean scaled particle number ``||phi||^2``.

    The occupation number per site is Poisson with mean ``|alpha_x|^2``,
    ``alpha_x = phi_x / sqrt(eps)``; the total is Poisson with mean
    ``||phi||^2 / eps``, whose tail above ``n_max`` must stay below
    ``tail_threshold``. ``method="weyl"`` builds the same state as
    ``W(sqrt(2) phi / (i eps)) Omega`` through the Krylov exponential.
    """
    conv.check(basis)
    if basis.n_min != 0:
        raise ValidationError("coherent states need a basis that starts at the vacuum")
    mean = phi.norm() ** 2 / conv.epsilon
    tail = poisson_tail(mean, basis.n_max)
    if tail > tail_threshold:
        need = required_n_max(mean, tail_threshold)
        raise CapacityError(
            f"coherent state with mean particle number {mean:.3g} needs n_max >= {need} "
            f"(tail {tail:.2e} > {tail_threshold:.0e} at n_max={basis.n_max})", required=need)
    if method == "weyl":
        f = phi * (np.sqrt(2.0) / (1j * conv.epsilon))
        out, _ = weyl_apply(conv, f, FockVector.vacuum(basis), max_loss=np.inf)
        return out
    if method != "series":
        raise ValidationError(f"unknown method {method!r}")
    alpha = conv.modes(phi) / np.sqrt(conv.epsilon)
    coeffs = np.exp(-0.5 * mean) * _product_coefficients(basis, alpha)
    return FockVector(basis, coeffs)


def hermite_state(conv: LadderConvention, basis: OccupationBasis, phi: Field, n: int) -> FockVector:
    """Normalized ``phi^{(x) n}`` in the ``n``-particle sector."""
    conv.check(basis)
    if n > basis.n_max:
        raise CapacityError(f"sector {n} exceeds n_max={basis.n_max}", required=n)
    if n < basis.n_min:
        raise ValidationError(f"sector {n} is below the basis window starting at {basis.n_min}")
    nrm = phi.norm()
    if nrm == 0:
        raise ValidationError("hermite states need a nonzero field")
    amps = conv.modes(phi) / nrm
    coeffs = np.zeros(basis.dim, dtype=np.complex128)
    sl = basis.sector_slice(n)
    sub = basis.states[sl]
    val = np.full(sub.shape[0], np.exp(0.5 * lgamma(n + 1)), dtype=np.complex128)
    table = _power_table(amps, n)
    for x in range(basis.m):
        val *= table[x, sub[:, x]]
    coeffs[sl] = val
    return FockVector(basis, coeffs)

"""Lanczos approximation of ``exp(-i tau H) v`` for Hermitian ``H``.

The Krylov basis is fully reorthogonalized (classical Gram-Schmidt applied
twice), so the propagated vector keeps the input norm to rounding. Substeps
are chosen adaptively from the difference between the order-``k`` and
order-``k-1`` approximations, which costs no extra matrix products.

If a ``leak`` operator is supplied (the part of the untruncated generator
that maps the truncated space outside itself), the Duhamel bound
``int_0^tau ||leak v(s)|| ds`` on the distance to the untruncated evolution
is accumulated alongside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import KrylovError

Matvec = Callable[[np.ndarray], np.ndarray]

_SIMPSON_NODES = np.linspace(0.0, 1.0, 5)
_SIMPSON_WEIGHTS = np.array([1.0, 4.0, 2.0, 4.0, 1.0]) / 12.0
_MIN_KRYLOV = 4


@dataclass
class KrylovInfo:
    substeps: int = 0
    matvecs: int = 0
    error_estimate: float = 0.0
    leak_bound: float = 0.0

    @property
    def truncation_loss(self) -> float:
        """Squared Duhamel bound: an upper bound on the squared distance to the untruncated result."""
        return self.leak_bound ** 2

    def merge(self, other: "KrylovInfo") -> None:
        self.substeps += other.substeps
        self.matvecs += other.matvecs
        self.error_estimate += other.error_estimate
        self.leak_bound += other.leak_bound


def _krylov_coeffs(evals, evecs, s):
    # exp(-i s T) e_1 through the tridiagonal eigendecomposition
    return evecs @ (np.exp(-1j * s * evals) * evecs[0, :])


def _error_model(alphas, betas, sign):
    """Error estimate from the order-k and order-(k-1) Krylov approximations."""
    k = len(alphas)
    evals, evecs = eigh_tridiagonal(np.array(alphas), np.array(betas[:k - 1]))
    lo = eigh_tridiagonal(np.array(alphas[:-1]), np.array(betas[:k - 2])) if k > 1 else None

    def err_at(s):
        y = _krylov_coeffs(evals, evecs, sign * s)
        if lo is None:
            return abs(y[-1])
        y_lo = _krylov_coeffs(lo[0], lo[1], sign * s)
        return float(np.linalg.norm(y[:-1] - y_lo) + abs(y[-1]))

    return err_at, (evals, evecs)


def lanczos_expmv(matvec: Matvec, v: np.ndarray, tau: float, tol: float = 1e-10,
                  krylov_dim: int = 30, leak: Matvec | None = None,
                  max_substeps: int = 100_000) -> tuple[np.ndarray, KrylovInfo]:
    """Return ``exp(-i tau H) v`` and bookkeeping.

    ``tol`` bounds the estimated absolute error of the whole propagation,
    relative to ``||v||``; it is distributed over substeps in proportion to
    their length.
    """
    info = KrylovInfo()
    w = np.array(v, dtype=np.complex128)
    norm0 = np.linalg.norm(w)
    if tau == 0 or norm0 == 0:
        return w, info
    sign = 1.0 if tau > 0 else -1.0
    total = abs(tau)
    remaining = total
    dim = w.shape[0]
    kmax = max(2, min(krylov_dim, dim))
    basis = np.empty((dim, kmax + 1), dtype=np.complex128)
    scale = 0.0

    while remaining > 0:
        if info.substeps >= max_substeps:
            raise KrylovError(f"Lanczos needed more than {max_substeps} substeps",
                              residual=info.error_estimate)
        nrm = np.linalg.norm(w)
        basis[:, 0] = w / nrm
        alphas, betas = [], []
        happy = False
        for j in range(kmax):
            u = matvec(basis[:, j])
            info.matvecs += 1
            a = float(np.real(np.vdot(basis[:, j], u)))
            u = u - a * basis[:, j]
            if j > 0:
                u -= betas[-1] * basis[:, j - 1]
            for _ in range(2):
                u -= basis[:, :j + 1] @ (u.conj() @ basis[:, :j + 1]).conj()
            b = float(np.linalg.norm(u))
            alphas.append(a)
            scale = max(scale, abs(a), b)
            if b <= 1e-12 * max(scale, 1e-300):
                happy = True
                break
            betas.append(b)
            basis[:, j + 1] = u / b
            # stop growing the space once it already covers the remaining time
            if j + 1 >= _MIN_KRYLOV and j + 1 < kmax:
                err_at, _ = _error_model(alphas, betas, sign)
                if err_at(remaining) <= tol * remaining / total:
                    break
        k = len(alphas)
        err_at, (evals, evecs) = _error_model(alphas, betas, sign)
        if happy or k == dim:
            step = remaining
            err = 0.0
        else:
            def ok(s):
                return err_at(s) <= tol * s / total

            step = remaining
            if not ok(step):
                bad = step
                while not ok(step):
                    bad = step
                    step *= 0.5
                    if step < total * 1e-14:
                        raise KrylovError(
                            f"Lanczos step collapsed (step={step:.3e})", residual=err_at(step))
                # the Krylov basis is reused, so widening the step is free
                for _ in range(12):
                    mid = 0.5 * (step + bad)
                    if ok(mid):
                        step = mid
                    else:
                        bad = mid
            err = err_at(step)
        y = _krylov_coeffs(evals, evecs, sign * step)
        if leak is not None:
            lk = np.column_stack([leak(basis[:, i]) for i in range(k)])
            gram = lk.conj().T @ lk
            rates = []
            for node in _SIMPSON_NODES:
                ys = _krylov_coeffs(evals, evecs, sign * step * node)
                rates.append(np.sqrt(max(float(np.real(np.vdot(ys, gram @ ys))), 0.0)))
            info.leak_bound += nrm * step * float(np.dot(_SIMPSON_WEIGHTS, rates))
        w = nrm * (basis[:, :k] @ y)
        info.error_estimate += nrm * err
        info.substeps += 1
        remaining -= step
        if remaining < total * 1e-15:
            remaining = 0.0
    return w, info

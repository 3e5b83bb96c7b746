"""Time evolution by Krylov exponentials.

Autonomous generators are exponentiated directly. Time-dependent ones use
the piecewise-constant scheme ``U_n(t, s)``: on a uniform partition of
``[s, t]`` the generator is frozen on each subinterval (at its left endpoint
by default) and the resulting exponentials are composed.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import TruncationError, ValidationError
from .fock.vector import FockVector
from .hamiltonian import SparseHermitianOperator
from .krylov import KrylovInfo, lanczos_expmv

DEFAULT_TOL = 1e-10
FREEZE_RULES = ("left", "midpoint")


@dataclass
class PropagatorRun:
    """Result of an evolution with its per-step bookkeeping.

    ``losses`` are squared Duhamel bounds per step; the bounds themselves add
    up along the composition, so ``cumulative_loss`` is the square of their sum.
    """

    state: FockVector
    n_steps: int
    times: np.ndarray
    losses: list[float] = dc_field(default_factory=list)
    unitarity_defects: list[float] = dc_field(default_factory=list)
    krylov: KrylovInfo = dc_field(default_factory=KrylovInfo)

    @property
    def cumulative_loss(self) -> float:
        return float(np.sum(np.sqrt(self.losses))) ** 2 if self.losses else 0.0

    @property
    def max_unitarity_defect(self) -> float:
        return max(self.unitarity_defects, default=0.0)


def _check(op: SparseHermitianOperator, psi: FockVector) -> None:
    if not op.basis.same_layout(psi.basis):
        raise ValidationError(f"vector basis {psi.basis} differs from operator basis {op.basis}")


def expmv_with_info(op: SparseHermitianOperator, psi: FockVector, tau: float,
                    tol: float = DEFAULT_TOL) -> tuple[FockVector, KrylovInfo]:
    """``exp(-i tau H) psi`` (no time rescaling) and the Krylov bookkeeping."""
    _check(op, psi)
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    leak = op.leak.dot if op.leak is not None and op.leak.nnz else None
    out, info = lanczos_expmv(op.matvec, psi.coeffs, tau, tol=tol, leak=leak)
    return FockVector(psi.basis, out), info


def expmv(op: SparseHermitianOperator, psi: FockVector, tau: float, tol: float = DEFAULT_TOL) -> FockVector:
    return expmv_with_info(op, psi, tau, tol)[0]


def _record(run: PropagatorRun, before: float, after: FockVector, info: KrylovInfo) -> None:
    run.losses.append(info.truncation_loss)
    run.unitarity_defects.append(abs(after.norm() - before))
    run.krylov.merge(info)


def evolve_autonomous(op: SparseHermitianOperator, psi: FockVector, t: float,
                      dt: float | None = None, tol: float = DEFAULT_TOL) -> PropagatorRun:
    """``exp(-i t H / time_scale) psi``, split into physical steps of length ``dt``."""
    _check(op, psi)
    n = 1 if dt is None or t == 0 else max(1, int(np.ceil(abs(t) / dt - 1e-9)))
    h = t / n
    run = PropagatorRun(state=psi, n_steps=n, times=np.linspace(0.0, t, n + 1))
    if t == 0:
        run.state = FockVector(psi.basis, psi.coeffs.copy())
        return run
    cur = psi
    for _ in range(n):
        before = cur.norm()
        cur, info = expmv_with_info(op, cur, h / op.time_scale, tol)
        _record(run, before, cur, info)
    run.state = cur
    return run


def evolve_nonautonomous(generator: Callable[[float], SparseHermitianOperator], psi: FockVector,
                         s: float, t: float, n_steps: int, tol: float = DEFAULT_TOL,
                         freeze: str = "left", budget: float | None = None) -> PropagatorRun:
    """``U_n(t, s) psi`` for the time-dependent generator ``A(.)``.

    For ``t >= s`` the partition ``s = t_0 < ... < t_n = t`` is traversed
    forward with ``exp(-i h A(t_j) / time_scale)``. For ``t < s`` the same construction on
    ``[t, s]`` is inverted, i.e. the adjoint factors are applied in reverse
    order, so ``U_n(s, t) U_n(t, s) = 1`` holds to Krylov accuracy.
    """
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")
    if freeze not in FREEZE_RULES:
        raise ValidationError(f"freeze must be one of {FREEZE_RULES}, got {freeze!r}")
    lo, hi = min(s, t), max(s, t)
    grid = np.linspace(lo, hi, n_steps + 1)
    h = (hi - lo) / n_steps
    frozen = grid[:-1] if freeze == "left" else 0.5 * (grid[:-1] + grid[1:])
    order = range(n_steps) if t >= s else range(n_steps - 1, -1, -1)
    sign = 1.0 if t >= s else -1.0
    run = PropagatorRun(state=psi, n_steps=n_steps, times=grid)
    cur = FockVector(psi.basis, psi.coeffs.copy())
    if h == 0:
        run.state = cur
        return run
    for j in order:
        op = generator(float(frozen[j]))
        before = cur.norm()
        cur, info = expmv_with_info(op, cur, sign * h / op.time_scale, tol)
        _record(run, before, cur, info)
        if budget is not None and run.cumulative_loss > budget:
            raise TruncationError(
                f"cumulative truncation loss {run.cumulative_loss:.3e} exceeds budget {budget:.1e}",
                run.cumulative_loss)
    run.state = cur
    return run

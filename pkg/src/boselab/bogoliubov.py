"""Linearized (Bogoliubov) flow around an NLS trajectory.

The fluctuation field obeys

    i d_t xi = (-Delta + 2|phi_t|^2) xi + phi_t^2 conj(xi),

which is real-linear but not complex-linear because of the pairing term.
Its flow ``beta(t, s)`` preserves the symplectic form ``Im <xi, eta>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GridMismatchError, IntegrationError, ValidationError
from .nls import NlsTrajectory
from .space import Field, Grid, inner_product, laplacian_apply, laplacian_eigenvalues


@dataclass(frozen=True, eq=False)
class SymplecticState:
    grid: Grid
    xi: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        v = np.array(self.xi, dtype=np.complex128).reshape(-1)
        if v.shape[0] != self.grid.m:
            raise ValidationError(f"state has {v.shape[0]} samples, grid has {self.grid.m}")
        object.__setattr__(self, "xi", v)

    @classmethod
    def from_field(cls, f: Field) -> "SymplecticState":
        return cls(f.grid, f.values)

    def as_field(self) -> Field:
        return Field(self.grid, self.xi)

    def norm(self) -> float:
        return self.as_field().norm()


def symplectic_form(xi: SymplecticState, eta: SymplecticState) -> float:
    """``Im <xi, eta>``."""
    return inner_product(xi.as_field(), eta.as_field()).imag


def bogoliubov_rhs(xi: SymplecticState, phi: Field, kind: str = "finite_difference") -> SymplecticState:
    """``d_t xi = -i((-Delta) xi + 2|phi|^2 xi + phi^2 conj(xi))``."""
    if xi.grid != phi.grid:
        raise GridMismatchError("fluctuation and condensate fields live on different grids")
    p = phi.values
    kin = laplacian_apply(kind, xi.as_field()).values
    return SymplecticState(xi.grid, -1j * (kin + 2.0 * np.abs(p) ** 2 * xi.xi + p ** 2 * np.conj(xi.xi)))


def _potential_rhs(v: np.ndarray, p: np.ndarray) -> np.ndarray:
    return -1j * (2.0 * np.abs(p) ** 2 * v + p ** 2 * np.conj(v))


def beta_apply(traj: NlsTrajectory, xi_s: SymplecticState, s: float, t: float,
               dt: float | None = None, method: str = "lawson") -> SymplecticState:
    """Propagate ``xi_s`` from time ``s`` to ``t`` (either direction).

    ``method="lawson"`` runs classical RK4 on the interaction-picture variable
    ``exp(-i t Delta) xi``: the kinetic part is exact and RK4 only sees the
    bounded potential and pairing terms. ``method="rk4"`` applies plain RK4 to
    the full right-hand side. The condensate is evaluated with the cubic
    Hermite interpolant of ``traj``.
    """
    if xi_s.grid != traj.grid:
        raise GridMismatchError("fluctuation field and trajectory live on different grids")
    traj._check_time(s)
    traj._check_time(t)
    dt = traj.dt if dt is None else dt
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if t == s:
        return SymplecticState(xi_s.grid, xi_s.xi.copy())

    n = max(1, int(np.ceil(abs(t - s) / dt - 1e-9)))
    h = (t - s) / n
    grid = traj.grid
    lam = laplacian_eigenvalues(grid, traj.kind)
    phis = {}

    def phi_at(tau):
        key = round(tau, 15)
        if key not in phis:
            phis[key] = traj.field_at(tau).values
        return phis[key]

    v = xi_s.xi.copy()
    if method == "lawson":
        e_half = np.exp(-0.5j * h * lam)
        e_full = e_half * e_half

        def prop(e, u):
            return np.fft.ifft(e * np.fft.fft(u))

        for j in range(n):
            t0 = s + j * h
            p0, pm, p1 = phi_at(t0), phi_at(t0 + 0.5 * h), phi_at(t0 + h)
            k1 = _potential_rhs(v, p0)
            k2 = _potential_rhs(prop(e_half, v + 0.5 * h * k1), pm)
            k3 = _potential_rhs(prop(e_half, v) + 0.5 * h * k2, pm)
            k4 = _potential_rhs(prop(e_full, v) + h * prop(e_half, k3), p1)
            v = prop(e_full, v + (h / 6.0) * k1) + prop(e_half, (h / 3.0) * (k2 + k3)) + (h / 6.0) * k4
            if not np.all(np.isfinite(v)):
                raise IntegrationError(f"non-finite Bogoliubov field at step {j + 1}", step=j + 1)
    elif method == "rk4":
        def rhs(u, p):
            return bogoliubov_rhs(SymplecticState(grid, u), Field(grid, p), traj.kind).xi

        for j in range(n):
            t0 = s + j * h
            p0, pm, p1 = phi_at(t0), phi_at(t0 + 0.5 * h), phi_at(t0 + h)
            k1 = rhs(v, p0)
            k2 = rhs(v + 0.5 * h * k1, pm)
            k3 = rhs(v + 0.5 * h * k2, pm)
            k4 = rhs(v + h * k3, p1)
            v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(v)):
                raise IntegrationError(f"non-finite Bogoliubov field at step {j + 1}", step=j + 1)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return SymplecticState(grid, v)

"""Discrete cubic defocusing NLS ``i d_t phi = -Delta phi + |phi|^2 phi``.

The same grid and Laplacian as the many-body Hamiltonian are used, so the
solution here is the exact mean-field reference for the lattice model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, TimeRangeError, ValidationError
from .space import Field, Grid, LaplacianKind, laplacian_apply, laplacian_eigenvalues, spectral_derivative


def mass(phi: Field) -> float:
    return phi.norm() ** 2


def potential_energy(phi: Field) -> float:
    """``P(phi) = 1/2 * dx * sum |phi|^4``."""
    return 0.5 * phi.grid.dx * float(np.sum(np.abs(phi.values) ** 4))


def kinetic_energy(phi: Field, kind: LaplacianKind = "finite_difference") -> float:
    lap = laplacian_apply(kind, phi)
    return float(np.real(phi.grid.dx * np.vdot(phi.values, lap.values)))


def energy(phi: Field, kind: LaplacianKind = "finite_difference") -> float:
    """Classical energy ``<phi, -Delta phi> + P(phi)``."""
    return kinetic_energy(phi, kind) + potential_energy(phi)


def vector_field(phi: Field, kind: LaplacianKind = "finite_difference") -> np.ndarray:
    """Time derivative ``-i(-Delta phi + |phi|^2 phi)`` as a raw array."""
    v = phi.values
    return -1j * (laplacian_apply(kind, phi).values + np.abs(v) ** 2 * v)


def linf_ratio(phi: Field) -> float:
    """``max|phi|^2 / (2 ||phi|| ||d_x phi||)``; at most 1 for localized data on the line."""
    grad = spectral_derivative(phi).norm()
    peak = float(np.max(np.abs(phi.values)) ** 2)
    if grad == 0.0:
        return np.inf if peak > 0 else 0.0
    return peak / (2.0 * phi.norm() * grad)


def h2_norm(phi: Field) -> float:
    """Spectral ``H^2`` norm, ``||(1 + k^2) phi_hat||`` with Parseval scaling."""
    k2 = phi.grid.wavenumbers ** 2
    coef = np.fft.fft(phi.values) / phi.grid.m
    return float(np.sqrt(phi.grid.length * np.sum(((1.0 + k2) * np.abs(coef)) ** 2)))


@dataclass(frozen=True, eq=False)
class NlsTrajectory:
    """Sampled NLS solution with conserved quantities and the phase integral.

    ``omega[k]`` is the cumulative trapezoid quadrature of ``P(phi_s)`` over
    ``[0, times[k]]`` accumulated at the integrator step ``dt``.
    """

    grid: Grid
    kind: str
    dt: float
    times: np.ndarray
    fields: np.ndarray  # (n_samples, m)
    masses: np.ndarray
    energies: np.ndarray
    omega: np.ndarray

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return len(self.times)

    def field(self, k: int) -> Field:
        return Field(self.grid, self.fields[k])

    def _check_time(self, t: float) -> None:
        tol = 1e-12 * max(1.0, self.t_final)
        if not (-tol <= t <= self.t_final + tol):
            raise TimeRangeError(f"t={t} outside trajectory range [0, {self.t_final}]")

    def _locate(self, t: float) -> tuple[int, float]:
        self._check_time(t)
        t = min(max(t, 0.0), self.t_final)
        if len(self.times) == 1:
            return 0, 0.0
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = min(max(k, 0), len(self.times) - 2)
        h = self.times[k + 1] - self.times[k]
        return k, (t - self.times[k]) / h

    def field_at(self, t: float) -> Field:
        """Cubic Hermite interpolation in time using the exact NLS vector field."""
        k, s = self._locate(t)
        if len(self.times) == 1 or s == 0.0:
            return Field(self.grid, self.fields[k])
        if s == 1.0:
            return Field(self.grid, self.fields[k + 1])
        h = self.times[k + 1] - self.times[k]
        y0, y1 = self.fields[k], self.fields[k + 1]
        d0 = vector_field(Field(self.grid, y0), self.kind)
        d1 = vector_field(Field(self.grid, y1), self.kind)
        h00 = 2 * s ** 3 - 3 * s ** 2 + 1
        h10 = s ** 3 - 2 * s ** 2 + s
        h01 = -2 * s ** 3 + 3 * s ** 2
        h11 = s ** 3 - s ** 2
        return Field(self.grid, h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1)


def omega_at(traj: NlsTrajectory, t: float) -> float:
    """Phase integral ``int_0^t P(phi_s) ds``, linearly interpolated between samples."""
    k, s = traj._locate(t)
    if len(traj.times) == 1:
        return float(traj.omega[0])
    return float((1.0 - s) * traj.omega[k] + s * traj.omega[k + 1])


def _steps(total: float, step: float, what: str) -> int:
    n = int(round(total / step))
    if abs(n * step - total) > 1e-9 * max(1.0, abs(total)):
        raise ValidationError(f"{what}: {total} is not an integer multiple of {step}")
    return n


def nls_evolve(phi0: Field, t_final: float, dt: float = 1e-3,
               laplacian_kind: LaplacianKind = "finite_difference",
               sample_dt: float | None = None) -> NlsTrajectory:
    """Strang split-step integration of the discrete NLS.

    Each step is: half nonlinear phase rotation, exact kinetic flow through
    the DFT eigenvalues of the chosen Laplacian, half nonlinear rotation.
    Samples are stored every ``sample_dt`` (default: every step).
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if t_final < 0:
        raise ValidationError(f"t_final must be non-negative, got {t_final}")
    sample_dt = dt if sample_dt is None else sample_dt
    every = _steps(sample_dt, dt, "sample interval")
    if every < 1:
        raise ValidationError("sample_dt must be at least dt")
    n_samples = _steps(t_final, sample_dt, "t_final")

    grid = phi0.grid
    kin = np.exp(-1j * dt * laplacian_eigenvalues(grid, laplacian_kind))
    dxw = 0.5 * grid.dx

    v = phi0.values.copy()
    fields = [v.copy()]
    with np.errstate(over="ignore"):
        p_prev = dxw * np.sum(np.abs(v) ** 4)
    omega = [0.0]
    acc = 0.0
    step = 0
    for _ in range(n_samples):
        for _ in range(every):
            step += 1
            # overflow is caught by the finiteness check below
            with np.errstate(over="ignore", invalid="ignore"):
                v = v * np.exp(-0.5j * dt * np.abs(v) ** 2)
                v = np.fft.ifft(kin * np.fft.fft(v))
                v = v * np.exp(-0.5j * dt * np.abs(v) ** 2)
            if not np.all(np.isfinite(v)):
                raise IntegrationError(f"non-finite NLS field at step {step}", step=step)
            p_next = dxw * np.sum(np.abs(v) ** 4)
            acc += 0.5 * dt * (p_prev + p_next)
            p_prev = p_next
        fields.append(v.copy())
        omega.append(acc)

    fields = np.array(fields)
    flds = [Field(grid, f) for f in fields]
    return NlsTrajectory(
        grid=grid,
        kind=laplacian_kind,
        dt=dt,
        times=np.arange(n_samples + 1) * sample_dt,
        fields=fields,
        masses=np.array([mass(f) for f in flds]),
        energies=np.array([energy(f, laplacian_kind) for f in flds]),
        omega=np.array(omega),
    )

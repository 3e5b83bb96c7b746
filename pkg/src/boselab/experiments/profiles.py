"""Named initial one-body profiles, normalized to a prescribed mass."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..space import Field, Grid

PROFILES = ("gauss", "plane", "two-bump", "random")


def _periodic_gauss(grid: Grid, center: float, width: float) -> np.ndarray:
    x = grid.x
    images = np.arange(-3, 4) * grid.length
    return np.sum(np.exp(-((x[:, None] - center - images[None, :]) ** 2) / (2.0 * width ** 2)), axis=1)


def make_profile(grid: Grid, name: str, params: dict | None = None, mass: float = 1.0,
                 seed: int = 0) -> Field:
    """Build the named profile on ``grid`` and scale it to ``||phi||^2 = mass``.

    gauss: ``center``, ``width``, ``velocity`` (phase ``exp(2 pi i velocity x / L)``).
    plane: ``k`` (Fourier index). two-bump: ``separation``, ``width``,
    ``relative_phase``. random: band-limited to ``|k| <= kmax``, drawn from ``seed``.
    """
    params = dict(params or {})
    L = grid.length
    x = grid.x

    def take(key, default):
        return float(params.pop(key, default))

    if name == "gauss":
        center, width, vel = take("center", 0.5 * L), take("width", 0.2 * L), take("velocity", 0.0)
        values = _periodic_gauss(grid, center, width) * np.exp(2j * np.pi * vel * x / L)
    elif name == "plane":
        k = int(take("k", 1))
        values = np.exp(2j * np.pi * k * x / L)
    elif name == "two-bump":
        sep, width, rel = take("separation", 0.5 * L), take("width", 0.1 * L), take("relative_phase", 0.0)
        c = 0.5 * L
        values = (_periodic_gauss(grid, c - 0.5 * sep, width)
                  + np.exp(1j * rel) * _periodic_gauss(grid, c + 0.5 * sep, width))
    elif name == "random":
        kmax = int(take("kmax", max(1, grid.m // 4)))
        rng = np.random.default_rng(seed)
        ks = np.arange(-kmax, kmax + 1)
        amps = (rng.normal(size=ks.size) + 1j * rng.normal(size=ks.size)) / (1.0 + ks ** 2)
        values = np.exp(2j * np.pi * np.outer(x, ks) / L) @ amps
    else:
        raise ConfigError(f"unknown profile {name!r}; choose from {PROFILES}")
    if params:
        raise ConfigError(f"unknown parameters for profile {name!r}: {sorted(params)}")
    if mass < 0:
        raise ConfigError(f"mass must be nonnegative, got {mass}")
    f = Field(grid, values)
    return f.normalized(mass) if mass > 0 else Field.zeros(grid)

"""Occupation-number bases of the truncated symmetric Fock space.

States are ordered by total particle number, then lexicographically
(ascending) within each sector. Ranking is done in closed form with the
hockey-stick identity, so ``index`` never needs a dictionary.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np
import scipy.sparse as sp

from ..errors import CapacityError, ValidationError

BASIS_ORDER_VERSION = 1
DEFAULT_MAX_STATES = 5_000_000


def sector_dimension(m: int, n: int) -> int:
    """Number of occupation vectors of ``m`` modes with total ``n``."""
    return comb(n + m - 1, m - 1)


def basis_dimension(m: int, n_max: int, n_min: int = 0) -> int:
    return sum(sector_dimension(m, n) for n in range(n_min, n_max + 1))


@lru_cache(maxsize=256)
def _sector_states(m: int, n: int) -> np.ndarray:
    if m == 1:
        return np.array([[n]], dtype=np.int32)
    blocks = []
    for v in range(n + 1):
        rest = _sector_states(m - 1, n - v)
        head = np.full((rest.shape[0], 1), v, dtype=np.int32)
        blocks.append(np.hstack([head, rest]))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


class OccupationBasis:
    """Occupation vectors ``(n_1..n_m)`` with ``n_min <= sum(n) <= n_max``.

    ``n_min > 0`` gives a window of sectors; a single-sector basis
    (``n_min == n_max``) is what number-conserving runs use.
    """

    def __init__(self, m: int, n_max: int, n_min: int = 0, max_states: int = DEFAULT_MAX_STATES):
        if m < 1:
            raise ValidationError(f"need at least one mode, got m={m}")
        if n_max < 0 or n_min < 0 or n_min > n_max:
            raise ValidationError(f"invalid particle window [{n_min}, {n_max}]")
        size = basis_dimension(m, n_max, n_min)
        if size > max_states:
            raise CapacityError(
                f"basis m={m}, n in [{n_min}, {n_max}] has {size} states (> {max_states})",
                required=size)
        self.m = int(m)
        self.n_max = int(n_max)
        self.n_min = int(n_min)
        self.states = np.vstack([_sector_states(self.m, n) for n in range(n_min, n_max + 1)])
        self.states.setflags(write=False)
        sizes = [sector_dimension(self.m, n) for n in range(n_min, n_max + 1)]
        self._offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.totals = self.states.sum(axis=1)
        self.totals.setflags(write=False)
        # binom[a, b] = C(a, b) for the ranking formula
        top = self.n_max + self.m + 1
        self._binom = np.array([[comb(a, b) for b in range(self.m + 1)] for a in range(top + 1)],
                               dtype=np.int64)
        self._cache: dict = {}

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def __repr__(self) -> str:
        return f"OccupationBasis(m={self.m}, n_min={self.n_min}, n_max={self.n_max}, dim={self.dim})"

    def same_layout(self, other: "OccupationBasis") -> bool:
        return (self.m, self.n_min, self.n_max) == (other.m, other.n_min, other.n_max)

    def sectors(self) -> range:
        return range(self.n_min, self.n_max + 1)

    def sector_slice(self, n: int) -> slice:
        if not (self.n_min <= n <= self.n_max):
            raise ValidationError(f"sector {n} outside basis window [{self.n_min}, {self.n_max}]")
        k = n - self.n_min
        return slice(int(self._offsets[k]), int(self._offsets[k + 1]))

    def contains(self, occ) -> np.ndarray:
        occ = np.atleast_2d(np.asarray(occ))
        tot = occ.sum(axis=1)
        return (occ.shape[1] == self.m) & np.all(occ >= 0, axis=1) & (tot >= self.n_min) & (tot <= self.n_max)

    def index(self, occ) -> np.ndarray:
        """Ranks of occupation vectors (rows of ``occ``); -1 where outside the basis."""
        occ = np.atleast_2d(np.asarray(occ, dtype=np.int64))
        if occ.shape[1] != self.m:
            raise ValidationError(f"occupation vectors need {self.m} entries")
        inside = self.contains(occ)
        out = np.full(occ.shape[0], -1, dtype=np.int64)
        if not np.any(inside):
            return out
        o = occ[inside]
        tot = o.sum(axis=1)
        rank = self._offsets[tot - self.n_min].copy()
        rem = tot.copy()
        for i in range(self.m - 1):
            p = self.m - i - 1
            v = o[:, i]
            rank += self._binom[rem + p, p] - self._binom[rem - v + p, p]
            rem = rem - v
        out[inside] = rank
        return out

    def index_of(self, occ) -> int:
        r = int(self.index(np.asarray(occ)[None, :])[0])
        if r < 0:
            raise ValidationError(f"occupation {tuple(occ)} is not in {self}")
        return r

    def above(self, depth: int) -> "OccupationBasis":
        """The ``depth`` sectors just above the cutoff (used to measure overflow)."""
        key = ("above", depth)
        if key not in self._cache:
            self._cache[key] = OccupationBasis(self.m, self.n_max + depth, self.n_max + 1,
                                               max_states=np.iinfo(np.int64).max)
        return self._cache[key]

    # --- elementary ladder matrices (unscaled, orthonormal site modes) ---

    def shift_matrix(self, x: int, delta: int, target: "OccupationBasis | None" = None) -> sp.csr_matrix:
        """Matrix of ``c_x^delta`` (``delta<0``) or ``(c_x^dagger)^delta`` from this basis to ``target``.

        Amplitude that leaves the target window is dropped.
        """
        target = self if target is None else target
        key = ("shift", x, delta, id(target))
        if target is self and key in self._cache:
            return self._cache[key]
        n_x = self.states[:, x].astype(np.int64)
        amp = np.ones(self.dim)
        if delta < 0:
            for j in range(-delta):
                amp = amp * np.sqrt(np.maximum(n_x - j, 0))
        else:
            for j in range(1, delta + 1):
                amp = amp * np.sqrt(n_x + j)
        new = self.states.astype(np.int64)
        new[:, x] += delta
        rows = target.index(new)
        keep = (rows >= 0) & (amp != 0)
        cols = np.nonzero(keep)[0]
        mat = sp.csr_matrix((amp[keep], (rows[keep], cols)), shape=(target.dim, self.dim))
        if target is self:
            self._cache[key] = mat
        return mat

    def lowering(self, x: int) -> sp.csr_matrix:
        """``c_x`` within this basis."""
        return self.shift_matrix(x, -1)

    def hopping(self, x: int, y: int) -> sp.csr_matrix:
        """Number-conserving ``c_x^dagger c_y`` within this basis (``x != y``)."""
        key = ("hop", x, y)
        if key in self._cache:
            return self._cache[key]
        st = self.states.astype(np.int64)
        ny = st[:, y]
        src = np.nonzero(ny > 0)[0]
        new = st[src].copy()
        new[:, y] -= 1
        new[:, x] += 1
        rows = self.index(new)
        amp = np.sqrt(ny[src] * new[:, x])
        mat = sp.csr_matrix((amp, (rows, src)), shape=(self.dim, self.dim))
        self._cache[key] = mat
        return mat

    def one_body_matrix(self, a: np.ndarray) -> sp.csr_matrix:
        """Unscaled ``sum_xy a[x, y] c_x^dagger c_y`` (sector preserving)."""
        a = np.asarray(a)
        diag = self.states @ np.diag(a)
        out = sp.diags(diag.astype(np.result_type(a, float)), format="csr")
        for x in range(self.m):
            for y in range(self.m):
                if x != y and a[x, y] != 0:
                    out = out + a[x, y] * self.hopping(x, y)
        return out.tocsr()


@lru_cache(maxsize=64)
def build_basis(m: int, n_max: int, n_min: int = 0, max_states: int = DEFAULT_MAX_STATES) -> OccupationBasis:
    """Cached constructor; bases are immutable apart from their operator cache."""
    return OccupationBasis(m, n_max, n_min, max_states)

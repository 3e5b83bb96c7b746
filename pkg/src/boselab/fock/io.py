"""Binary checkpoint format for Fock vectors.

Layout (little-endian): magic ``b"BLFV"``, u32 format version, u32 basis
order version, i64 m, i64 n_min, i64 n_max, f64 epsilon, i64 dim, then
``dim`` complex128 coefficients in basis order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .basis import BASIS_ORDER_VERSION, build_basis
from .vector import FockVector

MAGIC = b"BLFV"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIqqqdq")


def dumps(psi: FockVector, epsilon: float) -> bytes:
    b = psi.basis
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, BASIS_ORDER_VERSION, b.m, b.n_min, b.n_max,
                        float(epsilon), b.dim)
    return head + psi.coeffs.astype("<c16").tobytes()


def loads(data: bytes) -> tuple[FockVector, float]:
    if len(data) < _HEADER.size:
        raise FormatError("truncated Fock vector header")
    magic, fmt, order, m, n_min, n_max, eps, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("not a Fock vector file")
    if fmt != FORMAT_VERSION:
        raise FormatError(f"unsupported Fock vector format version {fmt}")
    if order != BASIS_ORDER_VERSION:
        raise FormatError(f"basis order version {order} differs from {BASIS_ORDER_VERSION}")
    basis = build_basis(m, n_max, n_min)
    if basis.dim != dim:
        raise FormatError(f"header dimension {dim} does not match basis dimension {basis.dim}")
    body = data[_HEADER.size:]
    if len(body) != 16 * dim:
        raise FormatError(f"expected {16 * dim} coefficient bytes, found {len(body)}")
    coeffs = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return FockVector(basis, coeffs), eps


def save(path, psi: FockVector, epsilon: float) -> None:
    Path(path).write_bytes(dumps(psi, epsilon))


def load(path) -> tuple[FockVector, float]:
    return loads(Path(path).read_bytes())

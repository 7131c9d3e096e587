"""Canonical byte encoding.

Every vector is little-endian and length-prefixed with a 4-byte count:

* Z_q vectors: one minimal-width residue per entry (width fixed by q);
* binary vectors: packed 8 entries per byte, LSB first;
* ternary vectors: packed 4 entries per byte as (entry + 1) in 2 bits.

Matrices carry 4-byte row and column counts then row-major residues.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .errors import DecodeError
from .lattice import Params

VERSION = 1


def _width_dtype(width: int) -> str:
    return {1: "<u1", 2: "<u2", 4: "<u4", 8: "<u8"}[width]


def zq_nbytes(count: int, width: int) -> int:
    return 4 + count * width


def bits_nbytes(count: int) -> int:
    return 4 + (count + 7) // 8


def trits_nbytes(count: int) -> int:
    return 4 + (count + 3) // 4


class Writer:
    def __init__(self):
        self._parts: list[bytes] = []

    def raw(self, data: bytes) -> "Writer":
        self._parts.append(bytes(data))
        return self

    def u8(self, x: int) -> "Writer":
        return self.raw(struct.pack("<B", x))

    def u32(self, x: int) -> "Writer":
        return self.raw(struct.pack("<I", x))

    def u64(self, x: int) -> "Writer":
        return self.raw(struct.pack("<Q", x))

    def blob(self, data: bytes) -> "Writer":
        return self.u32(len(data)).raw(data)

    def text(self, s: str) -> "Writer":
        return self.blob(s.encode())

    def zq(self, vec, width: int) -> "Writer":
        vec = np.asarray(vec, dtype=np.int64).ravel()
        return self.u32(vec.size).raw(vec.astype(_width_dtype(width)).tobytes())

    def bits(self, vec) -> "Writer":
        vec = np.asarray(vec, dtype=np.uint8).ravel()
        return self.u32(vec.size).raw(np.packbits(vec, bitorder="little").tobytes())

    def trits(self, vec) -> "Writer":
        vec = np.asarray(vec, dtype=np.int64).ravel()
        self.u32(vec.size)
        pad = (-vec.size) % 4
        t = np.concatenate([vec + 1, np.zeros(pad, dtype=np.int64)]).astype(np.uint8)
        t = t.reshape(-1, 4)
        packed = t[:, 0] | (t[:, 1] << 2) | (t[:, 2] << 4) | (t[:, 3] << 6)
        return self.raw(packed.astype(np.uint8).tobytes())

    def matrix(self, mat, width: int) -> "Writer":
        mat = np.asarray(mat, dtype=np.int64)
        self.u32(mat.shape[0]).u32(mat.shape[1])
        return self.raw(mat.ravel().astype(_width_dtype(width)).tobytes())

    def params(self, p: Params) -> "Writer":
        self.text(p.name)
        for x in (p.n, p.q, p.ell, p.beta, p.kappa):
            self.u32(x)
        return self.text(p.commitment)

    def header(self, magic: bytes, p: Params) -> "Writer":
        return self.raw(magic.ljust(8, b"\0")[:8]).u8(VERSION).params(p)

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(bytes(data))
        self.pos = 0

    def raw(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise DecodeError("truncated input")
        out = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return out

    def u8(self) -> int:
        return self.raw(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.raw(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.raw(8))[0]

    def blob(self) -> bytes:
        return self.raw(self.u32())

    def text(self) -> str:
        try:
            return self.blob().decode()
        except UnicodeDecodeError as exc:
            raise DecodeError("bad text field") from exc

    def _residues(self, count: int, width: int, q: int | None) -> np.ndarray:
        if count > len(self.data):
            raise DecodeError("length prefix too large")
        out = np.frombuffer(self.raw(count * width), dtype=_width_dtype(width)).astype(np.int64)
        if q is not None and np.any(out >= q):
            raise DecodeError("residue out of range")
        return out

    def zq(self, width: int, q: int | None = None, expect: int | None = None) -> np.ndarray:
        count = self.u32()
        if expect is not None and count != expect:
            raise DecodeError(f"expected {expect} entries, got {count}")
        return self._residues(count, width, q)

    def bits(self, expect: int | None = None) -> np.ndarray:
        count = self.u32()
        if expect is not None and count != expect:
            raise DecodeError(f"expected {expect} bits, got {count}")
        if count > 8 * len(self.data):
            raise DecodeError("length prefix too large")
        raw = np.frombuffer(self.raw((count + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:count].astype(np.uint8)

    def trits(self, expect: int | None = None) -> np.ndarray:
        count = self.u32()
        if expect is not None and count != expect:
            raise DecodeError(f"expected {expect} trits, got {count}")
        if count > 4 * len(self.data):
            raise DecodeError("length prefix too large")
        raw = np.frombuffer(self.raw((count + 3) // 4), dtype=np.uint8)
        t = np.stack([(raw >> s) & 3 for s in (0, 2, 4, 6)], axis=1).ravel()[:count]
        if np.any(t == 3):
            raise DecodeError("invalid trit")
        return t.astype(np.int8) - 1

    def matrix(self, width: int, q: int | None = None, shape=None) -> np.ndarray:
        rows, cols = self.u32(), self.u32()
        if shape is not None and (rows, cols) != tuple(shape):
            raise DecodeError(f"expected matrix {shape}, got {(rows, cols)}")
        return self._residues(rows * cols, width, q).reshape(rows, cols)

    def params(self) -> Params:
        name = self.text()
        n, q, ell, beta, kappa = (self.u32() for _ in range(5))
        return Params(n=n, q=q, ell=ell, beta=beta, kappa=kappa, name=name, commitment=self.text())

    def header(self, magic: bytes) -> Params:
        got = self.raw(8)
        if got != magic.ljust(8, b"\0")[:8]:
            raise DecodeError(f"bad magic {got!r}, expected {magic!r}")
        version = self.u8()
        if version != VERSION:
            raise DecodeError(f"unsupported version {version}")
        return self.params()

    def done(self) -> None:
        if self.pos != len(self.data):
            raise DecodeError(f"{len(self.data) - self.pos} trailing bytes")


def digest(*parts: bytes) -> bytes:
    h = hashlib.sha3_256()
    for p in parts:
        h.update(len(p).to_bytes(8, "little"))
        h.update(p)
    return h.digest()

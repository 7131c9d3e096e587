"""Mod-q linear algebra, parameter profiles, decompositions and samplers.

Every Z_q object is a numpy ``int64`` array with entries in ``[0, q-1]``.
Binary vectors are ``uint8``; ternary vectors are ``int8``.
"""

from __future__ import annotations

import hashlib
import math
import secrets
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadProfile, DimensionMismatch, InvalidResidue, OutOfRange

COMMITMENTS = ("hash", "sis")


def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    r = math.isqrt(x)
    return all(x % f for f in range(3, r + 1, 2))


@dataclass(frozen=True)
class Params:
    """Scheme constants. Derived sizes are properties so they never drift.

    The decryption-gap inequalities are only enforced by :meth:`validate`
    so that tiny hand-checkable instances (q=5) stay constructible.
    """

    n: int
    q: int
    ell: int
    beta: int
    kappa: int
    name: str = "custom"
    commitment: str = "hash"

    @property
    def k(self) -> int:
        return (self.q - 1).bit_length()

    @property
    def nk(self) -> int:
        return self.n * self.k

    @property
    def m(self) -> int:
        return 2 * self.n * self.k

    @property
    def m_e(self) -> int:
        return 2 * (self.n + self.ell) * self.k

    @property
    def N(self) -> int:
        return 1 << self.ell

    @property
    def half_q(self) -> int:
        return self.q // 2

    @property
    def y_bound(self) -> int:
        """ceil(q/5), the decryption-noise bound carried by the trace proof."""
        return -(-self.q // 5)

    @property
    def residue_width(self) -> int:
        nbytes = ((self.q - 1).bit_length() + 7) // 8
        return next(w for w in (1, 2, 4, 8) if w >= nbytes)

    def validate(self) -> "Params":
        if not is_prime(self.q) or self.q < 3:
            raise BadProfile(f"q={self.q} is not an odd prime")
        if min(self.n, self.ell, self.kappa) < 1 or self.beta < 0:
            raise BadProfile("n, ell, kappa must be positive and beta non-negative")
        if self.beta * self.m_e >= self.y_bound:
            raise BadProfile(f"beta*m_E={self.beta * self.m_e} >= ceil(q/5)={self.y_bound}")
        if 2 * self.y_bound >= self.half_q:
            raise BadProfile("2*ceil(q/5) must stay below floor(q/2)")
        if self.commitment not in COMMITMENTS:
            raise BadProfile(f"unknown commitment {self.commitment!r}")
        return self

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)


# Toy profiles: correct but with NO cryptographic security.
PROFILES = {
    "T1": Params(n=4, q=12289, ell=3, beta=3, kappa=10, name="T1"),
    "T2": Params(n=8, q=12289, ell=4, beta=3, kappa=16, name="T2"),
}


def get_profile(name: str, **overrides) -> Params:
    try:
        p = PROFILES[name]
    except KeyError:
        raise BadProfile(f"unknown profile {name!r}; known: {sorted(PROFILES)}") from None
    if overrides:
        p = p.with_(**overrides)
    return p.validate()


# ---------------------------------------------------------------------------
# randomness


class Rng:
    """Seedable SHAKE-256 counter-mode generator.

    Each request hashes ``key || counter`` and advances the counter, so the
    output is a deterministic function of the seed and the call sequence.
    """

    def __init__(self, seed: int | bytes | str | None = None):
        if seed is None:
            seed = secrets.token_bytes(32)
        self.seed = seed
        if isinstance(seed, int):
            seed = b"int:" + str(seed).encode()
        elif isinstance(seed, str):
            seed = b"str:" + seed.encode()
        self._key = hashlib.sha3_256(b"fdgs-rng" + seed).digest()
        self._ctr = 0

    def bytes(self, n: int) -> bytes:
        out = hashlib.shake_256(self._key + self._ctr.to_bytes(8, "little")).digest(n)
        self._ctr += 1
        return out

    def fork(self, label: str | bytes) -> "Rng":
        if isinstance(label, str):
            label = label.encode()
        return Rng(self.bytes(32) + label)

    def _words(self, count: int) -> np.ndarray:
        return np.frombuffer(self.bytes(8 * count), dtype="<u8")

    def integers(self, bound: int, size) -> np.ndarray:
        """Uniform integers in [0, bound) by masked rejection sampling."""
        if bound < 1:
            raise ValueError("bound must be positive")
        shape = (size,) if isinstance(size, int) else tuple(size)
        total = int(np.prod(shape, dtype=np.int64))
        if bound == 1 or total == 0:
            return np.zeros(shape, dtype=np.int64)
        mask = (1 << (bound - 1).bit_length()) - 1
        out = np.empty(0, dtype=np.int64)
        while out.size < total:
            need = total - out.size
            draw = (self._words(need + need // 2 + 8) & np.uint64(mask)).astype(np.int64)
            out = np.concatenate([out, draw[draw < bound][:need]])
        return out.reshape(shape)

    def randbelow(self, bound: int) -> int:
        return int(self.integers(bound, 1)[0])

    def bits(self, size) -> np.ndarray:
        return self.integers(2, size).astype(np.uint8)

    def bounded(self, beta: int, size) -> np.ndarray:
        """Uniform on [-beta, beta]; our instantiation of the noise distribution."""
        return self.integers(2 * beta + 1, size) - beta

    def permutation(self, n: int) -> np.ndarray:
        # argsort of 64-bit keys; ties have probability ~ n^2 / 2^65
        return np.argsort(self._words(n), kind="stable").astype(np.int64)


def sample_uniform_matrix(rng: Rng, rows: int, cols: int, q: int) -> np.ndarray:
    return rng.integers(q, (rows, cols))


def sample_uniform_bits(rng: Rng, size: int) -> np.ndarray:
    return rng.bits(size)


def sample_bounded(rng: Rng, beta: int, shape) -> np.ndarray:
    return rng.bounded(beta, shape)


# ---------------------------------------------------------------------------
# gadget matrix and binary decomposition


def gadget_matrix(params: Params) -> np.ndarray:
    n, k = params.n, params.k
    row = 1 << np.arange(k, dtype=np.int64)
    return np.kron(np.eye(n, dtype=np.int64), row) % params.q


def bin_decompose(v, params: Params) -> np.ndarray:
    """LSB-first, k bits per coordinate, so that ``G @ bin(v) == v``."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape[-1] != params.n:
        raise DimensionMismatch(f"expected length {params.n}, got {v.shape[-1]}")
    if np.any(v < 0) or np.any(v >= params.q):
        raise InvalidResidue("entries must lie in [0, q-1]")
    shifts = np.arange(params.k, dtype=np.int64)
    bits = (v[..., :, None] >> shifts) & 1
    return bits.reshape(*v.shape[:-1], params.nk).astype(np.uint8)


def bin_compose(bits, params: Params) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    w = 1 << np.arange(params.k, dtype=np.int64)
    return (bits.reshape(*bits.shape[:-1], params.n, params.k) @ w) % params.q


# ---------------------------------------------------------------------------
# bounded-integer decomposition


def delta(bound: int) -> int:
    return bound.bit_length()


def decomp_sequence(bound: int) -> list[int]:
    """B_j = floor((B + 2^(j-1)) / 2^j) for j = 1..delta_B; sums to B."""
    if bound < 1:
        raise OutOfRange("bound must be >= 1")
    return [(bound + (1 << (j - 1))) >> j for j in range(1, delta(bound) + 1)]


def int_decompose(v: int, bound: int) -> np.ndarray:
    seq = decomp_sequence(bound)
    if abs(v) > bound:
        raise OutOfRange(f"|{v}| > {bound}")
    rem = abs(v)
    out = np.zeros(len(seq), dtype=np.int8)
    for j, bj in enumerate(seq):
        if rem >= bj:
            out[j] = 1
            rem -= bj
    return -out if v < 0 else out


def int_decompose_vec(vec, bound: int) -> np.ndarray:
    """Vectorised :func:`int_decompose`; coordinate blocks laid out contiguously."""
    vec = np.asarray(vec, dtype=np.int64).ravel()
    if np.any(np.abs(vec) > bound):
        raise OutOfRange(f"entry exceeds bound {bound}")
    seq = decomp_sequence(bound)
    rem = np.abs(vec)
    digits = np.zeros((vec.size, len(seq)), dtype=np.int8)
    for j, bj in enumerate(seq):
        take = rem >= bj
        digits[take, j] = 1
        rem = rem - bj * take
    digits[vec < 0] *= -1
    return digits.ravel()


def decomp_matrix(rows: int, bound: int) -> np.ndarray:
    seq = np.array(decomp_sequence(bound), dtype=np.int64)
    return np.kron(np.eye(rows, dtype=np.int64), seq)


# ---------------------------------------------------------------------------
# misc mod-q helpers


def centered(x, q: int) -> np.ndarray:
    """Representatives in (-q/2, q/2]."""
    x = np.asarray(x, dtype=np.int64) % q
    return np.where(x > q // 2, x - q, x)


def inf_norm(x) -> int:
    x = np.asarray(x)
    return int(np.abs(x).max()) if x.size else 0


def solve_mod_q(M: np.ndarray, u: np.ndarray, q: int) -> np.ndarray | None:
    """One solution of ``M z = u (mod q)`` for prime q, or None if inconsistent.

    Free variables are set to zero. All-zero columns are skipped up front,
    which matters for instances padded with dummy coordinates.
    """
    M = np.asarray(M, dtype=np.int64) % q
    u = np.asarray(u, dtype=np.int64) % q
    live = np.flatnonzero(M.any(axis=0))
    aug = np.concatenate([M[:, live], u[:, None]], axis=1)
    rows, cols = aug.shape[0], live.size
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(aug[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            aug[[r, p]] = aug[[p, r]]
        aug[r] = (aug[r] * pow(int(aug[r, c]), -1, q)) % q
        col = aug[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            aug[hit] = (aug[hit] - np.outer(col[hit], aug[r])) % q
        pivots.append(c)
        r += 1
    if np.any(aug[r:, -1]):
        return None
    z = np.zeros(M.shape[1], dtype=np.int64)
    for i, c in enumerate(pivots):
        z[live[c]] = aug[i, -1]
    return z

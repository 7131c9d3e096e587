"""Multi-bit Regev encryption arranged for Naor-Yung double encryption."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import Reader, Writer
from .errors import DimensionMismatch
from .lattice import Params, Rng, centered, sample_bounded, sample_uniform_bits, sample_uniform_matrix


@dataclass(frozen=True)
class TracingPublicKey:
    B: np.ndarray   # n x m_E
    P1: np.ndarray  # ell x m_E
    P2: np.ndarray

    def encode(self, out: Writer, params: Params) -> Writer:
        w = params.residue_width
        return out.matrix(self.B, w).matrix(self.P1, w).matrix(self.P2, w)

    @classmethod
    def decode(cls, r: Reader, params: Params) -> "TracingPublicKey":
        w, q = params.residue_width, params.q
        B = r.matrix(w, q, (params.n, params.m_e))
        P1 = r.matrix(w, q, (params.ell, params.m_e))
        P2 = r.matrix(w, q, (params.ell, params.m_e))
        return cls(B, P1, P2)


@dataclass(frozen=True)
class TracingKeys:
    """tpk = (B, P1, P2), tsk = (S1, E1). (S2, E2) are kept only for tests."""

    tpk: TracingPublicKey
    S1: np.ndarray  # n x ell
    E1: np.ndarray  # ell x m_E
    S2: np.ndarray | None = None
    E2: np.ndarray | None = None


def tm_keygen(params: Params, seed=None, keep_second: bool = False) -> TracingKeys:
    rng = seed if isinstance(seed, Rng) else Rng(seed)
    n, ell, me, q = params.n, params.ell, params.m_e, params.q
    B = sample_uniform_matrix(rng, n, me, q)
    S = [sample_bounded(rng, params.beta, (n, ell)) for _ in range(2)]
    E = [sample_bounded(rng, params.beta, (ell, me)) for _ in range(2)]
    P = [(s.T @ B + e) % q for s, e in zip(S, E)]
    tpk = TracingPublicKey(B, P[0], P[1])
    if keep_second:
        return TracingKeys(tpk, S[0], E[0], S[1], E[1])
    return TracingKeys(tpk, S[0], E[0])


@dataclass(frozen=True)
class Ciphertext:
    c1: np.ndarray  # n
    c2: np.ndarray  # ell


@dataclass(frozen=True)
class CiphertextPair:
    first: Ciphertext
    second: Ciphertext

    def __iter__(self):
        return iter((self.first, self.second))

    def encode(self, out: Writer, params: Params) -> Writer:
        w = params.residue_width
        for c in self:
            out.zq(c.c1, w).zq(c.c2, w)
        return out

    @classmethod
    def decode(cls, r: Reader, params: Params) -> "CiphertextPair":
        w, q = params.residue_width, params.q
        cts = [Ciphertext(r.zq(w, q, params.n), r.zq(w, q, params.ell)) for _ in range(2)]
        return cls(*cts)

    def __eq__(self, other) -> bool:
        return isinstance(other, CiphertextPair) and all(
            np.array_equal(a.c1, b.c1) and np.array_equal(a.c2, b.c2) for a, b in zip(self, other))


def encrypt(B, P, msg, r, params: Params) -> Ciphertext:
    return Ciphertext(B @ r % params.q, (P @ r + params.half_q * msg) % params.q)


def encrypt_pair(tpk: TracingPublicKey, msg, params: Params, seed=None, r1=None, r2=None):
    """Encrypt ``msg`` under P1 and P2. Returns (pair, r1, r2)."""
    msg = np.asarray(msg, dtype=np.int64)
    if msg.shape != (params.ell,):
        raise DimensionMismatch(f"message must have {params.ell} bits")
    rng = seed if isinstance(seed, Rng) else Rng(seed)
    r1 = sample_uniform_bits(rng, params.m_e) if r1 is None else np.asarray(r1, dtype=np.uint8)
    r2 = sample_uniform_bits(rng, params.m_e) if r2 is None else np.asarray(r2, dtype=np.uint8)
    c1 = encrypt(tpk.B, tpk.P1, msg, r1.astype(np.int64), params)
    c2 = encrypt(tpk.B, tpk.P2, msg, r2.astype(np.int64), params)
    return CiphertextPair(c1, c2), r1, r2


def decryption_noise(S, ct: Ciphertext, params: Params) -> np.ndarray:
    """Centered c2 - S^T c1."""
    return centered(ct.c2 - S.T @ ct.c1, params.q)


def decrypt(S, ct: Ciphertext, params: Params) -> np.ndarray:
    e = decryption_noise(S, ct, params)
    return (4 * np.abs(e) >= params.q).astype(np.uint8)

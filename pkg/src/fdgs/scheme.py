"""Fully dynamic group signatures with deniability, plus their file formats.

Identities are integers ``uid`` in [0, N); their ell-bit encodings are
most-significant-bit first. Algorithms that may legitimately fail return a
falsy :class:`Bottom` carrying the reason instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import relations as rel
from .encoding import Reader, Writer, digest
from .errors import (DecodeError, GroupFull, InvalidKey, InvalidWitness, ResampleLimit,
                     StaleWitness, UnknownMember)
from .lattice import Params, Rng, bin_decompose, get_profile
from .merkle import (HashKey, MembershipWitness, MerkleTree, decode_snapshot, encode_snapshot,
                     path_bits, t_acc, t_update, t_verify, t_witness)
from .regev import CiphertextPair, TracingKeys, TracingPublicKey, decrypt, encrypt_pair, tm_keygen
from .stern import CommitmentKey, NizkProof, expected_proof_nbytes, fs_prove, fs_verify

MAGIC = {
    "pp": b"FDGS-PP", "gpk": b"FDGS-GPK", "msk": b"FDGS-MSK", "reg": b"FDGS-REG",
    "tpk": b"FDGS-TPK", "tsk": b"FDGS-TSK", "ukey": b"FDGS-UK", "gsk": b"FDGS-GSK",
    "info": b"FDGS-INF", "sig": b"FDGS-SIG", "trace": b"FDGS-TRC", "denial": b"FDGS-DNY",
}


def _rng(seed) -> Rng:
    return seed if isinstance(seed, Rng) else Rng(seed)


@dataclass(frozen=True)
class Bottom:
    """The failure symbol; always falsy."""

    reason: str

    def __bool__(self) -> bool:
        return False


def uid_bits(uid: int, params: Params) -> np.ndarray:
    return path_bits(uid, params.ell)


def bits_uid(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def _signed(a, params: Params) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64) % params.q
    return np.where(a > params.q // 2, a - params.q, a)


# ---------------------------------------------------------------------------
# public parameters and keys


@dataclass(frozen=True)
class PublicParams:
    params: Params
    key: HashKey
    com_seed: bytes

    @cached_property
    def ck(self) -> CommitmentKey:
        return CommitmentKey(self.com_seed, self.params)

    def encode_body(self, out: Writer) -> Writer:
        return out.matrix(self.key.A, self.params.residue_width).blob(self.com_seed)

    @classmethod
    def decode_body(cls, r: Reader, params: Params) -> "PublicParams":
        A = r.matrix(params.residue_width, params.q, (params.n, params.m))
        return cls(params, HashKey(A, params), r.blob())

    def to_bytes(self) -> bytes:
        return self.encode_body(Writer().header(MAGIC["pp"], self.params)).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "PublicParams":
        r = Reader(data)
        p = r.header(MAGIC["pp"]).validate()
        out = cls.decode_body(r, p)
        r.done()
        return out


def g_setup(profile: str | Params = "T1", seed=None) -> PublicParams:
    params = get_profile(profile) if isinstance(profile, str) else profile.validate()
    rng = _rng(seed)
    A = rng.fork("hash-key").integers(params.q, (params.n, params.m))
    return PublicParams(params, HashKey(A, params), rng.fork("com-key").bytes(32))


@dataclass(frozen=True)
class GroupPublicKey:
    pp: PublicParams
    mpk: np.ndarray
    tpk: TracingPublicKey

    @property
    def params(self) -> Params:
        return self.pp.params

    def to_bytes(self) -> bytes:
        out = self.pp.encode_body(Writer().header(MAGIC["gpk"], self.params))
        out.zq(self.mpk, self.params.residue_width)
        return self.tpk.encode(out, self.params).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GroupPublicKey":
        r = Reader(data)
        p = r.header(MAGIC["gpk"]).validate()
        pp = PublicParams.decode_body(r, p)
        mpk = r.zq(p.residue_width, p.q, p.n)
        tpk = TracingPublicKey.decode(r, p)
        r.done()
        return cls(pp, mpk, tpk)

    @cached_property
    def digest(self) -> bytes:
        return digest(b"gpk", self.to_bytes())


@dataclass
class RegTable:
    """reg[i][1] is ``keys[i]``; reg[i][2] is ``epochs[i]`` (0 = never joined)."""

    keys: np.ndarray    # N x nk
    epochs: np.ndarray  # N

    @classmethod
    def empty(cls, params: Params) -> "RegTable":
        return cls(np.zeros((params.N, params.nk), dtype=np.uint8), np.zeros(params.N, dtype=np.int64))

    def registered(self, uid: int) -> bool:
        return bool(self.keys[uid].any())

    def to_bytes(self, params: Params) -> bytes:
        out = Writer().header(MAGIC["reg"], params)
        for key, ep in zip(self.keys, self.epochs):
            out.bits(key).u64(int(ep))
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, params: Params | None = None) -> "RegTable":
        r = Reader(data)
        p = r.header(MAGIC["reg"])
        if params is not None and p != params:
            raise DecodeError("registration table belongs to other parameters")
        keys, epochs = [], []
        for _ in range(p.N):
            keys.append(r.bits(p.nk))
            epochs.append(r.u64())
        r.done()
        return cls(np.array(keys, dtype=np.uint8), np.array(epochs, dtype=np.int64))


@dataclass
class GroupInfo:
    epoch: int
    root: np.ndarray | None
    witnesses: dict = field(default_factory=dict)

    def to_bytes(self, params: Params) -> bytes:
        out = Writer().header(MAGIC["info"], params).u64(self.epoch)
        out.u8(self.root is not None)
        if self.root is not None:
            out.bits(self.root)
        out.u32(len(self.witnesses))
        for uid in sorted(self.witnesses):
            out.u32(uid)
            self.witnesses[uid].encode(out)
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, params: Params | None = None) -> "GroupInfo":
        r = Reader(data)
        p = r.header(MAGIC["info"])
        if params is not None and p != params:
            raise DecodeError("group information belongs to other parameters")
        epoch = r.u64()
        root = r.bits(p.nk) if r.u8() else None
        wits = {}
        for _ in range(r.u32()):
            uid = r.u32()
            w = MembershipWitness.decode(r, p)
            if uid >= p.N or bits_uid(w.bits) != uid:
                raise DecodeError("witness path does not match its uid")
            wits[uid] = w
        r.done()
        return cls(epoch, root, wits)

    def digest(self, params: Params) -> bytes:
        return digest(b"info", self.to_bytes(params))


@dataclass
class GMState:
    pp: PublicParams
    msk: np.ndarray
    tree: MerkleTree
    reg: RegTable
    counter: int = 0
    epoch: int = 0

    @property
    def params(self) -> Params:
        return self.pp.params

    def to_bytes(self) -> bytes:
        """The msk file: secret key, counter, epoch and the tree snapshot (reg is stored apart)."""
        out = Writer().header(MAGIC["msk"], self.params).bits(self.msk)
        out.u32(self.counter).u64(self.epoch)
        return out.blob(encode_snapshot(self.tree)).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, pp: PublicParams, reg: RegTable) -> "GMState":
        r = Reader(data)
        p = r.header(MAGIC["msk"])
        if p != pp.params:
            raise DecodeError("manager state belongs to other parameters")
        msk = r.bits(p.m)
        counter, epoch = r.u32(), r.u64()
        tree = decode_snapshot(r.blob(), pp.key)
        r.done()
        return cls(pp, msk, tree, reg, counter, epoch)


@dataclass(frozen=True)
class TracingSecret:
    S1: np.ndarray
    E1: np.ndarray

    def to_bytes(self, params: Params) -> bytes:
        w = params.residue_width
        return (Writer().header(MAGIC["tsk"], params)
                .matrix(self.S1 % params.q, w).matrix(self.E1 % params.q, w).getvalue())

    @classmethod
    def from_bytes(cls, data: bytes, params: Params | None = None) -> "TracingSecret":
        r = Reader(data)
        p = r.header(MAGIC["tsk"])
        if params is not None and p != params:
            raise DecodeError("tracing key belongs to other parameters")
        S1 = r.matrix(p.residue_width, p.q, (p.n, p.ell))
        E1 = r.matrix(p.residue_width, p.q, (p.ell, p.m_e))
        r.done()
        return cls(_signed(S1, p), _signed(E1, p))


def tpk_to_bytes(tpk: TracingPublicKey, params: Params) -> bytes:
    return tpk.encode(Writer().header(MAGIC["tpk"], params), params).getvalue()


def tpk_from_bytes(data: bytes, params: Params | None = None) -> TracingPublicKey:
    r = Reader(data)
    p = r.header(MAGIC["tpk"])
    if params is not None and p != params:
        raise DecodeError("tracing public key belongs to other parameters")
    tpk = TracingPublicKey.decode(r, p)
    r.done()
    return tpk


def gkgen_tm(pp: PublicParams, seed=None) -> tuple[TracingPublicKey, TracingSecret]:
    keys: TracingKeys = tm_keygen(pp.params, _rng(seed))
    return keys.tpk, TracingSecret(keys.S1, keys.E1)


def gkgen_gm(pp: PublicParams, tpk: TracingPublicKey, seed=None) -> tuple[GroupPublicKey, GMState, GroupInfo]:
    p = pp.params
    msk = _rng(seed).bits(p.m)
    mpk = pp.key.A @ msk % p.q
    tree, _ = t_acc(pp.key, np.zeros((p.N, p.nk), dtype=np.uint8))
    gm = GMState(pp, msk, tree, RegTable.empty(p))
    return GroupPublicKey(pp, mpk, tpk), gm, GroupInfo(0, None, {})


def gkgen(pp: PublicParams, seed=None):
    """(gpk, GM state, tracing secret, info_0)."""
    rng = _rng(seed)
    tpk, tsk = gkgen_tm(pp, rng.fork("tm"))
    gpk, gm, info = gkgen_gm(pp, tpk, rng.fork("gm"))
    return gpk, gm, tsk, info


# ---------------------------------------------------------------------------
# users


@dataclass(frozen=True)
class UserKey:
    x: np.ndarray  # usk
    p: np.ndarray  # upk

    def to_bytes(self, params: Params) -> bytes:
        return Writer().header(MAGIC["ukey"], params).bits(self.x).bits(self.p).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, params: Params | None = None) -> "UserKey":
        r = Reader(data)
        p = r.header(MAGIC["ukey"])
        if params is not None and p != params:
            raise DecodeError("user key belongs to other parameters")
        out = cls(r.bits(p.m), r.bits(p.nk))
        r.done()
        return out


@dataclass(frozen=True)
class GroupSigningKey:
    uid: int
    p: np.ndarray
    x: np.ndarray

    def bits(self, params: Params) -> np.ndarray:
        return uid_bits(self.uid, params)

    def to_bytes(self, params: Params) -> bytes:
        return Writer().header(MAGIC["gsk"], params).u32(self.uid).bits(self.p).bits(self.x).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, params: Params | None = None) -> "GroupSigningKey":
        r = Reader(data)
        p = r.header(MAGIC["gsk"])
        if params is not None and p != params:
            raise DecodeError("signing key belongs to other parameters")
        uid = r.u32()
        if uid >= p.N:
            raise DecodeError("uid out of range")
        out = cls(uid, r.bits(p.nk), r.bits(p.m))
        r.done()
        return out


def ukgen(pp: PublicParams, seed=None, max_tries: int = 64) -> UserKey:
    """x uniform in {0,1}^m, p = bin(A x); a zero p is resampled."""
    p, rng = pp.params, _rng(seed)
    for _ in range(max_tries):
        x = rng.bits(p.m)
        upk = bin_decompose(pp.key.A @ x % p.q, p)
        if upk.any():
            return UserKey(x, upk)
    raise ResampleLimit(f"no non-zero public key after {max_tries} samples")


def join_issue(gm: GMState, upk) -> int:
    """Register ``upk`` in the next free slot and return its uid."""
    p = gm.params
    upk = np.asarray(upk, dtype=np.uint8)
    if upk.shape != (p.nk,) or not np.all(upk <= 1):
        raise InvalidKey(f"public key must be a binary vector of length {p.nk}")
    if not upk.any():
        raise InvalidKey("public key is zero")
    if gm.counter >= p.N:
        raise GroupFull(f"all {p.N} slots are taken")
    uid = gm.counter
    t_update(gm.tree, uid_bits(uid, p), upk)
    gm.reg.keys[uid] = upk
    gm.reg.epochs[uid] = gm.epoch + 1
    gm.counter += 1
    return uid


def join(gm: GMState, ukey: UserKey) -> GroupSigningKey:
    """Join-Issue collapsed into one call; the user already holds (x, p)."""
    return GroupSigningKey(join_issue(gm, ukey.p), ukey.p, ukey.x)


def g_update(gm: GMState, revoke=()) -> GroupInfo:
    """Zero the leaves of revoked keys, advance the epoch and publish fresh witnesses."""
    p = gm.params
    slots = []
    for key in revoke:
        key = np.asarray(key, dtype=np.uint8)
        hits = [i for i in range(gm.counter) if np.array_equal(gm.reg.keys[i], key)]
        if not hits or not key.any():
            raise UnknownMember("revoked key is not registered")
        slots.extend(hits)
    zero = np.zeros(p.nk, dtype=np.uint8)
    for i in slots:
        t_update(gm.tree, uid_bits(i, p), zero)
    gm.epoch += 1
    wits = {j: t_witness(gm.tree, j) for j in range(p.N) if gm.tree.leaf(j).any()}
    return GroupInfo(gm.epoch, gm.tree.root, wits)


def revoke_uids(gm: GMState, uids) -> list:
    """Public keys for a list of uids, for callers that think in identities."""
    for u in uids:
        if not 0 <= u < gm.counter:
            raise UnknownMember(f"uid {u} never joined")
    return [gm.reg.keys[u].copy() for u in uids]


def is_active(info: GroupInfo, reg: RegTable, uid: int) -> bool:
    return uid in info.witnesses and reg.registered(uid)


# ---------------------------------------------------------------------------
# signatures


@dataclass
class Signature:
    proof: NizkProof
    cts: CiphertextPair

    def to_bytes(self, pp: PublicParams) -> bytes:
        out = Writer().header(MAGIC["sig"], pp.params)
        self.cts.encode(out, pp.params)
        return self.proof.encode(out, rel.GsLayout(pp.params), pp.ck).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, pp: PublicParams) -> "Signature":
        r = Reader(data)
        if r.header(MAGIC["sig"]) != pp.params:
            raise DecodeError("signature belongs to other parameters")
        cts = CiphertextPair.decode(r, pp.params)
        proof = NizkProof.decode(r, rel.GsLayout(pp.params), pp.ck, pp.params.kappa)
        r.done()
        return cls(proof, cts)


def sign_context(gpk: GroupPublicKey, root, message: bytes, cts: CiphertextPair) -> bytes:
    p = gpk.params
    w = p.residue_width
    out = Writer().text("FDGS-sign").blob(message).matrix(gpk.pp.key.A, w).bits(root)
    out.matrix(gpk.tpk.B, w).matrix(gpk.tpk.P1, w).matrix(gpk.tpk.P2, w)
    return cts.encode(out, p).getvalue()


def gs_instance(gpk: GroupPublicKey, root, cts: CiphertextPair):
    return rel.build_gs_instance(gpk.pp.key, root, gpk.tpk, cts, gpk.params, gpk.pp.ck)


def sign(gpk: GroupPublicKey, gsk: GroupSigningKey, info: GroupInfo, message: bytes, seed=None):
    p = gpk.params
    wit = info.witnesses.get(gsk.uid)
    if wit is None or info.root is None:
        return Bottom("NoWitness")
    if not np.array_equal(wit.bits, gsk.bits(p)) or not t_verify(gpk.pp.key, info.root, gsk.p, wit):
        raise StaleWitness(f"witness for uid {gsk.uid} does not verify against epoch {info.epoch}")
    rng = _rng(seed)
    cts, r1, r2 = encrypt_pair(gpk.tpk, gsk.bits(p), p, rng.fork("enc"))
    inst = gs_instance(gpk, info.root, cts)
    z = rel.pack_gs_witness(rel.make_gs_witness(gpk.pp.key, wit, gsk.x, gsk.p, r1, r2), p)
    proof = fs_prove(inst, z, sign_context(gpk, info.root, message, cts), rng.fork("nizk"))
    return Signature(proof, cts)


def verify(gpk: GroupPublicKey, info: GroupInfo, message: bytes, sig: Signature) -> bool:
    if info.root is None or not isinstance(sig, Signature):
        return False
    inst = gs_instance(gpk, info.root, sig.cts)
    return fs_verify(inst, sig.proof, sign_context(gpk, info.root, message, sig.cts))


# ---------------------------------------------------------------------------
# tracing and denial


@dataclass
class TraceOutput:
    uid: int
    proof: NizkProof

    def to_bytes(self, params: Params, ck: CommitmentKey) -> bytes:
        out = Writer().header(MAGIC["trace"], params).u32(self.uid)
        return self.proof.encode(out, rel.trace_layout(params), ck).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, params: Params, ck: CommitmentKey) -> "TraceOutput":
        r = Reader(data)
        if r.header(MAGIC["trace"]) != params:
            raise DecodeError("trace proof belongs to other parameters")
        uid = r.u32()
        proof = NizkProof.decode(r, rel.trace_layout(params), ck, params.kappa)
        r.done()
        return cls(uid, proof)


@dataclass
class DenialProof:
    uid: int
    proof: NizkProof

    def to_bytes(self, params: Params, ck: CommitmentKey) -> bytes:
        out = Writer().header(MAGIC["denial"], params).u32(self.uid)
        return self.proof.encode(out, rel.denial_layout(params), ck).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, params: Params, ck: CommitmentKey) -> "DenialProof":
        r = Reader(data)
        if r.header(MAGIC["denial"]) != params:
            raise DecodeError("denial proof belongs to other parameters")
        uid = r.u32()
        proof = NizkProof.decode(r, rel.denial_layout(params), ck, params.kappa)
        r.done()
        return cls(uid, proof)


def _opening_context(tag: str, gpk: GroupPublicKey, info: GroupInfo, message: bytes,
                     sig: Signature, bits) -> bytes:
    p = gpk.params
    out = Writer().text(tag).raw(gpk.digest).raw(info.digest(p)).blob(message)
    return out.blob(sig.to_bytes(gpk.pp)).bits(bits).getvalue()


def trace(gpk: GroupPublicKey, tsk: TracingSecret, info: GroupInfo, reg: RegTable,
          message: bytes, sig: Signature, seed=None):
    p = gpk.params
    ct1 = sig.cts.first
    b_prime = decrypt(tsk.S1, ct1, p)
    uid = bits_uid(b_prime)
    if uid not in info.witnesses:
        return Bottom("NoWitness")
    if not reg.registered(uid):
        return Bottom("UnregisteredSlot")
    y = rel.trace_noise(tsk.S1, ct1, b_prime, p)
    try:
        z = rel.pack_trace_witness(tsk.S1, tsk.E1, y, p)
    except InvalidWitness:
        return Bottom("DecryptionNoise")
    inst = rel.build_trace_instance(gpk.tpk, ct1, b_prime, p, gpk.pp.ck)
    ctx = _opening_context("FDGS-trace", gpk, info, message, sig, b_prime)
    return TraceOutput(uid, fs_prove(inst, z, ctx, _rng(seed)))


def judge(gpk: GroupPublicKey, uid: int, info: GroupInfo, out: TraceOutput, message: bytes,
          sig: Signature) -> bool:
    p = gpk.params
    if not 0 <= uid < p.N or out.uid != uid:
        return False
    bits = uid_bits(uid, p)
    inst = rel.build_trace_instance(gpk.tpk, sig.cts.first, bits, p, gpk.pp.ck)
    return fs_verify(inst, out.proof, _opening_context("FDGS-trace", gpk, info, message, sig, bits))


def d_trace(gpk: GroupPublicKey, tsk: TracingSecret, info: GroupInfo, reg: RegTable, uid_prime: int,
            message: bytes, sig: Signature, seed=None):
    """Prove that ``uid_prime`` did not produce ``sig``; Bottom for the true signer."""
    p = gpk.params
    if not 0 <= uid_prime < p.N:
        return Bottom("BadIdentity")
    if not verify(gpk, info, message, sig):
        return Bottom("InvalidSignature")
    ct1 = sig.cts.first
    b_prime = decrypt(tsk.S1, ct1, p).astype(np.int64)
    other = uid_bits(uid_prime, p).astype(np.int64)
    b = b_prime - other
    if not b.any():
        return Bottom("TrueSigner")
    y = rel.trace_noise(tsk.S1, ct1, b_prime, p)
    try:
        z = rel.pack_denial_witness(tsk.S1, tsk.E1, y, b, p)
    except InvalidWitness:
        return Bottom("DecryptionNoise")
    inst = rel.build_denial_instance(gpk.tpk, ct1, other, p, gpk.pp.ck)
    ctx = _opening_context("FDGS-deny", gpk, info, message, sig, other)
    return DenialProof(uid_prime, fs_prove(inst, z, ctx, _rng(seed)))


def d_judge(gpk: GroupPublicKey, uid_prime: int, info: GroupInfo, out: DenialProof, message: bytes,
            sig: Signature) -> bool:
    p = gpk.params
    if not 0 <= uid_prime < p.N or out.uid != uid_prime:
        return False
    if not verify(gpk, info, message, sig):
        return False
    other = uid_bits(uid_prime, p)
    inst = rel.build_denial_instance(gpk.tpk, sig.cts.first, other, p, gpk.pp.ck)
    return fs_verify(inst, out.proof, _opening_context("FDGS-deny", gpk, info, message, sig, other))


# ---------------------------------------------------------------------------
# size accounting


def signature_nbytes_formula(pp: PublicParams) -> float:
    """Expected |sig| in bytes from the closed-form D and uniform challenges."""
    p = pp.params
    header = len(Writer().header(MAGIC["sig"], p).getvalue())
    cts = 2 * ((4 + p.n * p.residue_width) + (4 + p.ell * p.residue_width))
    return header + cts + expected_proof_nbytes(rel.GsLayout(p), pp.ck, p.kappa)

"""Relation-generic Stern-type argument, Fiat-Shamir wrapper, simulator and extractor.

A relation supplies a :class:`Layout` (dimension, VALID membership and the
permutation action Gamma_eta) together with a public pair (M, u). The
engine proves knowledge of z in VALID with M z = u (mod q).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .encoding import Reader, Writer, bits_nbytes, digest, trits_nbytes, zq_nbytes
from .errors import DecodeError, ExtractionFailed, FdgsError, InstanceUnsatisfiable, WitnessRejected
from .lattice import Params, Rng, solve_mod_q

CHALLENGES = (1, 2, 3)


# ---------------------------------------------------------------------------
# commitments


class CommitmentKey:
    """COM(payload; rho).

    ``hash``: SHA3-256(key || len || payload || rho), 32-byte rho.
    ``sis``: A_com * bits(len || payload) + B_com * rho mod q with rho in {0,1}^m.
    The columns of A_com are expanded from the key in fixed blocks, so any
    payload length is supported.
    """

    BLOCK = 4096

    def __init__(self, seed: bytes, params: Params):
        self.seed = bytes(seed)
        self.params = params
        self.kind = params.commitment
        self._blocks: list[np.ndarray] = []
        if self.kind == "sis":
            self._B = Rng(self.seed + b"/B").integers(params.q, (params.n, params.m))

    @property
    def rho_len(self) -> int:
        return 32 if self.kind == "hash" else (self.params.m + 7) // 8

    @property
    def digest_len(self) -> int:
        return 32 if self.kind == "hash" else self.params.n * self.params.residue_width

    def _columns(self, count: int) -> np.ndarray:
        while len(self._blocks) * self.BLOCK < count:
            i = len(self._blocks)
            rng = Rng(self.seed + b"/A/" + i.to_bytes(4, "little"))
            self._blocks.append(rng.integers(self.params.q, (self.params.n, self.BLOCK)))
        return np.concatenate(self._blocks, axis=1)[:, :count]

    def commit(self, payload: bytes, rho: bytes) -> bytes:
        if len(rho) != self.rho_len:
            raise ValueError(f"rho must be {self.rho_len} bytes")
        framed = len(payload).to_bytes(8, "little") + payload
        if self.kind == "hash":
            return hashlib.sha3_256(b"fdgs-com" + self.seed + framed + rho).digest()
        p = self.params
        bits = np.unpackbits(np.frombuffer(framed, dtype=np.uint8), bitorder="little").astype(np.int64)
        r = np.unpackbits(np.frombuffer(rho, dtype=np.uint8), bitorder="little")[: p.m].astype(np.int64)
        value = (self._columns(bits.size) @ bits + self._B @ r) % p.q
        return value.astype(f"<u{p.residue_width}").tobytes()


# ---------------------------------------------------------------------------
# permutation descriptors and relation layouts


def _index_width(size: int) -> int:
    return 2 if size <= 1 << 16 else 4


@dataclass(frozen=True)
class Eta:
    bits: np.ndarray
    perms: tuple

    def encode(self, out: Writer) -> Writer:
        out.bits(self.bits)
        for perm in self.perms:
            out.zq(perm, _index_width(perm.size))
        return out

    def to_bytes(self) -> bytes:
        return self.encode(Writer()).getvalue()

    def __eq__(self, other) -> bool:
        return (isinstance(other, Eta) and np.array_equal(self.bits, other.bits)
                and len(self.perms) == len(other.perms)
                and all(np.array_equal(a, b) for a, b in zip(self.perms, other.perms)))


class Layout:
    """Shape of VALID and of the permutation set S-bar.

    Subclasses set ``dim``, ``eta_bits`` and ``eta_perms`` and implement
    :meth:`gamma_index`, :meth:`is_valid` and :meth:`sample_valid`.
    ``Gamma_eta(t) = t[gamma_index(eta)]``.
    """

    dim: int
    eta_bits: int = 0
    eta_perms: tuple = ()
    ternary: bool = False

    def sample_eta(self, rng: Rng) -> Eta:
        return Eta(rng.bits(self.eta_bits), tuple(rng.permutation(s) for s in self.eta_perms))

    def decode_eta(self, r: Reader) -> Eta:
        bits = r.bits(expect=self.eta_bits)
        perms = []
        for size in self.eta_perms:
            perm = r.zq(_index_width(size), size, expect=size)
            if np.unique(perm).size != size:
                raise DecodeError("not a permutation")
            perms.append(perm)
        return Eta(bits, tuple(perms))

    def eta_nbytes(self) -> int:
        return bits_nbytes(self.eta_bits) + sum(zq_nbytes(s, _index_width(s)) for s in self.eta_perms)

    def witness_nbytes(self) -> int:
        return trits_nbytes(self.dim) if self.ternary else bits_nbytes(self.dim)

    def gamma_index(self, eta: Eta) -> np.ndarray:
        raise NotImplementedError

    def is_valid(self, z) -> bool:
        raise NotImplementedError

    def sample_valid(self, rng: Rng) -> np.ndarray:
        raise NotImplementedError

    def apply(self, eta: Eta, t) -> np.ndarray:
        return np.asarray(t)[self.gamma_index(eta)]

    def invert(self, eta: Eta, t) -> np.ndarray:
        t = np.asarray(t)
        out = np.empty_like(t)
        out[self.gamma_index(eta)] = t
        return out


# ---------------------------------------------------------------------------
# instances


@dataclass
class SternInstance:
    M: np.ndarray
    u: np.ndarray
    layout: Layout
    ck: CommitmentKey
    params: Params
    label: bytes = b""
    _solution: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.M.shape != (self.u.size, self.layout.dim):
            raise ValueError(f"M is {self.M.shape}, expected ({self.u.size}, {self.layout.dim})")

    @property
    def D(self) -> int:
        return self.layout.dim

    @property
    def q(self) -> int:
        return self.params.q

    @cached_property
    def digest(self) -> bytes:
        w = self.params.residue_width
        pub = Writer().blob(self.label).matrix(self.M, w).zq(self.u, w).getvalue()
        return digest(b"fdgs-instance", pub)

    def satisfied_by(self, z) -> bool:
        z = np.asarray(z, dtype=np.int64)
        return z.shape == (self.D,) and np.array_equal(self.M @ (z % self.q) % self.q, self.u % self.q)

    def check(self, z) -> bool:
        return self.layout.is_valid(z) and self.satisfied_by(z)

    def particular_solution(self) -> np.ndarray:
        """Any z' in Z_q^D with M z' = u; cached."""
        if self._solution is None:
            sol = solve_mod_q(self.M, self.u, self.q)
            if sol is None:
                raise InstanceUnsatisfiable("M z = u has no solution mod q")
            self._solution = sol
        return self._solution


# ---------------------------------------------------------------------------
# one round


@dataclass(frozen=True)
class Commitment:
    c1: bytes
    c2: bytes
    c3: bytes

    def to_bytes(self) -> bytes:
        return self.c1 + self.c2 + self.c3


@dataclass(frozen=True)
class Response:
    """ch=1: (t_z, t_r, rho2, rho3); ch=2: (eta, z+r_z, rho1, rho3); ch=3: (eta, r_z, rho1, rho2)."""

    ch: int
    vec: np.ndarray
    rho_a: bytes
    rho_b: bytes
    t_z: np.ndarray | None = None
    eta: Eta | None = None

    def encode(self, out: Writer, layout: Layout, ck: CommitmentKey) -> Writer:
        out.u8(self.ch)
        if self.ch == 1:
            (out.trits if layout.ternary else out.bits)(self.t_z)
        else:
            self.eta.encode(out)
        out.zq(self.vec, ck.params.residue_width)
        return out.raw(self.rho_a).raw(self.rho_b)

    @classmethod
    def decode(cls, r: Reader, layout: Layout, ck: CommitmentKey) -> "Response":
        ch = r.u8()
        if ch not in CHALLENGES:
            raise DecodeError(f"bad challenge byte {ch}")
        t_z, eta = None, None
        if ch == 1:
            t_z = r.trits(layout.dim) if layout.ternary else r.bits(layout.dim)
        else:
            eta = layout.decode_eta(r)
        vec = r.zq(ck.params.residue_width, ck.params.q, layout.dim)
        return cls(ch, vec, r.raw(ck.rho_len), r.raw(ck.rho_len), t_z=t_z, eta=eta)


@dataclass
class ProverState:
    inst: SternInstance
    z: np.ndarray
    r_z: np.ndarray
    eta: Eta
    rho: tuple

    @property
    def D(self) -> int:
        return self.z.size


def _vec_bytes(v, inst: SternInstance) -> bytes:
    return Writer().zq(np.asarray(v) % inst.q, inst.params.residue_width).getvalue()


def _c1_payload(eta: Eta, v, inst: SternInstance) -> bytes:
    return eta.to_bytes() + _vec_bytes(v, inst)


def _commit_all(inst, eta, idx, c1_vec, r_z, masked, rho) -> Commitment:
    ck = inst.ck
    return Commitment(ck.commit(_c1_payload(eta, c1_vec, inst), rho[0]),
                      ck.commit(_vec_bytes(r_z[idx], inst), rho[1]),
                      ck.commit(_vec_bytes(masked[idx], inst), rho[2]))


def prove_round(inst: SternInstance, z, rng: Rng, check: bool = True) -> tuple[ProverState, Commitment]:
    z = np.asarray(z, dtype=np.int64)
    if check and not inst.check(z):
        raise WitnessRejected("witness is not in VALID or does not satisfy M z = u")
    q = inst.q
    r_z = rng.integers(q, inst.D)
    eta = inst.layout.sample_eta(rng)
    rho = tuple(rng.bytes(inst.ck.rho_len) for _ in range(3))
    idx = inst.layout.gamma_index(eta)
    cmt = _commit_all(inst, eta, idx, inst.M @ r_z % q, r_z, (z + r_z) % q, rho)
    return ProverState(inst, z, r_z, eta, rho), cmt


def respond(state: ProverState, ch: int) -> Response:
    q, lay = state.inst.q, state.inst.layout
    rho1, rho2, rho3 = state.rho
    if ch == 1:
        idx = lay.gamma_index(state.eta)
        return Response(1, state.r_z[idx], rho2, rho3, t_z=state.z[idx].astype(np.int8))
    if ch == 2:
        return Response(2, (state.z + state.r_z) % q, rho1, rho3, eta=state.eta)
    if ch == 3:
        return Response(3, state.r_z, rho1, rho2, eta=state.eta)
    raise ValueError(f"challenge must be 1, 2 or 3, got {ch}")


def _verify_round(inst: SternInstance, cmt: Commitment, ch: int, rsp: Response) -> bool:
    q, ck, lay, D = inst.q, inst.ck, inst.layout, inst.D
    if rsp.ch != ch or rsp.vec.shape != (D,):
        return False
    if ch == 1:
        t_z = np.asarray(rsp.t_z, dtype=np.int64)
        if t_z.shape != (D,) or not lay.is_valid(t_z):
            return False
        return (ck.commit(_vec_bytes(rsp.vec, inst), rsp.rho_a) == cmt.c2
                and ck.commit(_vec_bytes((t_z + rsp.vec) % q, inst), rsp.rho_b) == cmt.c3)
    idx = lay.gamma_index(rsp.eta)
    v = rsp.vec % q
    if ch == 2:
        target = (inst.M @ v - inst.u) % q
        return (ck.commit(_c1_payload(rsp.eta, target, inst), rsp.rho_a) == cmt.c1
                and ck.commit(_vec_bytes(v[idx], inst), rsp.rho_b) == cmt.c3)
    return (ck.commit(_c1_payload(rsp.eta, inst.M @ v % q, inst), rsp.rho_a) == cmt.c1
            and ck.commit(_vec_bytes(v[idx], inst), rsp.rho_b) == cmt.c2)


def verify_round(inst: SternInstance, cmt: Commitment, ch: int, rsp: Response) -> bool:
    """The three case checks. Malformed responses reject instead of raising."""
    try:
        return bool(_verify_round(inst, cmt, ch, rsp))
    except (FdgsError, ValueError, IndexError, TypeError, AttributeError):
        return False


# ---------------------------------------------------------------------------
# Fiat-Shamir


def fs_challenges(context: bytes, cmts, inst_digest: bytes, kappa: int) -> list[int]:
    """Unbiased map into {1,2,3}^kappa: bytes >= 243 are skipped, the rest give 5 trits."""
    seed = digest(b"fdgs-fs", context, b"".join(c.to_bytes() for c in cmts), inst_digest)
    out: list[int] = []
    length = kappa + 16
    while len(out) < kappa:
        out = []
        for byte in hashlib.shake_256(seed).digest(length):
            if byte >= 243:
                continue
            for _ in range(5):
                out.append(byte % 3 + 1)
                byte //= 3
            if len(out) >= kappa:
                break
        length *= 2
    return out[:kappa]


@dataclass
class NizkProof:
    commitments: list
    challenges: list
    responses: list

    @property
    def kappa(self) -> int:
        return len(self.commitments)

    def encode(self, out: Writer, layout: Layout, ck: CommitmentKey) -> Writer:
        out.u32(self.kappa)
        for cmt, rsp in zip(self.commitments, self.responses):
            out.raw(cmt.to_bytes())
            rsp.encode(out, layout, ck)
        return out

    def to_bytes(self, layout: Layout, ck: CommitmentKey) -> bytes:
        return self.encode(Writer(), layout, ck).getvalue()

    @classmethod
    def decode(cls, r: Reader, layout: Layout, ck: CommitmentKey, kappa: int | None = None) -> "NizkProof":
        count = r.u32()
        if kappa is not None and count != kappa:
            raise DecodeError(f"expected {kappa} repetitions, got {count}")
        dl = ck.digest_len
        cmts, rsps = [], []
        for _ in range(count):
            cmts.append(Commitment(r.raw(dl), r.raw(dl), r.raw(dl)))
            rsps.append(Response.decode(r, layout, ck))
        return cls(cmts, [x.ch for x in rsps], rsps)

    @classmethod
    def from_bytes(cls, data: bytes, layout: Layout, ck: CommitmentKey, kappa: int | None = None) -> "NizkProof":
        r = Reader(data)
        proof = cls.decode(r, layout, ck, kappa)
        r.done()
        return proof


def fs_prove(inst: SternInstance, z, context: bytes, rng: Rng, kappa: int | None = None) -> NizkProof:
    kappa = inst.params.kappa if kappa is None else kappa
    z = np.asarray(z, dtype=np.int64)
    if not inst.check(z):
        raise WitnessRejected("witness is not in VALID or does not satisfy M z = u")
    states, cmts = [], []
    for i in range(kappa):
        st, cmt = prove_round(inst, z, rng.fork(f"round{i}"), check=False)
        states.append(st)
        cmts.append(cmt)
    chs = fs_challenges(context, cmts, inst.digest, kappa)
    return NizkProof(cmts, chs, [respond(st, ch) for st, ch in zip(states, chs)])


def fs_verify(inst: SternInstance, proof: NizkProof, context: bytes, kappa: int | None = None) -> bool:
    kappa = inst.params.kappa if kappa is None else kappa
    if proof.kappa != kappa or len(proof.responses) != kappa or len(proof.challenges) != kappa:
        return False
    if list(proof.challenges) != fs_challenges(context, proof.commitments, inst.digest, kappa):
        return False
    return all(verify_round(inst, c, ch, r)
               for c, ch, r in zip(proof.commitments, proof.challenges, proof.responses))


# ---------------------------------------------------------------------------
# size accounting


def response_nbytes(layout: Layout, ck: CommitmentKey, ch: int) -> int:
    w = ck.params.residue_width
    head = layout.witness_nbytes() if ch == 1 else layout.eta_nbytes()
    return 1 + head + zq_nbytes(layout.dim, w) + 2 * ck.rho_len


def proof_nbytes(layout: Layout, ck: CommitmentKey, challenges) -> int:
    """Exact encoded size for a given challenge vector."""
    return 4 + sum(3 * ck.digest_len + response_nbytes(layout, ck, ch) for ch in challenges)


def expected_proof_nbytes(layout: Layout, ck: CommitmentKey, kappa: int) -> float:
    """kappa * (3 commitments + mean response) for uniform challenges."""
    mean_rsp = sum(response_nbytes(layout, ck, ch) for ch in CHALLENGES) / 3
    return 4 + kappa * (3 * ck.digest_len + mean_rsp)


# ---------------------------------------------------------------------------
# simulator and extractor


@dataclass
class SimulatedRound:
    guess: int
    ch: int
    cmt: Commitment
    rsp: Response | None

    @property
    def aborted(self) -> bool:
        return self.rsp is None


def simulate_round(inst: SternInstance, rng: Rng, ch: int | None = None) -> SimulatedRound:
    """Commit after predicting the challenge; the response is None (abort) when ch equals the guess."""
    q, lay = inst.q, inst.layout
    guess = CHALLENGES[rng.randbelow(3)]
    z = inst.particular_solution() if guess == 1 else lay.sample_valid(rng).astype(np.int64)
    r_z = rng.integers(q, inst.D)
    eta = lay.sample_eta(rng)
    rho = tuple(rng.bytes(inst.ck.rho_len) for _ in range(3))
    idx = lay.gamma_index(eta)
    c1_vec = inst.M @ ((z + r_z) % q) - inst.u if guess == 3 else inst.M @ r_z
    cmt = _commit_all(inst, eta, idx, c1_vec % q, r_z, (z + r_z) % q, rho)
    ch = CHALLENGES[rng.randbelow(3)] if ch is None else ch
    if ch == guess:
        return SimulatedRound(guess, ch, cmt, None)
    state = ProverState(inst, z % q if guess == 1 else z, r_z, eta, rho)
    return SimulatedRound(guess, ch, cmt, respond(state, ch))


def cheating_round(inst: SternInstance, rng: Rng) -> bool:
    """A witness-free prover facing a uniform challenge. True iff the verifier accepts."""
    sim = simulate_round(inst, rng)
    return not sim.aborted and verify_round(inst, sim.cmt, sim.ch, sim.rsp)


def extract(inst: SternInstance, cmt: Commitment, rsp1: Response, rsp2: Response, rsp3: Response) -> np.ndarray:
    """z' = Gamma_{eta2}^{-1}(t_z) from accepting answers to all three challenges."""
    for ch, rsp in zip(CHALLENGES, (rsp1, rsp2, rsp3)):
        if not verify_round(inst, cmt, ch, rsp):
            raise ExtractionFailed(f"response to challenge {ch} does not verify")
    if rsp2.eta != rsp3.eta:
        raise ExtractionFailed("eta differs between challenges 2 and 3")
    z = inst.layout.invert(rsp2.eta, np.asarray(rsp1.t_z, dtype=np.int64))
    if not np.array_equal((z + rsp3.vec) % inst.q, rsp2.vec % inst.q):
        raise ExtractionFailed("z' + z3 != z2")
    if not inst.check(z):
        raise ExtractionFailed("extracted vector fails the relation")
    return z

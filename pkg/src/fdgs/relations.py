"""The signing, correct-decryption and denial relations in Stern form.

Each builder returns a :class:`~fdgs.stern.SternInstance`; each packer maps
a scheme-level witness into the engine vector; each backtracker inverts it.

Signing witness layout (D = 10nk*ell + 2m + 4m_E + 2ell - 3)::

    for i = 1..ell-1:   v*_i (2nk) | v^_i (4nk) | w^_i (4nk)
    then:               p* (2nk-1) | p^ (4nk-2) | w^_ell (4nk)
    then:               x* (2m) | r1* (2m_E) | r2* (2m_E) | ell blocks ext2(j_i)

Level 1 is the pair of children of the root. Rows of M are ordered as
tree levels top-down, the user-key rows, (B r1, P1 r1), (B r2, P2 r2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CannotExtend, DimensionMismatch, InvalidWitness
from .lattice import Params, Rng, bin_compose, centered, decomp_sequence, delta, gadget_matrix, int_decompose_vec
from .merkle import HashKey, MembershipWitness, t_path
from .regev import Ciphertext, TracingPublicKey, decryption_noise
from .stern import CommitmentKey, Eta, Layout, SternInstance

# ---------------------------------------------------------------------------
# extend-and-permute gadgets


def ext(b: int, v) -> np.ndarray:
    """(b-bar * v || b * v)."""
    v = np.asarray(v)
    return np.concatenate([(1 - b) * v, b * v])


def ext2(b: int) -> np.ndarray:
    return np.array([1 - b, b], dtype=np.int64)


def apply_T(b: int, t) -> np.ndarray:
    t = np.asarray(t)
    if t.shape != (2,):
        raise DimensionMismatch("T_b acts on 2-vectors")
    return t[[b, 1 - b]]


def apply_F(b: int, perm, t) -> np.ndarray:
    """(pi(t_b) || pi(t_{b-bar})) with t = (t_0 || t_1) and pi(v) = v[pi]."""
    t = np.asarray(t)
    perm = np.asarray(perm)
    r = perm.size
    if t.shape != (2 * r,):
        raise DimensionMismatch(f"F needs a vector of length {2 * r}")
    halves = (t[:r], t[r:])
    return np.concatenate([halves[b][perm], halves[1 - b][perm]])


def extend_weight(v, target: int, out_len: int) -> np.ndarray:
    """Append (target - wt(v)) ones, then zeros, up to out_len."""
    v = np.asarray(v, dtype=np.int64)
    need = target - int(v.sum())
    if need < 0 or need > out_len - v.size:
        raise CannotExtend(f"weight {int(v.sum())} cannot be extended to {target} in length {out_len}")
    return np.concatenate([v, np.ones(need, dtype=np.int64), np.zeros(out_len - v.size - need, dtype=np.int64)])


def extend_balanced(v, n_neg: int, n_zero: int, n_pos: int) -> np.ndarray:
    """Append the missing -1s, then 1s, then 0s so the counts become exact."""
    v = np.asarray(v, dtype=np.int64)
    have = [(v == -1).sum(), (v == 0).sum(), (v == 1).sum()]
    need = [n_neg - have[0], n_zero - have[1], n_pos - have[2]]
    if min(need) < 0 or have[0] + have[1] + have[2] != v.size:
        raise CannotExtend(f"counts {have} exceed ({n_neg}, {n_zero}, {n_pos})")
    return np.concatenate([v, np.full(need[0], -1), np.ones(need[2], dtype=np.int64),
                           np.zeros(need[1], dtype=np.int64)])


def _weight_vector(rng: Rng, weight: int, length: int) -> np.ndarray:
    base = np.zeros(length, dtype=np.int64)
    base[:weight] = 1
    return base[rng.permutation(length)]


def _is_binary(v) -> bool:
    return bool(np.all((v == 0) | (v == 1)))


# ---------------------------------------------------------------------------
# signing relation


def gs_dim(params: Params) -> int:
    nk, ell = params.nk, params.ell
    return 10 * nk * ell + 2 * params.m + 4 * params.m_e + 2 * ell - 3


class GsLayout(Layout):
    def __init__(self, params: Params):
        self.params = p = params
        nk, ell = p.nk, p.ell
        off = 0
        self.v_star, self.v_hat, self.w_hat = {}, {}, {}
        for i in range(1, ell):
            self.v_star[i] = off
            self.v_hat[i] = off + 2 * nk
            self.w_hat[i] = off + 6 * nk
            off += 10 * nk
        self.p_star = off
        self.p_hat = off + 2 * nk - 1
        self.w_hat[ell] = off + 6 * nk - 3
        off += 10 * nk - 3
        self.x_star = off
        self.r_star = (off + 2 * p.m, off + 2 * p.m + 2 * p.m_e)
        self.j_block = off + 2 * p.m + 4 * p.m_e
        self.dim = self.j_block + 2 * ell
        self.eta_bits = ell
        # pi_x, pi_p, pi_r1, pi_r2, phi_v[1..ell-1], phi_w[1..ell]
        self.eta_perms = (2 * p.m, 2 * nk - 1, 2 * p.m_e, 2 * p.m_e) + (2 * nk,) * (2 * ell - 1)
        assert self.dim == gs_dim(p)

    def jb(self, i: int) -> int:
        return self.j_block + 2 * (i - 1)

    def gamma_index(self, eta: Eta) -> np.ndarray:
        p = self.params
        ell = p.ell
        b = [int(x) for x in eta.bits]
        pi_x, pi_p, pi_r1, pi_r2 = eta.perms[:4]
        phi_v = dict(zip(range(1, ell), eta.perms[4:4 + ell - 1]))
        phi_w = dict(zip(range(1, ell + 1), eta.perms[4 + ell - 1:]))
        idx = np.arange(self.dim, dtype=np.int64)

        def plain(o, perm):
            idx[o:o + perm.size] = o + perm

        def F(o, bit, perm):
            r = perm.size
            idx[o:o + r] = o + bit * r + perm
            idx[o + r:o + 2 * r] = o + (1 - bit) * r + perm

        for i in range(1, ell):
            plain(self.v_star[i], phi_v[i])
            F(self.v_hat[i], b[i - 1], phi_v[i])
        for i in range(1, ell + 1):
            F(self.w_hat[i], b[i - 1], phi_w[i])
        plain(self.p_star, pi_p)
        F(self.p_hat, b[ell - 1], pi_p)
        plain(self.x_star, pi_x)
        plain(self.r_star[0], pi_r1)
        plain(self.r_star[1], pi_r2)
        for i in range(1, ell + 1):
            o = self.jb(i)
            idx[o], idx[o + 1] = o + b[i - 1], o + 1 - b[i - 1]
        return idx

    def _hat_ok(self, hat, star, j) -> bool:
        return np.array_equal(hat, ext(j, star))

    def _w_ok(self, hat, j) -> bool:
        r = hat.size // 2
        star = hat[:r] if j else hat[r:]
        return int(star.sum()) == self.params.nk and self._hat_ok(hat, star, 1 - j)

    def is_valid(self, z) -> bool:
        p = self.params
        nk, ell = p.nk, p.ell
        z = np.asarray(z, dtype=np.int64)
        if z.shape != (self.dim,) or not _is_binary(z):
            return False
        j = {}
        for i in range(1, ell + 1):
            blk = z[self.jb(i):self.jb(i) + 2]
            if blk.sum() != 1:
                return False
            j[i] = int(blk[1])
        for i in range(1, ell):
            vs = z[self.v_star[i]:self.v_star[i] + 2 * nk]
            if vs.sum() != nk or not self._hat_ok(z[self.v_hat[i]:self.v_hat[i] + 4 * nk], vs, j[i]):
                return False
        for i in range(1, ell + 1):
            if not self._w_ok(z[self.w_hat[i]:self.w_hat[i] + 4 * nk], j[i]):
                return False
        ps = z[self.p_star:self.p_star + 2 * nk - 1]
        if ps.sum() != nk or not self._hat_ok(z[self.p_hat:self.p_hat + 4 * nk - 2], ps, j[ell]):
            return False
        if z[self.x_star:self.x_star + 2 * p.m].sum() != p.m:
            return False
        return all(z[o:o + 2 * p.m_e].sum() == p.m_e for o in self.r_star)

    def sample_valid(self, rng: Rng) -> np.ndarray:
        p = self.params
        nk, ell = p.nk, p.ell
        j = rng.bits(ell)
        z = np.zeros(self.dim, dtype=np.int64)
        for i in range(1, ell + 1):
            z[self.jb(i):self.jb(i) + 2] = ext2(int(j[i - 1]))
            w = _weight_vector(rng, nk, 2 * nk)
            z[self.w_hat[i]:self.w_hat[i] + 4 * nk] = ext(1 - int(j[i - 1]), w)
        for i in range(1, ell):
            v = _weight_vector(rng, nk, 2 * nk)
            z[self.v_star[i]:self.v_star[i] + 2 * nk] = v
            z[self.v_hat[i]:self.v_hat[i] + 4 * nk] = ext(int(j[i - 1]), v)
        ps = _weight_vector(rng, nk, 2 * nk - 1)
        z[self.p_star:self.p_star + 2 * nk - 1] = ps
        z[self.p_hat:self.p_hat + 4 * nk - 2] = ext(int(j[ell - 1]), ps)
        z[self.x_star:self.x_star + 2 * p.m] = _weight_vector(rng, p.m, 2 * p.m)
        for o in self.r_star:
            z[o:o + 2 * p.m_e] = _weight_vector(rng, p.m_e, 2 * p.m_e)
        return z


@dataclass
class GsWitness:
    """(x, p, bin(j), w_ell..w_1, r1, r2) plus the path nodes v_1..v_{ell-1}."""

    x: np.ndarray
    p: np.ndarray
    bits: np.ndarray
    siblings: np.ndarray  # stored (w_ell, ..., w_1)
    path: np.ndarray      # (ell-1) x nk, row i-1 holds v_i
    r1: np.ndarray
    r2: np.ndarray

    @property
    def membership(self) -> MembershipWitness:
        return MembershipWitness(self.bits, self.siblings)

    def w(self, i: int) -> np.ndarray:
        return self.siblings[self.bits.size - i]

    def __eq__(self, other) -> bool:
        return isinstance(other, GsWitness) and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("x", "p", "bits", "siblings", "path", "r1", "r2"))


def make_gs_witness(key: HashKey, wit: MembershipWitness, x, p, r1, r2) -> GsWitness:
    nodes = t_path(key, p, wit)
    path = np.array(nodes[1:-1], dtype=np.uint8).reshape(-1, key.params.nk)
    return GsWitness(np.asarray(x, np.uint8), np.asarray(p, np.uint8), wit.bits.copy(),
                     wit.siblings.copy(), path, np.asarray(r1, np.uint8), np.asarray(r2, np.uint8))


def pack_gs_witness(w: GsWitness, params: Params) -> np.ndarray:
    lay = GsLayout(params)
    nk, ell = params.nk, params.ell
    shapes = {"x": (params.m,), "p": (nk,), "bits": (ell,), "siblings": (ell, nk),
              "path": (ell - 1, nk), "r1": (params.m_e,), "r2": (params.m_e,)}
    for name, shape in shapes.items():
        v = np.asarray(getattr(w, name))
        if v.shape != shape:
            raise DimensionMismatch(f"{name} has shape {v.shape}, expected {shape}")
        if not _is_binary(v):
            raise InvalidWitness(f"{name} is not binary")
    z = np.zeros(lay.dim, dtype=np.int64)
    j = [int(b) for b in w.bits]
    for i in range(1, ell + 1):
        z[lay.jb(i):lay.jb(i) + 2] = ext2(j[i - 1])
        ws = extend_weight(w.w(i), nk, 2 * nk)
        z[lay.w_hat[i]:lay.w_hat[i] + 4 * nk] = ext(1 - j[i - 1], ws)
    for i in range(1, ell):
        vs = extend_weight(w.path[i - 1], nk, 2 * nk)
        z[lay.v_star[i]:lay.v_star[i] + 2 * nk] = vs
        z[lay.v_hat[i]:lay.v_hat[i] + 4 * nk] = ext(j[i - 1], vs)
    ps = extend_weight(w.p, nk, 2 * nk - 1)
    z[lay.p_star:lay.p_star + 2 * nk - 1] = ps
    z[lay.p_hat:lay.p_hat + 4 * nk - 2] = ext(j[ell - 1], ps)
    z[lay.x_star:lay.x_star + 2 * params.m] = extend_weight(w.x, params.m, 2 * params.m)
    for o, r in zip(lay.r_star, (w.r1, w.r2)):
        z[o:o + 2 * params.m_e] = extend_weight(r, params.m_e, 2 * params.m_e)
    return z


def backtrack_gs_witness(z, params: Params) -> GsWitness:
    lay = GsLayout(params)
    nk, ell = params.nk, params.ell
    z = np.asarray(z, dtype=np.int64)
    if not lay.is_valid(z):
        raise InvalidWitness("vector is not in VALID")
    bits = np.array([z[lay.jb(i) + 1] for i in range(1, ell + 1)], dtype=np.uint8)
    sib = np.zeros((ell, nk), dtype=np.uint8)
    for i in range(1, ell + 1):
        hat = z[lay.w_hat[i]:lay.w_hat[i] + 4 * nk]
        star = hat[:2 * nk] if bits[i - 1] else hat[2 * nk:]
        sib[ell - i] = star[:nk]
    path = np.array([z[lay.v_star[i]:lay.v_star[i] + nk] for i in range(1, ell)],
                    dtype=np.uint8).reshape(ell - 1, nk)
    u8 = lambda a: np.asarray(a, dtype=np.uint8)  # noqa: E731
    return GsWitness(u8(z[lay.x_star:lay.x_star + params.m]), u8(z[lay.p_star:lay.p_star + nk]),
                     bits, sib, path,
                     u8(z[lay.r_star[0]:lay.r_star[0] + params.m_e]),
                     u8(z[lay.r_star[1]:lay.r_star[1] + params.m_e]))


def build_gs_instance(key: HashKey, root, tpk: TracingPublicKey, cts, params: Params,
                      ck: CommitmentKey, label: bytes = b"fdgs/gs") -> SternInstance:
    lay = GsLayout(params)
    n, nk, ell, q, me = params.n, params.nk, params.ell, params.q, params.m_e
    A0, A1 = key.A0, key.A1
    G = gadget_matrix(params)
    root = np.asarray(root, dtype=np.int64)
    if root.shape != (nk,):
        raise DimensionMismatch(f"root must have length {nk}")
    rows = (ell + 1) * n + 2 * (n + ell)
    M = np.zeros((rows, lay.dim), dtype=np.int64)
    u = np.zeros(rows, dtype=np.int64)

    def hat_cols(r0, o, half):
        M[r0:r0 + n, o:o + nk] = A0
        M[r0:r0 + n, o + half:o + half + nk] = A1

    for i in range(1, ell + 1):
        r0 = (i - 1) * n
        if i < ell:
            hat_cols(r0, lay.v_hat[i], 2 * nk)
        else:
            hat_cols(r0, lay.p_hat, 2 * nk - 1)
        hat_cols(r0, lay.w_hat[i], 2 * nk)
        if i == 1:
            u[r0:r0 + n] = bin_compose(root, params)
        else:
            M[r0:r0 + n, lay.v_star[i - 1]:lay.v_star[i - 1] + nk] = -G
    r0 = ell * n
    M[r0:r0 + n, lay.x_star:lay.x_star + params.m] = key.A
    M[r0:r0 + n, lay.p_star:lay.p_star + nk] = -G
    r0 += n
    for b, (ct, P) in enumerate(zip(cts, (tpk.P1, tpk.P2))):
        o = lay.r_star[b]
        M[r0:r0 + n, o:o + me] = tpk.B
        u[r0:r0 + n] = ct.c1
        r0 += n
        M[r0:r0 + ell, o:o + me] = P
        for i in range(1, ell + 1):
            M[r0 + i - 1, lay.jb(i) + 1] = params.half_q
        u[r0:r0 + ell] = ct.c2
        r0 += ell
    return SternInstance(M % q, u % q, lay, ck, params, label)


def gs_perm_sampler(params: Params, rng: Rng):
    """(eta, Gamma_eta, Gamma_eta^-1) for the signing relation."""
    lay = GsLayout(params)
    eta = lay.sample_eta(rng)
    return eta, (lambda t: lay.apply(eta, t)), (lambda t: lay.invert(eta, t))


# ---------------------------------------------------------------------------
# balanced ternary layouts (trace and denial)


class BalancedLayout(Layout):
    """Product of sets with exact counts of -1, 0, 1; S-bar is a product of symmetric groups."""

    ternary = True

    def __init__(self, parts):
        self.parts = tuple(parts)  # (n_neg, n_zero, n_pos)
        sizes = [sum(pt) for pt in self.parts]
        self.offsets = np.cumsum([0] + sizes)
        self.dim = int(self.offsets[-1])
        self.eta_bits = 0
        self.eta_perms = tuple(sizes)

    def gamma_index(self, eta: Eta) -> np.ndarray:
        return np.concatenate([o + perm for o, perm in zip(self.offsets[:-1], eta.perms)])

    def is_valid(self, z) -> bool:
        z = np.asarray(z, dtype=np.int64)
        if z.shape != (self.dim,):
            return False
        for o, (neg, zero, pos) in zip(self.offsets[:-1], self.parts):
            blk = z[o:o + neg + zero + pos]
            if (blk == -1).sum() != neg or (blk == 0).sum() != zero or (blk == 1).sum() != pos:
                return False
        return True

    def sample_valid(self, rng: Rng) -> np.ndarray:
        out = []
        for neg, zero, pos in self.parts:
            base = np.concatenate([np.full(neg, -1), np.zeros(zero, np.int64), np.ones(pos, np.int64)])
            out.append(base[rng.permutation(base.size)])
        return np.concatenate(out)


def trace_dims(params: Params) -> tuple[int, int, int]:
    """(D1, D2, D') with D' = D1 + D2; the engine dimension is 3D'."""
    d1 = (params.n + params.m_e) * params.ell * delta(params.beta)
    d2 = params.ell * delta(params.y_bound)
    return d1, d2, d1 + d2


def trace_layout(params: Params) -> BalancedLayout:
    dp = trace_dims(params)[2]
    return BalancedLayout([(dp, dp, dp)])


def denial_layout(params: Params) -> BalancedLayout:
    dp, ell = trace_dims(params)[2], params.ell
    return BalancedLayout([(dp, dp, dp), (ell, ell - 1, ell)])


def _trace_system(tpk: TracingPublicKey, ct1: Ciphertext, params: Params):
    """M0 H (mod q) and the key-row right-hand side; rows = ell*m_E key rows then ell decryption rows."""
    n, ell, me, q = params.n, params.ell, params.m_e, params.q
    c_se = (n + me) * ell
    rows = ell * me + ell
    M0 = np.zeros((rows, c_se + ell), dtype=np.int64)
    for j in range(ell):
        kr = slice(j * me, (j + 1) * me)
        M0[kr, j * n:(j + 1) * n] = tpk.B.T
        M0[kr, n * ell + j * me: n * ell + (j + 1) * me] = np.eye(me, dtype=np.int64)
        dr = ell * me + j
        M0[dr, j * n:(j + 1) * n] = ct1.c1
        M0[dr, c_se + j] = 1
    sb = np.array(decomp_sequence(params.beta), dtype=np.int64)
    sy = np.array(decomp_sequence(params.y_bound), dtype=np.int64)
    MH = np.concatenate([(M0[:, :c_se, None] * sb).reshape(rows, -1),
                         (M0[:, c_se:, None] * sy).reshape(rows, -1)], axis=1) % q
    return MH, tpk.P1.reshape(-1) % q


def build_trace_instance(tpk: TracingPublicKey, ct1: Ciphertext, b_prime, params: Params,
                         ck: CommitmentKey, label: bytes = b"fdgs/trace") -> SternInstance:
    lay = trace_layout(params)
    MH, key_rhs = _trace_system(tpk, ct1, params)
    M = np.concatenate([MH, np.zeros((MH.shape[0], lay.dim - MH.shape[1]), dtype=np.int64)], axis=1)
    b_prime = np.asarray(b_prime, dtype=np.int64)
    u = np.concatenate([key_rhs, (ct1.c2 - params.half_q * b_prime) % params.q])
    return SternInstance(M, u, lay, ck, params, label)


def build_denial_instance(tpk: TracingPublicKey, ct1: Ciphertext, uid_prime, params: Params,
                          ck: CommitmentKey, label: bytes = b"fdgs/denial") -> SternInstance:
    lay = denial_layout(params)
    ell, q = params.ell, params.q
    MH, key_rhs = _trace_system(tpk, ct1, params)
    rows = MH.shape[0]
    dp = trace_dims(params)[2]
    M = np.zeros((rows, lay.dim), dtype=np.int64)
    M[:, :dp] = MH
    for j in range(ell):
        M[ell * params.m_e + j, 3 * dp + j] = params.half_q
    uid_prime = np.asarray(uid_prime, dtype=np.int64)
    u = np.concatenate([key_rhs, (ct1.c2 - params.half_q * uid_prime) % q])
    return SternInstance(M, u, lay, ck, params, label)


def trace_noise(S1, ct1: Ciphertext, b_prime, params: Params) -> np.ndarray:
    """y = c_{1,2} - S1^T c_{1,1} - floor(q/2) b' (centered)."""
    return centered(decryption_noise(S1, ct1, params) - params.half_q * np.asarray(b_prime, dtype=np.int64), params.q)


def _decompose_trace(S1, E1, y, params: Params) -> np.ndarray:
    S1, E1, y = (np.asarray(a, dtype=np.int64) for a in (S1, E1, y))
    if S1.shape != (params.n, params.ell) or E1.shape != (params.ell, params.m_e) or y.shape != (params.ell,):
        raise DimensionMismatch("trace witness has the wrong shape")
    if np.abs(S1).max(initial=0) > params.beta or np.abs(E1).max(initial=0) > params.beta:
        raise InvalidWitness("S1 or E1 exceeds beta")
    if np.abs(y).max(initial=0) > params.y_bound:
        raise InvalidWitness("y exceeds ceil(q/5)")
    se = np.concatenate([S1.T.ravel(), E1.ravel()])
    return np.concatenate([int_decompose_vec(se, params.beta), int_decompose_vec(y, params.y_bound)])


def pack_trace_witness(S1, E1, y, params: Params) -> np.ndarray:
    dp = trace_dims(params)[2]
    return extend_balanced(_decompose_trace(S1, E1, y, params), dp, dp, dp)


def pack_denial_witness(S1, E1, y, b, params: Params) -> np.ndarray:
    ell = params.ell
    b = np.asarray(b, dtype=np.int64)
    if b.shape != (ell,) or np.any(np.abs(b) > 1):
        raise InvalidWitness("b must lie in {-1,0,1}^ell")
    return np.concatenate([pack_trace_witness(S1, E1, y, params), extend_balanced(b, ell, ell - 1, ell)])


def backtrack_trace_witness(z, params: Params):
    """(S1, E1, y) recovered from the first D' engine coordinates."""
    n, ell, me = params.n, params.ell, params.m_e
    d1, _, dp = trace_dims(params)
    z = np.asarray(z, dtype=np.int64)
    db, dy = delta(params.beta), delta(params.y_bound)
    sb = np.array(decomp_sequence(params.beta), dtype=np.int64)
    sy = np.array(decomp_sequence(params.y_bound), dtype=np.int64)
    se = z[:d1].reshape(-1, db) @ sb
    y = z[d1:dp].reshape(-1, dy) @ sy
    S1 = se[:n * ell].reshape(ell, n).T
    E1 = se[n * ell:].reshape(ell, me)
    return S1, E1, y


def backtrack_denial_witness(z, params: Params):
    dp = trace_dims(params)[2]
    S1, E1, y = backtrack_trace_witness(z, params)
    return S1, E1, y, np.asarray(z, dtype=np.int64)[3 * dp:3 * dp + params.ell]


def trace_relation_holds(tpk: TracingPublicKey, ct1: Ciphertext, b_prime, S1, E1, y, params: Params) -> bool:
    """Norm bounds, S1^T B + E1 = P1 and c_{1,2} - S1^T c_{1,1} = y + floor(q/2) b'."""
    q = params.q
    S1, E1, y = (np.asarray(a, dtype=np.int64) for a in (S1, E1, y))
    return bool(np.abs(S1).max() <= params.beta and np.abs(E1).max() <= params.beta
                and np.abs(y).max() <= params.y_bound
                and np.array_equal((S1.T @ tpk.B + E1) % q, tpk.P1 % q)
                and np.array_equal((ct1.c2 - S1.T @ ct1.c1) % q, (y + params.half_q * np.asarray(b_prime, dtype=np.int64)) % q))


def denial_relation_holds(tpk: TracingPublicKey, ct1: Ciphertext, uid_prime, S1, E1, y, b, params: Params) -> bool:
    """As the trace relation with b' = uid' + b, plus b in {-1,0,1}^ell and b != 0."""
    b = np.asarray(b, dtype=np.int64)
    if np.any(np.abs(b) > 1) or not b.any():
        return False
    return trace_relation_holds(tpk, ct1, np.asarray(uid_prime, dtype=np.int64) + b, S1, E1, y, params)

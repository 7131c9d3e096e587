"""SIS-based Merkle-tree accumulator with logarithmic leaf updates.

Nodes live in a heap array: the node at depth ``i`` reached by the path
prefix ``(b_1..b_i)`` (most significant bit first) has index
``2**i - 1 + int(b_1..b_i)``. Leaf ``j`` is therefore node ``N - 1 + j``
and the children of node ``x`` are ``2x + 1`` (bit 0) and ``2x + 2`` (bit 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import Reader, Writer
from .errors import DecodeError, DimensionMismatch, InvalidResidue, OutOfRange
from .lattice import Params, Rng, bin_decompose, sample_uniform_matrix

SNAPSHOT_MAGIC = b"FDGS-ACC"


@dataclass(frozen=True)
class HashKey:
    A: np.ndarray  # n x 2nk
    params: Params

    def __post_init__(self):
        if self.A.shape != (self.params.n, self.params.m):
            raise DimensionMismatch(f"hash key must be {self.params.n}x{self.params.m}, got {self.A.shape}")

    @property
    def A0(self) -> np.ndarray:
        return self.A[:, : self.params.nk]

    @property
    def A1(self) -> np.ndarray:
        return self.A[:, self.params.nk:]


def t_setup(params: Params, seed=None) -> HashKey:
    rng = seed if isinstance(seed, Rng) else Rng(seed)
    return HashKey(sample_uniform_matrix(rng, params.n, params.m, params.q), params)


def hash_node(key: HashKey, u0, u1) -> np.ndarray:
    """bin(A0 u0 + A1 u1 mod q). Accepts stacked inputs of shape (..., nk)."""
    p = key.params
    u0 = np.asarray(u0, dtype=np.int64)
    u1 = np.asarray(u1, dtype=np.int64)
    if u0.shape[-1] != p.nk or u1.shape != u0.shape:
        raise DimensionMismatch(f"hash inputs must have length {p.nk}")
    v = (u0 @ key.A0.T + u1 @ key.A1.T) % p.q
    return bin_decompose(v, p)


def path_bits(j: int, ell: int) -> np.ndarray:
    """(j_1..j_ell), most significant bit first."""
    if not 0 <= j < (1 << ell):
        raise OutOfRange(f"index {j} outside [0, {(1 << ell) - 1}]")
    return np.array([(j >> (ell - 1 - i)) & 1 for i in range(ell)], dtype=np.uint8)


def path_index(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


@dataclass(frozen=True)
class MembershipWitness:
    """Path bits (j_1..j_ell) and siblings stored as (w_ell, ..., w_1).

    ``siblings[0]`` is w_ell, the sibling of the leaf; ``siblings[-1]`` is
    w_1, the sibling of the root's child on the path.
    """

    bits: np.ndarray
    siblings: np.ndarray  # ell x nk

    def __post_init__(self):
        if self.siblings.ndim != 2 or self.siblings.shape[0] != self.bits.size:
            raise DimensionMismatch("witness needs exactly ell siblings")

    @property
    def ell(self) -> int:
        return self.bits.size

    @property
    def index(self) -> int:
        return path_index(self.bits)

    def w(self, i: int) -> np.ndarray:
        """Sibling w_i at depth i (1-based)."""
        return self.siblings[self.ell - i]

    def encode(self, out: Writer) -> Writer:
        # leaf-first, i.e. the stored order
        out.bits(self.bits)
        for s in self.siblings:
            out.bits(s)
        return out

    @classmethod
    def decode(cls, r: Reader, params: Params) -> "MembershipWitness":
        bits = r.bits(expect=params.ell)
        sib = np.stack([r.bits(expect=params.nk) for _ in range(params.ell)])
        return cls(bits, sib)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MembershipWitness)
                and np.array_equal(self.bits, other.bits)
                and np.array_equal(self.siblings, other.siblings))


class MerkleTree:
    """Fully materialised tree. ``writes`` counts node labels written by updates."""

    def __init__(self, key: HashKey, nodes: np.ndarray):
        p = key.params
        if nodes.shape != (2 * p.N - 1, p.nk):
            raise DimensionMismatch(f"tree needs {2 * p.N - 1} nodes of length {p.nk}")
        self.key = key
        self.params = p
        self.nodes = nodes
        self.writes = 0

    @property
    def root(self) -> np.ndarray:
        return self.nodes[0].copy()

    @property
    def leaves(self) -> np.ndarray:
        return self.nodes[self.params.N - 1:]

    def node(self, prefix) -> np.ndarray:
        prefix = list(prefix)
        return self.nodes[(1 << len(prefix)) - 1 + path_index(prefix)]

    def leaf(self, j: int) -> np.ndarray:
        return self.nodes[self.params.N - 1 + j]

    def copy(self) -> "MerkleTree":
        t = MerkleTree(self.key, self.nodes.copy())
        t.writes = self.writes
        return t

    def __eq__(self, other) -> bool:
        return isinstance(other, MerkleTree) and np.array_equal(self.nodes, other.nodes)


def _binary(a) -> np.ndarray:
    a = np.asarray(a)
    if not np.all((a == 0) | (a == 1)):
        raise InvalidResidue("leaves must be binary")
    return a.astype(np.uint8)


def t_acc(key: HashKey, leaves) -> tuple[MerkleTree, np.ndarray]:
    p = key.params
    leaves = _binary(leaves)
    if leaves.shape != (p.N, p.nk):
        raise DimensionMismatch(f"expected {p.N} leaves of length {p.nk}, got {leaves.shape}")
    nodes = np.zeros((2 * p.N - 1, p.nk), dtype=np.uint8)
    nodes[p.N - 1:] = leaves
    for depth in range(p.ell - 1, -1, -1):
        lo, width = (1 << depth) - 1, 1 << depth
        kids = nodes[2 * lo + 1: 2 * lo + 1 + 2 * width]
        nodes[lo: lo + width] = hash_node(key, kids[0::2], kids[1::2])
    tree = MerkleTree(key, nodes)
    return tree, tree.root


def t_witness(tree: MerkleTree, j: int) -> MembershipWitness:
    p = tree.params
    bits = path_bits(j, p.ell)
    sib = np.empty((p.ell, p.nk), dtype=np.uint8)
    x = p.N - 1 + j
    for row in range(p.ell):  # leaf level first: w_ell, ..., w_1
        sib[row] = tree.nodes[x + 1 if x % 2 == 1 else x - 1]
        x = (x - 1) // 2
    return MembershipWitness(bits, sib)


def t_path(key: HashKey, d, w: MembershipWitness) -> list[np.ndarray]:
    """Recomputed path nodes [v_0, v_1, ..., v_ell] with v_ell = d."""
    p = key.params
    d = np.asarray(d, dtype=np.uint8)
    if d.shape != (p.nk,) or w.siblings.shape != (p.ell, p.nk) or w.bits.size != p.ell:
        raise DimensionMismatch("witness or leaf has the wrong shape")
    v = [None] * (p.ell + 1)
    v[p.ell] = d
    for i in range(p.ell - 1, -1, -1):
        wi = w.w(i + 1)
        if w.bits[i]:
            v[i] = hash_node(key, wi, v[i + 1])
        else:
            v[i] = hash_node(key, v[i + 1], wi)
    return v


def t_verify(key: HashKey, root, d, w: MembershipWitness) -> bool:
    return bool(np.array_equal(t_path(key, d, w)[0], np.asarray(root)))


def t_update(tree: MerkleTree, bits, d_new) -> np.ndarray:
    """Replace one leaf and rehash its ell ancestors; returns the new root."""
    p = tree.params
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != p.ell:
        raise DimensionMismatch(f"path must have {p.ell} bits")
    d_new = _binary(d_new)
    if d_new.shape != (p.nk,):
        raise DimensionMismatch(f"leaf must have length {p.nk}")
    x = p.N - 1 + path_index(bits)
    tree.nodes[x] = d_new
    tree.writes += 1
    while x > 0:
        x = (x - 1) // 2
        tree.nodes[x] = hash_node(tree.key, tree.nodes[2 * x + 1], tree.nodes[2 * x + 2])
        tree.writes += 1
    return tree.root


def encode_snapshot(tree: MerkleTree) -> bytes:
    out = Writer().header(SNAPSHOT_MAGIC, tree.params)
    for leaf in tree.leaves:
        out.bits(leaf)
    return out.getvalue()


def decode_snapshot(data: bytes, key: HashKey) -> MerkleTree:
    r = Reader(data)
    p = r.header(SNAPSHOT_MAGIC)
    if p != key.params:
        raise DecodeError("snapshot parameters do not match the hash key")
    leaves = np.stack([r.bits(expect=p.nk) for _ in range(p.N)])
    r.done()
    return t_acc(key, leaves)[0]

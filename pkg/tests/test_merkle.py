import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdgs.encoding import Reader, Writer
from fdgs.errors import InvalidResidue
from fdgs.lattice import Params, Rng, gadget_matrix, get_profile
from fdgs.merkle import (
    HashKey,
    MembershipWitness,
    decode_snapshot,
    encode_snapshot,
    hash_node,
    path_bits,
    path_index,
    t_acc,
    t_path,
    t_setup,
    t_update,
    t_verify,
    t_witness,
)

T1 = get_profile("T1")


def recursive_root(key, leaves, lo, hi):
    """Independent oracle: plain recursion over the leaf range [lo, hi)."""
    if hi - lo == 1:
        return leaves[lo]
    mid = (lo + hi) // 2
    return hash_node(key, recursive_root(key, leaves, lo, mid), recursive_root(key, leaves, mid, hi))


def test_hash_node_small_case():
    p = Params(n=1, q=5, ell=1, beta=1, kappa=1)
    key = HashKey(np.array([[1, 2, 4, 1, 2, 4]]), p)
    assert hash_node(key, [1, 0, 0], [0, 1, 0]).tolist() == [1, 1, 0]


def test_hash_node_zero_key():
    key = HashKey(np.zeros((T1.n, T1.m), dtype=np.int64), T1)
    u = Rng(1).bits((2, T1.nk))
    assert not hash_node(key, u[0], u[1]).any()


@settings(max_examples=30)
@given(st.integers(0, 2**32))
def test_hash_node_gadget_identity(seed):
    rng = Rng(seed)
    key = t_setup(T1, rng)
    u0, u1 = rng.bits(T1.nk), rng.bits(T1.nk)
    out = hash_node(key, u0, u1)
    assert np.array_equal(gadget_matrix(T1) @ out % T1.q, (key.A0 @ u0 + key.A1 @ u1) % T1.q)


def test_setup_determinism_and_shape():
    assert np.array_equal(t_setup(T1, 5).A, t_setup(T1, 5).A)
    assert t_setup(T1, 5).A.shape == (T1.n, 2 * T1.nk)
    keys = {t_setup(T1, s).A.tobytes() for s in range(100)}
    assert len(keys) == 100


def test_depth_one_and_zero_leaves():
    p = T1.with_(ell=1)
    key = t_setup(p, 2)
    leaves = Rng(3).bits((2, p.nk))
    _, root = t_acc(key, leaves)
    assert np.array_equal(root, hash_node(key, leaves[0], leaves[1]))
    tree, root = t_acc(t_setup(T1, 2), np.zeros((T1.N, T1.nk), dtype=np.uint8))
    assert not tree.nodes.any()
    w = t_witness(t_acc(key, leaves)[0], 0)
    assert w.bits.tolist() == [0] and np.array_equal(w.siblings[0], leaves[1])


def test_root_matches_recursive_oracle():
    for seed in range(10):
        rng = Rng(seed)
        key = t_setup(T1, rng)
        leaves = rng.bits((T1.N, T1.nk))
        assert np.array_equal(t_acc(key, leaves)[1], recursive_root(key, leaves, 0, T1.N))


def test_witness_for_leaf_five():
    rng = Rng(4)
    key = t_setup(T1, rng)
    leaves = rng.bits((8, T1.nk))
    tree, _ = t_acc(key, leaves)
    w = t_witness(tree, 5)
    assert w.bits.tolist() == [1, 0, 1]
    # siblings of 101: leaf 4, node 11 (leaves 6,7), node 0 (leaves 0..3)
    assert np.array_equal(w.w(3), leaves[4])
    assert np.array_equal(w.w(2), recursive_root(key, leaves, 6, 8))
    assert np.array_equal(w.w(1), recursive_root(key, leaves, 0, 4))
    assert w.index == 5


def test_path_bits_round_trip():
    for j in range(16):
        assert path_index(path_bits(j, 4)) == j
    assert path_bits(5, 3).tolist() == [1, 0, 1]


def test_falsified_witnesses_rejected():
    rng = Rng(9)
    sib_hits = bit_hits = 0
    for t in range(100):
        key = t_setup(T1, rng.fork(f"k{t}"))
        leaves = rng.bits((T1.N, T1.nk))
        tree, root = t_acc(key, leaves)
        j = rng.randbelow(T1.N)
        w = t_witness(tree, j)
        assert t_verify(key, root, leaves[j], w)
        sib = w.siblings.copy()
        sib[rng.randbelow(T1.ell), rng.randbelow(T1.nk)] ^= 1
        sib_hits += not t_verify(key, root, leaves[j], MembershipWitness(w.bits, sib))
        bits = w.bits.copy()
        i = rng.randbelow(T1.ell)
        bits[i] ^= 1
        bit_hits += not t_verify(key, root, leaves[j], MembershipWitness(bits, w.siblings))
    assert sib_hits == 100
    assert bit_hits >= 99


def test_t_path_ends_at_root():
    rng = Rng(12)
    key = t_setup(T1, rng)
    leaves = rng.bits((T1.N, T1.nk))
    tree, root = t_acc(key, leaves)
    nodes = t_path(key, leaves[3], t_witness(tree, 3))
    assert len(nodes) == T1.ell + 1
    assert np.array_equal(nodes[0], root) and np.array_equal(nodes[-1], leaves[3])


def test_update_idempotent_and_counts_writes():
    rng = Rng(6)
    key = t_setup(T1, rng)
    leaves = rng.bits((T1.N, T1.nk))
    tree, root = t_acc(key, leaves)
    before = tree.writes
    assert np.array_equal(t_update(tree, path_bits(5, 3), leaves[5]), root)
    assert tree.writes - before == T1.ell + 1
    p4 = T1.with_(ell=4)
    tree4, _ = t_acc(t_setup(p4, 1), np.zeros((16, p4.nk), dtype=np.uint8))
    t_update(tree4, path_bits(3, 4), np.ones(p4.nk, dtype=np.uint8))
    assert tree4.writes / (tree.writes - before) == 5 / 4


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.lists(st.integers(0, 7), min_size=1, max_size=10))
def test_update_matches_rebuild(seed, slots):
    rng = Rng(seed)
    key = t_setup(T1, rng)
    leaves = rng.bits((T1.N, T1.nk))
    tree, _ = t_acc(key, leaves)
    for j in slots:
        leaves[j] = rng.bits(T1.nk)
        t_update(tree, path_bits(j, T1.ell), leaves[j])
    assert tree == t_acc(key, leaves)[0]


def test_snapshot_and_witness_round_trip():
    rng = Rng(8)
    key = t_setup(T1, rng)
    tree, _ = t_acc(key, rng.bits((T1.N, T1.nk)))
    assert decode_snapshot(encode_snapshot(tree), key) == tree
    w = t_witness(tree, 6)
    r = Reader(w.encode(Writer()).getvalue())
    assert MembershipWitness.decode(r, T1) == w


def test_leaf_must_be_binary():
    key = t_setup(T1, 1)
    tree, _ = t_acc(key, np.zeros((T1.N, T1.nk), dtype=np.uint8))
    with pytest.raises(InvalidResidue):
        t_update(tree, path_bits(0, 3), np.full(T1.nk, 2))
    with pytest.raises(InvalidResidue):
        t_acc(key, np.full((T1.N, T1.nk), 2))

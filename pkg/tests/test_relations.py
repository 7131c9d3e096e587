import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import denial_case, gs_case, make_world, trace_case

from fdgs import relations as rel
from fdgs import scheme as fs
from fdgs.errors import CannotExtend
from fdgs.lattice import Rng, get_profile
from fdgs.regev import encrypt_pair

T1 = get_profile("T1")


def test_ext_and_T():
    v = np.array([3, 4])
    assert rel.ext(0, v).tolist() == [3, 4, 0, 0]
    assert rel.ext(1, v).tolist() == [0, 0, 3, 4]
    assert rel.ext2(0).tolist() == [1, 0]
    assert rel.apply_T(0, np.array([5, 6])).tolist() == [5, 6]
    t = np.arange(6)
    assert np.array_equal(rel.apply_F(0, np.arange(3), t), t)


def test_F_equivalence_randomized():
    rng = Rng(1)
    for _ in range(10_000):
        j, b = rng.randbelow(2), rng.randbelow(2)
        v = rng.integers(5, 4)
        perm = rng.permutation(4)
        assert np.array_equal(rel.apply_F(b, perm, rel.ext(j, v)), rel.ext(j ^ b, v[perm]))
        assert np.array_equal(rel.apply_T(b, rel.ext2(j)), rel.ext2(j ^ b))


def test_extend_weight_cases():
    p = rel.extend_weight(np.array([0, 1, 0]), 3, 5)
    assert p.size == 5 and p.sum() == 3
    with pytest.raises(CannotExtend):
        rel.extend_weight(np.zeros(3), 3, 5)
    x = Rng(2).bits(T1.m)
    assert rel.extend_weight(x, T1.m, 2 * T1.m).sum() == T1.m


@settings(max_examples=100)
@given(st.lists(st.integers(-1, 1), min_size=3, max_size=3).filter(any))
def test_balanced_extension_counts(b):
    ell = 3
    out = rel.extend_balanced(np.array(b), ell, ell - 1, ell)
    assert (out == -1).sum() == ell and (out == 1).sum() == ell and (out == 0).sum() == ell - 1


def test_zero_b_cannot_extend():
    with pytest.raises(CannotExtend):
        rel.extend_balanced(np.zeros(3, dtype=np.int64), 3, 2, 3)


def test_dimensions():
    assert rel.gs_dim(T1) == 2691
    inst = gs_case(make_world(3), Rng(3)).inst
    assert inst.M.shape == (30, 2691)
    d1, d2, dp = rel.trace_dims(T1)
    assert dp == 1236 and rel.trace_layout(T1).dim == 3 * dp
    assert rel.denial_layout(T1).dim == 3 * dp + 3 * T1.ell - 1


def test_honest_instances_are_satisfied(world):
    rng = Rng(4)
    for build in (gs_case, trace_case, denial_case):
        for t in range(10):
            case = build(world, rng.fork(f"{build.__name__}{t}"))
            assert case.inst.check(case.z)


def test_gs_instances_over_scheme_runs():
    ok = 0
    for t in range(100):
        world = make_world(f"runs/{t}", joins=2)
        case = gs_case(world, Rng(t))
        ok += case.inst.check(case.z)
    assert ok == 100


def test_wrong_root_breaks_gs_relation(world):
    rng = Rng(5)
    case = gs_case(world, rng)
    other = make_world(99)
    inst = rel.build_gs_instance(world.pp.key, other.info.root, world.gpk.tpk, case.extra["cts"], T1, world.pp.ck)
    assert not inst.satisfied_by(case.z)
    zero = rel.build_gs_instance(world.pp.key, np.zeros(T1.nk, dtype=np.uint8), world.gpk.tpk,
                                 case.extra["cts"], T1, world.pp.ck)
    assert not zero.satisfied_by(case.z)


def test_gs_pack_backtrack_round_trip(world):
    rng = Rng(6)
    for t in range(100):
        case = gs_case(world, rng.fork(str(t)))
        w = case.extra["witness"]
        z = rel.pack_gs_witness(w, T1)
        assert z.size == rel.gs_dim(T1)
        assert rel.backtrack_gs_witness(z, T1) == w


def test_trace_with_flipped_bit_fails(world):
    rng = Rng(7)
    case = trace_case(world, rng)
    flipped = case.extra["b_prime"].astype(np.int64).copy()
    flipped[0] ^= 1
    inst = rel.build_trace_instance(world.gpk.tpk, case.extra["ct1"], flipped, T1, world.pp.ck)
    assert not inst.satisfied_by(case.z)


def test_noiseless_trace_relation():
    p = T1.with_(beta=0)
    world = make_world(8, p)
    rng = Rng(8)
    cts, _, _ = encrypt_pair(world.gpk.tpk, [1, 0, 1], p, rng)
    ct1 = cts.first
    assert not world.tsk.E1.any()
    y = rel.trace_noise(world.tsk.S1, ct1, np.array([1, 0, 1]), p)
    assert rel.trace_relation_holds(world.gpk.tpk, ct1, np.array([1, 0, 1]), world.tsk.S1, world.tsk.E1, y, p)


def test_denial_for_true_signer_cannot_pack(world):
    b = np.zeros(T1.ell, dtype=np.int64)
    with pytest.raises(CannotExtend):
        rel.pack_denial_witness(world.tsk.S1, world.tsk.E1, np.zeros(T1.ell, dtype=np.int64), b, T1)


def test_trace_backtrack_round_trip(world):
    case = trace_case(world, Rng(9))
    S1, E1, y = rel.backtrack_trace_witness(case.z, T1)
    assert np.array_equal(S1, world.tsk.S1) and np.array_equal(E1, world.tsk.E1)
    case = denial_case(world, Rng(10))
    *_, b = rel.backtrack_denial_witness(case.z, T1)
    assert np.array_equal(b, case.extra["b"])
    assert fs.bits_uid(case.extra["uid_prime"] + b) == case.extra["uid"]

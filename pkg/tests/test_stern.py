import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import CASES, gs_case, trace_case

from fdgs import relations as rel
from fdgs.errors import ExtractionFailed, WitnessRejected
from fdgs.lattice import Rng, get_profile
from fdgs.stern import (
    CHALLENGES,
    CommitmentKey,
    NizkProof,
    Response,
    cheating_round,
    expected_proof_nbytes,
    extract,
    fs_challenges,
    fs_prove,
    fs_verify,
    proof_nbytes,
    prove_round,
    respond,
    simulate_round,
    verify_round,
)

T1 = get_profile("T1")


@pytest.mark.parametrize("kind", ["hash", "sis"])
def test_commitment_binding_scan(kind):
    ck = CommitmentKey(b"seed", T1.with_(commitment=kind))
    rng = Rng(kind)
    payload = rng.bytes(40)
    rho = rng.bytes(ck.rho_len)
    assert ck.commit(payload, rho) == ck.commit(payload, rho)
    seen = {ck.commit(payload, rng.bytes(ck.rho_len)) for _ in range(10_000 if kind == "hash" else 1000)}
    assert len(seen) == (10_000 if kind == "hash" else 1000)
    flipped = bytearray(payload)
    flipped[3] ^= 1
    assert ck.commit(bytes(flipped), rho) != ck.commit(payload, rho)
    assert len(ck.commit(payload, rho)) == ck.digest_len


@pytest.mark.parametrize("name", sorted(CASES))
def test_honest_rounds_accept(world, name):
    rng = Rng(name)
    case = CASES[name](world, rng)
    for ch in CHALLENGES:
        state, cmt = prove_round(case.inst, case.z, rng.fork(str(ch)))
        assert state.D == case.inst.D
        assert verify_round(case.inst, cmt, ch, respond(state, ch))
    _, a = prove_round(case.inst, case.z, Rng(1))
    _, b = prove_round(case.inst, case.z, Rng(1))
    assert a == b


def test_prove_round_rejects_bad_witness(world):
    case = gs_case(world, Rng(2))
    z = case.z.copy()
    z[0] ^= 1
    with pytest.raises(WitnessRejected):
        prove_round(case.inst, z, Rng(3))


def test_tampered_responses_reject(world):
    rng = Rng(4)
    case = trace_case(world, rng)
    state, cmt = prove_round(case.inst, case.z, rng)
    r2 = respond(state, 2)
    vec = r2.vec.copy()
    vec[5] = (vec[5] + 1) % T1.q
    assert not verify_round(case.inst, cmt, 2, Response(2, vec, r2.rho_a, r2.rho_b, eta=r2.eta))
    r1 = respond(state, 1)
    bad = r1.t_z.copy()
    i = int(np.flatnonzero(bad == 0)[0])
    bad[i] = 1  # breaks the exact counts of VALID
    assert not verify_round(case.inst, cmt, 1, Response(1, r1.vec, r1.rho_a, r1.rho_b, t_z=bad))
    assert not verify_round(case.inst, cmt, 3, r2)


def test_fs_round_trip_binding_and_size(world):
    rng = Rng(5)
    case = gs_case(world, rng)
    lay, ck = case.inst.layout, case.inst.ck
    proof = fs_prove(case.inst, case.z, b"message", rng)
    assert fs_verify(case.inst, proof, b"message")
    assert not fs_verify(case.inst, proof, b"massage")
    data = proof.to_bytes(lay, ck)
    assert len(data) == proof_nbytes(lay, ck, proof.challenges)
    back = NizkProof.from_bytes(data, lay, ck, T1.kappa)
    assert fs_verify(case.inst, back, b"message")
    with pytest.raises(Exception):
        NizkProof.from_bytes(data[:-1], lay, ck, T1.kappa)
    assert abs(len(data) - expected_proof_nbytes(lay, ck, T1.kappa)) / len(data) < 0.25


def test_fs_proof_byte_flips_reject(world):
    rng = Rng(6)
    case = gs_case(world, rng)
    lay, ck = case.inst.layout, case.inst.ck
    data = bytearray(fs_prove(case.inst, case.z, b"m", rng).to_bytes(lay, ck))
    for t in range(30):
        pos = 4 + rng.randbelow(len(data) - 4)
        bad = bytearray(data)
        bad[pos] ^= 1 << rng.randbelow(8)
        try:
            proof = NizkProof.from_bytes(bytes(bad), lay, ck, T1.kappa)
        except Exception:
            continue
        assert not fs_verify(case.inst, proof, b"m")


@settings(max_examples=50)
@given(st.binary(max_size=64), st.integers(1, 40))
def test_fs_challenges_are_in_range(context, kappa):
    chs = fs_challenges(context, [], b"inst", kappa)
    assert len(chs) == kappa and set(chs) <= {1, 2, 3}


def test_fs_challenges_uniform():
    chs = fs_challenges(b"x", [], b"y", 30_000)
    counts = np.bincount(chs, minlength=4)[1:]
    assert np.all(np.abs(counts - 10_000) < 5 * np.sqrt(30_000 * 2 / 9))


def test_simulator_abort_rate_and_acceptance(world):
    rng = Rng(7)
    inst = gs_case(world, rng).inst
    rounds = [simulate_round(inst, rng.fork(str(i))) for i in range(3000)]
    abort = sum(r.aborted for r in rounds) / 3000
    assert 0.30 <= abort <= 0.37
    live = [r for r in rounds if not r.aborted]
    assert all(verify_round(inst, r.cmt, r.ch, r.rsp) for r in live[:400])


def test_cheating_prover_success_rate(world):
    rng = Rng(8)
    inst = gs_case(world, rng).inst
    rate = sum(cheating_round(inst, rng.fork(str(i))) for i in range(1000)) / 1000
    assert 0.60 <= rate <= 0.72


@pytest.mark.parametrize("name", sorted(CASES))
def test_extractor_recovers_witness(world, name):
    rng = Rng(f"x/{name}")
    case = CASES[name](world, rng)
    state, cmt = prove_round(case.inst, case.z, rng)
    z = extract(case.inst, cmt, *(respond(state, ch) for ch in CHALLENGES))
    assert np.array_equal(z, case.z)
    state2, cmt2 = prove_round(case.inst, case.z, rng.fork("other"))
    with pytest.raises(ExtractionFailed):
        extract(case.inst, cmt, respond(state, 1), respond(state2, 2), respond(state, 3))


@pytest.mark.parametrize("layout", [rel.GsLayout(T1), rel.trace_layout(T1), rel.denial_layout(T1)],
                         ids=["gs", "trace", "denial"])
def test_gamma_preserves_valid(layout):
    rng = Rng(9)
    for _ in range(20):
        z = layout.sample_valid(rng)
        eta = layout.sample_eta(rng)
        moved = layout.apply(eta, z)
        assert layout.is_valid(moved)
        assert np.array_equal(layout.invert(eta, moved), z)
        assert np.array_equal(np.sort(moved), np.sort(z))

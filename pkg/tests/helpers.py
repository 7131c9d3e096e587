"""Shared builders for tests: a small group and honest instances of the three relations."""

from dataclasses import dataclass

import numpy as np

from fdgs import relations as rel
from fdgs import scheme as fs
from fdgs.lattice import Rng, get_profile
from fdgs.regev import decrypt, encrypt_pair


@dataclass
class World:
    pp: fs.PublicParams
    gpk: fs.GroupPublicKey
    gm: fs.GMState
    tsk: fs.TracingSecret
    users: list
    info: fs.GroupInfo

    @property
    def params(self):
        return self.pp.params


def make_world(seed, profile="T1", joins=4) -> World:
    rng = Rng(seed)
    params = get_profile(profile) if isinstance(profile, str) else profile
    pp = fs.g_setup(params, rng.fork("setup"))
    gpk, gm, tsk, _ = fs.gkgen(pp, rng.fork("keys"))
    users = [fs.join(gm, fs.ukgen(pp, rng.fork(f"user{i}"))) for i in range(joins)]
    return World(pp, gpk, gm, tsk, users, fs.g_update(gm))


@dataclass
class Case:
    """An honest instance together with its engine witness and the pieces behind it."""

    inst: object
    z: np.ndarray
    extra: dict


def gs_case(world: World, rng: Rng) -> Case:
    p = world.params
    user = world.users[rng.randbelow(len(world.users))]
    cts, r1, r2 = encrypt_pair(world.gpk.tpk, user.bits(p), p, rng.fork("enc"))
    inst = rel.build_gs_instance(world.pp.key, world.info.root, world.gpk.tpk, cts, p, world.pp.ck)
    wit = rel.make_gs_witness(world.pp.key, world.info.witnesses[user.uid], user.x, user.p, r1, r2)
    return Case(inst, rel.pack_gs_witness(wit, p), {"cts": cts, "witness": wit, "user": user})


def _opening(world: World, rng: Rng):
    p = world.params
    uid = rng.randbelow(p.N)
    cts, _, _ = encrypt_pair(world.gpk.tpk, fs.uid_bits(uid, p), p, rng.fork("enc"))
    ct1 = cts.first
    b_prime = decrypt(world.tsk.S1, ct1, p)
    y = rel.trace_noise(world.tsk.S1, ct1, b_prime, p)
    return uid, ct1, b_prime, y


def trace_case(world: World, rng: Rng) -> Case:
    p = world.params
    uid, ct1, b_prime, y = _opening(world, rng)
    inst = rel.build_trace_instance(world.gpk.tpk, ct1, b_prime, p, world.pp.ck)
    z = rel.pack_trace_witness(world.tsk.S1, world.tsk.E1, y, p)
    return Case(inst, z, {"ct1": ct1, "b_prime": b_prime, "uid": uid})


def denial_case(world: World, rng: Rng) -> Case:
    p = world.params
    uid, ct1, b_prime, y = _opening(world, rng)
    other = (uid + 1 + rng.randbelow(p.N - 1)) % p.N
    ob = fs.uid_bits(other, p).astype(np.int64)
    b = b_prime.astype(np.int64) - ob
    inst = rel.build_denial_instance(world.gpk.tpk, ct1, ob, p, world.pp.ck)
    z = rel.pack_denial_witness(world.tsk.S1, world.tsk.E1, y, b, p)
    return Case(inst, z, {"ct1": ct1, "uid_prime": ob, "b": b, "uid": uid})


CASES = {"gs": gs_case, "trace": trace_case, "denial": denial_case}

"""Scenario runner, the correctness experiment and micro-benchmarks.

Scenario files are line oriented; ``#`` starts a comment::

    profile T1
    seed 7
    join <user_seed>                         # prints the new uid
    revoke <uid>                             # queued until the next update
    update
    sign <uid> <sigref> <message...> [expect=sig|bottom]
    verify <sigref> [expect=1|0]
    trace <sigref> [expect=<uid>|bottom]
    deny <sigref> <uid'> [expect=ok|bottom]

``verify``, ``trace`` and ``deny`` use the most recently published group
information. Every step reports whether its outcome matched ``expect``.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import scheme as fs
from .errors import FdgsError
from .lattice import Params, Rng, get_profile
from .merkle import path_bits, t_acc, t_setup, t_update
from .regev import encrypt_pair
from .relations import build_gs_instance, make_gs_witness, pack_gs_witness
from .stern import fs_prove

# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Action:
    line: int
    verb: str
    args: list
    expect: str | None = None


@dataclass
class ScenarioScript:
    profile: str = "T1"
    seed: int = 0
    actions: list = field(default_factory=list)


VERBS = {"join": 1, "revoke": 1, "update": 0, "sign": 3, "verify": 1, "trace": 1, "deny": 2}


def parse_scenario(text: str, default_profile: str = "T1") -> ScenarioScript:
    script = ScenarioScript(profile=default_profile)
    for no, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        verb, rest = words[0].lower(), words[1:]
        if verb == "profile" and len(rest) == 1:
            script.profile = rest[0]
            continue
        if verb == "seed" and len(rest) == 1:
            script.seed = int(rest[0])
            continue
        if verb not in VERBS:
            raise ValueError(f"line {no}: unknown action {verb!r}")
        expect = None
        if rest and rest[-1].startswith("expect="):
            expect = rest.pop()[len("expect="):]
        need = VERBS[verb]
        if len(rest) < need or (verb != "sign" and len(rest) != need):
            raise ValueError(f"line {no}: {verb} takes {need} argument(s)")
        if verb == "sign":
            rest = rest[:2] + [" ".join(rest[2:])]
        script.actions.append(Action(no, verb, rest, expect))
    return script


@dataclass
class StepResult:
    line: int
    verb: str
    ok: bool
    detail: str


class Session:
    """In-memory parties for one scenario: GM, TM, users and signatures."""

    def __init__(self, profile: str | Params, seed: int):
        self.rng = Rng(seed)
        self.pp = fs.g_setup(profile, self.rng.fork("setup"))
        self.gpk, self.gm, self.tsk, self.info = fs.gkgen(self.pp, self.rng.fork("keys"))
        self.users: dict[int, fs.GroupSigningKey] = {}
        self.sigs: dict[str, tuple] = {}
        self.pending: list[int] = []

    def run(self, act: Action) -> StepResult:
        try:
            ok, detail = getattr(self, "_" + act.verb)(act.args, act.expect)
        except (FdgsError, ValueError, KeyError) as exc:
            ok, detail = False, f"error: {type(exc).__name__}: {exc}"
        return StepResult(act.line, act.verb, ok, detail)

    def _join(self, args, expect):
        ukey = fs.ukgen(self.pp, Rng(int(args[0])))
        gsk = fs.join(self.gm, ukey)
        self.users[gsk.uid] = gsk
        return True, f"uid={gsk.uid}"

    def _revoke(self, args, expect):
        self.pending.append(int(args[0]))
        return True, f"queued uid={args[0]}"

    def _update(self, args, expect):
        keys = fs.revoke_uids(self.gm, self.pending)
        self.info = fs.g_update(self.gm, keys)
        self.pending = []
        return True, f"epoch={self.info.epoch} active={len(self.info.witnesses)}"

    def _sign(self, args, expect):
        uid, ref, msg = int(args[0]), args[1], args[2].encode()
        sig = fs.sign(self.gpk, self.users[uid], self.info, msg, self.rng.fork(f"sign/{ref}"))
        if isinstance(sig, fs.Bottom):
            return expect == "bottom", f"bottom ({sig.reason})"
        self.sigs[ref] = (sig, msg, uid)
        return expect in (None, "sig"), f"bytes={len(sig.to_bytes(self.pp))}"

    def _verify(self, args, expect):
        sig, msg, _ = self.sigs[args[0]]
        res = int(fs.verify(self.gpk, self.info, msg, sig))
        return res == int(expect or 1), f"verify={res}"

    def _trace(self, args, expect):
        sig, msg, signer = self.sigs[args[0]]
        out = fs.trace(self.gpk, self.tsk, self.info, self.gm.reg, msg, sig, self.rng.fork(f"trace/{args[0]}"))
        if isinstance(out, fs.Bottom):
            return expect == "bottom", f"bottom ({out.reason})"
        verdict = fs.judge(self.gpk, out.uid, self.info, out, msg, sig)
        want = signer if expect in (None, "") else (None if expect == "bottom" else int(expect))
        return out.uid == want and verdict, f"uid={out.uid} judge={int(verdict)}"

    def _deny(self, args, expect):
        sig, msg, _ = self.sigs[args[0]]
        other = int(args[1])
        out = fs.d_trace(self.gpk, self.tsk, self.info, self.gm.reg, other, msg, sig,
                         self.rng.fork(f"deny/{args[0]}/{other}"))
        if isinstance(out, fs.Bottom):
            return expect == "bottom", f"bottom ({out.reason})"
        verdict = fs.d_judge(self.gpk, other, self.info, out, msg, sig)
        return verdict and expect in (None, "ok"), f"djudge={int(verdict)}"


def run_scenario(script: ScenarioScript | str, profile: str = "T1") -> list[StepResult]:
    if isinstance(script, str):
        script = parse_scenario(script, profile)
    session = Session(script.profile, script.seed)
    return [session.run(act) for act in script.actions]


# ---------------------------------------------------------------------------
# correctness experiment


@dataclass
class CorrReport:
    profile: str
    trials: int
    seed: int
    failures: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def add_time(self, op: str, seconds: float):
        self.timings.setdefault(op, []).append(seconds)

    def add_size(self, what: str, nbytes: int):
        self.sizes.setdefault(what, []).append(nbytes)

    def summary(self) -> dict:
        out = {"profile": self.profile, "trials": self.trials, "seed": self.seed,
               "failures": len(self.failures), "elapsed_s": round(self.elapsed, 3)}
        for op, xs in sorted(self.timings.items()):
            out[f"time_{op}_median_s"] = round(statistics.median(xs), 5)
        for what, xs in sorted(self.sizes.items()):
            out[f"size_{what}_mean_bytes"] = round(statistics.fmean(xs), 1)
        return out


def _timed(report: CorrReport, op: str, fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    report.add_time(op, time.perf_counter() - t)
    return out


def corr_trial(report: CorrReport, params: Params, rng: Rng, index: int) -> None:
    """One pass of the correctness experiment, extended with a denial for another honest user."""
    fail = lambda what: report.failures.append((index, what))  # noqa: E731
    pp = fs.g_setup(params, rng.fork("setup"))
    gpk, gm, tsk, _ = fs.gkgen(pp, rng.fork("keys"))
    joins = 3 + rng.randbelow(params.N - 2)
    users = [fs.join(gm, fs.ukgen(pp, rng.fork(f"user{i}"))) for i in range(joins)]
    info = fs.g_update(gm)
    gone = users[rng.randbelow(joins)]
    info = fs.g_update(gm, [gone.p])
    if fs.is_active(info, gm.reg, gone.uid) or fs.sign(gpk, gone, info, b"x", rng.fork("revoked")):
        fail("revoked user still active")
    honest = [u for u in users if fs.is_active(info, gm.reg, u.uid)]
    signer = honest[rng.randbelow(len(honest))]
    msg = rng.bytes(16)
    sig = _timed(report, "sign", fs.sign, gpk, signer, info, msg, rng.fork("sign"))
    if not sig:
        fail("sign returned bottom")
        return
    report.add_size("signature", len(sig.to_bytes(pp)))
    if not _timed(report, "verify", fs.verify, gpk, info, msg, sig):
        fail("verify")
    out = _timed(report, "trace", fs.trace, gpk, tsk, info, gm.reg, msg, sig, rng.fork("trace"))
    if not out or out.uid != signer.uid:
        fail("trace")
    else:
        report.add_size("trace_proof", len(out.to_bytes(params, pp.ck)))
        if not _timed(report, "judge", fs.judge, gpk, out.uid, info, out, msg, sig):
            fail("judge")
    others = [u for u in honest if u.uid != signer.uid]
    other = others[rng.randbelow(len(others))]
    den = _timed(report, "dtrace", fs.d_trace, gpk, tsk, info, gm.reg, other.uid, msg, sig, rng.fork("deny"))
    if not den:
        fail("dtrace")
    else:
        report.add_size("denial_proof", len(den.to_bytes(params, pp.ck)))
        if not _timed(report, "djudge", fs.d_judge, gpk, other.uid, info, den, msg, sig):
            fail("djudge")


def run_corr_experiment(profile: str | Params = "T1", trials: int = 50, seed: int = 0,
                        progress=None) -> CorrReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    params = get_profile(profile) if isinstance(profile, str) else profile.validate()
    report = CorrReport(params.name, trials, seed)
    root = Rng(seed)
    start = time.perf_counter()
    for t in range(trials):
        corr_trial(report, params, root.fork(f"trial{t}"), t)
        if progress:
            progress(t, report)
    report.elapsed = time.perf_counter() - start
    return report


# ---------------------------------------------------------------------------
# benchmarks


@dataclass
class BenchRow:
    profile: str
    op: str
    median_s: float
    reps: int
    note: str = ""


def _median_time(fn, reps: int) -> float:
    xs = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        xs.append(time.perf_counter() - t)
    return statistics.median(xs)


def bench(profile: str | Params = "T1", reps: int = 20, seed: int = 0) -> list[BenchRow]:
    params = get_profile(profile) if isinstance(profile, str) else profile.validate()
    rng = Rng(seed)
    name = params.name
    rows = []
    key = t_setup(params, rng.fork("acc"))
    leaves = rng.bits((params.N, params.nk))
    rows.append(BenchRow(name, "t_acc", _median_time(lambda: t_acc(key, leaves), reps), reps))
    tree, _ = t_acc(key, leaves)
    before = tree.writes
    j = rng.randbelow(params.N)
    leaf = rng.bits(params.nk)
    rows.append(BenchRow(name, "t_update", _median_time(lambda: t_update(tree, path_bits(j, params.ell), leaf), reps),
                         reps, f"node_writes={(tree.writes - before) // reps}"))

    pp = fs.g_setup(params, rng.fork("setup"))
    gpk, gm, tsk, _ = fs.gkgen(pp, rng.fork("keys"))
    users = [fs.join(gm, fs.ukgen(pp, rng.fork(f"u{i}"))) for i in range(min(4, params.N))]
    info = fs.g_update(gm)
    msg = b"bench"
    signer = users[0]
    sig = fs.sign(gpk, signer, info, msg, rng.fork("sig"))

    def sign_split():
        # the body of fs.sign with the proof timed on its own
        t0 = time.perf_counter()
        cts, r1, r2 = encrypt_pair(gpk.tpk, signer.bits(params), params, rng.fork("e"))
        inst = build_gs_instance(pp.key, info.root, gpk.tpk, cts, params, pp.ck)
        z = pack_gs_witness(make_gs_witness(pp.key, info.witnesses[signer.uid], signer.x, signer.p, r1, r2), params)
        ctx = fs.sign_context(gpk, info.root, msg, cts)
        t1 = time.perf_counter()
        fs_prove(inst, z, ctx, rng.fork("p"))
        t2 = time.perf_counter()
        return t2 - t0, t2 - t1

    split = [sign_split() for _ in range(reps)]
    t_sign = statistics.median(s for s, _ in split)
    share = sum(p for _, p in split) / sum(s for s, _ in split)
    rows.append(BenchRow(name, "sign", t_sign, reps, f"fs_prove_share={share:.2f}"))
    rows.append(BenchRow(name, "verify", _median_time(lambda: fs.verify(gpk, info, msg, sig), reps), reps))
    rows.append(BenchRow(name, "trace", _median_time(
        lambda: fs.trace(gpk, tsk, info, gm.reg, msg, sig, rng.fork("t")), reps), reps))
    return rows


def update_node_writes(params: Params) -> int:
    """Labels written by one t_update (leaf plus ancestors)."""
    key = t_setup(params, 0)
    tree, _ = t_acc(key, np.zeros((params.N, params.nk), dtype=np.uint8))
    t_update(tree, path_bits(0, params.ell), np.ones(params.nk, dtype=np.uint8))
    return tree.writes

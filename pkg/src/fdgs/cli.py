"""``fdgs`` command-line front end.

Every party keeps its files in one working directory (``--dir``, default ``.``)
under fixed names, so a full run is a short sequence of commands::

    fdgs setup --profile T1 --seed 7
    fdgs keygen-tm --seed 8
    fdgs keygen-gm --seed 9
    fdgs ukeygen --seed 10 --out alice.bin
    fdgs join --user alice.bin
    fdgs update
    fdgs sign --gsk gsk_0.bin --message hello
    fdgs verify --message hello

Exit codes: 0 success or accept, 1 reject or bottom, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys
from pathlib import Path

from . import scheme as fs
from .errors import DecodeError, FdgsError
from .experiments import bench, parse_scenario, run_corr_experiment, run_scenario, update_node_writes
from .lattice import Params, get_profile

OK, REJECT, USAGE = 0, 1, 2

FILES = {
    "pp": "pp.bin", "tpk": "tpk.bin", "tsk": "tsk.bin", "gpk": "gpk.bin", "msk": "msk.bin",
    "reg": "reg.bin", "info": "info.bin", "sig": "sig.bin", "trace": "trace.bin", "deny": "deny.bin",
}


class UsageError(Exception):
    pass


def parse_profile(text: str) -> Params:
    """``T1`` or a profile with overrides such as ``T1:ell=4,kappa=16``."""
    name, _, rest = text.partition(":")
    overrides = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq or key not in ("n", "q", "ell", "beta", "kappa", "commitment"):
            raise UsageError(f"bad profile override {item!r}")
        overrides[key] = val if key == "commitment" else int(val)
    base = get_profile(name)
    return base.with_(name=text, **overrides).validate() if overrides else base


# ---------------------------------------------------------------------------
# output and file helpers


class Ctx:
    def __init__(self, args):
        self.args = args
        self.dir = Path(args.dir)
        self.porcelain = args.porcelain
        self.seed = args.seed if getattr(args, "seed", None) is not None else secrets.randbits(63)

    def path(self, name: str | None, default: str) -> Path:
        p = Path(name or default)
        return p if p.is_absolute() else self.dir / p

    def read(self, name: str | None, default: str) -> bytes:
        path = self.path(name, default)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None

    def write(self, name: str | None, default: str, data: bytes) -> Path:
        path = self.path(name, default)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc.strerror}") from None
        return path

    def emit(self, human: str, **fields):
        fields = {"seed": self.seed, **fields}
        if self.porcelain:
            for k, v in fields.items():
                print(f"{k}={v}")
        else:
            print(f"{human} (seed {self.seed})")

    def pp(self) -> fs.PublicParams:
        return fs.PublicParams.from_bytes(self.read(self.args.pp, FILES["pp"]))

    def gpk(self) -> fs.GroupPublicKey:
        return fs.GroupPublicKey.from_bytes(self.read(self.args.gpk, FILES["gpk"]))

    def info(self, params) -> fs.GroupInfo:
        return fs.GroupInfo.from_bytes(self.read(self.args.info, FILES["info"]), params)

    def gm(self, pp) -> fs.GMState:
        reg = fs.RegTable.from_bytes(self.read(None, FILES["reg"]), pp.params)
        return fs.GMState.from_bytes(self.read(None, FILES["msk"]), pp, reg)

    def save_gm(self, gm: fs.GMState):
        self.write(None, FILES["msk"], gm.to_bytes())
        self.write(None, FILES["reg"], gm.reg.to_bytes(gm.params))

    def message(self) -> bytes:
        a = self.args
        if a.message_file:
            return self.read(a.message_file, a.message_file)
        if a.message is None:
            raise UsageError("give --message or --message-file")
        return a.message.encode()

    def sig(self, gpk):
        """The signature, or None when the file does not decode (a reject, not an I/O error)."""
        data = self.read(self.args.sig, FILES["sig"])
        try:
            return fs.Signature.from_bytes(data, gpk.pp)
        except DecodeError:
            return None


# ---------------------------------------------------------------------------
# subcommands


def cmd_setup(c: Ctx) -> int:
    pp = fs.g_setup(parse_profile(c.args.profile), c.seed)
    path = c.write(c.args.out, FILES["pp"], pp.to_bytes())
    c.emit(f"wrote {path} for profile {pp.params.name}", profile=pp.params.name, out=path)
    return OK


def cmd_keygen_tm(c: Ctx) -> int:
    pp = c.pp()
    tpk, tsk = fs.gkgen_tm(pp, c.seed)
    a = c.write(c.args.tpk_out, FILES["tpk"], fs.tpk_to_bytes(tpk, pp.params))
    b = c.write(c.args.tsk_out, FILES["tsk"], tsk.to_bytes(pp.params))
    c.emit(f"wrote {a} and {b}", tpk=a, tsk=b)
    return OK


def cmd_keygen_gm(c: Ctx) -> int:
    pp = c.pp()
    tpk = fs.tpk_from_bytes(c.read(c.args.tpk, FILES["tpk"]), pp.params)
    gpk, gm, info = fs.gkgen_gm(pp, tpk, c.seed)
    c.write(None, FILES["gpk"], gpk.to_bytes())
    c.save_gm(gm)
    c.write(None, "info_0.bin", info.to_bytes(pp.params))
    c.write(None, FILES["info"], info.to_bytes(pp.params))
    c.emit(f"wrote gpk, msk, reg and info_0 to {c.dir}", epoch=0)
    return OK


def cmd_ukeygen(c: Ctx) -> int:
    pp = c.pp()
    ukey = fs.ukgen(pp, c.seed)
    path = c.write(c.args.out, f"user_{c.seed}.bin", ukey.to_bytes(pp.params))
    c.emit(f"wrote {path}", out=path)
    return OK


def cmd_join(c: Ctx) -> int:
    pp = c.pp()
    gm = c.gm(pp)
    ukey = fs.UserKey.from_bytes(c.read(c.args.user, c.args.user), pp.params)
    gsk = fs.join(gm, ukey)
    c.save_gm(gm)
    path = c.write(c.args.out, f"gsk_{gsk.uid}.bin", gsk.to_bytes(pp.params))
    c.emit(f"joined uid {gsk.uid}; wrote {path}; active from epoch {gm.epoch + 1}", uid=gsk.uid, out=path)
    return OK


def cmd_update(c: Ctx) -> int:
    pp = c.pp()
    gm = c.gm(pp)
    info = fs.g_update(gm, fs.revoke_uids(gm, c.args.revoke))
    c.save_gm(gm)
    c.write(None, f"info_{info.epoch}.bin", info.to_bytes(pp.params))
    c.write(None, FILES["info"], info.to_bytes(pp.params))
    active = ",".join(map(str, sorted(info.witnesses)))
    c.emit(f"epoch {info.epoch}; active uids [{active}]", epoch=info.epoch, active=active)
    return OK


def cmd_sign(c: Ctx) -> int:
    gpk = c.gpk()
    p = gpk.params
    gsk = fs.GroupSigningKey.from_bytes(c.read(c.args.gsk, c.args.gsk), p)
    sig = fs.sign(gpk, gsk, c.info(p), c.message(), c.seed)
    if not sig:
        c.emit(f"bottom: {sig.reason}", result="bottom", reason=sig.reason)
        return REJECT
    data = sig.to_bytes(gpk.pp)
    path = c.write(c.args.out, FILES["sig"], data)
    c.emit(f"wrote {path} ({len(data)} bytes)", result="ok", out=path, bytes=len(data))
    return OK


def _verdict(c: Ctx, ok: bool, what: str) -> int:
    c.emit(f"{what}: {'accept' if ok else 'reject'}", result=int(ok))
    return OK if ok else REJECT


def cmd_verify(c: Ctx) -> int:
    gpk = c.gpk()
    info, msg, sig = c.info(gpk.params), c.message(), c.sig(gpk)
    return _verdict(c, sig is not None and fs.verify(gpk, info, msg, sig), "verify")


def cmd_trace(c: Ctx) -> int:
    gpk = c.gpk()
    p = gpk.params
    info, msg, sig = c.info(p), c.message(), c.sig(gpk)
    if sig is None:
        c.emit("bottom: signature does not decode", result="bottom", reason="DecodeError")
        return REJECT
    tsk = fs.TracingSecret.from_bytes(c.read(c.args.tsk, FILES["tsk"]), p)
    reg = fs.RegTable.from_bytes(c.read(c.args.reg, FILES["reg"]), p)
    out = fs.trace(gpk, tsk, info, reg, msg, sig, c.seed)
    if not out:
        c.emit(f"bottom: {out.reason}", result="bottom", reason=out.reason)
        return REJECT
    path = c.write(c.args.out, FILES["trace"], out.to_bytes(p, gpk.pp.ck))
    c.emit(f"signer uid {out.uid}; wrote {path}", result="ok", uid=out.uid, out=path)
    return OK


def cmd_judge(c: Ctx) -> int:
    gpk = c.gpk()
    p = gpk.params
    info, msg, sig = c.info(p), c.message(), c.sig(gpk)
    try:
        out = fs.TraceOutput.from_bytes(c.read(c.args.proof, FILES["trace"]), p, gpk.pp.ck)
    except DecodeError:
        out = None
    ok = sig is not None and out is not None and fs.judge(gpk, c.args.uid, info, out, msg, sig)
    return _verdict(c, ok, f"judge uid {c.args.uid}")


def cmd_dtrace(c: Ctx) -> int:
    gpk = c.gpk()
    p = gpk.params
    info, msg, sig = c.info(p), c.message(), c.sig(gpk)
    if sig is None:
        c.emit("bottom: signature does not decode", result="bottom", reason="DecodeError")
        return REJECT
    tsk = fs.TracingSecret.from_bytes(c.read(c.args.tsk, FILES["tsk"]), p)
    reg = fs.RegTable.from_bytes(c.read(c.args.reg, FILES["reg"]), p)
    out = fs.d_trace(gpk, tsk, info, reg, c.args.uid, msg, sig, c.seed)
    if not out:
        c.emit(f"bottom: {out.reason}", result="bottom", reason=out.reason)
        return REJECT
    path = c.write(c.args.out, FILES["deny"], out.to_bytes(p, gpk.pp.ck))
    c.emit(f"uid {out.uid} denied; wrote {path}", result="ok", uid=out.uid, out=path)
    return OK


def cmd_djudge(c: Ctx) -> int:
    gpk = c.gpk()
    p = gpk.params
    info, msg, sig = c.info(p), c.message(), c.sig(gpk)
    try:
        out = fs.DenialProof.from_bytes(c.read(c.args.proof, FILES["deny"]), p, gpk.pp.ck)
    except DecodeError:
        out = None
    ok = sig is not None and out is not None and fs.d_judge(gpk, c.args.uid, info, out, msg, sig)
    return _verdict(c, ok, f"denial for uid {c.args.uid}")


def cmd_run_scenario(c: Ctx) -> int:
    text = c.read(c.args.file, c.args.file).decode()
    try:
        script = parse_scenario(text, c.args.profile)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if c.args.seed is None:
        c.seed = script.seed
    script.seed = c.seed
    results = run_scenario(script)
    failed = [r for r in results if not r.ok]
    for r in results:
        if c.porcelain:
            print(f"step.{r.line}.{r.verb}={'ok' if r.ok else 'fail'} {r.detail}")
        else:
            print(f"line {r.line:>3} {r.verb:<7} {'ok  ' if r.ok else 'FAIL'} {r.detail}")
    c.emit(f"{len(results) - len(failed)}/{len(results)} steps ok", steps=len(results), failures=len(failed))
    return OK if not failed else REJECT


def cmd_run_corr(c: Ctx) -> int:
    params = parse_profile(c.args.profile)
    report = run_corr_experiment(params, c.args.trials, c.seed)
    summary = report.summary()
    for idx, what in report.failures:
        print(f"failure trial={idx} step={what}", file=sys.stderr)
    if c.args.plot_dir:
        from .plotting import plot_corr
        summary["plot"] = plot_corr(report, Path(c.args.plot_dir) / f"corr_{params.name}.png")
    summary.pop("seed")
    c.emit(" ".join(f"{k}={v}" for k, v in summary.items()), **summary)
    return OK if not report.failures else REJECT


def cmd_bench(c: Ctx) -> int:
    rows, ells, writes = [], [], []
    for name in c.args.profile:
        params = parse_profile(name)
        rows.extend(bench(params, c.args.reps, c.seed))
        ells.append(params.ell)
        writes.append(update_node_writes(params))
    print("profile\top\tmedian_ms\treps\tnote")
    for r in rows:
        print(f"{r.profile}\t{r.op}\t{r.median_s * 1e3:.3f}\t{r.reps}\t{r.note}")
    fields = {}
    if c.args.plot_dir:
        from .plotting import plot_bench, plot_update_writes
        fields["plot_times"] = plot_bench(rows, Path(c.args.plot_dir) / "bench_times.png")
        fields["plot_updates"] = plot_update_writes(ells, writes, Path(c.args.plot_dir) / "update_writes.png")
    c.emit(f"benchmarked {len(c.args.profile)} profile(s)", rows=len(rows), **fields)
    return OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    default_profile = os.environ.get("FDGS_PROFILE", "T1")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dir", default=".", help="working directory for key and state files")
    common.add_argument("--porcelain", action="store_true", help="print key=value lines only")
    common.add_argument("--seed", type=int, help="master seed (random when omitted; always printed)")

    ap = argparse.ArgumentParser(prog="fdgs", description="Lattice group signatures with deniability.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(fn=fn)
        return p

    def with_msg(p, sig=True):
        p.add_argument("--gpk")
        p.add_argument("--info", help="group information file (default info.bin)")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--message")
        g.add_argument("--message-file")
        if sig:
            p.add_argument("--sig")
        return p

    p = add("setup", cmd_setup, "generate public parameters")
    p.add_argument("--profile", default=default_profile)
    p.add_argument("--out")

    p = add("keygen-tm", cmd_keygen_tm, "tracing manager keys")
    p.add_argument("--pp")
    p.add_argument("--tpk-out")
    p.add_argument("--tsk-out")

    p = add("keygen-gm", cmd_keygen_gm, "group manager keys, registration table and info_0")
    p.add_argument("--pp")
    p.add_argument("--tpk")

    p = add("ukeygen", cmd_ukeygen, "user key pair")
    p.add_argument("--pp")
    p.add_argument("--out")

    p = add("join", cmd_join, "register a user key")
    p.add_argument("--pp")
    p.add_argument("--user", required=True)
    p.add_argument("--out")

    p = add("update", cmd_update, "advance the epoch, optionally revoking uids")
    p.add_argument("--pp")
    p.add_argument("--revoke", type=int, nargs="*", default=[])

    p = with_msg(add("sign", cmd_sign, "sign a message"), sig=False)
    p.add_argument("--gsk", required=True)
    p.add_argument("--out")

    with_msg(add("verify", cmd_verify, "verify a signature"))

    for name, fn, help_ in (("trace", cmd_trace, "open a signature"),
                            ("dtrace", cmd_dtrace, "prove a uid is not the signer")):
        p = with_msg(add(name, fn, help_))
        p.add_argument("--tsk")
        p.add_argument("--reg")
        p.add_argument("--out")
        if name == "dtrace":
            p.add_argument("--uid", type=int, required=True)

    for name, fn, help_ in (("judge", cmd_judge, "check a trace proof"),
                            ("djudge", cmd_djudge, "check a denial proof")):
        p = with_msg(add(name, fn, help_))
        p.add_argument("--uid", type=int, required=True)
        p.add_argument("--proof")

    p = add("run-scenario", cmd_run_scenario, "run a scenario file")
    p.add_argument("file")
    p.add_argument("--profile", default=default_profile)

    p = add("run-corr-experiment", cmd_run_corr, "randomized end-to-end correctness trials")
    p.add_argument("--profile", default=default_profile)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--plot-dir")

    p = add("bench", cmd_bench, "median timings per operation")
    p.add_argument("--profile", nargs="+", default=[default_profile])
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--plot-dir")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", 1) < 1 or getattr(args, "reps", 1) < 1:
        print("error: trials and reps must be >= 1", file=sys.stderr)
        return USAGE
    try:
        return args.fn(Ctx(args))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except FdgsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())

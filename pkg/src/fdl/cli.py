"""Command-line front end.

Every run writes its outputs plus ``manifest.json`` (argv, seed, versions,
timings, output checksums) into ``--out-dir``.  ``--manifest PATH``
replays a previous run from that file alone.

Exit codes: 0 success, 2 some verification flag is false (outputs are
still written), 1 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .errors import FdlError

EXIT_OK, EXIT_ERROR, EXIT_FALSE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


class Run:
    """Collects outputs written by a command."""

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs = {}
        self.flags = {}

    def path(self, name):
        p = Path(name)
        return p if p.is_absolute() else self.out_dir / p

    def write_text(self, name, text):
        p = self.path(name)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
        self.register(p)
        return p

    def register(self, p):
        p = Path(p)
        self.outputs[str(p)] = hashlib.sha256(p.read_bytes()).hexdigest()

    def flag(self, name, value):
        self.flags[name] = bool(value)


# ---------------------------------------------------------------------------
# commands


def cmd_build_lp(a, run):
    from .lp_saturator import build_saturating_lp
    from .trigcore import save_poly

    g = build_saturating_lp(a.p, a.jmax)
    p = run.path(a.out)
    save_poly(g, p)
    run.register(p)
    print(f"wrote {p}: degree {g.degree()}, {g.width} coefficients")


def cmd_build_ct(a, run):
    from .ct_saturator import build_saturating_ct, save_block, search_k
    from .trigcore import save_poly

    if a.betas:
        betas = [float(b) for b in a.betas.split(",")]
        g, layout = build_saturating_ct(betas, [a.delta] * len(betas), jmax=a.jmax, k_min=a.k_min,
                                        with_layout=True)
        p = run.path(a.out)
        save_poly(g, p)
        run.register(p)
        run.write_text(Path(a.out).with_suffix(".layout.csv").name, _csv_text(
            ["j", "l", "beta", "delta", "k", "n", "weight"],
            [(c.j, c.l, c.beta, c.delta, c.k, c.n, c.weight) for c in layout]))
        print(f"wrote {p}: {len(layout)} blocks, degree {g.degree()}")
        return
    k_max = a.k_max or a.k_min
    blk, rep, found = search_k(a.beta, a.delta, a.k_min, k_max)
    p = run.path(a.out)
    save_block(blk, p, rep)
    run.register(p)
    run.flag("ct_bound", found)
    print(f"wrote {p}: k = {blk.spec.k}, n = {blk.spec.n}, min ratio {rep.min_ratio:.4f} "
          f"vs target {rep.target:.4f} -> {'holds' if found else 'does not hold'}")


def cmd_verify(a, run):
    if a.what == "fejer":
        _verify_fejer(a, run)
    elif a.what == "lp-jumps":
        _verify_lp(a, run)
    else:
        _verify_ct(a, run)


def _verify_fejer(a, run):
    from .fejer_estimates import falsification_sweep, fejer_tail_u

    u = fejer_tail_u(a.n, a.delta)
    rows = [("u", a.n, a.delta, u, "", "")]
    if a.trials:
        reps = falsification_sweep(np.random.default_rng(a.seed), a.trials)
        rows += [(r.bound_form, r.n, r.delta, r.lhs, r.rhs, int(r.holds)) for r in reps]
        run.flag("fejer_sweep", all(r.holds for r in reps))
    run.write_text(a.out or "fejer.csv", _csv_text(["kind", "n", "delta", "value", "bound", "holds"], rows))
    print(f"u_{a.n}({a.delta:g}) = {u:.6f}")


def _verify_lp(a, run):
    from .dyadic import interval_family_IJj
    from .lp_saturator import build_gj, witness_jumps_batch
    from .trigcore import certified_lp_norm

    g = build_gj(a.j, a.p)
    norm, M, _ = certified_lp_norm(g, a.p)
    rows = []
    for J in range(1, a.j + 1):
        xs = interval_family_IJj(J, a.j).sample_points(a.per_arc).ravel()
        for w in witness_jumps_batch(g, xs, J, a.j, a.p):
            rows.append((J, w.x, w.n1, w.n2, w.gap, w.bound, int(w.holds)))
    run.write_text(a.out or "lp_jumps.csv", _csv_text(["J", "x", "n1", "n2", "gap", "bound", "holds"], rows))
    ok = all(r[-1] for r in rows)
    run.flag("lp_jumps", ok)
    run.flag("lp_norm", norm <= 1 + 1e-9)
    print(f"||g_{a.j}||_{a.p:g} = {norm:.6f}; {sum(r[-1] for r in rows)}/{len(rows)} jumps hold")


def _verify_ct(a, run):
    from .ct_saturator import load_block, verify_ct_bound

    if not a.inp:
        raise UsageError("verify ct-bound: --in is required")
    blk = load_block(a.inp)
    rep = verify_ct_bound(blk)
    run.write_text(a.out or "ct_bound.csv", rep.to_csv())
    run.flag("ct_bound", rep.flag)
    print(f"k = {rep.k}, n = {rep.n}: min log|S_nP|/loglog n = {rep.min_ratio:.4f}, target {rep.target:.4f}")


def cmd_profile(a, run):
    from .spectrum import divergence_profile
    from .trigcore import load_poly

    f = load_poly(a.inp)
    N = None if a.N in (None, "max") else int(a.N)
    pr = divergence_profile(f, a.x, N, a.mode)
    rows = list(zip(pr.checkpoints.tolist(), pr.running_max.tolist()))
    run.write_text(a.out or "profile.csv", _csv_text(["n", "running_max"], rows))
    doc = {"x": pr.x, "beta_poly": pr.beta_poly, "beta_log": pr.beta_log, "n_min": pr.n_min,
           "N": int(pr.checkpoints[-1]), "mode": a.mode}
    run.write_text(Path(a.out or "profile.csv").with_suffix(".json").name,
                   json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"beta_poly = {pr.beta_poly:.6f}, beta_log = {pr.beta_log:.6f}")


def cmd_spectrum(a, run):
    from .spectrum import Mode, empirical_spectrum
    from .trigcore import load_poly

    f = load_poly(a.inp)
    mode = Mode(a.mode, a.p if a.mode == "lp" else None)
    N = None if a.N in (None, "max") else int(a.N)
    t = empirical_spectrum(f, mode, a.grid, N, half_width=a.half_width)
    out = a.out or "spectrum.csv"
    run.write_text(out, t.to_csv())
    run.write_text(Path(out).with_suffix(".json").name, t.to_json())
    if a.plot:
        from .plot import plot_spectrum

        p = run.path(a.plot)
        plot_spectrum(t, p)
        run.register(p)
    print(t.to_csv(), end="")


def cmd_geom(a, run):
    from . import dyadic

    if a.family == "IJj":
        F = dyadic.interval_family_IJj(a.J, a.j, a.primed)
    elif a.family == "ikbeta":
        F = dyadic.ikbeta_family(a.k, a.beta)
    elif a.family == "blowup":
        F = dyadic.blown_up_family(a.j, a.alpha)
    else:
        F = dyadic.dyadic_family(a.j)
    out = a.out or "family.csv"
    run.write_text(out, F.to_csv())
    doc = {"label": F.label, "arcs": len(F), "measure": F.measure(), "union_measure": F.union_measure(),
           "disjoint": F.pairwise_disjoint(), "covers": dyadic.covering_check(F)}
    run.write_text(Path(out).with_suffix(".json").name, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(json.dumps(doc, sort_keys=True))


def cmd_plot(a, run):
    from .plot import plot_spectrum
    from .spectrum import SpectrumTable

    t = SpectrumTable.from_json_dict(json.loads(Path(a.inp).read_text()))
    p = run.path(a.out)
    plot_spectrum(t, p)
    run.register(p)


# ---------------------------------------------------------------------------


def build_parser():
    ap = _Parser(prog="fdl", description="Partial-sum divergence laboratory.")
    ap.add_argument("--out-dir", default=".", help="directory for outputs and manifest.json")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    ap.add_argument("--manifest", help="replay the run recorded in this manifest")
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    _add = sub.add_parser

    def add(name, **kw):
        return _add(name, parents=[common], **kw)


    s = add("build-lp", help="truncated L^p saturating polynomial")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--jmax", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build_lp)

    s = add("build-ct", help="bounded block (or composite) with large partial sums")
    s.add_argument("--beta", type=float, default=0.5)
    s.add_argument("--delta", type=float, default=0.3)
    s.add_argument("--k-min", type=int, default=64)
    s.add_argument("--k-max", type=int)
    s.add_argument("--betas", help="comma-separated betas: build the composite instead")
    s.add_argument("--jmax", type=int, default=3)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build_ct)

    s = add("verify", help="check one of the quantitative bounds")
    s.add_argument("what", choices=["fejer", "lp-jumps", "ct-bound"])
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--trials", type=int, default=0)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--j", type=int, default=6)
    s.add_argument("--per-arc", type=int, default=32)
    s.add_argument("--in", dest="inp")
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = add("profile", help="divergence profile at one point")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--x", type=float, required=True)
    s.add_argument("--mode", choices=["lp", "ct"], default="lp")
    s.add_argument("--N")
    s.add_argument("--out")
    s.set_defaults(func=cmd_profile)

    s = add("spectrum", help="empirical divergence spectrum on a grid")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--mode", choices=["lp", "ct"], required=True)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--grid", type=int, default=1 << 14)
    s.add_argument("--N", default="max")
    s.add_argument("--half-width", type=float, default=0.05)
    s.add_argument("--plot")
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    s = add("geom", help="arc families")
    s.add_argument("--family", choices=["IJj", "ikbeta", "blowup", "dyadic"], required=True)
    s.add_argument("--J", type=int, default=1)
    s.add_argument("--j", type=int, default=4)
    s.add_argument("--primed", action="store_true")
    s.add_argument("--k", type=int, default=16)
    s.add_argument("--beta", type=float, default=0.5)
    s.add_argument("--alpha", type=float, default=2.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_geom)

    s = add("plot", help="SVG from a spectrum JSON")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot)
    return ap


def _versions():
    import matplotlib
    import numba
    import scipy

    return {"fdl": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__, "matplotlib": matplotlib.__version__,
            "backend": _accel.BACKEND}


def run(argv):
    """Parse and execute; returns the exit code."""
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.manifest:
        doc = json.loads(Path(a.manifest).read_text())
        replay = list(doc["argv"])
        if "--out-dir" in argv:
            replay = ["--out-dir", a.out_dir] + replay
        a = ap.parse_args(replay)
        argv = replay
    if not a.command:
        raise UsageError("fdl: a command is required")
    r = Run(a.out_dir)
    t0 = time.perf_counter()
    a.func(a, r)
    elapsed = time.perf_counter() - t0
    clean = [v for i, v in enumerate(argv) if v != "--out-dir" and (i == 0 or argv[i - 1] != "--out-dir")]
    manifest = {
        "command": a.command,
        "argv": clean,
        "params": {k: v for k, v in sorted(vars(a).items()) if k not in ("func", "manifest")},
        "seed": a.seed,
        "versions": _versions(),
        "timings": {"total_s": elapsed},
        "outputs": r.outputs,
        "flags": r.flags,
    }
    (r.out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n")
    return EXIT_OK if all(r.flags.values()) else EXIT_FALSE


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return run(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, FdlError, ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

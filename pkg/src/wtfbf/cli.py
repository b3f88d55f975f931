"""Command-line front end: `wtfbf <command> ...`.

Exit status: 0 success, 1 a verification check failed, 2 usage or
validation error. Reports go to stdout as JSON.
"""
import argparse
import csv
import glob
import json
import os
import sys

import numpy as np

from . import __version__
from . import besov as bv
from . import estimation as est
from . import hyperbolic as hy
from . import io
from . import verify
from .errors import WTFBFError
from .model import (FieldParams, QuadratureSpec, coeff_variance_exact, covariance,
                    field_variance, increment_variance)
from .parallel import ENV_THREADS
from .synthesis import (CHOLESKY_MAX_POINTS, GridSpec, cholesky_synthesize, frequency_grid,
                        spectral_synthesize)


class UsageError(Exception):
    pass


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def _finite(x):
    return None if x is None or not np.isfinite(x) else float(x)


def _manifest(args, argv, inputs=(), outputs=(), out_base=None):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    path, _ = io.write_manifest(out_base or outputs[0], args.command, params,
                                getattr(args, "seed", None), __version__, inputs, outputs)
    # the manifest also records the argument vector so `replay` can re-run it
    with open(path) as f:
        m = json.load(f)
    m["argv"] = list(argv)
    with open(path, "w") as f:
        json.dump(m, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args, argv):
    params = FieldParams(args.alpha, args.hurst)
    grid = GridSpec.square(args.size, args.extent, args.origin)
    if args.method == "cholesky" and args.size ** 2 > CHOLESKY_MAX_POINTS:
        raise UsageError(f"cholesky method is limited to N^2 <= {CHOLESKY_MAX_POINTS} points "
                         f"(got N={args.size}); use --method spectral")
    if args.method == "cholesky":
        field = cholesky_synthesize(params, grid, args.seed)
    else:
        freq = frequency_grid(grid, params, xi_max=args.xi_max, band_limit=args.band_limit)
        field = spectral_synthesize(params, grid, freq, args.seed)
    io.write_grid(args.out, field)
    m = _manifest(args, argv, outputs=[args.out])
    _emit({"out": args.out, "manifest": m, "shape": list(grid.shape), "method": args.method})
    return 0


def _summary_rows(coeffs):
    means = hy.member_level_means(coeffs)
    rows = []
    for jb in coeffs.levels():
        n = coeffs.interior_block(*jb).size
        rows.append({"j1": jb[0], "j2": jb[1], "interior_count": n,
                     "mean_sq": means.get(jb, float("nan")),
                     "log2_mean_sq": float(np.log2(means[jb])) if means.get(jb, 0) > 0 else float("nan")})
    return rows


def cmd_analyze(args, argv):
    field = io.read_grid(args.inp)
    coeffs = hy.analyze(field, args.levels, margin=args.margin)
    fmt = args.format or ("jsonl" if args.out.endswith(".jsonl") else "bin")
    io.write_coeffs(args.out, coeffs, fmt)
    summary = args.summary or args.out + ".levels.csv"
    rows = _summary_rows(coeffs)
    with open(summary, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    m = _manifest(args, argv, inputs=[args.inp], outputs=[args.out, summary])
    _emit({"out": args.out, "summary": summary, "manifest": m, "format": fmt,
           "levels": len(coeffs.blocks)})
    return 0


def cmd_estimate(args, argv):
    paths = sorted(p for pat in args.inp for p in glob.glob(pat))
    if not paths:
        raise UsageError(f"no coefficient files match {args.inp}")
    ensemble = [io.read_coeffs(p) for p in paths]
    means, levels = est.ensemble_means(ensemble, minimum=1)
    fit, point = est.estimate(means, levels, args.weighted)
    report = {
        "members": len(ensemble),
        "hurst": point.hurst, "alpha": point.alpha,
        "hurst_clamped": point.hurst_clamped, "alpha_clamped": point.alpha_clamped,
        "h_plus": fit.h_plus_hat, "h_minus": fit.h_minus_hat,
        "intercept": fit.intercept, "residual_rms": fit.residual_rms,
        "levels_used": [list(j) for j in fit.levels_used],
        "weighted": args.weighted,
    }
    if args.bootstrap:
        b = est.bootstrap_ci(None, args.bootstrap, args.confidence, seed=args.seed,
                             threads=args.threads, weighted=args.weighted,
                             member_means=(means, levels))
        report.update({"hurst_ci": list(b.hurst_ci), "alpha_ci": list(b.alpha_ci),
                       "confidence": args.confidence, "resamples": args.bootstrap})
    _emit(report, args.out)
    if args.out:
        _manifest(args, argv, inputs=paths, outputs=[args.out])
    return 0


def cmd_verify(args, argv):
    suites = list(verify.SUITES) if args.suite == "all" else [args.suite]
    cfg = verify.Config(threads=args.threads)
    failed = 0

    def show(ch):
        nonlocal failed
        failed += ch.passed is False
        print(json.dumps(ch.as_dict(), default=_jsonable), flush=True)

    checks = verify.run(suites, budget=args.budget, cfg=cfg, on_check=show)
    n = {s: sum(c.passed is s for c in checks) for s in (True, False, None)}
    print(json.dumps({"summary": {"pass": n[True], "fail": n[False], "skipped": n[None]}}))
    return 1 if failed else 0


def cmd_oracle(args, argv):
    params = FieldParams(args.alpha, args.hurst)
    quad = QuadratureSpec(rel_tol=args.tol)
    what = args.what
    if what == "variance":
        x = _need(args.x, "--x")
        v, e = field_variance(params, x[0], x[1], quad, full_output=True)
    elif what == "increment-variance":
        h = _need(args.h, "--h")
        v, e = increment_variance(params, h[0], h[1], quad, full_output=True)
    elif what == "covariance":
        v, e = covariance(params, _need(args.x, "--x"), _need(args.y, "--y"), quad, full_output=True)
    else:
        j = _need(args.j, "--j")
        v, e = coeff_variance_exact(params, int(j[0]), int(j[1]), quad=quad, full_output=True)
    _emit({"what": what, "alpha": params.alpha, "hurst": params.hurst,
           "value": float(v), "error": float(e)})
    return 0


def _need(v, flag):
    if v is None:
        raise UsageError(f"{flag} is required for this --what")
    return v


def cmd_besov_norm(args, argv):
    coeffs = io.read_coeffs(args.inp)
    spec = bv.BesovSpec(args.s, args.alpha, args.p, args.q)
    member, sup = bv.holder_membership(coeffs, args.s, args.alpha)
    rep = bv.embedding_check(coeffs, max(args.s, 0.0), args.alpha, args.p, args.q)
    _emit({
        "s": args.s, "alpha": args.alpha, "p": _finite(args.p), "q": _finite(args.q),
        "p_is_inf": bool(np.isinf(args.p)), "q_is_inf": bool(np.isinf(args.q)),
        "sequence_norm": bv.sequence_norm(coeffs, spec, args.convention),
        "convention": args.convention,
        "holder_member": member, "holder_sup_constant": sup,
        "embedding_norms": rep.norms, "embedding_checks": rep.checks,
    }, args.out)
    return 0


def cmd_replay(args, argv):
    with open(args.manifest) as f:
        m = json.load(f)
    if "argv" not in m:
        raise UsageError("manifest has no recorded argument vector")
    return main(m["argv"])


# ---------------------------------------------------------------------------
# parser

def _exponent(s):
    return np.inf if s.lower() in ("inf", "infinity") else float(s)


def build_parser():
    ap = argparse.ArgumentParser(prog="wtfbf", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=None,
                    help=f"worker cap (default from ${ENV_THREADS}, else 1)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize one realization on a square grid")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--size", type=int, required=True, help="grid points per axis")
    p.add_argument("--extent", type=float, default=1.0)
    p.add_argument("--origin", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("cholesky", "spectral"), default="spectral")
    p.add_argument("--xi-max", type=float, default=None, help="spectral truncation box")
    p.add_argument("--band-limit", action="store_true",
                   help="truncate the spectrum at the grid Nyquist frequency")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="hyperbolic wavelet coefficients of a grid file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--levels", type=int, required=True, help="max level J")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("jsonl", "bin"), default=None)
    p.add_argument("--margin", type=float, default=hy.ANALYSIS_MARGIN,
                   help="taper fraction at each end (0 = treat as periodic)")
    p.add_argument("--summary", default=None, help="per-level CSV (default OUT.levels.csv)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("estimate", help="(H, alpha) from coefficient files")
    p.add_argument("--in", dest="inp", nargs="+", required=True, help="files or glob patterns")
    p.add_argument("--bootstrap", type=int, default=0, help="resamples (0 = point estimate only)")
    p.add_argument("--confidence", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weighted", action="store_true", help="weighted least squares")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run acceptance suites")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), required=True)
    p.add_argument("--budget", type=float, default=None, help="seconds")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="quadrature values of second-order quantities")
    p.add_argument("--what", required=True,
                   choices=("variance", "covariance", "increment-variance", "coeff-variance"))
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--x", type=float, nargs=2)
    p.add_argument("--y", type=float, nargs=2)
    p.add_argument("--h", type=float, nargs=2)
    p.add_argument("--j", type=int, nargs=2)
    p.add_argument("--tol", type=float, default=1e-6, help="relative tolerance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("besov-norm", help="Besov / Hoelder report for a coefficient file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--p", type=_exponent, default=np.inf)
    p.add_argument("--q", type=_exponent, default=np.inf)
    p.add_argument("--convention", choices=bv.CONVENTIONS, default="printed")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_besov_norm)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.threads is not None:
        os.environ[ENV_THREADS] = str(max(1, args.threads))
    try:
        return args.func(args, argv)
    except (UsageError, WTFBFError, OSError) as e:
        print(f"wtfbf {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

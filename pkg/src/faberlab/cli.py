"""Command line entry points: ``faber``, ``zeros``, ``covering``, ``tilde-e`` and ``faberlab``."""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import _io, harness
from .covering import ThreePointSet, build_covering, covering_from_json, covering_to_json
from .faber import (faber_polys, faber_via_contour, faber_values, normalized_derivative,
                    pk_series_check, pk_values, toeplitz_pk_all)
from .hyperbolic import predict, ridge_scan
from .series import poly_to_json, tail_from_json
from .zeros import (PolylineSet, cdf_discrepancy, hausdorff, write_convergence_csv,
                    write_zeros_csv, zeros_of)


def _tail(path):
    return tail_from_json(_io.read_json(path))


def _faber(argv=None):
    ap = argparse.ArgumentParser(prog="faber", description="Faber polynomials of a Laurent tail")
    sub = ap.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("gen", help="write F_0..F_K and P_0..P_K")
    g.add_argument("--tail", required=True)
    g.add_argument("--K", type=int, required=True)
    g.add_argument("--out", required=True)
    c = sub.add_parser("check", help="cross-check the recurrences; nonzero exit on failure")
    c.add_argument("--tail", required=True)
    c.add_argument("--K", type=int, required=True)
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--radius", type=float, default=None)
    args = ap.parse_args(argv)
    tail = _tail(args.tail)
    if args.cmd == "gen":
        F = faber_polys(tail, args.K)
        P = toeplitz_pk_all(tail, args.K)
        _io.write_json(args.out, {"F": [poly_to_json(p) for p in F], "P": [poly_to_json(p) for p in P]})
        return 0
    F = faber_polys(tail, args.K + 1)
    P = toeplitz_pk_all(tail, args.K)
    ident = max(float(np.max(np.abs(normalized_derivative(F[k + 1]).full - P[k].full))
                      / max(1.0, np.max(np.abs(P[k].full)))) for k in range(args.K + 1))
    R = args.radius or max(2.0, 2 * tail.rho0_hat)
    z = 0.3 + 0.2j
    fv, pv = faber_values(tail, z, args.K), pk_values(tail, z, args.K)
    contour = max(max(abs(faber_via_contour(tail, k, z, R) - fv[k]),
                      abs(pk_series_check(tail, k, z, R) - pv[k])) for k in range(args.K + 1))
    ok = ident <= 1e-9 and contour <= args.tol
    print(f"{'PASS' if ident <= 1e-9 else 'FAIL'} derivative identity: {ident:.3e}")
    print(f"{'PASS' if contour <= args.tol else 'FAIL'} contour oracle at R={R:g}: {contour:.3e}")
    return 0 if ok else 1


def _ladder(kmax):
    ks = sorted({max(1, kmax // 8), max(1, kmax // 4), max(1, kmax // 2), kmax})
    return ks


def _zeros(argv=None):
    ap = argparse.ArgumentParser(prog="zeros", description="zeros of P_k and diagnostics")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run")
    r.add_argument("--tail", required=True)
    r.add_argument("--kmax", type=int, required=True)
    r.add_argument("--ks", default=None, help="comma separated degrees (default: a ladder up to kmax)")
    r.add_argument("--target", default=None, help="PolylineSet JSON (list of legs)")
    r.add_argument("--source", choices=("P", "F"), default="P")
    r.add_argument("--precision", choices=("standard", "extended"), default="extended")
    r.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    tail = _tail(args.tail)
    ks = harness.parse_ints(args.ks) if args.ks else _ladder(args.kmax)
    ens = [zeros_of(tail, k, args.source, args.precision) for k in ks]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_zeros_csv(out / "zeros.csv", ens)
    if args.target:
        target = PolylineSet.from_json(_io.read_json(args.target))
        rows = []
        for e in ens:
            to, frm = hausdorff(e, target)
            try:
                cdf = cdf_discrepancy(e)
            except ValueError:
                cdf = math.nan
            rows.append((e.k, to, frm, cdf))
        write_convergence_csv(out / "convergence.csv", rows)
    return 0


def _covering(argv=None):
    ap = argparse.ArgumentParser(prog="covering", description="covering map of a three-point complement")
    sub = ap.add_subparsers(dest="cmd", required=True)
    b = sub.add_parser("build")
    b.add_argument("--points", required=True, help='e.g. "-1,0,1" or "1,-0.5+0.866i,-0.5-0.866i"')
    b.add_argument("--order", type=int, default=512)
    b.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    cov = build_covering(ThreePointSet.parse(args.points), order=args.order)
    _io.write_json(args.out, covering_to_json(cov))
    return 0


def _tilde_e(argv=None):
    ap = argparse.ArgumentParser(prog="tilde-e", description="predicted limit set and delta ridge")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("predict")
    p.add_argument("--cov", required=True)
    p.add_argument("--spacing", type=float, default=0.01)
    p.add_argument("--out", required=True)
    r = sub.add_parser("ridge")
    r.add_argument("--cov", required=True)
    r.add_argument("--grid", type=int, default=200)
    r.add_argument("--window", default="-1.5,1.5,-1.5,1.5")
    r.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    cov = covering_from_json(_io.read_json(args.cov))
    if args.cmd == "predict":
        _io.write_json(args.out, predict(cov, args.spacing).to_json())
        return 0
    window = tuple(harness.parse_list(args.window))
    if len(window) != 4:
        ap.error("--window needs four numbers x0,x1,y0,y1")
    z, res, _ = ridge_scan(cov, args.grid, window)
    _io.write_csv(args.out, ("re", "im", "delta", "count"), zip(z.real, z.imag, res.delta, res.count))
    return 0


def _faberlab(argv=None):
    ap = argparse.ArgumentParser(prog="faberlab", description="run registered experiments")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    sub.add_parser("list")
    s = sub.add_parser("show", help="print the default config of an experiment")
    s.add_argument("name")
    args = ap.parse_args(argv)
    if args.cmd == "list":
        for name, exp in sorted(harness.EXPERIMENTS.items()):
            print(f"{name}: {exp.doc}")
        return 0
    if args.cmd == "show":
        if args.name not in harness.EXPERIMENTS:
            print(f"unknown experiment {args.name!r}")
            return harness.EXIT_CONFIG
        sys.stdout.write(harness.default_config_text(args.name))
        return 0
    code, _ = harness.run_cli(args.config, args.out)
    return code


def _entry(fn):
    def main(argv=None):
        sys.exit(fn(argv))
    return main


faber_main = _entry(_faber)
zeros_main = _entry(_zeros)
covering_main = _entry(_covering)
tilde_e_main = _entry(_tilde_e)
faberlab_main = _entry(_faberlab)

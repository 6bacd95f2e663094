"""Config-driven experiment runner.

A config is an INI file::

    [experiment]
    name = tripod

    [params]
    ks = 30, 60, 90, 120

    [thresholds]
    hausdorff_final = 0.15

Every key must be known to the named experiment; missing keys take the
defaults listed in ``EXPERIMENTS``.  Results go to
``<out>/<name>-<hash>/`` where the hash covers the fully resolved config,
so identical configs share a directory and reruns reproduce it byte for
byte.
"""

import configparser
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _io, __version__
from .covering import ThreePointSet, build_covering, covering_to_json, eval_g
from .faber import (faber_polys, faber_via_contour, fk_log_abs, normalized_derivative,
                    pk_log_abs, pk_series_check, toeplitz_pk_all, faber_values, pk_values)
from .hyperbolic import build_hexagon, delta_map, ridge_scan, segment_prediction, tripod
from .series import LaurentTail
from .zeros import (PolylineSet, cdf_discrepancy, delta_via_limit, fraction_outside, hausdorff,
                    multiset_distance, pk_zeros_via_eigen, potential_estimate, write_convergence_csv,
                    write_potential_grid_csv, write_zeros_csv, zeros_of)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 1, 2

SYMMETRIC = "1, -0.5+0.8660254037844386i, -0.5-0.8660254037844386i"


class ConfigError(ValueError):
    pass


def threads():
    """Worker cap from ``FABERLAB_THREADS`` (default 1)."""
    raw = os.environ.get("FABERLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FABERLAB_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def pmap(fn, items):
    """Order-preserving map over at most ``threads()`` workers."""
    items = list(items)
    n = threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# ------------------------------------------------------------- assertions


@dataclass
class Assertion:
    name: str
    observed: float
    threshold: float
    op: str
    tag: str

    @property
    def passed(self):
        o, t = self.observed, self.threshold
        if isinstance(o, float) and math.isnan(o):
            return False
        return {"<=": o <= t, "<": o < t, ">=": o >= t, ">": o > t, "==": o == t}[self.op]

    def to_json(self):
        return {"name": self.name, "observed": self.observed, "threshold": self.threshold,
                "op": self.op, "tag": self.tag, "passed": bool(self.passed)}


# tags: "exact" for identities and bookkeeping, "calibrated" for thresholds
# set from numerical experience, "reference" for published example values
def check(name, observed, op, threshold, tag="calibrated"):
    if isinstance(observed, (bool, np.bool_)):
        observed = int(observed)
    elif not isinstance(observed, int):
        observed = float(observed)
    return Assertion(name, observed, threshold, op, tag)


# -------------------------------------------------------------- parsing


def parse_list(text, conv=float):
    return [conv(s.strip()) for s in str(text).split(",") if s.strip()]


def parse_ints(text):
    return parse_list(text, int)


def parse_complex(text):
    return complex(str(text).strip().replace(" ", "").replace("i", "j"))


def _coerce(value, default):
    if isinstance(default, bool):
        low = value.strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"expected a boolean, got {value!r}")
        return low in ("true", "1", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value.strip()


@dataclass
class Experiment:
    name: str
    run: callable
    params: dict
    thresholds: dict
    doc: str = ""


EXPERIMENTS = {}


def register(name, params, thresholds):
    def deco(fn):
        EXPERIMENTS[name] = Experiment(name, fn, params, thresholds, (fn.__doc__ or "").strip())
        return fn
    return deco


def load_config(text):
    """Parse and resolve a config; raises ``ConfigError`` on any unknown key."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    extra = set(cp.sections()) - {"experiment", "params", "thresholds"}
    if extra:
        raise ConfigError(f"unknown sections: {sorted(extra)}")
    if not cp.has_section("experiment") or "name" not in cp["experiment"]:
        raise ConfigError("config needs [experiment] name = ...")
    bad = set(cp["experiment"]) - {"name"}
    if bad:
        raise ConfigError(f"unknown keys in [experiment]: {sorted(bad)}")
    name = cp["experiment"]["name"].strip()
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    exp = EXPERIMENTS[name]
    resolved = {"name": name}
    for section, defaults in (("params", exp.params), ("thresholds", exp.thresholds)):
        vals = dict(defaults)
        if cp.has_section(section):
            for key, raw in cp[section].items():
                if key not in defaults:
                    raise ConfigError(f"unknown key {key!r} in [{section}] for {name}")
                try:
                    vals[key] = _coerce(raw, defaults[key])
                except ValueError as exc:
                    raise ConfigError(f"bad value for {section}.{key}: {exc}") from None
        resolved[section] = vals
    return resolved


def config_hash(resolved):
    blob = json.dumps({"schema": SCHEMA_VERSION, **resolved}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def default_config_text(name):
    exp = EXPERIMENTS[name]
    lines = ["[experiment]", f"name = {name}", "", "[params]"]
    lines += [f"{k} = {_io.fmt(v) if not isinstance(v, bool) else str(v).lower()}" for k, v in exp.params.items()]
    lines += ["", "[thresholds]"]
    lines += [f"{k} = {_io.fmt(v)}" for k, v in exp.thresholds.items()]
    return "\n".join(lines) + "\n"


def run_experiment(config_text, out_root):
    """Run one experiment; returns ``(directory, summary)``.

    Raises ``ConfigError`` for invalid configs.
    """
    resolved = load_config(config_text)
    digest = config_hash(resolved)
    out = Path(out_root) / f"{resolved['name']}-{digest[:12]}"
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.cfg").write_text(config_text)
    _io.write_json(out / "config.json", resolved)
    exp = EXPERIMENTS[resolved["name"]]
    assertions, files = exp.run(resolved["params"], resolved["thresholds"], out)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "experiment": resolved["name"],
        "config_hash": digest,
        "assertions": [a.to_json() for a in assertions],
        "files": sorted(["config.cfg", "config.json", "summary.json"] + files),
        "passed": all(a.passed for a in assertions),
    }
    _io.write_json(out / "summary.json", summary)
    return out, summary


# ------------------------------------------------------------ experiments


def _ensembles(tail, ks, source, precision):
    return pmap(lambda k: zeros_of(tail, k, source, precision), ks)


def _convergence(ensembles, target, real_ok=False):
    rows = []
    for ens in ensembles:
        to, frm = hausdorff(ens, target)
        try:
            cdf = cdf_discrepancy(ens) if real_ok else math.nan
        except ValueError:
            cdf = math.nan
        rows.append((ens.k, to, frm, cdf))
    return rows


def _mass(ensembles):
    return check("ensemble_mass", 1 if all(e.total_mass == 1 for e in ensembles) else 0,
                 "==", 1, "exact")


@register("segment-arcsine",
          params={"tail": "0, 0.25", "ks": "10, 20, 30, 40, 50, 100, 200", "real_check_kmax": 50,
                  "precision": "extended", "support": "-1, 1"},
          thresholds={"imag_max": 1e-7, "real_excess_max": 1e-7, "cdf_final": 0.06})
def _segment_arcsine(p, t, out):
    """Zeros of P_k for a tail whose exterior map omits a segment, against the arcsine law."""
    tail = LaurentTail(parse_list(p["tail"], parse_complex))
    ks = parse_ints(p["ks"])
    lo, hi = parse_list(p["support"])
    ens = _ensembles(tail, ks, "P", p["precision"])
    target = PolylineSet([np.linspace(lo, hi, 201) + 0j])
    rows = _convergence(ens, target, real_ok=True)
    write_zeros_csv(out / "zeros.csv", ens)
    write_convergence_csv(out / "convergence.csv", rows)
    small = [e for e in ens if e.k <= p["real_check_kmax"]]
    imag = max(float(np.max(np.abs(e.zeros.imag))) for e in small)
    excess = max(float(np.max(np.abs(e.zeros.real))) for e in small) - max(abs(lo), abs(hi))
    return [
        check("max_abs_imag", imag, "<=", t["imag_max"], "exact"),
        check("max_real_excess", excess, "<=", t["real_excess_max"], "exact"),
        check(f"cdf_disc_k{ks[-1]}", rows[-1][3], "<=", t["cdf_final"]),
        _mass(ens),
    ], ["zeros.csv", "convergence.csv"]


def _decrease(rows, col=1):
    return rows[-1][col] - rows[0][col]


@register("tripod",
          params={"points": SYMMETRIC, "ks": "30, 60, 90, 120", "precision": "extended",
                  "leg_spacing": 0.01, "expected_center": "0", "straight_legs": True},
          thresholds={"vertex_image_spread": 1e-6, "center_error": 1e-6, "leg_deviation": 1e-3,
                      "hausdorff_final": 0.15})
def _tripod(p, t, out):
    """Predicted tripod of a non-collinear triple and the P_k zeros approaching it."""
    cov = build_covering(ThreePointSet.parse(p["points"]))
    hexagon = build_hexagon(cov)
    images = cov.T_inv(cov.G(np.array(hexagon.finite_vertices)))
    spread = float(np.max(np.abs(images - images.mean())))
    legs = tripod(cov, hexagon, h=p["leg_spacing"])
    b_prime = legs.polylines[0][0]
    dev = 0.0
    if p["straight_legs"]:
        chords = PolylineSet([np.array([b_prime, leg[-1]]) for leg in legs.polylines])
        dev = float(np.max(chords.distance(legs.points)))
    ks = parse_ints(p["ks"])
    ens = _ensembles(cov.tail, ks, "P", p["precision"])
    rows = _convergence(ens, legs)
    _io.write_json(out / "cov.json", covering_to_json(cov))
    _io.write_json(out / "tripod.json", legs.to_json())
    write_zeros_csv(out / "zeros.csv", ens)
    write_convergence_csv(out / "convergence.csv", rows)
    res = [check("vertex_image_spread", spread, "<=", t["vertex_image_spread"]),
           check("leg_deviation_from_chords", dev, "<=", t["leg_deviation"], "reference")]
    if p["expected_center"]:
        res.append(check("center_error", abs(b_prime - parse_complex(p["expected_center"])), "<=",
                         t["center_error"], "reference"))
    res += [check("leg_count", len(legs.polylines), "==", 3, "exact"),
            check(f"hausdorff_to_k{ks[-1]}", rows[-1][1], "<=", t["hausdorff_final"]),
            check("hausdorff_to_change", _decrease(rows), "<", 0.0),
            check("hausdorff_from_change", _decrease(rows, 2), "<", 0.0),
            _mass(ens)]
    return res, ["cov.json", "tripod.json", "zeros.csv", "convergence.csv"]


@register("collinear-segment",
          params={"points": "-1, 0, 1", "ks": "30, 60, 90, 120", "precision": "extended"},
          thresholds={"endpoint_error": 1e-12, "hausdorff_final": 0.15})
def _collinear(p, t, out):
    """Hull segment of a collinear triple and the P_k zeros approaching it."""
    E = ThreePointSet.parse(p["points"])
    cov = build_covering(E)
    seg = segment_prediction(E)
    ends = np.array([seg.polylines[0][0], seg.polylines[0][-1]])
    pts = E.points
    d = np.abs(pts[:, None] - pts[None, :])
    i, j = np.unravel_index(np.argmax(d), d.shape)
    err = min(np.max(np.abs(ends - pts[[i, j]])), np.max(np.abs(ends - pts[[j, i]])))
    ks = parse_ints(p["ks"])
    ens = _ensembles(cov.tail, ks, "P", p["precision"])
    rows = _convergence(ens, seg, real_ok=True)
    _io.write_json(out / "cov.json", covering_to_json(cov))
    _io.write_json(out / "segment.json", seg.to_json())
    write_zeros_csv(out / "zeros.csv", ens)
    write_convergence_csv(out / "convergence.csv", rows)
    return [check("segment_endpoint_error", err, "<=", t["endpoint_error"], "reference"),
            check(f"hausdorff_to_k{ks[-1]}", rows[-1][1], "<=", t["hausdorff_final"]),
            check("hausdorff_to_change", _decrease(rows), "<", 0.0),
            check("hausdorff_from_change", _decrease(rows, 2), "<", 0.0),
            _mass(ens)], ["cov.json", "segment.json", "zeros.csv", "convergence.csv"]


def fk_scan(tail, z, kmax):
    """``|F_k(z)|^{1/k}`` for ``k = 1..kmax``."""
    return np.exp(fk_log_abs(tail, complex(z), kmax)[:, 0] / np.arange(1, kmax + 1))


def realizing_subsequence(values, lo, hi, count, halfwidth=4):
    """Degrees in ``[lo, hi]`` where ``values`` peaks locally; the last ``count`` of them.

    ``values[k - 1]`` belongs to degree ``k``.  A degree qualifies when no
    degree within ``halfwidth`` of it has a larger value.
    """
    peaks = [k for k in range(lo, hi + 1)
             if values[k - 1] >= values[max(0, k - 1 - halfwidth):k + halfwidth].max()]
    return peaks[-count:]


@register("nu-counterexample",
          params={"points": SYMMETRIC, "probe": "1", "kmax_scan": 400, "limsup_from": 200,
                  "window": "30, 120", "subsequence_count": 4, "precision": "extended",
                  "leg_spacing": 0.01},
          thresholds={"limsup_rel": 0.05, "outside_radius": 0.05, "f_outside_min": 0.0,
                      "p_outside_final": 0.01, "fine_radius": 1e-12})
def _nu(p, t, out):
    """Growth of |F_k| at a point of E and where F_k zeros sit relative to the tripod."""
    cov = build_covering(ThreePointSet.parse(p["points"]))
    legs = tripod(cov, h=p["leg_spacing"])
    vals = fk_scan(cov.tail, parse_complex(p["probe"]), p["kmax_scan"])
    limsup = float(vals[p["limsup_from"] - 1:].max())
    lo, hi = parse_ints(p["window"])
    ks = realizing_subsequence(vals, lo, hi, p["subsequence_count"])
    fe = _ensembles(cov.tail, ks, "F", p["precision"])
    pe = _ensembles(cov.tail, ks, "P", p["precision"])
    rows = []
    for f, q in zip(fe, pe):
        rows.append((f.k, "F", fraction_outside(f, legs, t["outside_radius"]),
                     fraction_outside(f, legs, t["fine_radius"])))
        rows.append((q.k, "P", fraction_outside(q, legs, t["outside_radius"]),
                     fraction_outside(q, legs, t["fine_radius"])))
    f_out = [r[2] for r in rows if r[1] == "F"]
    p_out = [r[2] for r in rows if r[1] == "P"]
    f_fine = [r[3] for r in rows if r[1] == "F"]
    p_fine = [r[3] for r in rows if r[1] == "P"]
    _io.write_csv(out / "fk_scan.csv", ("k", "fk_root", "ratio_to_rho0"),
                  [(k, v, v / cov.rho0) for k, v in enumerate(vals, start=1)])
    _io.write_csv(out / "nu_support.csv", ("k", "source", "outside_fraction", "fine_outside_fraction"),
                  rows)
    _io.write_json(out / "tripod.json", legs.to_json())
    write_zeros_csv(out / "zeros.csv", fe + pe)
    return [check("limsup_rel_error", abs(limsup / cov.rho0 - 1), "<=", t["limsup_rel"]),
            check("f_outside_fraction", f_out[-1], ">", t["f_outside_min"]),
            check("p_outside_fraction_final", p_out[-1], "<=", t["p_outside_final"]),
            check("p_outside_nonincreasing", float(np.max(np.diff(p_out), initial=0.0)), "<=", 0.0),
            check("f_fine_outside_fraction", f_fine[-1], ">", 0.0),
            check("p_fine_outside_fraction", p_fine[-1], "<=", t["p_outside_final"]),
            _mass(fe + pe)], ["fk_scan.csv", "nu_support.csv", "tripod.json", "zeros.csv"]


def c1_sample(cov, n, seed, lo, hi):
    """Points ``g(w)`` with ``lo rho0 <= |w| <= hi rho0`` classified as unique-preimage."""
    rng = np.random.default_rng(seed)
    picked = []
    while len(picked) < n:
        rad = cov.rho0 * rng.uniform(lo, hi, 4 * n)
        w = rad * np.exp(2j * np.pi * rng.uniform(size=4 * n))
        z = eval_g(cov, w)
        res = delta_map(cov, z)
        picked.extend(z[(res.count == 1) & ~res.ambiguous])
    return np.array(picked[:n])


@register("delta-map",
          params={"points": SYMMETRIC, "k": 400, "n_points": 20, "seed": 0, "radius_range": "1.2, 3",
                  "grid": 200, "window": "-1.5, 1.5, -1.5, 1.5", "potential_grid": 41,
                  "leg_spacing": 0.005},
          thresholds={"delta_rel_gap": 0.05, "ridge_cells": 2.0, "ridge_component_share": 0.95})
def _delta_map(p, t, out):
    """delta from the covering map against |P_k|^(1/k), and the ridge against the prediction."""
    cov = build_covering(ThreePointSet.parse(p["points"]))
    lo, hi = parse_list(p["radius_range"])
    z = c1_sample(cov, p["n_points"], p["seed"], lo, hi)
    exact = delta_map(cov, z).delta
    limit = delta_via_limit(cov.tail, z, p["k"])[-1]
    gap = np.abs(limit / exact - 1)
    _io.write_csv(out / "c1_points.csv", ("re", "im", "delta_exact", "delta_limit", "rel_gap"),
                  zip(z.real, z.imag, exact, limit, gap))
    window = tuple(parse_list(p["window"]))
    zg, res, h = ridge_scan(cov, p["grid"], window)
    _io.write_csv(out / "ridge.csv", ("re", "im", "delta", "count"),
                  zip(zg.real, zg.imag, res.delta, res.count))
    pred = segment_prediction(cov.E, p["leg_spacing"]) if cov.E.collinear else tripod(cov, h=p["leg_spacing"])
    ridge = zg[res.count >= 2]
    to_pred = float(np.max(pred.distance(ridge))) / h
    frm = hausdorff(ridge, pred)[1] / h
    share = largest_component_share(res.count.reshape(p["grid"], p["grid"]) >= 2)
    from .hyperbolic import grid as make_grid
    zp, _ = make_grid(window, p["potential_grid"])
    far = np.min(np.abs(zp[:, None] - cov.E.points[None, :]), axis=1) > 1e-9
    zp = zp[far]
    p_est = -pk_log_abs(cov.tail, zp, p["k"])[-1] / p["k"]
    write_potential_grid_csv(out / "potential_grid.csv", zp, p_est, delta_map(cov, zp).delta)
    return [check("delta_rel_gap_max", float(gap.max()), "<=", t["delta_rel_gap"]),
            check("ridge_to_prediction_cells", to_pred, "<=", t["ridge_cells"]),
            check("prediction_to_ridge_cells", frm, "<=", t["ridge_cells"]),
            check("ridge_largest_component_share", share, ">=", t["ridge_component_share"])], \
        ["c1_points.csv", "ridge.csv", "potential_grid.csv"]


def largest_component_share(mask):
    """Share of marked cells in the largest 8-connected component."""
    from scipy.ndimage import label
    lab, n = label(mask, structure=np.ones((3, 3)))
    if n == 0:
        return 0.0
    sizes = np.bincount(lab.ravel())[1:]
    return float(sizes.max() / sizes.sum())


def random_tails(n, order, decay, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    k = np.arange(order + 1)
    return [LaurentTail(scale * (rng.normal(size=order + 1) + 1j * rng.normal(size=order + 1)) * decay**k)
            for _ in range(n)]


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


@register("oracle-suite",
          params={"seed": 0, "n_tails": 20, "order": 40, "decay": 0.5, "identity_kmax": 30,
                  "contour_kmax": 10, "contour_radius": 2.0, "contour_nodes": 1024,
                  "cross_ks": "10, 20, 40", "far_radius": 1000.0, "far_kmin": 5, "far_kmax": 30},
          thresholds={"identity_rel": 1e-9, "contour_err": 1e-8, "cross_dist": 1e-6, "far_gap": 0.01})
def _oracles(p, t, out):
    """Recurrence identities against derivatives, contour integrals, eigenvalues and potentials."""
    tails = random_tails(p["n_tails"], p["order"], p["decay"], p["seed"], scale=0.3)
    rng = np.random.default_rng(p["seed"] + 1)
    K = p["identity_kmax"]
    ident = 0.0
    for tail in tails:
        F = faber_polys(tail, K + 1)
        P = toeplitz_pk_all(tail, K)
        for k in range(K + 1):
            ident = max(ident, _rel(normalized_derivative(F[k + 1]).full, P[k].full))
    contour = 0.0
    Kc = p["contour_kmax"]
    for tail in tails:
        z = complex(*rng.uniform(-1, 1, 2)) * 0.7
        fv = faber_values(tail, z, Kc)
        pv = pk_values(tail, z, Kc)
        for k in range(Kc + 1):
            fc = faber_via_contour(tail, k, z, p["contour_radius"], p["contour_nodes"])
            pc = pk_series_check(tail, k, z, p["contour_radius"], p["contour_nodes"])
            contour = max(contour, abs(fc - fv[k]), abs(pc - pv[k]))
    cross = 0.0
    ens = []
    for tail in tails[:5]:
        for k in parse_ints(p["cross_ks"]):
            a = pk_zeros_via_eigen(tail, k)
            b = zeros_of(tail, k, "P", "extended")
            ens += [a, b]
            cross = max(cross, multiset_distance(a, b))
    far = 0.0
    for tail in tails:
        z = p["far_radius"] * np.exp(2j * np.pi * rng.uniform(size=8))
        for k, poly in enumerate(toeplitz_pk_all(tail, p["far_kmax"])):
            if k >= p["far_kmin"]:
                far = max(far, float(np.max(np.abs(potential_estimate(poly, z) + np.log(np.abs(z))))))
    _io.write_csv(out / "oracles.csv", ("check", "observed"),
                  [("identity_rel", ident), ("contour_err", contour), ("cross_dist", cross),
                   ("far_gap", far)])
    return [check("identity_rel", ident, "<=", t["identity_rel"], "exact"),
            check("contour_err", contour, "<=", t["contour_err"], "exact"),
            check("eigen_root_distance", cross, "<=", t["cross_dist"]),
            check("far_potential_gap", far, "<=", t["far_gap"], "exact"),
            _mass(ens)], ["oracles.csv"]


def run_cli(config_path, out_root):
    """Exit-code wrapper: 2 invalid config, 1 failed assertion, 0 success."""
    try:
        text = Path(config_path).read_text()
        out, summary = run_experiment(text, out_root)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}")
        return EXIT_CONFIG, None
    for a in summary["assertions"]:
        mark = "PASS" if a["passed"] else "FAIL"
        print(f"{mark} {a['name']}: {a['observed']!r} {a['op']} {a['threshold']!r} [{a['tag']}]")
    print(out)
    return (EXIT_OK if summary["passed"] else EXIT_ASSERT), out

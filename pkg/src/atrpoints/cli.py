"""Command line front end.

Subcommands:
  invariants   sign calculus for a configured (curve, extension) pair
  point        full pipeline: cycle, double integral, recognition
  tree-orbits  local lattice-tree orbit counts for a quadratic algebra
  gkz-scan     the coefficient scan over the family of extensions
  selftest     quick internal consistency battery

Configuration is a JSON file. Rationals are written as an integer or a
[numerator, denominator] pair; elements of F = Q(sqrt(D)) as {"a": .., "b": ..}
meaning a + b*sqrt(D). Exit codes: 0 success, 2 configuration error,
3 admissibility failure, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
from fractions import Fraction

import mpmath as mp

from . import __version__, ajmap, gkzscan
from .bttree import LocalEmbeddingData, level_zero_vertices, orbit_count
from .cycles import build_embedding, cycle_data
from .ecurve import curve_from_a_invariants
from .errors import AdmissibilityError, AtrError, ConfigError
from .hmf import CoefficientTable
from .nfield import ElementF, QuadExtension, make_field
from .periods import omega_beta, period_lattice
from .signs import heegner_check, parity_check, predicted_invariants

log = logging.getLogger("atrpoints")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ADMISSIBILITY = 3
EXIT_NUMERIC = 4


def _rational(x):
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, list) and len(x) == 2 and all(
            isinstance(v, int) for v in x):
        return Fraction(x[0], x[1])
    raise ConfigError(f"not a rational: {x!r}")


def _element(F, x):
    if isinstance(x, dict):
        extra = set(x) - {"a", "b"}
        if extra:
            raise ConfigError(f"unknown element keys: {sorted(extra)}")
        return ElementF(_rational(x.get("a", 0)), _rational(x.get("b", 0)),
                        F.D)
    return ElementF(_rational(x), 0, F.D)


def _load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg, hashlib.sha256(raw).hexdigest()


def _field(cfg):
    try:
        D = cfg["field"]
    except KeyError:
        raise ConfigError("config needs a 'field' entry (the D of Q(sqrt D))")
    if not isinstance(D, int):
        raise ConfigError("'field' must be an integer")
    return make_field(D)


def _curve(F, cfg, norm_bound=None):
    spec = cfg.get("curve")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'curve' object")
    ai = spec.get("a_invariants")
    if not isinstance(ai, list) or len(ai) != 5:
        raise ConfigError("'curve.a_invariants' must list a1,a2,a3,a4,a6")
    ai = [_element(F, a) for a in ai]
    cond_spec = spec.get("conductor")
    if not isinstance(cond_spec, list) or not cond_spec:
        raise ConfigError("'curve.conductor' must be a nonempty list")
    conductor = []
    for item in cond_spec:
        if not isinstance(item, dict) or "prime" not in item:
            raise ConfigError("conductor entries need a 'prime'")
        typ = item.get("type", "split_mult")
        if typ not in ("split_mult", "nonsplit_mult"):
            raise ConfigError(f"unknown reduction type {typ!r}")
        conductor.append((F.ideal(_element(F, item["prime"])), typ))
    gen = spec.get("generator")
    if gen is not None:
        if not isinstance(gen, list) or len(gen) != 2:
            raise ConfigError("'curve.generator' must be [x, y]")
        gen = (_element(F, gen[0]), _element(F, gen[1]))
    E = curve_from_a_invariants(F, ai, conductor, generator_hint=gen)
    if norm_bound:
        E.norm_bound = norm_bound
    return E


def _extension(F, cfg, key="delta"):
    if key not in cfg:
        raise ConfigError(f"config needs a {key!r} element")
    delta = _element(F, cfg[key])
    return QuadExtension(F, delta)


def _profile_dict(profile):
    return {
        "places": [
            {"place": str(rec.place), "eta": rec.eta, "eps": rec.eps,
             "inv": rec.inv}
            for rec in profile.records
        ],
        "ramification_size": len(profile.ram_set),
    }


def _setup_out(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    handler = logging.FileHandler(os.path.join(out_dir, "log.txt"), mode="w")
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO)


def _report_header(args, cfg_hash):
    return {
        "tool": "atrpoints",
        "version": __version__,
        "python": platform.python_version(),
        "mpmath": mp.__version__,
        "config_sha256": cfg_hash,
        "precision_bits": args.precision_bits,
    }


def _write_report(out_dir, report):
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    log.info("wrote %s", path)


def cmd_invariants(args):
    cfg, cfg_hash = _load_config(args.config)
    F = _field(cfg)
    E = _curve(F, cfg, args.norm_bound)
    K = _extension(F, cfg)
    if not K.is_pipeline_admissible():
        raise AdmissibilityError(
            "extension has the wrong archimedean behaviour")
    profile = predicted_invariants(E, K)
    parity_ok, parity_diag = parity_check(profile)
    report = _report_header(args, cfg_hash)
    report.update({
        "command": "invariants",
        "delta": str(K.delta),
        "global_root_number": E.global_root_number(),
        "profile": _profile_dict(profile),
        "parity_ok": parity_ok,
        "parity_diagnostic": parity_diag,
        "heegner_ok": heegner_check(K, E.conductor),
    })
    _write_report(args.out, report)
    print(json.dumps(report["profile"], indent=1))
    return EXIT_OK


def cmd_point(args):
    cfg, cfg_hash = _load_config(args.config)
    F = _field(cfg)
    E = _curve(F, cfg, args.norm_bound)
    K = _extension(F, cfg)
    if not K.is_pipeline_admissible():
        raise AdmissibilityError(
            "extension has the wrong archimedean behaviour")
    if not heegner_check(K, E.conductor):
        raise AdmissibilityError("splitting hypothesis fails at the conductor")
    bits = args.precision_bits
    tol = float(cfg.get("tolerance", 1e-10))
    bound = int(cfg.get("table_bound", 4000))
    level = None
    for P, _t in E.conductor:
        level = P if level is None else level * P
    log.info("building coefficient table to norm %d", bound)
    if args.cache and os.path.exists(args.cache):
        table = CoefficientTable.load(E, bound, args.cache)
    else:
        table = CoefficientTable(E, bound)
        if args.cache:
            table.save(args.cache)
    q = build_embedding(K, level)
    cyc = cycle_data(q, prec=bits + 40)
    w = ajmap.choose_basepoint(cyc, bits + 20)
    log.info("integrating along the cycle")
    J = ajmap.darmon_J(cyc, table, args.beta, w, precision_bits=bits, tol=tol)
    lat1 = period_lattice(E, 1, bits)
    lat2 = period_lattice(E, 2, bits)
    om_b = omega_beta(lat2, args.beta)
    rep = ajmap.recognize(J, lat1, om_b, E, precision_bits=bits)
    report = _report_header(args, cfg_hash)
    rec = rep.recognized
    if rec is not None and rec != "infinity":
        rec = {"x": str(rec[0]), "y": str(rec[1])}
    report.update({
        "command": "point",
        "delta": str(K.delta),
        "beta": args.beta,
        "tolerance": tol,
        "table_bound": bound,
        "J": [mp.nstr(mp.re(J), 25), mp.nstr(mp.im(J), 25)],
        "lattice_residual": rep.lattice_residual,
        "multiplier_m": rep.multiplier_m,
        "recognized": rec,
        "status": rep.conjecture_status,
    })
    _write_report(args.out, report)
    print(f"J = {mp.nstr(J, 15)}  status = {rep.conjecture_status}")
    return EXIT_OK


def cmd_tree_orbits(args):
    cfg, cfg_hash = _load_config(args.config)
    tree = cfg.get("tree")
    if not isinstance(tree, dict):
        raise ConfigError("config needs a 'tree' object with p, s, n")
    try:
        emb = LocalEmbeddingData(int(tree["p"]), int(tree["s"]),
                                 int(tree["n"]))
    except KeyError as exc:
        raise ConfigError(f"tree config missing {exc}")
    depth = int(tree.get("depth", 4))
    deltas = tree.get("deltas", [0, 1, 2])
    counts = {}
    for d in deltas:
        counts[str(d)] = orbit_count(emb, int(d), max(depth, int(d) + 2))
    shape = [(v.k, str(v.u)) for v in level_zero_vertices(emb, depth)]
    report = _report_header(args, cfg_hash)
    report.update({
        "command": "tree-orbits",
        "p": emb.p, "s": emb.s, "n": emb.n,
        "splitting": emb.splitting,
        "orbit_counts": counts,
        "level_zero_vertices": shape,
    })
    _write_report(args.out, report)
    print(json.dumps({"splitting": emb.splitting, "orbits": counts}))
    return EXIT_OK


def cmd_gkz_scan(args):
    cfg, cfg_hash = _load_config(args.config)
    F = _field(cfg)
    E = _curve(F, cfg, args.norm_bound)
    if "D0" not in cfg:
        raise ConfigError("config needs a 'D0' element")
    D0 = _element(F, cfg["D0"])
    t_max = args.t_max or int(cfg.get("t_max", 50))
    scan_cfg = gkzscan.ScanConfig(
        E, D0, t_max, beta=args.beta, precision_bits=args.precision_bits,
        tol=float(cfg.get("tolerance", 1e-10)),
        table_bound=int(cfg.get("table_bound", 4000)),
        integrate=bool(cfg.get("integrate", True)),
    )
    log.info("scanning t up to norm %d", t_max)
    rows = gkzscan.scan(scan_cfg, cache_path=args.cache)
    gkzscan.write_csv(rows, os.path.join(args.out, "table.csv"))
    report = _report_header(args, cfg_hash)
    statuses = {}
    for row in rows:
        statuses[row.status] = statuses.get(row.status, 0) + 1
    report.update({
        "command": "gkz-scan",
        "t_max": t_max,
        "beta": args.beta,
        "rows": [row.to_dict() for row in rows],
        "status_counts": statuses,
    })
    _write_report(args.out, report)
    print(f"{len(rows)} rows; status counts: {statuses}")
    return EXIT_OK


def cmd_selftest(args):
    failures = []

    def check(name, fn):
        try:
            ok = fn()
        except Exception as exc:    # deliberate blanket: report, don't die
            failures.append((name, repr(exc)))
            print(f"FAIL {name}: {exc}")
            return
        if ok:
            print(f"ok   {name}")
        else:
            failures.append((name, "returned false"))
            print(f"FAIL {name}")

    def reference_curve():
        # y^2 + y = x^3 - (1+w)x^2 + wx over Q(sqrt5), prime conductor
        F = make_field(5)
        ai = [ElementF(0, 0, 5), ElementF(Fraction(-3, 2), Fraction(-1, 2), 5),
              ElementF(1, 0, 5), ElementF(Fraction(1, 2), Fraction(1, 2), 5),
              ElementF(0, 0, 5)]
        from .ecurve import EllipticCurveF
        probe = object.__new__(EllipticCurveF)
        probe.F = F
        probe.a1, probe.a2, probe.a3, probe.a4, probe.a6 = ai
        probe.conductor = []
        probe._ap_cache = {}
        P = F.factor_ideal(F.ideal(probe.discriminant()))[0][0]
        return curve_from_a_invariants(F, ai, [(P, "split_mult")],
                                       generator_hint=(F.elem(0), F.elem(0)))

    def field_arithmetic():
        F = make_field(5)
        w = F.omega
        return (w * w - w - F.elem(1)).is_zero() and F.fund_unit.norm() == -1

    def table_multiplicativity():
        import math
        E = reference_curve()
        t = CoefficientTable(E, 150)
        ok = True
        for m in t.table:
            for n in t.table:
                if m.norm() * n.norm() <= 150 and \
                        math.gcd(int(m.norm()), int(n.norm())) == 1:
                    ok = ok and t.a(m * n) == t.a(m) * t.a(n)
        return ok

    def tree_counts():
        emb = LocalEmbeddingData(3, 1, 0)
        return orbit_count(emb, 0, 4) == 1 and orbit_count(emb, 1, 4) == 2

    def lattice_roundtrip():
        E = reference_curve()
        lat = period_lattice(E, 1, 80)
        with mp.workprec(110):
            g1, g2 = lat.generators()
            z = 3 * g1 - 2 * g2
            return float(lat.distance_to_lattice(z)) < 1e-18

    check("field arithmetic", field_arithmetic)
    check("coefficient multiplicativity", table_multiplicativity)
    check("tree orbit counts", tree_counts)
    check("period lattice reduction", lattice_roundtrip)
    if failures:
        return EXIT_NUMERIC
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="atrpoints",
        description="geodesic-cycle point search on elliptic curves over "
                    "real quadratic fields")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True,
                           help="path to the JSON configuration")
        p.add_argument("--precision-bits", type=int, default=80)
        p.add_argument("--norm-bound", type=int, default=None,
                       help="cap on prime norms in exact searches")
        p.add_argument("--beta", type=int, choices=(1, -1), default=1)
        p.add_argument("--t-max", type=int, default=None)
        p.add_argument("--out", default="atrpoints-out",
                       help="output directory for report.json etc.")
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for interface stability; the "
                            "computation is single-threaded")
        p.add_argument("--cache", default=None,
                       help="coefficient or row cache file")

    common(sub.add_parser("invariants", help="sign calculus only"))
    common(sub.add_parser("point", help="integrate and recognize"))
    common(sub.add_parser("tree-orbits", help="local orbit counts"))
    common(sub.add_parser("gkz-scan", help="coefficient scan"))
    common(sub.add_parser("selftest", help="internal consistency battery"),
           needs_config=False)
    return parser


COMMANDS = {
    "invariants": cmd_invariants,
    "point": cmd_point,
    "tree-orbits": cmd_tree_orbits,
    "gkz-scan": cmd_gkz_scan,
    "selftest": cmd_selftest,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "selftest":
        _setup_out(args.out)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as exc:
        log.error("admissibility failure: %s", exc)
        print(f"admissibility failure: {exc}", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except (AtrError, ValueError, ZeroDivisionError) as exc:
        log.error("numeric failure: %s", exc)
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

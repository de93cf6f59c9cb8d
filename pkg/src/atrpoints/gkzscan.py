"""Coefficient scan: traced points for the family K[t] = F(sqrt(-D0*t)).

For a fixed curve and a fixed totally indefinite D0 (positive at the first
embedding, negative at the second), every totally positive squarefree t
coprime to the fixed discriminants yields an admissible quadratic extension.
Each row of the scan runs the sign calculus first; rows whose multiplicity
factor vanishes are flagged and never integrated. Surviving rows go through
the full pipeline (cycle, integral, recognition) and, when a point on the
curve over F is recognized, the integer multiple of the configured generator
is extracted by repeated subtraction.

The scan is deterministic (rows ordered by ideal norm, then by generator
coordinates) and resumable through a JSON row cache keyed by the row inputs.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from . import ajmap
from .cycles import build_embedding, cycle_data
from .errors import AtrError
from .hmf import CoefficientTable
from .nfield import ElementF, QuadExtension, RealQuadraticField
from .periods import omega_beta, period_lattice
from .signs import (
    galois_conjugation_sign,
    heegner_check,
    multiplicity_factor,
    predicted_invariants,
)


def admissible_t(F: RealQuadraticField, D0: ElementF, conductor,
                 t_max: int):
    """Totally positive squarefree t with N(t) <= t_max, (t) coprime to
    (D0) and to the conductor, ordered by norm then coordinates. One t per
    ideal (the canonical totally positive generator)."""
    if not (D0.sign_tau(1) > 0 and D0.sign_tau(2) < 0):
        raise ValueError("D0 must be positive at the first embedding and "
                         "negative at the second")
    bad = {P for P, _e in F.factor_ideal(F.ideal(D0))}
    bad |= {P for P, _t in conductor}
    prec = 60
    root = mp.sqrt(F.D)
    out = {}
    # box: t = x + y*omega with both embeddings in (0, sqrt(t_max)+pad]
    hi = float(mp.sqrt(t_max)) * (1 + float(root)) + 2
    span = int(hi) + 1
    for x in range(-span, span + 1):
        for y in range(-span, span + 1):
            t = F.elem(x) + F.elem(y) * F.omega
            if t.is_zero() or t.sign_tau(1) <= 0 or t.sign_tau(2) <= 0:
                continue
            n = t.norm()
            if not (0 < n <= t_max):
                continue
            ideal = F.ideal(t)
            if ideal in out:
                continue
            fac = F.factor_ideal(ideal)
            if any(e > 1 for _P, e in fac):
                continue
            if any(P in bad for P, _e in fac):
                continue
            out[ideal] = ideal.gen
    return sorted(out.values(), key=lambda t: (t.norm(), t.omega_coords()))


@dataclass
class ScanConfig:
    E: object
    D0: ElementF
    t_max: int
    beta: int = 1
    precision_bits: int = 80
    tol: float = 1e-10
    table_bound: int = 4000
    m_max: int = 24
    height_max: int = 10 ** 6
    subtract_bound: int = 200
    integrate: bool = True
    stability_check: bool = True
    basepoint_count: int = 1

    def __post_init__(self):
        if self.beta not in (1, -1):
            raise ValueError("beta must be +-1")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")


@dataclass
class ScanRow:
    t: ElementF
    delta: ElementF
    heegner: bool
    multiplicity: int
    status: str
    J: object = None
    residual: float | None = None
    multiplier_m: int | None = None
    recognized: object = None
    coefficient: int | None = None
    detail: str = ""

    def key(self):
        a, b = self.t.omega_coords()
        return f"{self.t.norm()}:{a}:{b}"

    def to_dict(self):
        a, b = self.t.omega_coords()
        da, db = self.delta.omega_coords()
        rec = self.recognized
        if rec is not None and rec != "infinity":
            rec = [[str(Fraction(rec[0].a)), str(Fraction(rec[0].b))],
                   [str(Fraction(rec[1].a)), str(Fraction(rec[1].b))]]
        return {
            "t": [str(a), str(b)],
            "t_norm": int(self.t.norm()),
            "delta": [str(da), str(db)],
            "heegner": self.heegner,
            "multiplicity": self.multiplicity,
            "status": self.status,
            "J": None if self.J is None else
                [mp.nstr(mp.re(self.J), 20), mp.nstr(mp.im(self.J), 20)],
            "residual": self.residual,
            "multiplier_m": self.multiplier_m,
            "recognized": rec,
            "coefficient": self.coefficient,
            "detail": self.detail,
        }


CSV_COLUMNS = ["t_norm", "t_a", "t_b", "heegner", "multiplicity", "status",
               "J_re", "J_im", "residual", "multiplier_m", "coefficient",
               "detail"]


def _csv_record(row: ScanRow):
    a, b = row.t.omega_coords()
    return [int(row.t.norm()), str(a), str(b), int(row.heegner),
            row.multiplicity, row.status,
            "" if row.J is None else mp.nstr(mp.re(row.J), 20),
            "" if row.J is None else mp.nstr(mp.im(row.J), 20),
            "" if row.residual is None else repr(row.residual),
            "" if row.multiplier_m is None else row.multiplier_m,
            "" if row.coefficient is None else row.coefficient,
            row.detail]


def _discrete_log(E, Q, P0, bound: int):
    """m with Q = m * P0 by repeated addition, |m| <= bound; None if no
    match (or P0 torsion-degenerate)."""
    if Q is None:
        return 0
    acc = None
    for m in range(1, bound + 1):
        acc = E.add_points(acc, P0)
        if acc == Q:
            return m
        if acc is not None and E.neg_point(acc) == Q:
            return -m
    return None


def _trace_coefficient(cfg: ScanConfig, report):
    """[P_t] from a recognized point: apply the conjugation-eigenvalue
    multiplier and divide by the configured generator."""
    E = cfg.E
    if report.recognized == "infinity":
        return 0
    mult = 1 + galois_conjugation_sign(E)
    if mult == 0:
        return 0
    point = tuple(report.recognized)
    traced = E.mul_point(mult, point)
    if E.generator_hint is None:
        return None
    return _discrete_log(E, traced, E.generator_hint, cfg.subtract_bound)


def _integrate_row(cfg: ScanConfig, K, table, lat1, om_b,
                   precision_bits, m_max):
    level = None
    for P, _typ in cfg.E.conductor:
        level = P if level is None else level * P
    q = build_embedding(K, level)
    cyc = cycle_data(q, prec=precision_bits + 40)
    w = ajmap.choose_basepoint(cyc, precision_bits + 20)
    J = ajmap.darmon_J(cyc, table, cfg.beta, w,
                       precision_bits=precision_bits, tol=cfg.tol)
    report = ajmap.recognize(J, lat1, om_b, cfg.E,
                             search=(m_max, cfg.height_max),
                             precision_bits=precision_bits)
    return J, report


def scan(cfg: ScanConfig, cache_path: str | None = None):
    """Run the whole table; per-row failures land in the row status."""
    E = cfg.E
    F = E.F
    cache = {}
    if cache_path and os.path.exists(cache_path):
        with open(cache_path) as fh:
            cache = json.load(fh)
    base_K = QuadExtension(F, -cfg.D0)
    base_profile = predicted_invariants(E, base_K)
    table = None
    lat1 = om_b = None
    rows = []
    for t in admissible_t(F, cfg.D0, E.conductor, cfg.t_max):
        delta = -cfg.D0 * t
        row = ScanRow(t=t, delta=delta, heegner=False, multiplicity=0,
                      status="pending")
        if cache_path and row.key() in cache:
            rows.append(_row_from_dict(F, cache[row.key()]))
            continue
        try:
            K = QuadExtension(F, delta)
            if not K.is_pipeline_admissible():
                row.status = "inadmissible"
                row.detail = "wrong archimedean behaviour"
            elif not heegner_check(K, E.conductor):
                row.status = "heegner-fail"
                row.detail = "splitting hypothesis fails at the conductor"
            else:
                row.heegner = True
                row_profile = predicted_invariants(E, K)
                row.multiplicity = multiplicity_factor(
                    base_profile, E.conductor, row_profile)
                if row.multiplicity == 0:
                    row.status = "sign-vanishing"
                    row.detail = "local sign mismatch; no integration run"
                elif not cfg.integrate:
                    row.status = "not-integrated"
                    row.detail = "integration disabled in the config"
                else:
                    if table is None:
                        table = CoefficientTable(E, cfg.table_bound)
                        lat1 = period_lattice(E, 1, cfg.precision_bits)
                        lat2 = period_lattice(E, 2, cfg.precision_bits)
                        om_b = omega_beta(lat2, cfg.beta)
                    J, report = _integrate_row(
                        cfg, K, table, lat1, om_b,
                        cfg.precision_bits, cfg.m_max)
                    row.J = J
                    row.residual = report.lattice_residual
                    row.multiplier_m = report.multiplier_m
                    row.status = report.conjecture_status
                    row.recognized = report.recognized
                    if report.conjecture_status == "recognized" \
                            and cfg.stability_check:
                        _J2, report2 = _integrate_row(
                            cfg, K, table, lat1, om_b,
                            2 * cfg.precision_bits, 2 * cfg.m_max)
                        if report2.recognized != report.recognized:
                            row.status = "unstable"
                            row.detail = ("candidate changed at doubled "
                                          "precision")
                    if row.status == "recognized":
                        row.coefficient = _trace_coefficient(cfg, report)
        except AtrError as exc:
            row.status = "admissibility-failure"
            row.detail = str(exc)
        except (ValueError, ZeroDivisionError) as exc:
            row.status = "numeric-failure"
            row.detail = str(exc)
        rows.append(row)
        if cache_path:
            cache[row.key()] = row.to_dict()
            with open(cache_path, "w") as fh:
                json.dump(cache, fh, indent=1, sort_keys=True)
    return rows


def _elem_from_omega_coords(F, pair):
    a, b = (Fraction(x) for x in pair)
    return F.elem(a) + F.elem(b) * F.omega


def _row_from_dict(F, d):
    rec = d["recognized"]
    if rec is not None and rec != "infinity":
        rec = (ElementF(Fraction(rec[0][0]), Fraction(rec[0][1]), F.D),
               ElementF(Fraction(rec[1][0]), Fraction(rec[1][1]), F.D))
    J = None
    if d["J"] is not None:
        J = mp.mpc(mp.mpf(d["J"][0]), mp.mpf(d["J"][1]))
    return ScanRow(
        t=_elem_from_omega_coords(F, d["t"]),
        delta=_elem_from_omega_coords(F, d["delta"]),
        heegner=d["heegner"], multiplicity=d["multiplicity"],
        status=d["status"], J=J, residual=d["residual"],
        multiplier_m=d["multiplier_m"], recognized=rec,
        coefficient=d["coefficient"], detail=d["detail"],
    )


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(_csv_record(row))


def write_json(rows, path):
    with open(path, "w") as fh:
        json.dump([row.to_dict() for row in rows], fh, indent=1,
                  sort_keys=True)

"""Inequality and identity verification suites with margin reports.

Every check produces a CheckReport with the convention

    margin = lhs - rhs   (one-sided claims lhs >= rhs), or
    margin = -|lhs - rhs|  (equality claims),

and verdict 'pass' iff margin >= -tolerance.  Reports never mutate their
inputs and are deterministic for fixed inputs.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import flow, geometry, mobius, quermass
from .symfunc import (
    af_rhs_A,
    alternating_sum_S,
    alternating_sum_product_form,
    ball_volume,
    double_factorial,
    sphere_area,
)


@dataclass
class CheckReport:
    check_id: str
    inputs_digest: str
    lhs: float
    rhs: float
    margin: float
    tolerance: float
    verdict: str       # 'pass' | 'fail' | 'inconclusive'
    notes: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def relative_margin(self) -> float:
        return self.margin / max(abs(self.lhs), abs(self.rhs), 1e-30)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relative_margin"] = self.relative_margin
        return d


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
    return h.hexdigest()[:16]


def _report(check_id, lhs, rhs, tolerance, digest_parts, notes="", equality=False,
            inconclusive=False) -> CheckReport:
    lhs = float(lhs)
    rhs = float(rhs)
    margin = -abs(lhs - rhs) if equality else lhs - rhs
    if inconclusive:
        verdict = "inconclusive"
    else:
        verdict = "pass" if margin >= -tolerance else "fail"
    return CheckReport(
        check_id=check_id,
        inputs_digest=_digest(*digest_parts),
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        tolerance=tolerance,
        verdict=verdict,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# individual checks


def check_af_main(W: quermass.QuermassVector, n: int, k: int,
                  tolerance: float = 1e-6) -> CheckReport:
    """Odd-quermassintegral bound W_{2k+1} >= A_k(W_1) (free boundary)."""
    if abs(W.theta - math.pi / 2) > 1e-12:
        raise ValueError("the odd-quermassintegral bound requires theta = pi/2")
    if 2 * k + 1 > n:
        raise ValueError("need 2k+1 <= n")
    lhs = W.Wtheta[2 * k + 1]
    rhs = af_rhs_A(n, k, W.Wtheta[1])
    return _report(
        f"af_main[n={n},k={k}]", lhs, rhs, tolerance,
        ("af_main", n, k, W.Wtheta.tolist()),
        notes="equality exactly for the flat disk",
    )


def check_af_thmB(W: quermass.QuermassVector, table: quermass.CapTable, k: int,
                  tolerance: float = 1e-6) -> CheckReport:
    """W_n >= f_n(f_k^{-1}(W_k)) against the cap table."""
    n = W.n
    lhs = W.Wtheta[n]
    rhs = table.compose(n, k, W.Wtheta[k], slack=max(tolerance, 1e-9))
    return _report(
        f"af_thmB[n={n},k={k}]", lhs, rhs, tolerance,
        ("af_thmB", n, k, W.Wtheta.tolist(), table.theta),
        notes="equality on the cap family",
    )


def check_af_thmC(W: quermass.QuermassVector, table: quermass.CapTable, k: int,
                  tolerance: float = 1e-6) -> CheckReport:
    """W_k >= f_k(f_0^{-1}(W_0)) against the cap table."""
    n = W.n
    lhs = W.Wtheta[k]
    rhs = table.compose(k, 0, W.Wtheta[0], slack=max(tolerance, 1e-9))
    return _report(
        f"af_thmC[n={n},k={k}]", lhs, rhs, tolerance,
        ("af_thmC", n, k, W.Wtheta.tolist(), table.theta),
        notes="equality on the cap family",
    )


def extrapolate_to_stop(trace: flow.FlowTrace, name: str, rows: int = 10) -> float:
    """Order-1 Richardson extrapolation of a trace column in t to the
    predicted degenerate time of the E_1 flow."""
    t = trace.column("t")[-rows:]
    y = trace.column(name)[-rows:]
    tstar = trace.column("tstar_pred")[-1]
    if not math.isfinite(tstar):
        tstar = t[-1]
    A = np.vstack([np.ones_like(t), t]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0] + coef[1] * tstar)


def check_limits(trace: flow.FlowTrace, n: int, k: int,
                 rel_tolerance: float = 0.01) -> list[CheckReport]:
    """Terminal values of W_{2k+1} and Q against the flat-ball limits."""
    omega = sphere_area(n - 1)
    w_limit = omega / n * double_factorial(2 * k) * double_factorial(n - 2 * k - 1) \
        / double_factorial(n + 1)
    inconclusive = trace.stop_reason != "min_F"
    notes = "order-1 extrapolation over the final rows to predicted T*"
    if inconclusive:
        notes += "; trace stopped early: " + trace.stop_reason
    reports = []
    w_ext = extrapolate_to_stop(trace, f"W{2 * k + 1}")
    rel = abs(w_ext - w_limit) / abs(w_limit)
    reports.append(_report(
        f"limit_W{2 * k + 1}[n={n}]", -rel, 0.0, rel_tolerance,
        ("limit_W", n, k, trace.rows[-1]),
        notes=notes, inconclusive=inconclusive,
    ))
    if n >= 3:
        q_limit = n ** ((n - 2) / n) / (n - 1) * (omega / (n + 1)) ** (2.0 / n)
        q_ext = extrapolate_to_stop(trace, "Q")
        relq = abs(q_ext - q_limit) / q_limit
        reports.append(_report(
            f"limit_Q[n={n}]", -relq, 0.0, rel_tolerance,
            ("limit_Q", n, trace.rows[-1]),
            notes=notes, inconclusive=inconclusive,
        ))
    return reports


def check_monotone(trace: flow.FlowTrace, rel_step_tolerance: float = 1e-6) -> list[CheckReport]:
    """Per-step monotonicity of max F and max H, and strict decrease of Q."""
    reports = []
    for name, series in (("maxF", trace.step_maxF), ("maxH", trace.step_maxH)):
        inc = np.diff(series) / series[:-1]
        worst = float(np.max(inc)) if inc.size else 0.0
        reports.append(_report(
            f"monotone_{name}", -worst, 0.0, rel_step_tolerance,
            ("monotone", name, len(series), series[-1]),
            notes="per-step relative increase must not exceed tolerance",
        ))
    Q = trace.column("Q")
    ok = np.isfinite(Q)
    if ok.sum() >= 3:
        dq = np.diff(Q[ok])
        worst = float(np.max(dq))
        reports.append(_report(
            "monotone_Q", -worst, 0.0, 1e-9,
            ("monotone_Q", len(Q), Q[ok][-1]),
            notes="Q must strictly decrease beyond 1e-9 noise",
        ))
    return reports


def check_variational(trace: flow.FlowTrace, rel_tolerance: float = 1e-3,
                      burn_in: float = 0.25) -> list[CheckReport]:
    """Centered-difference dW_k/dt against ((n+1-k)/(n+1)) int E_k f dA.

    The first `burn_in` fraction of the run is excluded: discrete
    initialization excites a boundary-compatibility transient that decays
    like 1/t and is not part of the continuum identity being checked.
    """
    n = trace.config.n
    t = trace.column("t")
    i0 = int(np.searchsorted(t, burn_in * t[-1]))
    if len(t) - i0 < 8:
        return [_report("variational", 0, 0, rel_tolerance, ("variational", len(t)),
                        notes="insufficient cadence", inconclusive=True)]
    window = slice(max(i0, 1), -1)
    notes = f"window t in [{t[max(i0, 1)]:.4g}, {t[-2]:.4g}] after transient burn-in"
    reports = []
    scale_all = 0.0
    for k in range(n + 1):
        W = trace.column(f"W{k}")
        dW = np.gradient(W, t)[window]
        rhs = (n + 1 - k) / (n + 1) * trace.column(f"flux_{k}")[window]
        scale = float(np.max(np.abs(rhs)))
        scale_all = max(scale_all, scale)
        mism = float(np.max(np.abs(dW - rhs))) / max(scale, 1e-30)
        reports.append(_report(
            f"variational_W{k}", -mism, 0.0, rel_tolerance,
            ("variational", k, len(t), trace.config.flow_kind),
            notes=notes,
        ))
    Wlast = trace.column(f"W{n + 1}")
    if np.all(np.isfinite(Wlast)):
        drift = float(np.max(np.abs(np.gradient(Wlast, t)[window])))
        reports.append(_report(
            f"variational_W{n + 1}", -drift / max(scale_all, 1e-30), 0.0, rel_tolerance,
            ("variational_top", len(t), trace.config.flow_kind),
            notes="topological quermassintegral must stay constant; " + notes,
        ))
    return reports


def check_height_estimate(trace: flow.FlowTrace) -> CheckReport:
    """Height bound of the E_1 flow with the measured normal-alignment
    constant: <x,e> - cos(theta) >= Lambda (log W_1(flat) - log W_1) / (n maxF).

    Lambda substitutes the nonconstructive alignment constant by the measured
    min(-<nu, e>) at the initial surface (flagged in the notes).
    """
    cfg = trace.config
    n = cfg.n
    if cfg.flow_kind != "icf" or not cfg.spec.is_mean:
        raise ValueError("height estimate applies to the E_1 expansion flow")
    grid = cfg.make_grid()
    fields = geometry.fundamental_forms(grid)
    lam = float(np.min(-fields.nu_dot_e))
    w1_flat = quermass.flat_disk_quermass(n).Wtheta[1] if abs(
        cfg.theta - math.pi / 2) < 1e-12 else quermass.cap_quermass_exact(
        cfg.theta, math.inf, n).Wtheta[1]
    t = trace.column("t")
    hmin = trace.column("height_min")
    w1 = trace.column("W1")
    maxF = trace.column("maxF")
    lhs = hmin - math.cos(cfg.theta)
    rhs = lam * (np.log(w1_flat) - np.log(w1)) / (n * maxF)
    i = int(np.argmin(lhs - rhs))
    return _report(
        "height_estimate", float(lhs[i]), float(rhs[i]), 1e-9,
        ("height_estimate", n, cfg.theta, len(t)),
        notes="Lambda replaced by measured min(-<nu,e>) of the initial surface",
    )


def check_pointwise_lemmas(fields: geometry.GeometryFields,
                           label: str = "") -> list[CheckReport]:
    """Pointwise and integral inequalities for strictly convex free-boundary
    hypersurfaces, plus the boundary-frame identities."""
    n = fields.grid.n
    h = fields.grid.h_beta
    tag = f"[{label}]" if label else ""
    rep = geometry.convexity_report(fields)
    qv = quermass.assemble_W(fields)
    out = []
    free_boundary = abs(fields.grid.theta - math.pi / 2) < 1e-12
    if free_boundary and rep.strictly_convex:
        # the contact ring has <x,nu> = 0 identically (it carries the O(h^2)
        # angle noise, reported separately); the sign statement is interior
        interior_max = float(np.max(fields.x_dot_nu[..., :-1] if fields.grid.mode ==
                                    "axisymmetric" else fields.x_dot_nu[:-1]))
        out.append(_report(
            f"xnu_nonpositive{tag}", -interior_max, 0.0, 1e-8,
            ("xnu", label, interior_max),
            notes="<x, nu> <= 0 at interior nodes; contact ring pinned to 0",
        ))
        out.append(_report(
            f"lem_area_deficit{tag}", qv.Wsphere[1], (n + 1) * qv.Wtheta[1], 1e-6,
            ("lem52", label, qv.Wtheta.tolist()),
            notes="(n+1) W_1 <= W_1^S with strict margin",
        ))
        for k in range(2, n + 1):
            out.append(_report(
                f"lem_quermass_deficit_k{k}{tag}", qv.Wsphere[k], (n + 1) * qv.Wtheta[k],
                1e-6, ("lem53", label, k, qv.Wtheta.tolist()),
            ))
            out.append(_report(
                f"minkowski_boundary_k{k}{tag}", qv.boundary_integrals[k - 1],
                n * qv.curvature_integrals[k - 1], 1e-6,
                ("ineq_int", label, k),
                notes="boundary curvature integral dominates n x bulk",
            ))
        bn = ball_volume(n)
        out.append(_report(
            f"area_upper{tag}", bn, qv.area, 1e-6,
            ("area_upper", label, qv.area),
            notes="|Sigma| < b_n away from the equator",
        ))
        delta = rep.x_dot_e_max  # the slab above the top height lies inside
        witness = bn * max(0.0, 1.0 - delta**2) ** (n / 2.0)
        out.append(_report(
            f"area_lower{tag}", qv.area, witness, 1e-6,
            ("area_lower", label, qv.area, delta),
            notes="witness: flat disk at the measured maximal height",
        ))
    b = fields.boundary
    out.append(_report(
        f"contact_angle{tag}", -b.angle_residual, 0.0, 50 * h**2 + 1e-10,
        ("angle", label, b.angle_residual),
        notes="discretization-order allowance 50 h^2",
    ))
    if math.isfinite(b.principal_direction_residual):
        out.append(_report(
            f"conormal_principal{tag}", -b.principal_direction_residual, 0.0,
            50 * h**2 + 1e-10, ("pd", label),
            notes="h(mu, e_alpha) = 0: mu is a principal direction",
        ))
    if math.isfinite(b.relation_residual):
        out.append(_report(
            f"boundary_relation{tag}", -b.relation_residual, 0.0, 200 * h**2 + 1e-10,
            ("rel", label),
            notes="h_aa = sin(theta) hhat_aa - cos(theta)",
        ))
    if math.isfinite(b.frame_residual):
        out.append(_report(
            f"boundary_frame{tag}", -b.frame_residual, 0.0, 50 * h**2 + 1e-10,
            ("frame", label),
            notes="cos(theta) mu + sin(theta) nu matches the sphere-side normal",
        ))
    return out


def check_identities(n_max: int = 60, n_ball_max: int = 7) -> list[CheckReport]:
    """Exact rational identity, its recursion, and the equatorial geodesic-
    ball values against the spherical recursion."""
    out = []
    worst_pair = None
    for n in range(1, n_max + 1):
        for k in range(0, (n - 1) // 2 + 1):
            lhs = alternating_sum_S(n, k)
            rhs = alternating_sum_product_form(n, k)
            if lhs != rhs:
                worst_pair = (n, k)
            if k >= 1 and n >= 3:
                if alternating_sum_S(n, k) != alternating_sum_S(n - 2, k - 1) - alternating_sum_S(n, k - 1):
                    worst_pair = (n, k, "recursion")
    out.append(_report(
        "alternating_sum_identity", 0.0 if worst_pair is None else 1.0, 0.0, 0.0,
        ("identity", n_max),
        notes=f"exact rational equality and recursion for all n <= {n_max}"
        + ("" if worst_pair is None else f"; first failure {worst_pair}"),
        equality=True,
    ))
    worst = 0.0
    for n in range(2, n_ball_max + 1):
        W = quermass.geodesic_ball_quermass(n, math.pi / 2)
        for k in range(1, (n + 1) // 2 + 1):
            closed = quermass.geodesic_ball_odd_quermass(n, k, math.pi / 2)
            worst = max(worst, abs(W[2 * k - 1] - closed) / max(abs(closed), 1e-30))
    out.append(_report(
        "equatorial_ball_quermass", -worst, 0.0, 1e-10,
        ("eq_ball", n_ball_max),
        notes="closed form vs spherical recursion at the equator",
    ))
    return out


# ---------------------------------------------------------------------------
# suites


SUITES = ("identities", "pointwise", "af_main", "af_thmB", "af_thmC",
          "limits", "variational", "all")

EQUALITY_TOL = {
    # measured equality-case slack of the numeric pipeline (N_beta = 200..400)
    "af_main_flat_analytic": 1e-8,
    "af_main_flat_numeric": 1e-4,
    "af_table_cap": 1e-5,
}


def _fields_for_fixture(fx: dict) -> geometry.GeometryFields:
    kind = fx.get("kind", "cap")
    n = fx.get("n", 2)
    theta = fx.get("theta", math.pi / 2)
    N = fx.get("N_beta", 200)
    grid = geometry.HalfSphereGrid(n=n, N_beta=N, theta=theta)
    if kind == "cap":
        grid.u = mobius.cap_graph_u(mobius.CapSpec(theta, fx.get("r", 1.0)), grid.beta)
    elif kind == "flat_disk":
        grid.u = mobius.cap_graph_u(mobius.CapSpec(theta, math.inf), grid.beta)
    elif kind == "perturbed_cap":
        grid.u = mobius.initial_data(
            "perturbed_cap", grid, r=fx.get("r", 1.0), eps=fx.get("eps", 0.05)
        )
    else:
        raise ValueError(f"unknown fixture kind {kind!r}")
    return geometry.fundamental_forms(grid)


DEFAULT_CONFIG = {
    "af_main": {
        "fixtures": [
            {"kind": "flat_disk_analytic", "n": 3, "k": 1},
            {"kind": "flat_disk", "n": 3, "k": 1, "N_beta": 400,
             "tolerance": EQUALITY_TOL["af_main_flat_numeric"], "equality": True},
            {"kind": "perturbed_cap", "n": 3, "k": 1, "r": 1.0, "eps": 0.05},
            {"kind": "perturbed_cap", "n": 5, "k": 1, "r": 1.0, "eps": 0.05},
            {"kind": "perturbed_cap", "n": 5, "k": 2, "r": 1.0, "eps": 0.05},
            {"kind": "cap", "n": 5, "k": 2, "r": 2.0},
        ]
    },
    "af_tables": {"thetas": [math.pi / 2, math.pi / 3], "n": 2, "N_beta": 200},
    "af_thmB": {
        "fixtures": [
            {"kind": "cap", "n": 2, "k": 1, "r": 1.0, "theta": math.pi / 2,
             "tolerance": EQUALITY_TOL["af_table_cap"], "equality": True},
            {"kind": "cap", "n": 2, "k": 0, "r": 1.5, "theta": math.pi / 3,
             "tolerance": EQUALITY_TOL["af_table_cap"], "equality": True},
            {"kind": "perturbed_cap", "n": 2, "k": 1, "r": 1.0, "eps": 0.05,
             "theta": math.pi / 2},
            {"kind": "perturbed_cap", "n": 2, "k": 1, "r": 1.0, "eps": 0.05,
             "theta": math.pi / 3},
        ]
    },
    "af_thmC": {
        "fixtures": [
            {"kind": "cap", "n": 2, "k": 1, "r": 1.0, "theta": math.pi / 2,
             "tolerance": EQUALITY_TOL["af_table_cap"], "equality": True},
            {"kind": "cap", "n": 2, "k": 1, "r": 1.0, "theta": math.pi / 3,
             "tolerance": EQUALITY_TOL["af_table_cap"], "equality": True},
            {"kind": "flat_disk", "n": 2, "k": 1, "theta": math.pi / 3,
             "tolerance": 1e-4, "equality": True},
            {"kind": "perturbed_cap", "n": 2, "k": 1, "r": 1.0, "eps": 0.05,
             "theta": math.pi / 2},
            {"kind": "perturbed_cap", "n": 2, "k": 1, "r": 1.0, "eps": 0.05,
             "theta": math.pi / 3},
        ]
    },
    "pointwise": {
        "fixtures": [
            {"kind": "cap", "n": 2, "r": 1.0, "label": "cap_n2"},
            {"kind": "cap", "n": 3, "r": 2.0, "label": "cap_n3"},
            {"kind": "perturbed_cap", "n": 3, "r": 1.0, "eps": 0.05, "label": "pcap_n3"},
            {"kind": "perturbed_cap", "n": 5, "r": 1.0, "eps": 0.05, "label": "pcap_n5"},
        ]
    },
    "limits": {"n": 3, "N_beta": 120, "r": 1.0, "k": 1},
    "variational": {"n": 2, "N_beta": 100, "t_max": 0.06, "cadence": 5},
}


def run_suite(name: str, config: dict | None = None) -> list[CheckReport]:
    """Run one named suite; 'all' concatenates every suite."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    cfg = dict(DEFAULT_CONFIG)
    if config:
        cfg.update(config)
    if name == "all":
        out = []
        for s in SUITES[:-1]:
            out.extend(run_suite(s, config))
        return out
    if name == "identities":
        return check_identities()
    if name == "pointwise":
        fixtures = cfg["pointwise"]["fixtures"]
        def one(fx):
            fields = _fields_for_fixture(fx)
            return check_pointwise_lemmas(fields, label=fx.get("label", fx["kind"]))
        return _flat(_parallel_map(one, fixtures))
    if name == "af_main":
        out = []
        for fx in cfg["af_main"]["fixtures"]:
            n, k = fx["n"], fx["k"]
            if fx["kind"] == "flat_disk_analytic":
                W = quermass.flat_disk_quermass(n)
                rep = check_af_main(W, n, k, tolerance=EQUALITY_TOL["af_main_flat_analytic"])
                rep.check_id += "(flat,analytic)"
                out.append(rep)
                continue
            if fx["kind"] == "values":
                W = quermass.QuermassVector(
                    n=n, theta=math.pi / 2, Wtheta=np.array(fx["W"], dtype=float),
                    Wsphere=np.zeros(n + 1), curvature_integrals=np.zeros(n + 1),
                    boundary_integrals=np.zeros(n), area=0.0, volume=max(fx["W"][0], 0.0),
                )
                out.append(check_af_main(W, n, k, tolerance=fx.get("tolerance", 1e-6)))
                continue
            W = quermass.assemble_W(_fields_for_fixture(fx))
            rep = check_af_main(W, n, k, tolerance=fx.get("tolerance", 1e-6))
            if fx.get("equality"):
                rep = _report(rep.check_id + "(equality)", rep.lhs, rep.rhs,
                              fx["tolerance"], (rep.check_id, "eq"), equality=True,
                              notes=rep.notes)
            out.append(rep)
        return out
    if name in ("af_thmB", "af_thmC"):
        tbl_cfg = cfg["af_tables"]
        tables = {
            th: quermass.cap_reference_f(th, tbl_cfg["n"], N_beta=tbl_cfg["N_beta"])
            for th in tbl_cfg["thetas"]
        }
        checker = check_af_thmB if name == "af_thmB" else check_af_thmC
        out = []
        for fx in cfg[name]["fixtures"]:
            theta = fx.get("theta", math.pi / 2)
            table = tables[min(tables, key=lambda th: abs(th - theta))]
            if fx["kind"] == "flat_disk":
                W = quermass.cap_quermass_exact(theta, math.inf, fx["n"])
            else:
                W = quermass.assemble_W(_fields_for_fixture(fx))
            rep = checker(W, table, fx["k"], tolerance=fx.get("tolerance", 1e-6))
            if fx.get("equality"):
                rep = _report(rep.check_id + "(equality)", rep.lhs, rep.rhs,
                              fx["tolerance"], (rep.check_id, "eq", theta),
                              equality=True, notes=rep.notes)
            else:
                rep.check_id += f"(theta={theta:.3f},{fx['kind']})"
            out.append(rep)
        return out
    if name == "limits":
        lc = cfg["limits"]
        fcfg = flow.FlowConfig(
            n=lc["n"], theta=math.pi / 2, flow_kind="icf", N_beta=lc["N_beta"],
            t_max=10.0, monitor_cadence=200, initial={"kind": "cap", "r": lc["r"]},
        )
        trace = flow.run(fcfg)
        out = check_limits(trace, lc["n"], lc["k"])
        out.extend(check_monotone(trace))
        out.append(check_height_estimate(trace))
        return out
    if name == "variational":
        vc = cfg["variational"]
        out = []
        for kind in ("icf", "mcf"):
            fcfg = flow.FlowConfig(
                n=vc["n"], theta=math.pi / 2, flow_kind=kind, N_beta=vc["N_beta"],
                t_max=vc["t_max"], monitor_cadence=vc["cadence"],
                initial={"kind": "cap", "r": 1.0},
            )
            trace = flow.run(fcfg)
            for rep in check_variational(trace):
                rep.check_id += f"({kind})"
                out.append(rep)
        return out
    raise AssertionError


def _parallel_map(fn, items):
    width = int(os.environ.get("CAPFLOW_THREADS", "0") or 0)
    if width <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=width) as ex:
        return list(ex.map(fn, items))


def _flat(list_of_lists):
    return [x for sub in list_of_lists for x in sub]


def reports_to_json(reports: list[CheckReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def summary_table(reports: list[CheckReport]) -> str:
    lines = []
    w = max((len(r.check_id) for r in reports), default=10) + 2
    lines.append(f"{'check':<{w}}{'verdict':<9}{'margin':>14}{'tol':>10}")
    for r in reports:
        lines.append(f"{r.check_id:<{w}}{r.verdict:<9}{r.margin:>14.3e}{r.tolerance:>10.1e}")
    npass = sum(r.passed for r in reports)
    lines.append(f"-- {npass}/{len(reports)} passed")
    return "\n".join(lines)

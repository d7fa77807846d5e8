"""Shared fixtures: the expensive flow runs are computed once per session."""

import math

import numpy as np
import pytest

from capflow import flow, geometry, mobius, quermass


@pytest.fixture(scope="session")
def icf_n2_trace():
    """Expanding E_1 flow from the unit-radius free-boundary cap, n = 2,
    integrated to half the predicted degenerate time."""
    area0 = quermass.cap_area_exact(math.pi / 2, 1.0, 2)
    t_star = 0.5 * math.log(math.pi / area0)
    cfg = flow.FlowConfig(
        n=2, theta=math.pi / 2, flow_kind="icf", N_beta=200, t_max=0.5 * t_star,
        monitor_cadence=50, initial={"kind": "cap", "r": 1.0},
    )
    return flow.run(cfg)


@pytest.fixture(scope="session")
def icf_n3_trace():
    """n = 3 expanding run integrated to the min-F stop (near the flat ball)."""
    cfg = flow.FlowConfig(
        n=3, theta=math.pi / 2, flow_kind="icf", N_beta=120, t_max=10.0,
        monitor_cadence=200, initial={"kind": "cap", "r": 1.0},
    )
    return flow.run(cfg)


@pytest.fixture(scope="session")
def variational_traces():
    """Short ICF and MCF runs with fine monitor cadence."""
    out = {}
    for kind in ("icf", "mcf"):
        cfg = flow.FlowConfig(
            n=2, theta=math.pi / 2, flow_kind=kind, N_beta=100, t_max=0.06,
            monitor_cadence=5, initial={"kind": "cap", "r": 1.0},
        )
        out[kind] = flow.run(cfg)
    return out


def make_flattened_cap(n=2, r=1.0, N_beta=200, target=1e-7):
    """Weakly convex fixture: cap graph plus an apex bump tuned by bisection
    until the smallest principal curvature sits at zero (within target)."""
    grid = geometry.HalfSphereGrid(n=n, N_beta=N_beta, theta=math.pi / 2)
    u_cap = mobius.cap_graph_u(mobius.CapSpec(math.pi / 2, r), grid.beta)
    psi = mobius.smooth_bump(grid.beta)

    def kappa_min(eps):
        trial = grid.with_u(u_cap + eps * psi)
        return float(np.min(geometry.conformal_graph_kernel(trial).kappa))

    lo, hi = 0.0, 1.0
    while kappa_min(hi) > 0:
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if kappa_min(mid) > 0:
            lo = mid
        else:
            hi = mid
        if kappa_min(lo) < target:
            break
    return grid.with_u(u_cap + lo * psi), kappa_min(lo)


@pytest.fixture(scope="session")
def flattened_cap():
    return make_flattened_cap()


@pytest.fixture(scope="session")
def captables_n2():
    return {
        theta: quermass.cap_reference_f(theta, 2, N_beta=200)
        for theta in (math.pi / 2, math.pi / 3)
    }


@pytest.fixture(scope="session")
def cap_field_cache():
    cache = {}

    def get(theta, r, n, N, kernel="embedding"):
        key = (round(theta, 12), r, n, N, kernel)
        if key not in cache:
            cache[key] = quermass.cap_fields(theta, r, n, N, kernel=kernel)
        return cache[key]

    return get

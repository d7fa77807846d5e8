"""Flow machinery: boundary ghosts, speeds, step control, stop logic, and
the exact laws along runs (growth of W_1, monotone maxima)."""

import math

import numpy as np
import pytest

from capflow import flow, geometry, mobius, quermass
from capflow.symfunc import ball_volume


def cap_grid(theta, r, n, N, **kw):
    grid = geometry.HalfSphereGrid(n=n, N_beta=N, theta=theta, **kw)
    u = mobius.cap_graph_u(mobius.CapSpec(theta, r), grid.beta)
    if grid.mode == "full2d":
        u = np.repeat(u[:, None], grid.N_xi, axis=1)
    return grid.with_u(u)


def test_boundary_slope_closed_forms():
    g = geometry.HalfSphereGrid(n=2, N_beta=64, theta=math.pi / 2)
    assert float(geometry.boundary_normal_slope(g, g.u)) == 0.0  # Neumann
    g3 = geometry.HalfSphereGrid(n=3, N_beta=64, theta=math.pi / 3)
    assert float(geometry.boundary_normal_slope(g3, g3.u)) == pytest.approx(-1 / math.sqrt(3))


def test_boundary_slope_full2d_with_tangential_gradient():
    g = geometry.HalfSphereGrid(n=2, N_beta=32, theta=math.pi / 4, mode="full2d", N_xi=64)
    u = np.zeros(g.shape)
    u[-1, :] = g.xi  # u_xi = 1 away from the periodic wrap
    slope = geometry.boundary_normal_slope(g, u)
    interior = slice(2, g.N_xi // 2 - 2)
    assert np.allclose(slope[interior], -math.sqrt(2.0), atol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        flow.FlowConfig(n=2, theta=math.pi / 2, dt_safety=0.0)
    with pytest.raises(ValueError):
        flow.FlowConfig(n=2, theta=math.pi / 2, flow_kind="bogus")
    with pytest.raises(ValueError):
        flow.FlowConfig(n=2, theta=math.pi / 2, stop_min_F=-1.0)
    with pytest.raises(ValueError):
        flow.FlowConfig(n=2, theta=math.pi / 2, monitor_cadence=0)


def test_icf_speed_on_caps():
    # normal speed 1/F is constant over an umbilic cap; du/dt is not
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    grid = cap_grid(math.pi / 2, 1.0, 2, 200)
    data = geometry.conformal_speed_data(grid)
    f = flow.normal_speed(cfg, data)
    assert np.ptp(f) < 1e-8  # constant graph: kernel is near-exact
    assert np.all(f > 0)
    du = flow.icf_speed(grid, cfg, data)
    assert np.all(du < 0)  # expansion contracts the graph
    grid2 = cap_grid(math.pi / 3, 2.0, 2, 400)
    data2 = geometry.conformal_speed_data(grid2)
    f2 = flow.normal_speed(flow.FlowConfig(n=2, theta=math.pi / 3), data2)
    assert np.ptp(f2) / np.mean(f2) < 1e-5  # constant modulo grid error
    assert np.mean(f2) == pytest.approx(2.0, rel=1e-5)


def test_icf_speed_linear_in_inverse_F():
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    grid = cap_grid(math.pi / 2, 1.0, 2, 100)
    data = geometry.conformal_speed_data(grid)
    du = flow.icf_speed(grid, cfg, data)
    doubled = geometry.SpeedData(kappa=2 * data.kappa, v=data.v, rho=data.rho, E=data.E)
    assert np.allclose(flow.icf_speed(grid, cfg, doubled), du / 2, rtol=1e-12)


def test_icf_cone_violation_signals():
    from capflow.symfunc import ConeViolation
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    grid = cap_grid(math.pi / 2, math.inf, 2, 100)  # flat disk: F = 0
    with pytest.raises((flow.FlowAborted, ConeViolation)):
        flow.icf_speed(grid, cfg)


def test_mcf_speed_flat_disk_and_cap():
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2, flow_kind="mcf")
    flat = cap_grid(math.pi / 2, math.inf, 2, 100)
    assert np.abs(flow.mcf_speed(flat, cfg)).max() < 1e-8
    cap = cap_grid(math.pi / 2, 1.0, 2, 100)
    data = geometry.conformal_speed_data(cap)
    f = flow.normal_speed(cfg, data)
    assert np.ptp(f) < 1e-7 and f[0] == pytest.approx(-2.0, abs=1e-8)  # -H = -n/r
    assert np.all(flow.mcf_speed(cap, cfg, data) > 0)  # graph grows as region shrinks


def test_step_zero_dt_is_identity():
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    grid = cap_grid(math.pi / 2, 1.0, 2, 100)
    out = flow.step(grid, cfg, 0.0)
    assert np.array_equal(out.u, grid.u)


def test_single_step_growth_law():
    # one midpoint step reproduces W_1 e^{n dt} to O(dt^3) + O(h^2 dt)
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    grid = cap_grid(math.pi / 2, 1.0, 2, 200)
    w0 = quermass.assemble_W(geometry.fundamental_forms(grid)).Wtheta[1]
    dt = 1e-3
    w1 = quermass.assemble_W(geometry.fundamental_forms(flow.step(grid, cfg, dt))).Wtheta[1]
    # tolerance: O(dt^3) stepping error plus the one-time O(h^2) shift of the
    # discrete functional relative to the exact initial graph
    assert w1 / w0 == pytest.approx(math.exp(2 * dt), abs=dt**3 + 0.2 * grid.h_beta**2)


def test_dt_control_parabolic_scaling():
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    dts = {}
    for N in (100, 200):
        grid = cap_grid(math.pi / 2, 1.0, 2, N)
        data = geometry.conformal_speed_data(grid)
        du = flow.icf_speed(grid, cfg, data)
        dts[N] = flow.dt_control(grid, cfg, data, du)
    assert dts[100] / dts[200] == pytest.approx(4.0, rel=0.05)


def test_dt_shrinks_near_flat_state():
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2)
    sharp = cap_grid(math.pi / 2, 1.0, 2, 100)
    flatish = cap_grid(math.pi / 2, 40.0, 2, 100)
    def dt_of(g):
        d = geometry.conformal_speed_data(g)
        return flow.dt_control(g, cfg, d, flow.icf_speed(g, cfg, d))
    assert dt_of(flatish) < dt_of(sharp) / 100


def test_run_stop_reasons():
    cfg = flow.FlowConfig(n=2, theta=math.pi / 2, t_max=1e-4, N_beta=64,
                          initial={"kind": "cap", "r": 1.0})
    assert flow.run(cfg).stop_reason == "t_max"
    cfg2 = flow.FlowConfig(n=2, theta=math.pi / 2, t_max=1.0, N_beta=64,
                           stop_max_abs_u=0.5, initial={"kind": "cap", "r": 1.0})
    assert flow.run(cfg2).stop_reason == "max_u"  # cap graph has u ~ 0.88
    cfg3 = flow.FlowConfig(n=2, theta=math.pi / 2, t_max=1.0, N_beta=64,
                           stop_min_F=0.9, initial={"kind": "cap", "r": 1.0})
    assert flow.run(cfg3).stop_reason == "min_F"


def test_trace_structure(icf_n2_trace):
    tr = icf_n2_trace
    t = tr.column("t")
    assert np.all(np.diff(t) > 0)
    assert tr.columns[0] == "t"
    assert tr.columns[1:6] == ["W0", "W1", "W2", "W3", "maxF"]
    csv = tr.to_csv()
    assert csv.splitlines()[0] == "# capflow-trace-v1"
    assert len(csv.splitlines()) == tr.n_rows + 2
    assert tr.to_csv() == csv  # deterministic serialization


def test_growth_law_along_run(icf_n2_trace):
    t = icf_n2_trace.column("t")
    W1 = icf_n2_trace.column("W1")
    rel = np.abs(W1 / W1[0] - np.exp(2 * t)) / np.exp(2 * t)
    assert rel.max() < 1e-3


def test_monotone_maxima_along_runs(icf_n2_trace, icf_n3_trace):
    for tr in (icf_n2_trace, icf_n3_trace):
        for series in (tr.step_maxF, tr.step_maxH):
            inc = np.diff(series) / series[:-1]
            assert inc.max() <= 1e-6


def test_height_min_stays_above_cos_theta(icf_n2_trace, icf_n3_trace):
    for tr in (icf_n2_trace, icf_n3_trace):
        hm = tr.column("height_min")
        assert np.all(hm - math.cos(tr.config.theta) > 0)
        # the apex descends toward cos(theta) along the expansion
        assert hm[-1] < hm[0]


def test_angle_residual_bounded_along_run(icf_n2_trace):
    res = icf_n2_trace.column("angle_residual")
    bound = 10 * (res[0] + 5 * icf_n2_trace.config.N_beta ** -2.0)
    assert res.max() < bound


def test_tstar_prediction_consistent(icf_n2_trace):
    # T* - t = log(b_n / |Sigma_t|)/n is a run invariant of the E_1 flow
    pred = icf_n2_trace.column("tstar_pred")
    assert np.ptp(pred) < 5e-4
    area0 = quermass.cap_area_exact(math.pi / 2, 1.0, 2)
    assert pred[0] == pytest.approx(math.log(ball_volume(2) / area0) / 2, abs=1e-4)


def test_mcf_contracts_volume(variational_traces):
    W0 = variational_traces["mcf"].column("W0")
    assert W0[-1] < W0[0]


def test_monitor_columns_n3(icf_n3_trace):
    tr = icf_n3_trace
    assert "phi_1" in tr.columns
    Q = tr.column("Q")
    assert np.all(np.isfinite(Q))
    phi = tr.column("phi_1")
    assert np.all(np.isfinite(phi))
    # the deficit monitor decreases to zero at the flat ball
    assert phi[-1] < phi[0]
    assert phi[-1] > -1e-6
    conv = tr.column("convexity_monitor")
    assert np.all(np.isfinite(conv))


def test_full2d_short_run_matches_axisymmetric():
    # lockstep comparison of the evolving states: on xi-independent data the
    # stencils coincide away from the pole row (whose full2d reset is O(h^2))
    common = dict(theta=math.pi / 2, flow_kind="icf", t_max=2e-3,
                  monitor_cadence=1000, initial={"kind": "cap", "r": 1.0})
    cfg_ax = flow.FlowConfig(n=2, N_beta=48, **common)
    cfg_2d = flow.FlowConfig(n=2, N_beta=48, mode="full2d", N_xi=32, **common)
    g_ax, g_2d = cfg_ax.make_grid(), cfg_2d.make_grid()
    t = 0.0
    while t < common["t_max"]:
        data = geometry.conformal_speed_data(g_ax)
        du = flow.icf_speed(g_ax, cfg_ax, data)
        dt = min(flow.dt_control(g_ax, cfg_ax, data, du), common["t_max"] - t)
        g_ax = flow.step(g_ax, cfg_ax, dt, du)
        g_2d = flow.step(g_2d, cfg_2d, dt)
        t += dt
    diff = np.abs(g_2d.u - g_ax.u[:, None])
    assert diff[2:].max() < 1e-5
    assert diff[0].max() < 1e-4

"""Time integration of the capillary curvature flows on the half-sphere graph.

The inverse curvature flow moves the hypersurface with normal speed 1/F
along the outward normal of the enclosed region; mean curvature flow
contracts with speed -H.  In graph coordinates any normal speed f becomes

    du/dt = -(v * E / rho) * f,

where v = sqrt(1 + |grad u|^2), rho = e^u and E is the conformal length
factor at the graph point (the enclosed region lies radially beyond the
graph, hence the sign: expansion makes the graph descend toward its
flat-ball limit).  Stepping is explicit midpoint with a parabolic CFL
control; ghosts enforcing the oblique contact condition are refilled before
every right-hand-side evaluation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, mobius, quermass
from .symfunc import (
    ConeViolation,
    CurvatureSpec,
    af_rhs_A,
    ball_volume,
    curvature_F,
    curvature_F_gradient,
)


class FlowAborted(RuntimeError):
    """Numerical failure inside the time loop (non-finite state)."""


@dataclass
class FlowConfig:
    n: int
    theta: float
    flow_kind: str = "icf"           # 'icf' (speed 1/F) or 'mcf' (speed -H)
    F_spec: tuple = (1, 0)           # (k, ell) of the speed function
    mode: str = "axisymmetric"
    N_beta: int = 200
    N_xi: int = 0
    dt_safety: float = 0.3
    t_max: float = 1.0
    stop_min_F: float = 0.02
    stop_max_abs_u: float = 6.0
    stop_max_angle_residual: float = 0.1
    monitor_cadence: int = 25
    max_du_per_step: float = 0.1
    initial: dict = field(default_factory=lambda: {"kind": "cap", "r": 1.0})

    def __post_init__(self):
        if self.flow_kind not in ("icf", "mcf"):
            raise ValueError(f"unknown flow kind {self.flow_kind!r}")
        if not 0.0 < self.dt_safety <= 1.0:
            raise ValueError("dt_safety must lie in (0, 1]")
        for name in ("stop_min_F", "stop_max_abs_u", "stop_max_angle_residual"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.monitor_cadence < 1:
            raise ValueError("monitor cadence must be >= 1")

    @property
    def spec(self) -> CurvatureSpec:
        return CurvatureSpec(*self.F_spec)

    def make_grid(self) -> geometry.HalfSphereGrid:
        grid = geometry.HalfSphereGrid(
            n=self.n, N_beta=self.N_beta, theta=self.theta, mode=self.mode, N_xi=self.N_xi
        )
        u0 = mobius.initial_data(self.initial["kind"], grid, **{
            k: v for k, v in self.initial.items() if k != "kind"
        })
        return grid.with_u(u0)


def icf_speed(grid: geometry.HalfSphereGrid, config: FlowConfig,
              data: geometry.SpeedData | None = None) -> np.ndarray:
    """du/dt of the expanding flow (normal speed 1/F); negative-valued, since
    expansion of the enclosed region contracts the graph."""
    if data is None:
        data = geometry.conformal_speed_data(grid)
    spec = config.spec
    F = curvature_F(data.kappa, spec)
    if np.any(F <= 0):
        raise FlowAborted("speed function hit zero")
    return -(data.v * data.E / data.rho) / F


def mcf_speed(grid: geometry.HalfSphereGrid, config: FlowConfig,
              data: geometry.SpeedData | None = None) -> np.ndarray:
    """du/dt of mean curvature flow (normal speed -H)."""
    if data is None:
        data = geometry.conformal_speed_data(grid)
    H = grid.n * np.mean(data.kappa, axis=-1)
    return (data.v * data.E / data.rho) * H


def normal_speed(config: FlowConfig, data: geometry.SpeedData) -> np.ndarray:
    """Signed normal speed f along the outward normal."""
    if config.flow_kind == "icf":
        return 1.0 / curvature_F(data.kappa, config.spec)
    return -config.n * np.mean(data.kappa, axis=-1)


def dt_control(grid: geometry.HalfSphereGrid, config: FlowConfig,
               data: geometry.SpeedData, du_dt: np.ndarray) -> float:
    """Parabolic CFL step: dt = safety * h^2 / max(diffusion scale), also
    capped so no node moves by more than max_du_per_step."""
    scale = (data.E / data.rho) ** 2
    if config.flow_kind == "icf":
        spec = config.spec
        if spec.is_mean:
            sumFi, F = 1.0, curvature_F(data.kappa, spec, check=False)
        else:
            sumFi = np.sum(curvature_F_gradient(data.kappa, spec), axis=-1)
            F = curvature_F(data.kappa, spec, check=False)
        diff = scale * sumFi / F**2
    else:
        diff = scale * grid.n
    h2 = grid.h_beta**2
    if grid.mode == "full2d":
        sinb = np.maximum(np.sin(grid.beta)[:, None], grid.h_beta)
        aniso = 1.0 + (grid.h_beta / (grid.h_xi * sinb)) ** 2
        diff = diff * aniso
    dmax = float(np.max(diff))
    if not math.isfinite(dmax) or dmax <= 0:
        raise FlowAborted("non-finite diffusion scale")
    dt = config.dt_safety * h2 / dmax
    vmax = float(np.max(np.abs(du_dt)))
    if vmax > 0:
        dt = min(dt, config.max_du_per_step / vmax)
    return dt


def _rhs(grid: geometry.HalfSphereGrid, config: FlowConfig, u: np.ndarray) -> np.ndarray:
    trial = grid.with_u(u)
    data = geometry.conformal_speed_data(trial)
    if config.flow_kind == "icf":
        return icf_speed(trial, config, data)
    return mcf_speed(trial, config, data)


def step(grid: geometry.HalfSphereGrid, config: FlowConfig, dt: float,
         du_dt: np.ndarray | None = None) -> geometry.HalfSphereGrid:
    """One explicit midpoint step (ghosts refilled inside each stage)."""
    u = grid.u
    k1 = du_dt if du_dt is not None else _rhs(grid, config, u)
    u_half = _enforce_pole(grid, u + 0.5 * dt * k1)
    k2 = _rhs(grid, config, u_half)
    u_new = _enforce_pole(grid, u + dt * k2)
    if not np.all(np.isfinite(u_new)):
        raise FlowAborted("non-finite state after step")
    return grid.with_u(u_new)


def _enforce_pole(grid: geometry.HalfSphereGrid, u: np.ndarray) -> np.ndarray:
    if grid.mode == "full2d":
        u[0, :] = np.mean(u[1, :])
    return u


# ---------------------------------------------------------------------------
# traces and monitors


TRACE_SCHEMA_VERSION = "capflow-trace-v1"


@dataclass
class FlowTrace:
    """Monitor rows at cadence plus light per-step series.

    Column order of ``columns`` is frozen; see the README for the schema.
    """

    config: FlowConfig
    columns: list
    rows: list
    step_t: np.ndarray = None
    step_maxF: np.ndarray = None
    step_maxH: np.ndarray = None
    step_kappa_min: np.ndarray = None
    stop_reason: str = ""

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + TRACE_SCHEMA_VERSION + "\n")
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join(_fmt(x) for x in r) + "\n")
        return buf.getvalue()


def _fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.17g}"


def trace_columns(n: int) -> list:
    cols = ["t"] + [f"W{k}" for k in range(n + 2)]
    cols += ["maxF", "maxH", "Q"]
    cols += [f"phi_{k}" for k in range(1, (n - 1) // 2 + 1)]
    cols += ["height_min", "height_max", "angle_residual", "kappa_min", "dt"]
    cols += [f"flux_{k}" for k in range(n + 1)]
    cols += ["area", "tstar_pred", "convexity_monitor"]
    return cols


def monitors(fields: geometry.GeometryFields, W: quermass.QuermassVector,
             t: float, config: FlowConfig, dt: float) -> list:
    """One trace row (see trace_columns for the layout)."""
    n = config.n
    rep = geometry.convexity_report(fields)
    try:
        F = curvature_F(fields.kappa, config.spec, check=False)
        maxF = float(np.max(F))
    except Exception:
        maxF = math.nan
    maxH = n * float(np.max(fields.E[..., 1]))
    w1 = W.Wtheta[1]
    if n >= 3 and np.isfinite(W.Wtheta[3]) and w1 > 0 and rep.strictly_convex:
        Q = w1 ** (-(n - 2) / n) * (W.Wtheta[3] + (n - 2) / (n - 1) * w1)
    else:
        Q = math.nan
    phis = []
    for k in range(1, (n - 1) // 2 + 1):
        if np.isfinite(W.Wtheta[2 * k + 1]) and w1 > 0:
            phis.append((W.Wtheta[2 * k + 1] - af_rhs_A(n, k, w1)) / w1 ** ((n - 2 * k) / n))
        else:
            phis.append(math.nan)
    # flux integrals int E_k f dA for the variational identity
    f_speed = _normal_speed_from_fields(fields, config)
    flux = [float(np.sum(fields.area_weight * fields.E[..., k] * f_speed)) for k in range(n + 1)]
    if config.flow_kind == "icf" and config.spec.is_mean:
        tstar = t + math.log(ball_volume(n) / W.area) / n
    else:
        tstar = math.nan
    if rep.strictly_convex and rep.x_dot_e_min > 0:
        conv_monitor = math.log(rep.h_tilde_max) - math.log(rep.x_dot_e_min)
    else:
        conv_monitor = math.nan
    row = [t] + list(W.Wtheta) + [maxF, maxH, Q] + phis
    row += [rep.x_dot_e_min, rep.x_dot_e_max, fields.boundary.angle_residual,
            rep.kappa_min, dt]
    row += flux
    row += [W.area, tstar, conv_monitor]
    return row


def _normal_speed_from_fields(fields: geometry.GeometryFields, config: FlowConfig) -> np.ndarray:
    if config.flow_kind == "icf":
        F = curvature_F(fields.kappa, config.spec, check=False)
        return 1.0 / F
    return -config.n * fields.E[..., 1]


def run(config: FlowConfig, grid: geometry.HalfSphereGrid | None = None) -> FlowTrace:
    """Integrate the flow until t_max or a stop threshold fires.

    Stop reasons: 't_max', 'min_F' (approach to the flat ball, where the
    expanding speed degenerates), 'max_u', 'angle_residual',
    'convexity_loss', 'nonfinite'.
    """
    if grid is None:
        grid = config.make_grid()
    cols = trace_columns(config.n)
    rows = []
    s_t, s_maxF, s_maxH, s_kmin = [], [], [], []
    t = 0.0
    stop = "t_max"
    step_index = 0
    dt = 0.0
    while True:
        data = geometry.conformal_speed_data(grid)
        kappa = data.kappa if grid.mode == "axisymmetric" else data.kappa[1:]
        kmin = float(np.min(kappa))
        try:
            # mean curvature flow tolerates curvature data outside the cone
            F = curvature_F(data.kappa, config.spec, check=config.flow_kind == "icf")
        except ConeViolation:
            stop = "convexity_loss"
            break
        minF = float(np.min(F))
        maxF = float(np.max(F))
        maxH = config.n * float(np.max(np.mean(data.kappa, axis=-1)))
        s_t.append(t)
        s_maxF.append(maxF)
        s_maxH.append(maxH)
        s_kmin.append(kmin)

        record = step_index % config.monitor_cadence == 0
        fields = qv = None
        if record:
            try:
                fields = geometry.fundamental_forms(grid)
                qv = quermass.assemble_W(fields)
            except (OverflowError, geometry.MeshQualityError):
                stop = "nonfinite"
                break

        if config.flow_kind == "icf":
            du = -(data.v * data.E / data.rho) / F
        else:
            du = (data.v * data.E / data.rho) * config.n * np.mean(data.kappa, axis=-1)
        dt = dt_control(grid, config, data, du)
        clipped = t + dt >= config.t_max
        if clipped:
            dt = config.t_max - t

        if record:
            rows.append(monitors(fields, qv, t, config, dt))
            if fields.boundary.angle_residual > config.stop_max_angle_residual:
                stop = "angle_residual"
                break
        if config.flow_kind == "icf" and minF < config.stop_min_F:
            stop = "min_F"
            break
        if float(np.max(np.abs(grid.u))) > config.stop_max_abs_u:
            stop = "max_u"
            break
        if t >= config.t_max:
            stop = "t_max"
            break
        try:
            grid = step(grid, config, dt, du)
        except ConeViolation:
            stop = "convexity_loss"
            break
        except (FlowAborted, OverflowError, geometry.MeshQualityError):
            stop = "nonfinite"
            break
        t += dt
        step_index += 1

    # final row at the stop state (if not already recorded at this t)
    if not rows or rows[-1][0] < t:
        try:
            fields = geometry.fundamental_forms(grid)
            qv = quermass.assemble_W(fields)
            rows.append(monitors(fields, qv, t, config, 0.0))
        except Exception:
            pass
    return FlowTrace(
        config=config,
        columns=cols,
        rows=rows,
        step_t=np.array(s_t),
        step_maxF=np.array(s_maxF),
        step_maxH=np.array(s_maxH),
        step_kappa_min=np.array(s_kmin),
        stop_reason=stop,
    )

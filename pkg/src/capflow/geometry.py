"""Discrete geometry of radial-graph hypersurfaces in the unit ball.

A hypersurface is stored as the graph u = log(rho) over the closed upper
half-sphere in half-space coordinates.  Two independent curvature kernels are
provided:

* the embedding kernel (``fundamental_forms``): finite differences of the
  ball embedding X = phi^{-1}(e^u z) give tangents, metric and second
  fundamental form directly (profile formulas in axisymmetric mode, full 2-d
  stencils for n = 2);
* the conformal graph kernel (``conformal_graph_kernel``): flat-space radial
  graph shape operator plus the conformal curvature shift
  kappa_ball = E (kappa_flat + dOmega/dN), where E is the conformal length
  factor of the map, Omega = -log E, and N the flat unit normal pointing
  toward the origin.

Both orient the normal outward of the enclosed region: caps get positive
curvatures 1/r, with <nu, e> = -1 at the apex.  All stencils are
second-order central; the pole uses reflection (axisymmetric) or antipodal
(full2d) ghosts and the contact boundary uses the oblique-condition ghost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import mobius
from .symfunc import normalized_mean_curvatures, sphere_area

DET_G_MIN = 1e-14


class MeshQualityError(RuntimeError):
    pass


@dataclass
class HalfSphereGrid:
    """Uniform grid on [0, pi/2] (x S^1 in full2d mode) carrying u = log rho.

    Axisymmetric mode works for any n >= 2 and stores u per beta node;
    full2d mode (n = 2 only) stores u[i, j] over (beta_i, xi_j) with the
    pole collapsed to the single row i = 0.
    """

    n: int
    N_beta: int
    theta: float
    mode: str = "axisymmetric"
    N_xi: int = 0
    u: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("surface dimension n must be >= 2")
        if self.mode not in ("axisymmetric", "full2d"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "full2d":
            if self.n != 2:
                raise ValueError("full2d mode implemented for n = 2 only")
            if self.N_xi < 8 or self.N_xi % 2:
                raise ValueError("full2d mode needs even N_xi >= 8")
        if not 0.0 < self.theta <= math.pi / 2 + 1e-15:
            raise ValueError("contact angle must lie in (0, pi/2]")
        if self.N_beta < 8:
            raise ValueError("need N_beta >= 8")
        if self.u is None:
            self.u = np.zeros(self.shape)
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != self.shape:
            raise ValueError(f"u has shape {self.u.shape}, expected {self.shape}")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("u must be finite at every node")

    @property
    def shape(self):
        if self.mode == "axisymmetric":
            return (self.N_beta + 1,)
        return (self.N_beta + 1, self.N_xi)

    @property
    def h_beta(self) -> float:
        return (math.pi / 2) / self.N_beta

    @property
    def beta(self) -> np.ndarray:
        return np.linspace(0.0, math.pi / 2, self.N_beta + 1)

    @property
    def h_xi(self) -> float:
        return 2 * math.pi / self.N_xi if self.mode == "full2d" else 0.0

    @property
    def xi(self) -> np.ndarray:
        return np.arange(self.N_xi) * self.h_xi

    def with_u(self, u: np.ndarray) -> "HalfSphereGrid":
        return replace(self, u=np.asarray(u, dtype=float))


@dataclass
class BoundaryFrame:
    """Frame data on the contact circle beta = pi/2."""

    mu: np.ndarray            # outward conormal of the boundary in the surface
    nubar: np.ndarray         # normal of the boundary inside S^n (away from e)
    hhat: np.ndarray          # boundary second fundamental form in S^n (per node)
    ds: np.ndarray            # arclength quadrature weights along the boundary
    polar_radius: np.ndarray  # geodesic radius of the boundary about e
    angle_residual: float     # max |<x, nu> + cos(theta)| over boundary nodes
    frame_residual: float     # max |(cos t mu + sin t nu) - nubar|
    principal_direction_residual: float  # max normalized |h(mu, e_alpha)|
    relation_residual: float  # max |h_aa - (sin t hhat_aa - cos t)|


@dataclass
class GeometryFields:
    """Per-node geometric data of the embedded hypersurface."""

    grid: HalfSphereGrid
    kernel: str
    X: np.ndarray            # ball points (meridian in axisymmetric mode)
    nu: np.ndarray           # outward unit normal of the enclosed region
    kappa: np.ndarray        # principal curvatures, sorted ascending, (..., n)
    area_weight: np.ndarray  # quadrature weights: sum(f * w) ~ integral f dA
    x_dot_nu: np.ndarray
    x_dot_e: np.ndarray
    nu_dot_e: np.ndarray
    boundary: BoundaryFrame
    E: np.ndarray = field(default=None)  # E_0..E_n per node, (..., n+1)

    def __post_init__(self):
        if self.E is None:
            self.E = normalized_mean_curvatures(self.kappa)

    @property
    def area(self) -> float:
        return float(np.sum(self.area_weight))


# ---------------------------------------------------------------------------
# ghost values


def boundary_normal_slope(grid: HalfSphereGrid, u: np.ndarray) -> np.ndarray:
    """Outward normal derivative of u at beta = pi/2 from the contact angle.

    The oblique condition u_beta = -cos(theta) sqrt(1 + u_beta^2 + |tan|^2)
    has the unique negative root u_beta = -cot(theta) sqrt(1 + |tan|^2);
    it reduces to -cot(theta) in axisymmetric mode and to homogeneous
    Neumann at theta = pi/2.
    """
    theta = grid.theta
    cot = 0.0 if abs(theta - math.pi / 2) < 1e-14 else 1.0 / math.tan(theta)
    if grid.mode == "axisymmetric":
        return np.asarray(-cot)
    u_b = u[-1, :]
    u_xi = (np.roll(u_b, -1) - np.roll(u_b, 1)) / (2 * grid.h_xi)
    # at beta = pi/2 the round metric gives |tangential grad| = |u_xi|
    return -cot * np.sqrt(1.0 + u_xi**2)


def extend_with_ghosts(grid: HalfSphereGrid, u: np.ndarray | None = None) -> np.ndarray:
    """u padded with one pole ghost row and one contact-boundary ghost row.

    Pole: reflection u(-h) = u(h) in axisymmetric mode; antipodal ghost
    u(-h, xi) = u(h, xi + pi) in full2d mode, which reduces to the
    reflection on xi-independent data so the two modes stay bit-consistent.
    Boundary: central ghost realizing the oblique contact condition.
    """
    if u is None:
        u = grid.u
    h = grid.h_beta
    slope = boundary_normal_slope(grid, u)
    # one-sided second-order ghost: cubic through u_N, u_{N-1}, u_{N-2} with
    # prescribed slope at the boundary, evaluated at pi/2 + h
    def _ghost(un, un1, un2, s):
        return -1.5 * un + 3.0 * un1 - 0.5 * un2 + 3.0 * h * s

    if grid.mode == "axisymmetric":
        ext = np.empty(u.shape[0] + 2)
        ext[1:-1] = u
        ext[0] = u[1]
        ext[-1] = _ghost(u[-1], u[-2], u[-3], float(slope))
        return ext
    ext = np.empty((u.shape[0] + 2, u.shape[1]))
    ext[1:-1] = u
    ext[0] = np.roll(u[1], grid.N_xi // 2)
    ext[-1] = _ghost(u[-1], u[-2], u[-3], slope)
    return ext


def fill_boundary_ghosts(grid: HalfSphereGrid, u: np.ndarray | None = None) -> np.ndarray:
    """Ghost values of u at beta = pi/2 + h implied by the contact angle."""
    return extend_with_ghosts(grid, u)[-1]


# ---------------------------------------------------------------------------
# embedding kernel


def embed(grid: HalfSphereGrid) -> np.ndarray:
    """Ball embedding X of the graph; axisymmetric mode returns the meridian
    xi = e_1.  All nodes satisfy |X| <= 1 with equality on the boundary."""
    with np.errstate(over="ignore"):
        rho = np.exp(grid.u)
    if not np.all(np.isfinite(rho)):
        raise OverflowError("graph left the chart (e^u overflow)")
    beta = grid.beta
    if grid.mode == "axisymmetric":
        xi = np.zeros(beta.shape + (grid.n,))
        xi[..., 0] = 1.0
        y = mobius.from_polar(rho, beta, xi)
    else:
        zeta = np.stack([np.cos(grid.xi), np.sin(grid.xi)], axis=-1)
        y = mobius.from_polar(
            rho, beta[:, None], np.broadcast_to(zeta, (beta.shape[0],) + zeta.shape)
        )
    return mobius.halfspace_to_ball(y)


def _profile(grid: HalfSphereGrid, u_ext: np.ndarray):
    """Ghost-padded meridian profile (a, b) = (|x'|, x_{n+1}).

    The reflection ghost of u makes a odd and b even across the pole
    automatically; past the contact circle the closed-form embedding extends
    smoothly (|x| > 1 there), which is all central differencing needs.
    """
    h = grid.h_beta
    beta_ext = np.concatenate([[-h], grid.beta, [math.pi / 2 + h]])
    rho_ext = np.exp(u_ext)
    D = rho_ext**2 + 2.0 * rho_ext * np.cos(beta_ext) + 1.0
    a = 2.0 * rho_ext * np.sin(beta_ext) / D
    b = (rho_ext**2 - 1.0) / D
    return a, b


def profile_curvatures(grid: HalfSphereGrid, u_ext: np.ndarray | None = None):
    """Principal curvatures (kappa_profile, kappa_rot) of the axisymmetric
    surface from arclength formulas on the profile (a, b).

    kappa_rot = nu_a / a is degenerate at the pole, where the axis point is
    umbilic; there it is replaced by the profile curvature.
    """
    if grid.mode != "axisymmetric":
        raise ValueError("profile curvatures need axisymmetric mode")
    if u_ext is None:
        u_ext = extend_with_ghosts(grid)
    a, b = _profile(grid, u_ext)
    h = grid.h_beta
    a1 = (a[2:] - a[:-2]) / (2 * h)
    b1 = (b[2:] - b[:-2]) / (2 * h)
    a2 = (a[2:] - 2 * a[1:-1] + a[:-2]) / h**2
    b2 = (b[2:] - 2 * b[1:-1] + b[:-2]) / h**2
    w = np.hypot(a1, b1)
    if np.any(w < 1e-13):
        raise MeshQualityError("degenerate profile speed (self-intersection?)")
    na, nb, sign = _orient_profile_normal(a1, b1)
    kappa_p = sign * (a2 * b1 - a1 * b2) / w**3
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa_r = np.where(a[1:-1] > 1e-14, na / np.maximum(a[1:-1], 1e-300), 0.0)
    kappa_r[0] = kappa_p[0]  # umbilic axis point
    return kappa_p, kappa_r


def _orient_profile_normal(a1, b1):
    """Unit profile normal (n_a, n_b), oriented outward of the enclosed region.

    The enclosed region contains the axis segment between the apex and e, so
    the apex normal must have negative axial component.
    """
    w = np.hypot(a1, b1)
    na, nb = -b1 / w, a1 / w
    s = -math.copysign(1.0, float(nb[0]))
    return s * na, s * nb, s


def fundamental_forms(grid: HalfSphereGrid, u_ext: np.ndarray | None = None) -> GeometryFields:
    """Embedding-kernel geometry fields (finite differences of X)."""
    if u_ext is None:
        u_ext = extend_with_ghosts(grid)
    if grid.mode == "axisymmetric":
        return _fundamental_forms_axisym(grid, u_ext)
    return _fundamental_forms_full2d(grid, u_ext)


def _trapezoid_weights(N: int, h: float) -> np.ndarray:
    w = np.full(N + 1, h)
    w[0] = w[-1] = h / 2
    return w


def _fundamental_forms_axisym(grid: HalfSphereGrid, u_ext: np.ndarray) -> GeometryFields:
    n = grid.n
    h = grid.h_beta
    a, b = _profile(grid, u_ext)
    a1 = (a[2:] - a[:-2]) / (2 * h)
    b1 = (b[2:] - b[:-2]) / (2 * h)
    w = np.hypot(a1, b1)
    if np.any(w < 1e-13):
        raise MeshQualityError("degenerate profile speed")
    kappa_p, kappa_r = profile_curvatures(grid, u_ext)
    na, nb, _ = _orient_profile_normal(a1, b1)

    ai, bi = a[1:-1], b[1:-1]
    kappa = np.sort(
        np.concatenate([kappa_p[:, None], np.repeat(kappa_r[:, None], n - 1, axis=1)], axis=1),
        axis=1,
    )
    # revolution measure: dA = |S^{n-1}| a^{n-1} w dbeta
    weight = _trapezoid_weights(grid.N_beta, h) * sphere_area(n - 1) * ai ** (n - 1) * w

    X = np.zeros((grid.N_beta + 1, n + 1))
    X[:, 0] = ai
    X[:, -1] = bi
    nu = np.zeros_like(X)
    nu[:, 0] = na
    nu[:, -1] = nb

    boundary = _boundary_frame_axisym(grid, ai, bi, a1, b1, na, nb, kappa_r)
    return GeometryFields(
        grid=grid,
        kernel="embedding",
        X=X,
        nu=nu,
        kappa=kappa,
        area_weight=weight,
        x_dot_nu=ai * na + bi * nb,
        x_dot_e=bi,
        nu_dot_e=nb,
        boundary=boundary,
    )


def _boundary_frame_axisym(grid, a, b, a1, b1, na, nb, kappa_r) -> BoundaryFrame:
    n = grid.n
    theta = grid.theta
    w_end = math.hypot(float(a1[-1]), float(b1[-1]))
    mu2 = np.array([a1[-1], b1[-1]]) / w_end  # increasing beta leaves the surface
    nu2 = np.array([na[-1], nb[-1]])
    X2 = np.array([a[-1], b[-1]])
    r0 = math.acos(max(-1.0, min(1.0, float(b[-1]) / math.hypot(float(a[-1]), float(b[-1])))))
    # independent boundary normal inside S^n: meridian tangent away from e
    nubar_indep = np.array([math.cos(r0), -math.sin(r0)])
    nubar_formula = math.cos(theta) * mu2 + math.sin(theta) * nu2
    hhat = 1.0 / math.tan(r0) if r0 > 1e-12 else math.inf
    blen = sphere_area(n - 1) * math.sin(r0) ** (n - 1)
    return BoundaryFrame(
        mu=_lift2(mu2, n),
        nubar=_lift2(nubar_indep, n),
        hhat=np.full(1, hhat),
        ds=np.full(1, blen),
        polar_radius=np.full(1, r0),
        angle_residual=float(abs(X2 @ nu2 + math.cos(theta))),
        frame_residual=float(np.linalg.norm(nubar_formula - nubar_indep)),
        principal_direction_residual=0.0,  # exact by revolution symmetry
        relation_residual=float(abs(kappa_r[-1] - (math.sin(theta) * hhat - math.cos(theta)))),
    )


def _lift2(vec2, n):
    out = np.zeros((1, n + 1))
    out[0, 0] = vec2[0]
    out[0, -1] = vec2[1]
    return out


def _fundamental_forms_full2d(grid: HalfSphereGrid, u_ext: np.ndarray) -> GeometryFields:
    """Direct 2-d stencil kernel for n = 2; the pole row carries no measure
    and copies its scalars from the first ring."""
    n = grid.n
    h = grid.h_beta
    hx = grid.h_xi
    beta_ext = np.concatenate([[-h], grid.beta, [math.pi / 2 + h]])
    rho_ext = np.exp(u_ext)
    zeta = np.stack([np.cos(grid.xi), np.sin(grid.xi)], axis=-1)
    # the antipodal ghost row of u makes from_polar at beta = -h land on the
    # geometrically correct points: sin(-h) zeta(xi) = sin(h) zeta(xi + pi)
    y = mobius.from_polar(
        rho_ext, beta_ext[:, None], np.broadcast_to(zeta, (beta_ext.shape[0],) + zeta.shape)
    )
    Xe = mobius.halfspace_to_ball(y)

    Xb = (Xe[2:] - Xe[:-2]) / (2 * h)
    Xx = (np.roll(Xe, -1, axis=1) - np.roll(Xe, 1, axis=1))[1:-1] / (2 * hx)
    Xbb = (Xe[2:] - 2 * Xe[1:-1] + Xe[:-2]) / h**2
    Xxx = (np.roll(Xe, -1, axis=1) - 2 * Xe + np.roll(Xe, 1, axis=1))[1:-1] / hx**2
    Xbx = (
        np.roll(Xe[2:], -1, axis=1)
        - np.roll(Xe[2:], 1, axis=1)
        - np.roll(Xe[:-2], -1, axis=1)
        + np.roll(Xe[:-2], 1, axis=1)
    ) / (4 * h * hx)

    X = Xe[1:-1]
    nu = np.cross(Xb, Xx)
    norms = np.linalg.norm(nu, axis=-1, keepdims=True)
    norms[0] = 1.0  # pole ring: degenerate chart row, excluded below
    nu = nu / norms

    g11 = np.sum(Xb * Xb, axis=-1)
    g12 = np.sum(Xb * Xx, axis=-1)
    g22 = np.sum(Xx * Xx, axis=-1)
    h11 = -np.sum(Xbb * nu, axis=-1)
    h12 = -np.sum(Xbx * nu, axis=-1)
    h22 = -np.sum(Xxx * nu, axis=-1)

    detg = g11 * g22 - g12 * g12
    if np.any(detg[1:] < DET_G_MIN):
        raise MeshQualityError("degenerate metric")

    kappa = _sym_pencil_eigs_2x2(g11, g12, g22, h11, h12, h22)

    # orientation: outward of the enclosed region (axis reference point)
    t_ref = 0.5 * (float(np.mean(X[0, :, -1])) + 1.0)
    P = np.zeros(n + 1)
    P[-1] = t_ref
    flip = np.sum((X - P) * nu, axis=-1) < 0
    flip[0] = False
    nu[flip] *= -1.0
    kappa[flip] *= -1.0
    for arr in (h11, h12, h22):
        arr[flip] *= -1.0
    kappa = np.sort(kappa, axis=-1)
    kappa[0] = np.mean(kappa[1], axis=0)

    wb = _trapezoid_weights(grid.N_beta, h)
    weight = np.sqrt(np.maximum(detg, 0.0)) * wb[:, None] * hx
    weight[0] = 0.0

    x_dot_nu = np.sum(X * nu, axis=-1)
    x_dot_nu[0] = np.mean(x_dot_nu[1])

    boundary = _boundary_frame_full2d(
        grid, X, nu, Xb, Xx, g11, g12, g22, h12, h22
    )
    return GeometryFields(
        grid=grid,
        kernel="embedding",
        X=X,
        nu=nu,
        kappa=kappa,
        area_weight=weight,
        x_dot_nu=x_dot_nu,
        x_dot_e=X[..., -1],
        nu_dot_e=nu[..., -1],
        boundary=boundary,
    )


def _sym_pencil_eigs_2x2(g11, g12, g22, h11, h12, h22):
    """Eigenvalues of the symmetric-definite pencil h v = kappa g v via the
    Cholesky reduction L^{-1} h L^{-T} (closed form for 2x2)."""
    l11 = np.sqrt(np.maximum(g11, 1e-300))
    l21 = g12 / l11
    l22 = np.sqrt(np.maximum(g22 - l21**2, 1e-300))
    m11 = h11 / np.maximum(g11, 1e-300)
    m12 = (h12 - l21 * (h11 / l11)) / (l11 * l22)
    m22 = (h22 - 2 * l21 * h12 / l11 + l21**2 * h11 / np.maximum(g11, 1e-300)) / l22**2
    tr = m11 + m22
    disc = np.sqrt(np.maximum((m11 - m22) ** 2 + 4 * m12**2, 0.0))
    return np.stack([0.5 * (tr - disc), 0.5 * (tr + disc)], axis=-1)


def _d_dxi_o4(arr: np.ndarray, hx: float) -> np.ndarray:
    """Fourth-order periodic derivative along axis 0."""
    return (
        8.0 * (np.roll(arr, -1, axis=0) - np.roll(arr, 1, axis=0))
        - (np.roll(arr, -2, axis=0) - np.roll(arr, 2, axis=0))
    ) / (12.0 * hx)


def _boundary_frame_full2d(grid, X, nu, Xb, Xx, g11, g12, g22, h12, h22) -> BoundaryFrame:
    theta = grid.theta
    Xb_nodes = X[-1]
    nu_b = nu[-1]
    # fourth-order curve derivatives keep the Gauss-Bonnet path accurate
    Xxi = _d_dxi_o4(Xb_nodes, grid.h_xi)
    speed = np.linalg.norm(Xxi, axis=-1)
    tang = Xxi / speed[:, None]

    # conormal from the centered (ghost-supported) beta tangent
    mu_raw = Xb[-1] - (g12[-1] / g22[-1])[:, None] * Xx[-1]
    mu = mu_raw / np.linalg.norm(mu_raw, axis=-1, keepdims=True)

    angle_res = float(np.max(np.abs(np.sum(Xb_nodes * nu_b, axis=-1) + math.cos(theta))))

    nb = np.cross(Xb_nodes, tang)  # tangent to S^2, normal to the curve
    e_ax = np.array([0.0, 0.0, 1.0])
    s = np.sign(np.sum(nb * (Xb_nodes - e_ax), axis=-1, keepdims=True))
    nb = nb * np.where(s == 0, 1.0, s)
    nubar_formula = math.cos(theta) * mu + math.sin(theta) * nu_b
    frame_res = float(np.max(np.linalg.norm(nubar_formula - nb, axis=-1)))

    # geodesic curvature of the boundary curve in S^2 w.r.t. nb
    ds = speed * grid.h_xi
    dT = _d_dxi_o4(tang, grid.h_xi) / speed[:, None]
    hhat = -np.sum(dT * nb, axis=-1)

    # h(mu, e_alpha) in the orthonormal boundary frame
    mixed = (h12[-1] - (g12[-1] / g22[-1]) * h22[-1]) / np.sqrt(
        np.maximum((g11[-1] - g12[-1] ** 2 / g22[-1]) * g22[-1], 1e-300)
    )
    pd_res = float(np.max(np.abs(mixed)))

    k_tang = h22[-1] / g22[-1]
    relation_res = float(np.max(np.abs(k_tang - (math.sin(theta) * hhat - math.cos(theta)))))
    polar = np.arccos(np.clip(Xb_nodes[:, -1], -1, 1))
    return BoundaryFrame(
        mu=mu,
        nubar=nb,
        hhat=hhat,
        ds=ds,
        polar_radius=polar,
        angle_residual=angle_res,
        frame_residual=frame_res,
        principal_direction_residual=pd_res,
        relation_residual=relation_res,
    )


# ---------------------------------------------------------------------------
# conformal graph kernel


def conformal_graph_kernel(grid: HalfSphereGrid, u_ext: np.ndarray | None = None) -> GeometryFields:
    """Independent curvature kernel: flat radial-graph shape operator plus
    the conformal shift into the ball metric."""
    if u_ext is None:
        u_ext = extend_with_ghosts(grid)
    if grid.mode == "axisymmetric":
        return _conformal_kernel_axisym(grid, u_ext)
    return _conformal_kernel_full2d(grid, u_ext)


@dataclass
class SpeedData:
    """Lean per-node data for flow speeds: principal curvatures (unsorted
    pair layout in axisymmetric mode), graph gradient factor v, radius rho,
    and the conformal factor E at the graph points."""

    kappa: np.ndarray  # (..., n)
    v: np.ndarray
    rho: np.ndarray
    E: np.ndarray


def conformal_speed_data(grid: HalfSphereGrid, u_ext: np.ndarray | None = None) -> SpeedData:
    """Curvatures and graph factors without the full field assembly."""
    if u_ext is None:
        u_ext = extend_with_ghosts(grid)
    if grid.mode == "axisymmetric":
        km_ball, kr_ball, u1, rho, v, E = _conformal_core_axisym(grid, u_ext)
        n = grid.n
        kappa = np.concatenate(
            [km_ball[:, None], np.repeat(kr_ball[:, None], n - 1, axis=1)], axis=1
        )
        return SpeedData(kappa=kappa, v=v, rho=rho, E=E)
    kappa, w1, w2, rho, v, E = _conformal_core_full2d(grid, u_ext)
    return SpeedData(kappa=kappa, v=v, rho=rho, E=E)


def _conformal_core_axisym(grid: HalfSphereGrid, u_ext: np.ndarray):
    h = grid.h_beta
    beta = grid.beta
    u = u_ext[1:-1]
    u1 = (u_ext[2:] - u_ext[:-2]) / (2 * h)
    u2 = (u_ext[2:] - 2 * u_ext[1:-1] + u_ext[:-2]) / h**2
    rho = np.exp(u)
    v = np.sqrt(1.0 + u1**2)

    sinb = np.sin(beta)
    cosb = np.cos(beta)
    safe_sin = np.maximum(sinb, 1e-14)
    # covariant Hessian of u on S^n, orthonormal (meridian, rotational) frame
    H_mm = u2
    H_rr = np.where(sinb > 1e-14, cosb / safe_sin * u1, u2)

    # flat radial graph, outward normal: kappa_out; toward-origin flips sign
    km = -(1.0 + u1**2 - H_mm) / (rho * v**3)
    kr = -(1.0 - H_rr) / (rho * v)

    E, dOm_N = _conformal_shift(rho, sinb, cosb, u1, v)
    return E * (km + dOm_N), E * (kr + dOm_N), u1, rho, v, E


def _conformal_kernel_axisym(grid: HalfSphereGrid, u_ext: np.ndarray) -> GeometryFields:
    n = grid.n
    h = grid.h_beta
    beta = grid.beta
    sinb = np.sin(beta)
    km_ball, kr_ball, u1, rho, v, E = _conformal_core_axisym(grid, u_ext)
    kappa = np.sort(
        np.concatenate([km_ball[:, None], np.repeat(kr_ball[:, None], n - 1, axis=1)], axis=1),
        axis=1,
    )

    X, nu = _graph_normal_axisym(grid, rho, beta, u1, v)
    # ball area element: flat element rho^n v dsigma scaled by (1/E)^n
    dens = sphere_area(n - 1) * rho**n * v * sinb ** (n - 1) / E**n
    weight = _trapezoid_weights(grid.N_beta, h) * dens

    theta = grid.theta
    a_end, b_end = X[-1, 0], X[-1, -1]
    r0 = math.acos(max(-1.0, min(1.0, float(b_end))))
    hhat = 1.0 / math.tan(r0) if r0 > 1e-12 else math.inf
    mu2 = _boundary_mu_from_graph(rho, u1)
    nu2 = np.array([nu[-1, 0], nu[-1, -1]])
    nubar_indep = np.array([math.cos(r0), -math.sin(r0)])
    boundary = BoundaryFrame(
        mu=_lift2(mu2, n),
        nubar=_lift2(nubar_indep, n),
        hhat=np.full(1, hhat),
        ds=np.full(1, sphere_area(n - 1) * math.sin(r0) ** (n - 1)),
        polar_radius=np.full(1, r0),
        angle_residual=float(abs(a_end * nu2[0] + b_end * nu2[1] + math.cos(theta))),
        frame_residual=float(
            np.linalg.norm(math.cos(theta) * mu2 + math.sin(theta) * nu2 - nubar_indep)
        ),
        principal_direction_residual=0.0,
        relation_residual=float(abs(kr_ball[-1] - (math.sin(theta) * hhat - math.cos(theta)))),
    )
    return GeometryFields(
        grid=grid,
        kernel="conformal",
        X=X,
        nu=nu,
        kappa=kappa,
        area_weight=weight,
        x_dot_nu=np.sum(X * nu, axis=-1),
        x_dot_e=X[..., -1],
        nu_dot_e=nu[..., -1],
        boundary=boundary,
    )


def _conformal_shift(rho, sinb, cosb, u1, v):
    """Conformal factor E and normal derivative of Omega = -log E along the
    toward-origin flat normal N = (grad u - z)/v."""
    Dy = rho**2 + 2.0 * rho * cosb + 1.0
    E = 0.5 * Dy
    dOm_z = -(2.0 * rho + 2.0 * cosb) / Dy
    dOm_eb = 2.0 * sinb / Dy
    dOm_N = (u1 * dOm_eb - dOm_z) / v
    return E, dOm_N


def _graph_normal_axisym(grid, rho, beta, u1, v):
    """Ball embedding and outward normal via the conformal correspondence.

    The enclosed region sits radially beyond the graph in half-space, so the
    outward ball normal is minus the normalized pushforward of the flat
    away-from-origin normal.
    """
    n = grid.n
    sinb, cosb = np.sin(beta), np.cos(beta)
    y_r = rho * sinb
    y_z = rho * cosb
    # flat toward-origin normal in the meridian plane (radial, axial) coords
    N_r = (u1 * cosb - sinb) / v
    N_z = (-u1 * sinb - cosb) / v
    Pr, Pz = _pushforward_meridian(y_r, y_z, N_r, N_z)
    norm = np.hypot(Pr, Pz)
    nu = np.zeros((beta.shape[0], n + 1))
    nu[:, 0] = -Pr / norm
    nu[:, -1] = -Pz / norm
    D = y_r**2 + (y_z + 1.0) ** 2
    X = np.zeros_like(nu)
    X[:, 0] = 2.0 * y_r / D
    X[:, -1] = (y_r**2 + y_z**2 - 1.0) / D
    # toward-origin N pushes forward to the inward side; outward = -pushforward
    # flips again: orientation fixed so that the apex normal is -e
    sgn = -math.copysign(1.0, float(nu[0, -1]))
    return X, sgn * nu


def _pushforward_meridian(y_r, y_z, V_r, V_z):
    """Differential of the half-space-to-ball map in a meridian plane."""
    D = y_r**2 + (y_z + 1.0) ** 2
    num_z = y_r**2 + y_z**2 - 1.0
    dxr_dyr = 2.0 / D - 4.0 * y_r * y_r / D**2
    dxr_dyz = -4.0 * y_r * (y_z + 1.0) / D**2
    dxz_dyr = 2.0 * y_r / D - 2.0 * num_z * y_r / D**2
    dxz_dyz = 2.0 * y_z / D - 2.0 * num_z * (y_z + 1.0) / D**2
    return dxr_dyr * V_r + dxr_dyz * V_z, dxz_dyr * V_r + dxz_dyz * V_z


def _boundary_mu_from_graph(rho, u1):
    """Outward conormal at the contact circle via the graph tangent."""
    # d/dbeta (rho z) at beta = pi/2: rho (u1 z + e_beta), z = (1,0), e_b = (0,-1)
    t_r = float(u1[-1])
    t_z = -1.0
    y_r = float(rho[-1])
    Tr, Tz = _pushforward_meridian(
        np.asarray(y_r), np.asarray(0.0), np.asarray(t_r), np.asarray(t_z)
    )
    norm = math.hypot(float(Tr), float(Tz))
    return np.array([float(Tr) / norm, float(Tz) / norm])


def _conformal_core_full2d(grid: HalfSphereGrid, u_ext: np.ndarray):
    h = grid.h_beta
    hx = grid.h_xi
    beta = grid.beta
    u = u_ext[1:-1]
    u_b = (u_ext[2:] - u_ext[:-2]) / (2 * h)
    u_bb = (u_ext[2:] - 2 * u_ext[1:-1] + u_ext[:-2]) / h**2
    u_x = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2 * hx)
    u_xx = (np.roll(u, -1, axis=1) - 2 * u + np.roll(u, 1, axis=1)) / hx**2
    u_bx = (
        np.roll(u_ext[2:], -1, axis=1)
        - np.roll(u_ext[2:], 1, axis=1)
        - np.roll(u_ext[:-2], -1, axis=1)
        + np.roll(u_ext[:-2], 1, axis=1)
    ) / (4 * h * hx)

    sinb = np.sin(beta)[:, None]
    cosb = np.cos(beta)[:, None]
    safe_sin = np.maximum(sinb, 1e-14)
    cotb = np.where(sinb > 1e-14, cosb / safe_sin, 0.0)

    w1 = u_b
    w2 = np.where(sinb > 1e-14, u_x / safe_sin, 0.0)
    H11 = u_bb
    H12 = np.where(sinb > 1e-14, (u_bx - cotb * u_x) / safe_sin, 0.0)
    H22 = np.where(sinb > 1e-14, u_xx / safe_sin**2 + cotb * u_b, u_bb)

    rho = np.exp(u)
    v = np.sqrt(1.0 + w1**2 + w2**2)

    g11 = rho**2 * (1.0 + w1 * w1)
    g12 = rho**2 * (w1 * w2)
    g22 = rho**2 * (1.0 + w2 * w2)
    f = rho / v
    h11o = f * (1.0 + w1 * w1 - H11)
    h12o = f * (w1 * w2 - H12)
    h22o = f * (1.0 + w2 * w2 - H22)
    k_flat = -_sym_pencil_eigs_2x2(g11, g12, g22, h11o, h12o, h22o)

    E, dOm_N = _conformal_shift(rho, sinb, cosb, w1, v)
    kappa = np.sort(E[..., None] * (k_flat + dOm_N[..., None]), axis=-1)
    kappa[0] = np.mean(kappa[1], axis=0)
    return kappa, w1, w2, rho, v, E


def _conformal_kernel_full2d(grid: HalfSphereGrid, u_ext: np.ndarray) -> GeometryFields:
    n = grid.n
    h = grid.h_beta
    hx = grid.h_xi
    beta = grid.beta
    sinb = np.sin(beta)[:, None]
    kappa, w1, w2, rho, v, E = _conformal_core_full2d(grid, u_ext)
    X = embed(grid)
    nu = _graph_normal_full2d(grid, rho, w1, w2, v)
    area_dens = rho**2 * v * sinb / E**2
    wb = _trapezoid_weights(grid.N_beta, h)
    weight = area_dens * wb[:, None] * hx
    weight[0] = 0.0

    theta = grid.theta
    Xb_nodes = X[-1]
    nu_b = nu[-1]
    polar = np.arccos(np.clip(Xb_nodes[:, -1], -1, 1))
    ds_b = np.linalg.norm(_d_dxi_o4(Xb_nodes, hx), axis=-1) * hx
    boundary = BoundaryFrame(
        mu=np.full_like(Xb_nodes, np.nan),
        nubar=np.full_like(Xb_nodes, np.nan),
        hhat=np.full(polar.shape, np.nan),  # boundary form comes from the embedding kernel
        ds=ds_b,
        polar_radius=polar,
        angle_residual=float(np.max(np.abs(np.sum(Xb_nodes * nu_b, axis=-1) + math.cos(theta)))),
        frame_residual=math.nan,
        principal_direction_residual=math.nan,
        relation_residual=math.nan,
    )
    x_dot_nu = np.sum(X * nu, axis=-1)
    x_dot_nu[0] = np.mean(x_dot_nu[1])
    return GeometryFields(
        grid=grid,
        kernel="conformal",
        X=X,
        nu=nu,
        kappa=kappa,
        area_weight=weight,
        x_dot_nu=x_dot_nu,
        x_dot_e=X[..., -1],
        nu_dot_e=nu[..., -1],
        boundary=boundary,
    )


def _graph_normal_full2d(grid, rho, w1, w2, v):
    beta = grid.beta[:, None]
    xi = grid.xi[None, :]
    sinb, cosb = np.sin(beta), np.cos(beta)
    cosx, sinx = np.cos(xi), np.sin(xi)
    one = np.ones(np.broadcast_shapes(beta.shape, xi.shape))
    z = np.stack([sinb * cosx, sinb * sinx, cosb * one], axis=-1)
    e_b = np.stack([cosb * cosx, cosb * sinx, -sinb * one], axis=-1)
    e_x = np.stack([-sinx * one, cosx * one, 0.0 * one], axis=-1)
    N_flat = (w1[..., None] * e_b + w2[..., None] * e_x - z) / v[..., None]
    y = rho[..., None] * z
    nu = -_pushforward_ambient(y, N_flat)
    nu /= np.linalg.norm(nu, axis=-1, keepdims=True)
    # fix orientation at the apex row: axial component must be negative
    if np.mean(nu[0, :, -1]) > 0:
        nu = -nu
    return nu


def _pushforward_ambient(y, V):
    """Differential of the half-space-to-ball map applied to V at y."""
    yl = y[..., -1]
    D = np.sum(y * y, axis=-1) + 2.0 * yl + 1.0
    e = np.zeros(y.shape[-1])
    e[-1] = 1.0
    dot = np.sum((y + e) * V, axis=-1, keepdims=True)
    x = np.empty_like(y)
    x[..., :-1] = 2.0 * y[..., :-1] / D[..., None]
    x[..., -1] = (np.sum(y * y, axis=-1) - 1.0) / D
    out = np.empty_like(y)
    out[..., :-1] = 2.0 * V[..., :-1] / D[..., None]
    out[..., -1] = 2.0 * np.sum(y * V, axis=-1) / D
    return out - x * (2.0 * dot / D[..., None])


# ---------------------------------------------------------------------------
# reports


@dataclass
class ConvexityReport:
    kappa_min: float
    kappa_max: float
    h_tilde_max: float       # max over nodes of sum 1/kappa_i (nan if not convex)
    umbilicity_deviation: float
    x_dot_nu_max: float
    x_dot_nu_min: float
    x_dot_e_min: float
    x_dot_e_max: float
    strictly_convex: bool


def convexity_report(fields: GeometryFields, tol: float = 1e-12) -> ConvexityReport:
    kappa = fields.kappa
    x_dot_nu = fields.x_dot_nu
    x_dot_e = fields.x_dot_e
    if fields.grid.mode == "full2d":
        kappa = kappa[1:]  # pole row is a collapsed coordinate artifact
        x_dot_nu = x_dot_nu[1:]
        x_dot_e = x_dot_e[1:]
    kmin = float(np.min(kappa))
    kmax = float(np.max(kappa))
    convex = kmin > tol * max(1.0, abs(kmax))
    h_tilde = float(np.max(np.sum(1.0 / kappa, axis=-1))) if convex else math.nan
    umb = float(np.max(np.abs(kappa - np.mean(kappa, axis=-1, keepdims=True))))
    return ConvexityReport(
        kappa_min=kmin,
        kappa_max=kmax,
        h_tilde_max=h_tilde,
        umbilicity_deviation=umb,
        x_dot_nu_max=float(np.max(x_dot_nu)),
        x_dot_nu_min=float(np.min(x_dot_nu)),
        x_dot_e_min=float(np.min(x_dot_e)),
        x_dot_e_max=float(np.max(x_dot_e)),
        strictly_convex=bool(convex),
    )


def boundary_frame(fields: GeometryFields) -> BoundaryFrame:
    return fields.boundary

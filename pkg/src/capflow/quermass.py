"""Quermassintegral quadrature: bulk curvature integrals, enclosed volume,
sphere-side boundary quermassintegrals, and the W_k assembly.

For the free-boundary case (theta = pi/2) the assembly is

    W_0 = |enclosed region|,   W_1 = |Sigma|/(n+1),
    W_k = (1/(n+1)) int E_{k-1} dA + ((k-1)/((n+1)(n-k+2))) W^S_{k-2},

with W^S_k the quermassintegrals of the boundary body inside S^n.  For
contact angles theta < pi/2 the displayed general assembly is implemented
for W_0, W_1 and W_2; its higher-order correction sums do not survive the
variational cross-check and are left unassembled (NaN), see the module
notes in the README.

Exact references for spherical caps, flat balls, and geodesic balls back
every quadrature with closed forms or 1-d adaptive quadrature oracles.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import geometry, mobius
from .symfunc import ball_volume, binom, sphere_area


@dataclass
class QuermassVector:
    """All quermassintegrals of one hypersurface, with their ingredients."""

    n: int
    theta: float
    Wtheta: np.ndarray              # W_0 .. W_{n+1}
    Wsphere: np.ndarray             # W^S_0 .. W^S_n of the boundary body
    curvature_integrals: np.ndarray  # int E_k dA, k = 0..n
    boundary_integrals: np.ndarray   # int E^S_j ds over the contact set, j = 0..n-1
    area: float
    volume: float

    def __post_init__(self):
        if self.volume < -1e-8:
            raise ValueError("negative enclosed volume: orientation error")


def surface_integrals(fields: geometry.GeometryFields) -> np.ndarray:
    """Curvature integrals int E_k dA for k = 0..n (k = 0 is the area)."""
    w = fields.area_weight
    E = fields.E
    return np.tensordot(w, E, axes=(tuple(range(w.ndim)), tuple(range(w.ndim))))


def sphere_region_area(fields: geometry.GeometryFields) -> float:
    """Area of the boundary body inside S^n.

    Axisymmetric mode integrates the polar cap about e out to the geodesic
    radius of the contact circle; full2d mode uses the Gauss-Bonnet identity
    area = 2 pi - int (geodesic curvature) ds on S^2.
    """
    n = fields.grid.n
    if fields.grid.mode == "axisymmetric":
        r0 = float(fields.boundary.polar_radius[0])
        val, _ = quad(lambda s: math.sin(s) ** (n - 1), 0.0, r0)
        return sphere_area(n - 1) * val
    hhat = fields.boundary.hhat
    if np.any(~np.isfinite(hhat)):
        raise ValueError("full2d sphere-region area needs embedding-kernel boundary data")
    ds = _boundary_ds(fields)
    return 2.0 * math.pi - float(np.sum(hhat * ds))


def _boundary_ds(fields: geometry.GeometryFields) -> np.ndarray:
    """Arclength weights along the contact set (from the boundary frame)."""
    return fields.boundary.ds


def boundary_integrals(fields: geometry.GeometryFields) -> np.ndarray:
    """int E^S_j ds over the contact set for j = 0..n-1, where E^S_j are the
    normalized mean curvatures of the boundary inside S^n."""
    n = fields.grid.n
    ds = _boundary_ds(fields)
    out = np.empty(n)
    if fields.grid.mode == "axisymmetric":
        # latitude sphere: all principal curvatures equal cot(r0)
        hh = float(fields.boundary.hhat[0])
        for j in range(n):
            out[j] = float(ds[0]) * hh**j
        return out
    hh = fields.boundary.hhat
    for j in range(n):
        out[j] = float(np.sum(hh**j * ds))
    return out


def sphere_quermass(fields: geometry.GeometryFields) -> np.ndarray:
    """W^S_0..W^S_n of the boundary body via the spherical recursion
    W^S_k = (1/n) int E^S_{k-1} ds + ((k-1)/(n-k+2)) W^S_{k-2}."""
    n = fields.grid.n
    bints = boundary_integrals(fields)
    W = np.empty(n + 1)
    W[0] = sphere_region_area(fields)
    W[1] = bints[0] / n
    for k in range(2, n + 1):
        W[k] = bints[k - 1] / n + (k - 1) / (n - k + 2) * W[k - 2]
    return W


def geodesic_ball_odd_quermass(n: int, k: int, rho: float) -> float:
    """Closed form of W^S_{2k-1} for a geodesic ball of radius rho in S^n."""
    if k < 1 or 2 * k - 1 > n:
        raise ValueError("need 1 <= 2k-1 <= n")
    total = 0.0
    for i in range(k):
        num = _dfact(2 * k - 2) * _dfact(n - 2 * k + 1)
        den = _dfact(2 * k - 2 * i - 2) * _dfact(n - 2 * k + 2 * i + 1)
        total += num / den * math.cos(rho) ** (2 * k - 2 * i - 2) * math.sin(rho) ** (
            n - 2 * k + 2 * i + 1
        )
    return sphere_area(n - 1) / n * total


def _dfact(m: int) -> int:
    from .symfunc import double_factorial

    return double_factorial(m)


def enclosed_volume(fields: geometry.GeometryFields, w0_sphere: float | None = None) -> float:
    """Enclosed volume by the divergence theorem:
    (n+1) |region| = int <x, nu> dA + |boundary body in S^n|."""
    if w0_sphere is None:
        w0_sphere = sphere_region_area(fields)
    n = fields.grid.n
    flux = float(np.sum(fields.x_dot_nu * fields.area_weight))
    vol = (flux + w0_sphere) / (n + 1)
    if vol < -1e-8:
        raise ValueError("negative enclosed volume: orientation error")
    return vol


def assemble_W(fields: geometry.GeometryFields) -> QuermassVector:
    """Fill W_0..W_{n+1}.  theta = pi/2 uses the free-boundary forms; smaller
    contact angles use the general assembly for W_1 and W_2 (higher entries
    NaN, see module docstring)."""
    n = fields.grid.n
    theta = fields.grid.theta
    WS = sphere_quermass(fields)
    cints = surface_integrals(fields)
    bints = boundary_integrals(fields)
    area = float(cints[0])
    vol = enclosed_volume(fields, WS[0])
    W = np.full(n + 2, np.nan)
    W[0] = vol
    free_boundary = abs(theta - math.pi / 2) < 1e-13
    if free_boundary:
        W[1] = area / (n + 1)
        for k in range(2, n + 2):
            W[k] = cints[k - 1] / (n + 1) + (k - 1) / ((n + 1) * (n - k + 2)) * WS[k - 2]
    else:
        ct, st = math.cos(theta), math.sin(theta)
        W[1] = (area - ct * WS[0]) / (n + 1)
        # displayed general assembly, k = 1 (the variationally validated case)
        W[2] = (cints[1] - ct * st * WS[1] + ((n - 1) * ct**2 + 1) / n * WS[0]) / (n + 1)
    return QuermassVector(
        n=n,
        theta=theta,
        Wtheta=W,
        Wsphere=WS,
        curvature_integrals=cints,
        boundary_integrals=bints,
        area=area,
        volume=vol,
    )


def general_assembly_correction(n: int, k: int, theta: float, Wsphere: np.ndarray) -> float:
    """The displayed correction sum of the general-theta W_{k+1} assembly.

    Exposed for experiments; for k >= 2 it fails the variational
    cross-check and diverges as theta -> pi/2, so assemble_W does not use it.
    """
    ct, st, tt = math.cos(theta), math.sin(theta), math.tan(theta)
    total = 0.0
    for ell in range(k):
        total += (
            (-1.0) ** (k + ell)
            / (n - ell)
            * binom(k, ell)
            * ((n - k) * ct**2 + (k - ell))
            * ct ** (k - 1 - ell)
            * tt**ell
            * Wsphere[ell]
        )
    return total


# ---------------------------------------------------------------------------
# exact references


def cap_area_exact(theta: float, r: float, n: int) -> float:
    """Area of the cap surface (zone of the generating sphere, or flat disk)."""
    if math.isinf(r):
        return ball_volume(n) * math.sin(theta) ** n
    c = math.sqrt(r**2 + 2 * r * math.cos(theta) + 1.0)
    alpha = math.acos((r + math.cos(theta)) / c)
    val, _ = quad(lambda t: math.sin(t) ** (n - 1), 0.0, alpha)
    return sphere_area(n - 1) * r**n * val


def cap_volume_exact(theta: float, r: float, n: int) -> float:
    """Enclosed volume by slab integration (independent of the divergence-
    theorem path used by the pipeline)."""
    if math.isinf(r):
        h0 = math.cos(theta)
        val, _ = quad(lambda s: (1.0 - s * s) ** (n / 2.0), h0, 1.0)
        return ball_volume(n) * val
    c = math.sqrt(r**2 + 2 * r * math.cos(theta) + 1.0)
    h0 = (1.0 + r * math.cos(theta)) / c  # height of the contact circle
    upper, _ = quad(lambda s: (1.0 - s * s) ** (n / 2.0), h0, 1.0)
    lower, _ = quad(lambda s: (r**2 - (s - c) ** 2) ** (n / 2.0), c - r, h0)
    return ball_volume(n) * (upper + lower)


def geodesic_ball_quermass(n: int, r0: float) -> np.ndarray:
    """W^S_0..W^S_n of a geodesic ball of radius r0 in S^n, by the recursion
    with exact boundary curvature cot(r0)."""
    area, _ = quad(lambda s: math.sin(s) ** (n - 1), 0.0, r0)
    W = np.empty(n + 1)
    W[0] = sphere_area(n - 1) * area
    blen = sphere_area(n - 1) * math.sin(r0) ** (n - 1)
    cot = 1.0 / math.tan(r0)
    W[1] = blen / n
    for k in range(2, n + 1):
        W[k] = blen * cot ** (k - 1) / n + (k - 1) / (n - k + 2) * W[k - 2]
    return W


def cap_quermass_exact(theta: float, r: float, n: int) -> QuermassVector:
    """Semi-analytic quermass vector of a cap: closed-form area and curvature
    integrals (umbilic: E_k = r^{-k}), slab volume, exact boundary body."""
    spec = mobius.CapSpec(theta=theta, r=r)
    r0 = spec.boundary_polar_radius
    area = cap_area_exact(theta, r, n)
    vol = cap_volume_exact(theta, r, n)
    kinv = 0.0 if math.isinf(r) else 1.0 / r
    cints = np.array([area * kinv**k for k in range(n + 1)])
    WS = geodesic_ball_quermass(n, r0)
    blen = sphere_area(n - 1) * math.sin(r0) ** (n - 1)
    cot = 1.0 / math.tan(r0)
    bints = np.array([blen * cot**j for j in range(n)])
    W = np.full(n + 2, np.nan)
    W[0] = vol
    if abs(theta - math.pi / 2) < 1e-13:
        W[1] = area / (n + 1)
        for k in range(2, n + 2):
            W[k] = cints[k - 1] / (n + 1) + (k - 1) / ((n + 1) * (n - k + 2)) * WS[k - 2]
    else:
        ct, st = math.cos(theta), math.sin(theta)
        W[1] = (area - ct * WS[0]) / (n + 1)
        W[2] = (cints[1] - ct * st * WS[1] + ((n - 1) * ct**2 + 1) / n * WS[0]) / (n + 1)
    return QuermassVector(
        n=n,
        theta=theta,
        Wtheta=W,
        Wsphere=WS,
        curvature_integrals=cints,
        boundary_integrals=bints,
        area=area,
        volume=vol,
    )


def flat_disk_quermass(n: int) -> QuermassVector:
    """Exact quermass vector of the free-boundary flat disk."""
    return cap_quermass_exact(math.pi / 2, math.inf, n)


# ---------------------------------------------------------------------------
# cap tables


def cap_fields(theta: float, r: float, n: int, N_beta: int, kernel: str = "embedding"):
    """Geometry fields of an exact cap on an axisymmetric grid."""
    spec = mobius.CapSpec(theta=theta, r=r)
    grid = geometry.HalfSphereGrid(n=n, N_beta=N_beta, theta=theta)
    grid.u = mobius.cap_graph_u(spec, grid.beta)
    build = geometry.fundamental_forms if kernel == "embedding" else geometry.conformal_graph_kernel
    return build(grid)


@dataclass
class CapTable:
    """Monotone table r -> f_k(r) = W_k(cap) with inverse lookup.

    Internally parametrized by s = 1/(1+r), which places the flat-ball
    endpoint r = infinity at s = 0 inside the interpolation range.  Only the
    columns k <= n are lookup targets; the top entry W_{n+1} is a constant
    of the contact angle, not a monotone function of r.
    """

    theta: float
    n: int
    r_values: np.ndarray       # finite radii, increasing
    f: np.ndarray              # (len(r), n+2); column k is f_k
    f_infinity: np.ndarray     # flat-ball endpoint values

    def __post_init__(self):
        for k in range(self.n + 1):
            col = np.append(self.f[:, k], self.f_infinity[k])
            if not np.all(np.diff(col) > 0):
                raise ValueError(
                    f"cap table column {k} is not strictly increasing: the "
                    "discretization bias exceeds the f_k increments near the "
                    "flat endpoint; refine N_beta or reduce the radius range"
                )
        s = 1.0 / (1.0 + self.r_values)          # decreasing in r
        s_grid = np.concatenate([[0.0], s[::-1]])  # increasing
        self._interp = {}
        for k in range(self.n + 1):
            vals = np.concatenate([[self.f_infinity[k]], self.f[::-1, k]])
            self._interp[k] = PchipInterpolator(s_grid, vals)
        self.columns = list(range(self.n + 1))

    def value(self, k: int, r: float) -> float:
        s = 0.0 if math.isinf(r) else 1.0 / (1.0 + r)
        return float(self._interp[k](s))

    def inverse(self, k: int, w: float, tol: float = 1e-10, slack: float = 1e-12) -> float:
        """Radius with f_k(r) = w, by bisection on the monotone interpolant.

        Values within `slack` beyond the table range clamp to the nearest
        endpoint (conservative for inequality checks); anything farther out
        raises.
        """
        s_lo, s_hi = 0.0, 1.0 / (1.0 + float(self.r_values[0]))
        f_hi, f_lo = self.value(k, math.inf), float(self.f[0, k])
        if not f_lo - slack <= w <= f_hi + slack:
            raise ValueError(
                f"W_{k} = {w} outside the tabulated cap range [{f_lo}, {f_hi}]"
            )
        w = min(max(w, f_lo), f_hi)
        g = self._interp[k]
        s = brentq(lambda ss: float(g(ss)) - w, s_lo, s_hi, xtol=tol)
        return math.inf if s <= 0.0 else 1.0 / s - 1.0

    def compose(self, k_out: int, k_in: int, w_in: float, slack: float = 1e-12) -> float:
        """(f_{k_out} o f_{k_in}^{-1})(w_in)."""
        return self.value(k_out, self.inverse(k_in, w_in, slack=slack))

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ",".join(f"f_{k}" for k in range(self.n + 1))
        buf.write(f"r,{cols}\n")
        for i, r in enumerate(self.r_values):
            row = ",".join(_fmt(x) for x in self.f[i, : self.n + 1])
            buf.write(f"{_fmt(r)},{row}\n")
        row = ",".join(_fmt(x) for x in self.f_infinity[: self.n + 1])
        buf.write(f"inf,{row}\n")
        return buf.getvalue()


def _fmt(x: float) -> str:
    return "nan" if not np.isfinite(x) else f"{x:.17g}"


def cap_reference_f(
    theta: float,
    n: int,
    r_values: np.ndarray | None = None,
    N_beta: int = 200,
) -> CapTable:
    """Tabulate f_k(r) = W_k(cap of radius r) by the full pipeline, plus the
    r = infinity endpoint.  Default radii: 64 log-spaced in [0.1, 50]."""
    if r_values is None:
        r_values = np.geomspace(0.1, 50.0, 64)
    r_values = np.asarray(r_values, dtype=float)
    if r_values.size == 0:
        raise ValueError("empty radius grid")
    if np.any(np.diff(r_values) <= 0):
        raise ValueError("radius grid must be strictly increasing")
    rows = []
    for r in r_values:
        qv = assemble_W(cap_fields(theta, float(r), n, N_beta))
        rows.append(qv.Wtheta)
    grid = geometry.HalfSphereGrid(n=n, N_beta=N_beta, theta=theta)
    grid.u = mobius.cap_graph_u(mobius.CapSpec(theta=theta, r=math.inf), grid.beta)
    f_inf = assemble_W(geometry.fundamental_forms(grid)).Wtheta
    return CapTable(
        theta=theta, n=n, r_values=r_values, f=np.array(rows), f_infinity=f_inf
    )

"""Conformal dictionary between the unit ball and the upper half-space.

The Mobius map phi sends the closed unit ball to the closed upper half-space,
taking the boundary sphere to the plane {y_{n+1} = 0} with a pole at the
distinguished axis direction e (the last coordinate vector).  Capillary
hypersurfaces in the ball become star-shaped radial graphs rho = e^u over the
closed upper half-sphere; spherical caps and flat balls have closed-form
graphs, generated here, and serve as the exact references for everything
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

POLE_TOL = 1e-9


class PoleError(ValueError):
    """Input too close to the pole e of the ball-to-half-space map."""


def _split(p: np.ndarray):
    p = np.asarray(p, dtype=float)
    return p[..., :-1], p[..., -1]


def ball_to_halfspace(x: np.ndarray) -> np.ndarray:
    """Map ball points to the upper half-space; pole at x = e.

    y = (2 x' , 1 - |x|^2) / (|x'|^2 + (x_{n+1} - 1)^2), fixing the equator
    pointwise and sending -e to the origin.
    """
    x = np.asarray(x, dtype=float)
    xp, xl = _split(x)
    denom = np.sum(xp * xp, axis=-1) + (xl - 1.0) ** 2
    if np.any(denom < POLE_TOL**2):
        raise PoleError("point within 1e-9 of the pole e")
    y = np.empty_like(x)
    y[..., :-1] = 2.0 * xp / denom[..., None]
    y[..., -1] = (1.0 - np.sum(xp * xp, axis=-1) - xl * xl) / denom
    return y


def halfspace_to_ball(y: np.ndarray) -> np.ndarray:
    """Inverse map; sends {y_{n+1} = 0} to the unit sphere and 0 to -e."""
    y = np.asarray(y, dtype=float)
    yp, yl = _split(y)
    denom = np.sum(yp * yp, axis=-1) + (yl + 1.0) ** 2
    x = np.empty_like(y)
    x[..., :-1] = 2.0 * yp / denom[..., None]
    x[..., -1] = (np.sum(yp * yp, axis=-1) + yl * yl - 1.0) / denom
    return x


def conformal_factor(y: np.ndarray) -> np.ndarray:
    """Length-scale factor e^w of the ball metric in half-space coordinates.

    e^w(y) = (|y'|^2 + (y_{n+1}+1)^2)/2: a flat displacement dy at y has ball
    length e^w |dy|.  Consistency with the ball-side factor
    2/(|x'|^2 + (x_{n+1}-1)^2) at corresponding points is enforced in tests.
    """
    y = np.asarray(y, dtype=float)
    yp, yl = _split(y)
    return 0.5 * (np.sum(yp * yp, axis=-1) + (yl + 1.0) ** 2)


def conformal_factor_ball_side(x: np.ndarray) -> np.ndarray:
    """The same length-scale factor expressed at the ball point x."""
    x = np.asarray(x, dtype=float)
    xp, xl = _split(x)
    return 2.0 / (np.sum(xp * xp, axis=-1) + (xl - 1.0) ** 2)


def to_polar(y: np.ndarray):
    """Half-space polar coordinates (rho, beta, xi): y = rho(sin(beta) xi, cos(beta))."""
    y = np.asarray(y, dtype=float)
    yp, yl = _split(y)
    rho = np.sqrt(np.sum(yp * yp, axis=-1) + yl * yl)
    beta = np.arccos(np.clip(yl / np.where(rho > 0, rho, 1.0), -1.0, 1.0))
    norm_p = np.sqrt(np.sum(yp * yp, axis=-1))
    xi = np.where(
        norm_p[..., None] > 0.0,
        yp / np.where(norm_p[..., None] > 0.0, norm_p[..., None], 1.0),
        _axis_default(yp.shape),
    )
    return rho, beta, xi


def _axis_default(shape):
    out = np.zeros(shape)
    out[..., 0] = 1.0
    return out


def from_polar(rho, beta, xi) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    beta = np.asarray(beta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    y = np.empty(np.broadcast_shapes(rho.shape, beta.shape, xi.shape[:-1]) + (xi.shape[-1] + 1,))
    y[..., :-1] = (rho * np.sin(beta))[..., None] * xi
    y[..., -1] = rho * np.cos(beta)
    return y


@dataclass(frozen=True)
class CapSpec:
    """Spherical cap of radius r (r = inf encodes the flat ball) meeting the
    unit sphere at contact angle theta, symmetric about the last axis."""

    theta: float
    r: float

    def __post_init__(self):
        if not 0.0 < self.theta <= math.pi / 2.0 + 1e-15:
            raise ValueError("contact angle must lie in (0, pi/2]")
        if not self.r > 0.0:
            raise ValueError("radius must be positive (use math.inf for the flat ball)")

    @property
    def is_flat(self) -> bool:
        return math.isinf(self.r)

    @property
    def center_distance(self) -> float:
        """Distance of the cap's sphere center from the origin (finite r)."""
        if self.is_flat:
            raise ValueError("flat ball has no finite center")
        return math.sqrt(self.r**2 + 2.0 * self.r * math.cos(self.theta) + 1.0)

    @property
    def boundary_polar_radius(self) -> float:
        """Geodesic radius r0 of the boundary sphere about e in S^n."""
        if self.is_flat:
            return self.theta
        c = self.center_distance
        return math.acos((1.0 + self.r * math.cos(self.theta)) / c)

    @property
    def apex_height(self) -> float:
        """Height <x, e> of the point of the cap on the symmetry axis."""
        if self.is_flat:
            return math.cos(self.theta)
        return self.center_distance - self.r

    def image_sphere(self):
        """(m, R): the half-space image is the sphere |y - m e| = R.

        The image meets {y_{n+1}=0} at angle theta, so m = R cos(theta); for
        the free-boundary flat ball it is the unit hemisphere (m=0, R=1).
        """
        s = self.apex_height
        apex_image = (1.0 + s) / (1.0 - s)
        q = 1.0 / math.tan(self.boundary_polar_radius / 2.0)
        m = (apex_image**2 - q**2) / (2.0 * apex_image)
        return m, apex_image - m


def cap_graph_u(spec: CapSpec, beta) -> np.ndarray:
    """Graph function u = log rho of the cap over the half-sphere.

    rho(beta) = m cos(beta) + sqrt(R^2 - m^2 sin^2(beta)); depends on beta
    only (axial symmetry), and vanishes identically for the free-boundary
    flat ball.
    """
    beta = np.asarray(beta, dtype=float)
    m, R = spec.image_sphere()
    rho = m * np.cos(beta) + np.sqrt(R**2 - (m * np.sin(beta)) ** 2)
    return np.log(rho)


def cap_graph_u_beta(spec: CapSpec, beta) -> np.ndarray:
    """Analytic d u / d beta of the cap graph (boundary-condition checks)."""
    beta = np.asarray(beta, dtype=float)
    m, R = spec.image_sphere()
    root = np.sqrt(R**2 - (m * np.sin(beta)) ** 2)
    rho = m * np.cos(beta) + root
    drho = -m * np.sin(beta) - m**2 * np.sin(beta) * np.cos(beta) / root
    return drho / rho


def cap_embedding(spec: CapSpec, beta, xi=None) -> np.ndarray:
    """Ball point of the cap whose half-space direction is (beta, xi)."""
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < -1e-12) or np.any(beta > math.pi / 2 + 1e-12):
        raise ValueError("direction outside the closed upper half-sphere")
    rho = np.exp(cap_graph_u(spec, beta))
    if xi is None:
        # meridian slice in R^3: representative xi along the first axis
        xi_arr = np.zeros(beta.shape + (2,))
        xi_arr[..., 0] = 1.0
    else:
        xi_arr = np.asarray(xi, dtype=float)
    y = from_polar(rho, beta, xi_arr)
    return halfspace_to_ball(y)


def smooth_bump(beta) -> np.ndarray:
    """cos^2(beta): vanishes to second order at the boundary beta = pi/2, so
    adding it to a cap graph preserves the contact-angle condition exactly."""
    return np.cos(np.asarray(beta, dtype=float)) ** 2


def initial_data(kind: str, grid, **params):
    """Build the initial graph u0 on a grid.

    kind = 'cap' (theta from the grid, radius r), 'perturbed_cap'
    (cap + eps * cos^2(beta) * (1 + az * cos(m xi)) bump), or
    'custom_profile' (callable u(beta) with optional exact slope at pi/2).
    Perturbed and custom data are rejected when the discrete principal
    curvatures fail strict convexity or the boundary slope is incompatible
    with the contact angle.
    """
    from . import geometry  # deferred: geometry embeds via this module

    beta = grid.beta
    if kind == "cap":
        spec = CapSpec(theta=grid.theta, r=params.get("r", 1.0))
        u0 = cap_graph_u(spec, beta)
        u0 = _broadcast_full2d(grid, u0)
    elif kind == "perturbed_cap":
        spec = CapSpec(theta=grid.theta, r=params.get("r", 1.0))
        eps = params.get("eps", 0.05)
        u0 = cap_graph_u(spec, beta) + eps * smooth_bump(beta)
        u0 = _broadcast_full2d(grid, u0)
        if grid.mode == "full2d" and params.get("az", 0.0):
            # the xi-dependent part must vanish at the pole (smoothness) and
            # to second order at the boundary (contact-angle compatibility)
            m_mode = params.get("m_mode", 2)
            shape = np.sin(beta) ** max(2, m_mode) * smooth_bump(beta)
            u0 = u0 + eps * params["az"] * shape[:, None] * np.cos(
                m_mode * grid.xi
            )[None, :]
    elif kind == "custom_profile":
        profile = params["profile"]
        u0 = np.asarray(profile(beta), dtype=float)
        u0 = _broadcast_full2d(grid, u0)
        slope = params.get("boundary_slope")
        if slope is not None:
            target = -1.0 / math.tan(grid.theta) if grid.theta < math.pi / 2 else 0.0
            if abs(slope - target) > params.get("bc_tol", 1e-8):
                raise ValueError(
                    f"boundary slope {slope} incompatible with contact angle "
                    f"(expected {target})"
                )
    else:
        raise ValueError(f"unknown initial-data kind {kind!r}")

    if not np.all(np.isfinite(u0)):
        raise ValueError("non-finite initial data")
    if params.get("check_convexity", kind != "cap"):
        trial = grid.with_u(u0)
        kappa = geometry.conformal_graph_kernel(trial).kappa
        if np.min(kappa) <= 0.0:
            raise ValueError("initial data rejected: discrete curvatures not strictly positive")
    return u0


def _broadcast_full2d(grid, u0):
    if grid.mode == "full2d" and u0.ndim == 1:
        return np.repeat(u0[:, None], grid.N_xi, axis=1)
    return u0

"""Elementary symmetric curvature functions and the combinatorial constants
behind the sharp quermassintegral bounds.

The normalized mean curvatures are E_k(kappa) = sigma_k(kappa)/C(n,k), with
E_0 = 1.  Curvature speeds are ratios F = (E_k/E_l)^(1/(k-l)), normalized so
F(1,...,1) = 1 and positively homogeneous of degree one.  Everything here is
a pure function of its inputs; arrays may carry arbitrary leading (node)
axes with the curvature axis last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# Relative tolerance for membership in the open positive cone.  Finite
# difference curvatures carry O(h^2) noise, so exact positivity is too strict.
GAMMA_PLUS_RTOL = 1e-12


def binom(n: int, k: int) -> int:
    return math.comb(n, k)


def double_factorial(n: int) -> int:
    """n!! with the usual conventions (-1)!! = 0!! = 1."""
    if n < -1:
        raise ValueError(f"double factorial undefined for {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def sphere_area(m: int) -> float:
    """Area of the unit m-sphere S^m in R^(m+1)."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def ball_volume(n: int) -> float:
    """Volume of the unit n-ball B^n in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class DimensionConstants:
    """Bundle of n!!, omega_{n-1} = |S^{n-1}| and b_n = |B^n| = omega_{n-1}/n."""

    n: int
    n_double_factorial: int
    omega: float
    ball: float


def double_factorial_constants(n: int) -> DimensionConstants:
    if n < 1:
        raise ValueError("n must be >= 1")
    return DimensionConstants(
        n=n,
        n_double_factorial=double_factorial(n),
        omega=sphere_area(n - 1),
        ball=ball_volume(n),
    )


def in_positive_cone(kappa: np.ndarray, rtol: float = GAMMA_PLUS_RTOL) -> np.ndarray:
    """Elementwise test for kappa in the open cone Gamma+ (all entries > 0)."""
    kappa = np.asarray(kappa, dtype=float)
    scale = np.maximum(1.0, np.max(np.abs(kappa), axis=-1))
    return np.min(kappa, axis=-1) > rtol * scale


@dataclass(frozen=True)
class KappaVector:
    """Sorted principal-curvature tuple with its cone tag."""

    values: tuple
    n: int

    def __post_init__(self):
        if self.n < 2 or len(self.values) != self.n:
            raise ValueError("need n >= 2 curvatures")
        if any(self.values[i] > self.values[i + 1] for i in range(self.n - 1)):
            raise ValueError("curvatures must be sorted ascending")

    @classmethod
    def of(cls, values) -> "KappaVector":
        vals = tuple(sorted(float(v) for v in values))
        return cls(values=vals, n=len(vals))

    @property
    def in_gamma_plus(self) -> bool:
        return bool(in_positive_cone(np.array(self.values)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values)


def sigma_all(kappa: np.ndarray) -> np.ndarray:
    """All elementary symmetric polynomials sigma_0..sigma_n of the last axis.

    Uses the coefficient recurrence of prod_i (x + kappa_i) (stable for
    nonnegative inputs; no subset enumeration).  Returns shape (..., n+1).
    """
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    sig = np.zeros(kappa.shape[:-1] + (n + 1,), dtype=float)
    sig[..., 0] = 1.0
    for i in range(n):
        k_i = kappa[..., i]
        # descending degree so each sigma_j update reads the previous root set
        for j in range(min(i + 1, n), 0, -1):
            sig[..., j] += k_i * sig[..., j - 1]
    return sig


def normalized_mean_curvatures(kappa: np.ndarray) -> np.ndarray:
    """E_0..E_n of the last axis, shape (..., n+1)."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    sig = sigma_all(kappa)
    coeff = np.array([binom(n, k) for k in range(n + 1)], dtype=float)
    return sig / coeff


def normalized_mean_curvature(kappa, k: int) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if not 0 <= k <= n:
        raise IndexError(f"k={k} out of range for n={n}")
    return normalized_mean_curvatures(kappa)[..., k]


def _sigma_reduced(kappa: np.ndarray, i: int) -> np.ndarray:
    """sigma_0..sigma_{n-1} of kappa with entry i removed."""
    reduced = np.concatenate([kappa[..., :i], kappa[..., i + 1:]], axis=-1)
    return sigma_all(reduced)


def sigma_gradient(kappa: np.ndarray, k: int) -> np.ndarray:
    """d sigma_k / d kappa_i = sigma_{k-1}(kappa with kappa_i removed)."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if k == 0:
        return np.zeros_like(kappa)
    out = np.empty_like(kappa)
    for i in range(n):
        out[..., i] = _sigma_reduced(kappa, i)[..., k - 1]
    return out


@dataclass(frozen=True)
class CurvatureSpec:
    """Speed function F = (E_k/E_l)^(1/(k-l)) with 0 <= l < k <= n.

    (1, 0) is the arithmetic mean E_1; (k, k-1) are the familiar curvature
    quotients.  F is normalized (F(1,..,1)=1) and homogeneous of degree one.
    """

    k: int
    ell: int = 0

    def __post_init__(self):
        if not 0 <= self.ell < self.k:
            raise ValueError(f"need 0 <= ell < k, got ({self.k}, {self.ell})")

    @property
    def is_mean(self) -> bool:
        return self.k == 1 and self.ell == 0

    def domain_ok(self, kappa: np.ndarray) -> np.ndarray:
        """Cone membership: Gamma+ for ratios with ell >= 1, Gamma_k else."""
        kappa = np.asarray(kappa, dtype=float)
        if self.ell >= 1:
            return in_positive_cone(kappa)
        E = normalized_mean_curvatures(kappa)
        ok = np.ones(kappa.shape[:-1], dtype=bool)
        for j in range(1, self.k + 1):
            ok &= E[..., j] > 0.0
        return ok


class ConeViolation(ValueError):
    """Curvature data left the admissible cone of the speed function."""


def curvature_F(kappa: np.ndarray, spec: CurvatureSpec, check: bool = True) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if spec.k > n:
        raise IndexError(f"spec ({spec.k},{spec.ell}) needs n >= {spec.k}")
    if spec.is_mean:
        # hot path of the E_1 flows: no symmetric-polynomial machinery
        E1 = np.mean(kappa, axis=-1)
        if check and not np.all(E1 > 0.0):
            raise ConeViolation("mean curvature left the positive cone")
        return E1
    if check and not np.all(spec.domain_ok(kappa)):
        raise ConeViolation(f"curvature data outside the cone of E_{spec.k}/E_{spec.ell}")
    E = normalized_mean_curvatures(kappa)
    ratio = E[..., spec.k] / E[..., spec.ell]
    return np.sign(ratio) * np.abs(ratio) ** (1.0 / (spec.k - spec.ell))


def curvature_F_gradient(kappa: np.ndarray, spec: CurvatureSpec, check: bool = True) -> np.ndarray:
    """Analytic partials dF/dkappa_i; strictly positive inside the cone."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    if check and not np.all(spec.domain_ok(kappa)):
        raise ConeViolation("gradient requested outside the admissible cone")
    if spec.is_mean:
        return np.full_like(kappa, 1.0 / n)
    F = curvature_F(kappa, spec, check=False)
    sig = sigma_all(kappa)
    dk = sigma_gradient(kappa, spec.k) / sig[..., spec.k][..., None]
    if spec.ell > 0:
        dl = sigma_gradient(kappa, spec.ell) / sig[..., spec.ell][..., None]
    else:
        dl = 0.0
    return F[..., None] * (dk - dl) / (spec.k - spec.ell)


def inverse_dual_F(kappa: np.ndarray, spec: CurvatureSpec) -> np.ndarray:
    """F_*(kappa) = 1/F(1/kappa_1,...,1/kappa_n); same normalization as F."""
    kappa = np.asarray(kappa, dtype=float)
    if not np.all(in_positive_cone(kappa)):
        raise ConeViolation("inverse dual needs Gamma+")
    return 1.0 / curvature_F(1.0 / kappa, spec, check=False)


def alternating_sum_S(n: int, k: int) -> Fraction:
    """Exact value of sum_{i=0}^k (-1)^i C(k,i)/(n-2k+2i).

    Equals (2k)!!/prod_{j=0}^k (n-2j) and obeys
    S(n,k) = S(n-2,k-1) - S(n,k-1); both are exercised by the test suite.
    """
    if n < 1 or k < 0 or 2 * k + 1 > n:
        raise ValueError(f"need n >= 1 and 2k+1 <= n, got (n,k)=({n},{k})")
    total = Fraction(0)
    for i in range(k + 1):
        total += Fraction((-1) ** i * binom(k, i), n - 2 * k + 2 * i)
    return total


def alternating_sum_product_form(n: int, k: int) -> Fraction:
    """The closed form (2k)!!/prod_{j=0}^k (n-2j) of the alternating sum."""
    if n < 1 or k < 0 or 2 * k + 1 > n:
        raise ValueError(f"need n >= 1 and 2k+1 <= n, got (n,k)=({n},{k})")
    denom = 1
    for j in range(k + 1):
        denom *= n - 2 * j
    return Fraction(double_factorial(2 * k), denom)


def af_rhs_A(n: int, k: int, w1: float) -> float:
    """Right-hand side of the odd-quermassintegral bound as a function of W_1.

    For the flat disk (W_1 = omega_{n-1}/(n(n+1))) this coincides with the
    flat-disk value of W_{2k+1}; for k = 0 it reduces to W_1 itself.
    """
    if 2 * k + 1 > n:
        raise ValueError(f"need 2k+1 <= n, got (n,k)=({n},{k})")
    if w1 <= 0:
        raise ValueError("W_1 must be positive")
    omega = sphere_area(n - 1)
    prefac = omega / n
    for j in range(k + 1):
        prefac *= (n - 2 * j) / (n + 1 - 2 * j)
    bracket = n * (n + 1) * w1 / omega
    total = 0.0
    for i in range(k + 1):
        expo = (n - 2 * k + 2 * i) / n
        total += (-1) ** i * binom(k, i) / (n - 2 * k + 2 * i) * bracket ** expo
    return prefac * total

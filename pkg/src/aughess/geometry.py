"""Smooth planar domains, oblique boundary operators, the A-curvature matrix
and the uniform domain-convexity certifier.

Domains expose the unit inner normal, tangential projection, signed distance
(positive inside), and boundary curvature. All boundaries are smooth closed
curves; corners are out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .cones import ConeId, GammaK, cone_margin, margin_batch
from .augmenting import AugMatrixSpec
from .errors import ArgumentError, ConfigError, ConstraintError

_BOUNDARY_TOL = 1e-10


class Domain2D:
    """Base class for smooth planar domains parameterized by theta in [0, 2pi)."""

    n = 2

    # subclasses implement the parameterization and its exact derivatives
    def boundary_point(self, theta: float) -> np.ndarray:
        raise NotImplementedError

    def _tangent_raw(self, theta: float) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def scale(self) -> float:
        raise NotImplementedError

    # -- shared differential geometry ---------------------------------------

    def tangent(self, theta: float) -> np.ndarray:
        t = self._tangent_raw(theta)
        return t / np.linalg.norm(t)

    def normal_at_param(self, theta: float) -> np.ndarray:
        """Unit inner normal: the tangent rotated so it points into the domain."""
        t = self.tangent(theta)
        nu = np.array([-t[1], t[0]])
        x = self.boundary_point(theta)
        probe = x + 1e-6 * self.scale() * nu
        return nu if self.contains(probe) else -nu

    def nearest_boundary_param(self, x) -> float:
        """theta minimizing |x - x(theta)|, by coarse scan plus Newton polish."""
        x = np.asarray(x, dtype=float)
        thetas = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
        pts = np.array([self.boundary_point(t) for t in thetas])
        i = int(np.argmin(((pts - x) ** 2).sum(axis=1)))
        th = thetas[i]
        h = 1e-5
        for _ in range(60):
            def g(t):
                return float((self.boundary_point(t) - x) @ self._tangent_raw(t))
            d1 = g(th)
            d2 = (g(th + h) - g(th - h)) / (2 * h)
            if abs(d2) < 1e-14:
                break
            step = d1 / d2
            th -= step
            if abs(step) < 1e-14:
                break
        return float(th % (2 * np.pi))

    def nearest_boundary_point(self, x) -> np.ndarray:
        return self.boundary_point(self.nearest_boundary_param(x))

    def signed_distance(self, x) -> float:
        """Distance to the boundary, positive inside and zero on it."""
        x = np.asarray(x, dtype=float)
        d = float(np.linalg.norm(x - self.nearest_boundary_point(x)))
        return d if self.contains(x) else -d

    def normal(self, x) -> np.ndarray:
        """Unit inner normal at a boundary point."""
        self._require_on_boundary(x)
        return self.normal_at_param(self.nearest_boundary_param(x))

    def projection(self, x) -> np.ndarray:
        """P = I - nu otimes nu at a boundary point."""
        nu = self.normal(x)
        return np.eye(2) - np.outer(nu, nu)

    def curvature_at_param(self, theta: float) -> float:
        """Boundary curvature (positive for convex domains, inner normal
        convention); 5-point finite differences unless overridden."""
        return self._curvature_fd(theta)

    def curvature(self, x) -> float:
        self._require_on_boundary(x)
        return self.curvature_at_param(self.nearest_boundary_param(x))

    def shape_operator_at_param(self, theta: float) -> np.ndarray:
        """-delta nu as a matrix; equals kappa * P on the tangent space."""
        kappa = self.curvature_at_param(theta)
        t = self.tangent(theta)
        return kappa * np.outer(t, t)

    def _curvature_fd(self, theta: float, h: float = 2 * np.pi / 1024) -> float:
        """kappa = -(d nu / ds) . tau via a 5-point arc-length stencil."""
        coef = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h)
        nus = np.array([self.normal_at_param(theta + m * h) for m in (-2, -1, 0, 1, 2)])
        dnu_dtheta = coef @ nus
        ds_dtheta = np.linalg.norm(self._tangent_raw(theta))
        return float(-(dnu_dtheta / ds_dtheta) @ self.tangent(theta))

    def _require_on_boundary(self, x) -> None:
        d = abs(self.signed_distance(x))
        if d > _BOUNDARY_TOL * max(1.0, self.scale()):
            raise ArgumentError(f"point {np.asarray(x)} is not on the boundary (dist {d:.2e})")

    def boundary_grid(self, count: int) -> np.ndarray:
        return np.linspace(0.0, 2 * np.pi, count, endpoint=False)


class Disk(Domain2D):
    def __init__(self, radius: float):
        if radius <= 0:
            raise ArgumentError("radius must be positive")
        self.radius = float(radius)

    def boundary_point(self, theta):
        return self.radius * np.array([np.cos(theta), np.sin(theta)])

    def _tangent_raw(self, theta):
        return self.radius * np.array([-np.sin(theta), np.cos(theta)])

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ x) < self.radius ** 2

    def scale(self):
        return self.radius

    def signed_distance(self, x):
        return self.radius - float(np.linalg.norm(x))

    def nearest_boundary_param(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.arctan2(x[1], x[0]) % (2 * np.pi))

    def normal_at_param(self, theta):
        return -np.array([np.cos(theta), np.sin(theta)])

    def curvature_at_param(self, theta):
        return 1.0 / self.radius


class Ellipse(Domain2D):
    def __init__(self, a: float, b: float):
        if a <= 0 or b <= 0:
            raise ArgumentError("semi-axes must be positive")
        self.a, self.b = float(a), float(b)

    def boundary_point(self, theta):
        return np.array([self.a * np.cos(theta), self.b * np.sin(theta)])

    def _tangent_raw(self, theta):
        return np.array([-self.a * np.sin(theta), self.b * np.cos(theta)])

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x[0] / self.a) ** 2 + (x[1] / self.b) ** 2 < 1.0

    def scale(self):
        return max(self.a, self.b)

    def curvature_at_param(self, theta):
        s, c = np.sin(theta), np.cos(theta)
        return self.a * self.b / ((self.a * s) ** 2 + (self.b * c) ** 2) ** 1.5


class SmoothClosed(Domain2D):
    """Star-shaped domain with trig-polynomial radius rho(theta) > 0.

    ``cos_coeffs[j]`` and ``sin_coeffs[j]`` multiply cos((j+1) theta) and
    sin((j+1) theta) on top of the mean radius rho0.
    """

    def __init__(self, rho0: float, cos_coeffs=(), sin_coeffs=()):
        self.rho0 = float(rho0)
        self.cos_coeffs = tuple(float(c) for c in cos_coeffs)
        self.sin_coeffs = tuple(float(c) for c in sin_coeffs)
        th = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        if (self.rho(th) <= 0).any():
            raise ArgumentError("radius function must stay positive")

    def rho(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.rho0, dtype=float)
        for j, c in enumerate(self.cos_coeffs):
            out = out + c * np.cos((j + 1) * theta)
        for j, c in enumerate(self.sin_coeffs):
            out = out + c * np.sin((j + 1) * theta)
        return out

    def rho_prime(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta, dtype=float)
        for j, c in enumerate(self.cos_coeffs):
            out = out - c * (j + 1) * np.sin((j + 1) * theta)
        for j, c in enumerate(self.sin_coeffs):
            out = out + c * (j + 1) * np.cos((j + 1) * theta)
        return out

    def boundary_point(self, theta):
        r = float(self.rho(theta))
        return r * np.array([np.cos(theta), np.sin(theta)])

    def _tangent_raw(self, theta):
        r, rp = float(self.rho(theta)), float(self.rho_prime(theta))
        c, s = np.cos(theta), np.sin(theta)
        return np.array([rp * c - r * s, rp * s + r * c])

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        th = np.arctan2(x[1], x[0])
        return float(np.linalg.norm(x)) < float(self.rho(th))

    def scale(self):
        return self.rho0


# ----------------------------------------------------------------------------
# boundary operators


class BoundaryOpSpec:
    """Oblique boundary operator G(x, z, p) with derivative access.

    ``beta0`` is the obliqueness floor inf G_p . nu over the operator's
    domain of use.
    """

    family = "Custom"

    def __init__(self, domain: Domain2D, beta0: float):
        self.domain = domain
        self.beta0 = float(beta0)
        if not self.beta0 > 0:
            raise ConstraintError("boundary operator is not oblique (beta0 <= 0)")

    def g(self, x, z, p) -> float:
        raise NotImplementedError

    def gp(self, x, z, p) -> np.ndarray:
        raise NotImplementedError

    def gz(self, x, z, p) -> float:
        h = 1e-6 * (1.0 + abs(float(z)))
        return (self.g(x, z + h, p) - self.g(x, z - h, p)) / (2 * h)

    def obliqueness(self, x, z, p) -> float:
        return float(self.gp(x, z, p) @ self.domain.normal(x))


class SemilinearNormalized(BoundaryOpSpec):
    """G = nu . p + beta'(x) . p - phi(x, z) with beta' tangent, so G_p.nu = 1."""

    family = "SemilinearNormalized"

    def __init__(self, domain: Domain2D, phi: Callable,
                 beta_prime: Optional[Callable] = None):
        super().__init__(domain, beta0=1.0)
        self.phi = phi
        self.beta_prime = beta_prime

    def _beta(self, x) -> np.ndarray:
        nu = self.domain.normal(x)
        if self.beta_prime is None:
            return nu
        bp = np.asarray(self.beta_prime(x), dtype=float)
        bp = bp - float(bp @ nu) * nu  # keep the declared field tangential
        return nu + bp

    def g(self, x, z, p):
        p = np.asarray(p, dtype=float)
        return float(self._beta(x) @ p) - float(self.phi(x, z))

    def gp(self, x, z, p):
        return self._beta(x)

    def gz(self, x, z, p):
        h = 1e-6 * (1.0 + abs(float(z)))
        return -(float(self.phi(x, z + h)) - float(self.phi(x, z - h))) / (2 * h)


class Neumann(SemilinearNormalized):
    """G = nu . p - phi(x, z)."""

    family = "Neumann"

    def __init__(self, domain: Domain2D, phi: Callable):
        super().__init__(domain, phi, beta_prime=None)


class Capillarity(BoundaryOpSpec):
    """G = p . nu - theta(x) sqrt(1 + |p|^2) - phi(x, z), 0 < theta < 1.

    Concave in p exactly because theta > 0; theta < 1 keeps it oblique with
    G_p . nu >= 1 - theta.
    """

    family = "Capillarity"

    def __init__(self, domain: Domain2D, theta: Callable, phi: Callable):
        thetas = [float(theta(domain.boundary_point(t)))
                  for t in domain.boundary_grid(64)]
        tmin, tmax = min(thetas), max(thetas)
        if tmin <= 0.0:
            raise ConstraintError(
                "capillarity concavity requires theta > 0 on the boundary")
        if tmax >= 1.0:
            raise ConstraintError(
                "capillarity obliqueness requires theta < 1 on the boundary")
        super().__init__(domain, beta0=1.0 - tmax)
        self.theta = theta
        self.phi = phi

    def g(self, x, z, p):
        p = np.asarray(p, dtype=float)
        nu = self.domain.normal(x)
        return float(p @ nu) - float(self.theta(x)) * np.sqrt(1.0 + float(p @ p)) \
            - float(self.phi(x, z))

    def gp(self, x, z, p):
        p = np.asarray(p, dtype=float)
        nu = self.domain.normal(x)
        return nu - float(self.theta(x)) * p / np.sqrt(1.0 + float(p @ p))

    def gz(self, x, z, p):
        h = 1e-6 * (1.0 + abs(float(z)))
        return -(float(self.phi(x, z + h)) - float(self.phi(x, z - h))) / (2 * h)


class CustomBoundaryOp(BoundaryOpSpec):
    """Callback G with callback G_p; obliqueness is sample-checked on entry."""

    family = "Custom"

    def __init__(self, domain: Domain2D, g: Callable, gp: Callable,
                 gz: Optional[Callable] = None, z_range=(-1.0, 1.0),
                 p_scale: float = 5.0, rng: Optional[np.random.Generator] = None):
        self._g, self._gp, self._gz = g, gp, gz
        rng = rng if rng is not None else np.random.default_rng(0)
        worst = float("inf")
        for t in domain.boundary_grid(64):
            x = domain.boundary_point(t)
            nu = domain.normal_at_param(t)
            for _ in range(8):
                z = rng.uniform(*z_range)
                p = p_scale * rng.standard_normal(2)
                worst = min(worst, float(np.asarray(gp(x, z, p)) @ nu))
        if worst <= 0:
            raise ConstraintError(
                f"custom boundary operator failed the obliqueness check "
                f"(min G_p.nu = {worst:.3e})")
        super().__init__(domain, beta0=worst)

    def g(self, x, z, p):
        return float(self._g(x, z, p))

    def gp(self, x, z, p):
        return np.asarray(self._gp(x, z, p), dtype=float)

    def gz(self, x, z, p):
        if self._gz is not None:
            return float(self._gz(x, z, p))
        return super().gz(x, z, p)


# ----------------------------------------------------------------------------
# A-curvature matrix and uniform convexity


def curvature_matrix(domain: Domain2D, A: AugMatrixSpec, x_boundary, z, p) -> np.ndarray:
    """K_A = -delta nu + P (D_p A . nu) P at a boundary point."""
    x = np.asarray(x_boundary, dtype=float)
    domain._require_on_boundary(x)
    theta = domain.nearest_boundary_param(x)
    nu = domain.normal_at_param(theta)
    P = np.eye(2) - np.outer(nu, nu)
    shape_op = domain.shape_operator_at_param(theta)
    dpa = A.dp(x, float(z), np.asarray(p, dtype=float))     # (i, j, k)
    a_nu = dpa @ nu                                          # (A_ij^k nu_k)
    k = shape_op + P @ a_nu @ P
    return 0.5 * (k + k.T)


@dataclass
class ConvexitySample:
    theta: float
    z: float
    p: np.ndarray
    tangential_value: float
    minimal_mu: float          # inf mu with margin >= probe floor (inf if capped)
    feasible: bool             # exists mu <= cap with K + mu nu nu strictly in cone
    tangential_in_lower_cone: bool


@dataclass
class ConvexityReport:
    """Per-sample mu profile and the global uniform convexity verdict."""

    cone: ConeId
    samples: List[ConvexitySample]
    verdict: bool
    mu0: float
    margin_at_mu0: float
    tangential_agreement: bool
    mu_cap: float

    @property
    def minimal_mu_sup(self) -> float:
        vals = [s.minimal_mu for s in self.samples]
        return max(vals) if vals else float("nan")


def default_p_sampler(G: BoundaryOpSpec, rng: np.random.Generator,
                      p_max: float = 20.0, per_point: int = 8, tries: int = 200):
    """Rejection sampler for the constraint set {G(x, z, p) >= 0}."""

    def draw(x, z):
        out = []
        for _ in range(tries):
            p = rng.uniform(-p_max, p_max, size=2)
            if G.g(x, z, p) >= 0.0:
                out.append(p)
                if len(out) >= per_point:
                    break
        return out

    return draw


def certify_convexity(domain: Domain2D, A: AugMatrixSpec, G: BoundaryOpSpec,
                      cone: ConeId, z_interval: Tuple[float, float],
                      p_sampler=None, rng: Optional[np.random.Generator] = None,
                      boundary_count: int = 256, z_count: int = 16,
                      mu_cap: float = 1e6, bisect_iters: int = 60,
                      probe_floor: float = 1e-9) -> ConvexityReport:
    """Uniform domain-convexity certifier.

    For every sampled (x', z, p) on the constraint set G >= 0 the minimal
    mu >= 0 with K_A + mu nu nu strictly in the cone is found by bisection
    (membership is upward closed in mu). The verdict requires a finite sup of
    minimal mu and a positive margin at the uniform mu0 = max(2 sup, 1e-6).
    For Gamma_k cones the equivalent tangential-in-Gamma_{k-1} test is also
    recorded and cross-checked per sample.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if p_sampler is None:
        p_sampler = default_p_sampler(G, rng)
    z_lo, z_hi = z_interval
    zs = np.linspace(z_lo, z_hi, z_count)
    thetas = domain.boundary_grid(boundary_count)

    samples: List[ConvexitySample] = []
    mats = []
    nus = []
    for th in thetas:
        x = domain.boundary_point(th)
        nu = domain.normal_at_param(th)
        tau = domain.tangent(th)
        for z in zs:
            for p in p_sampler(x, z):
                k = curvature_matrix(domain, A, x, z, p)
                mats.append(k)
                nus.append(nu)
                samples.append(ConvexitySample(
                    theta=float(th), z=float(z), p=np.asarray(p, dtype=float),
                    tangential_value=float(tau @ k @ tau),
                    minimal_mu=float("nan"), feasible=False,
                    tangential_in_lower_cone=False))
    if not samples:
        raise ConfigError("convexity certifier drew no samples on {G >= 0}")

    K = np.array(mats)
    NU = np.einsum("ni,nj->nij", np.array(nus), np.array(nus))

    def margins(mu):
        return margin_batch(K + mu[:, None, None] * NU, cone)

    count = len(samples)
    feasible = margins(np.full(count, mu_cap)) > 0.0
    minimal = np.full(count, float("inf"))
    at_zero = margins(np.zeros(count)) >= probe_floor
    minimal[at_zero] = 0.0
    todo = feasible & ~at_zero
    lo = np.zeros(count)
    hi = np.full(count, mu_cap)
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        ok = margins(mid) >= probe_floor
        hi = np.where(ok & todo, mid, hi)
        lo = np.where(~ok & todo, mid, lo)
    # the cap may clear membership but not the probe floor; treat as capped
    reached = margins(hi) >= probe_floor
    minimal[todo & reached] = hi[todo & reached]

    if isinstance(cone, GammaK):
        lower = GammaK(cone.k - 1) if cone.k >= 2 else None
        for i, s in enumerate(samples):
            t1 = np.array([[s.tangential_value]])
            if lower is None:
                s.tangential_in_lower_cone = True
            else:
                # tangential block is 1x1 in the plane; Gamma_{k-1} there means
                # its leading elementary symmetric functions are positive
                s.tangential_in_lower_cone = bool(s.tangential_value > 0.0)
    agreement = True
    for i, s in enumerate(samples):
        s.minimal_mu = float(minimal[i])
        s.feasible = bool(feasible[i])
        if isinstance(cone, GammaK):
            agreement &= (s.feasible == s.tangential_in_lower_cone)

    finite = np.isfinite(minimal)
    if finite.all():
        mu0 = max(2.0 * float(minimal.max()), 1e-6)
        mu0 = min(mu0, mu_cap)
        final_margins = margins(np.full(count, mu0))
        margin_at_mu0 = float(final_margins.min())
        verdict = bool(feasible.all() and margin_at_mu0 >= probe_floor)
    else:
        mu0 = float("inf")
        margin_at_mu0 = float("-inf")
        verdict = False

    return ConvexityReport(cone=cone, samples=samples, verdict=verdict,
                           mu0=mu0, margin_at_mu0=margin_at_mu0,
                           tangential_agreement=bool(agreement), mu_cap=mu_cap)


def barrier_value(domain: Domain2D, c: float, t: float, x) -> float:
    """Boundary-strip barrier block phi = c (d - t d^2).

    Valid on the strip where a width rho with t rho <= 1/4 covers x, i.e.
    t * d(x) <= 1/4; monotone in d there.
    """
    if c <= 0 or t <= 0:
        raise ArgumentError("barrier constants c, t must be positive")
    d = domain.signed_distance(x)
    if d < -_BOUNDARY_TOL * max(1.0, domain.scale()):
        raise ArgumentError("barrier evaluated outside the closed domain")
    d = max(d, 0.0)
    if t * d > 0.25 + 1e-12:
        raise ArgumentError(
            f"barrier proviso t*rho <= 1/4 violated: t*d = {t * d:.3g}")
    return float(c * (d - t * d * d))

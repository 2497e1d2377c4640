"""The augmenting matrix A(x,z,p), the scalar right side B(x,z,p), their
p-derivatives, and the regularity / growth certifiers.

Built-in families carry analytic derivatives; custom callbacks fall back to
central finite differences with steps scaled to |p|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ArgumentError, ConfigError, ConstraintError

_FD_REL = 1e-4   # step h = _FD_REL * (1 + |p|) for custom p-derivatives


def _as_point(x, n=None):
    x = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and x.size != n:
        raise ArgumentError(f"expected a point in R^{n}, got size {x.size}")
    return x


class AugMatrixSpec:
    """Matrix function A(x, z, p) with derivative access.

    Subclasses implement ``evaluate`` and may override the derivative
    evaluators with analytic formulas; the base class differentiates
    numerically. ``monotone_in_z`` declares D_z A >= 0 for bookkeeping.
    """

    family = "Custom"

    def __init__(self, n: int, monotone_in_z: bool = False):
        self.n = int(n)
        self.monotone_in_z = bool(monotone_in_z)

    # -- required ------------------------------------------------------------

    def evaluate(self, x, z, p) -> np.ndarray:
        raise NotImplementedError

    # -- derivatives (finite differences unless overridden) -------------------

    def _step(self, p):
        return _FD_REL * (1.0 + float(np.linalg.norm(p)))

    def dp(self, x, z, p) -> np.ndarray:
        """A_{ij}^k = dA_ij/dp_k, shape (n, n, n) with k last."""
        p = _as_point(p, self.n)
        h = self._step(p)
        out = np.empty((self.n, self.n, self.n))
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = h
            out[:, :, k] = (self.evaluate(x, z, p + e) - self.evaluate(x, z, p - e)) / (2 * h)
        return out

    def dz(self, x, z, p) -> np.ndarray:
        h = _FD_REL * (1.0 + abs(float(z)))
        return (self.evaluate(x, z + h, p) - self.evaluate(x, z - h, p)) / (2 * h)

    def dx(self, x, z, p) -> np.ndarray:
        """dA_ij/dx_l, shape (n, n, n) with l last; used by the growth fits."""
        x = _as_point(x, self.n)
        h = _FD_REL * (1.0 + float(np.linalg.norm(x)))
        out = np.empty((self.n, self.n, self.n))
        for l in range(self.n):
            e = np.zeros(self.n)
            e[l] = h
            out[:, :, l] = (self.evaluate(x + e, z, p) - self.evaluate(x - e, z, p)) / (2 * h)
        return out

    def second_p_derivative_form(self, x, z, p, xi, eta) -> float:
        """A_{ij}^{kl} xi_i xi_j eta_k eta_l via fourth-order-accurate central
        differences of the quadratic form in the eta direction."""
        xi = _as_point(xi, self.n)
        eta = _as_point(eta, self.n)
        p = _as_point(p, self.n)
        h = self._step(p)

        def q(pp):
            return float(xi @ self.evaluate(x, z, pp) @ xi)

        e = h * eta
        return (-q(p + 2 * e) + 16 * q(p + e) - 30 * q(p)
                + 16 * q(p - e) - q(p - 2 * e)) / (12 * h * h)

    # -- batched node evaluation (solver fast path; loop fallback) -------------

    def evaluate_batch(self, X, Z, P) -> np.ndarray:
        return np.array([self.evaluate(x, z, p) for x, z, p in zip(X, Z, P)])

    def dp_batch(self, X, Z, P) -> np.ndarray:
        return np.array([self.dp(x, z, p) for x, z, p in zip(X, Z, P)])

    def dz_batch(self, X, Z, P) -> np.ndarray:
        return np.array([self.dz(x, z, p) for x, z, p in zip(X, Z, P)])


class ZeroA(AugMatrixSpec):
    """A = 0: the plain Hessian equation (regular but not strictly regular)."""

    family = "Zero"

    def __init__(self, n: int):
        super().__init__(n, monotone_in_z=True)

    def evaluate(self, x, z, p):
        return np.zeros((self.n, self.n))

    def dp(self, x, z, p):
        return np.zeros((self.n, self.n, self.n))

    def dz(self, x, z, p):
        return np.zeros((self.n, self.n))

    def dx(self, x, z, p):
        return np.zeros((self.n, self.n, self.n))

    def second_p_derivative_form(self, x, z, p, xi, eta):
        return 0.0

    def evaluate_batch(self, X, Z, P):
        return np.zeros((len(Z), self.n, self.n))

    def dp_batch(self, X, Z, P):
        return np.zeros((len(Z), self.n, self.n, self.n))

    def dz_batch(self, X, Z, P):
        return np.zeros((len(Z), self.n, self.n))


class MainExampleA(AugMatrixSpec):
    """A = (1/2) a_kl(x,z) p_k p_l I - a0(x,z) p otimes p.

    ``a`` must evaluate to a symmetric positive definite matrix wherever it
    is queried; this is checked lazily on each evaluation.
    """

    family = "MainExample"

    def __init__(self, n: int, a: Callable, a0: Callable,
                 a_z: Optional[Callable] = None, a0_z: Optional[Callable] = None,
                 monotone_in_z: bool = False):
        super().__init__(n, monotone_in_z)
        self._a = a
        self._a0 = a0
        self._a_z = a_z
        self._a0_z = a0_z

    def _coeff(self, x, z):
        a = np.asarray(self._a(x, z), dtype=float)
        if a.shape != (self.n, self.n):
            raise ArgumentError(f"a(x,z) must be {self.n}x{self.n}")
        if np.abs(a - a.T).max() > 1e-10 * (1 + np.abs(a).max()):
            raise ConstraintError("a_kl(x,z) must be symmetric")
        if np.linalg.eigvalsh(a)[0] <= 0:
            raise ConstraintError("a_kl(x,z) must be positive definite")
        return a, float(self._a0(x, z))

    def evaluate(self, x, z, p):
        p = _as_point(p, self.n)
        a, a0 = self._coeff(x, z)
        return 0.5 * float(p @ a @ p) * np.eye(self.n) - a0 * np.outer(p, p)

    def dp(self, x, z, p):
        p = _as_point(p, self.n)
        a, a0 = self._coeff(x, z)
        ap = a @ p
        out = np.einsum("k,ij->ijk", ap, np.eye(self.n))
        out -= a0 * np.einsum("ik,j->ijk", np.eye(self.n), p)
        out -= a0 * np.einsum("i,jk->ijk", p, np.eye(self.n))
        return out

    def second_p_derivative_form(self, x, z, p, xi, eta):
        xi = _as_point(xi, self.n)
        eta = _as_point(eta, self.n)
        a, a0 = self._coeff(x, z)
        return float(xi @ xi) * float(eta @ a @ eta) - 2.0 * a0 * float(xi @ eta) ** 2

    def dz(self, x, z, p):
        if self._a_z is None and self._a0_z is None:
            return super().dz(x, z, p)
        p = _as_point(p, self.n)
        az = np.asarray(self._a_z(x, z), dtype=float) if self._a_z else np.zeros((self.n, self.n))
        a0z = float(self._a0_z(x, z)) if self._a0_z else 0.0
        return 0.5 * float(p @ az @ p) * np.eye(self.n) - a0z * np.outer(p, p)


class EuclideanYamabeA(MainExampleA):
    """A(p) = |p|^2/2 I - p otimes p (conformal geometry; a = I, a0 = 1)."""

    family = "EuclideanYamabe"

    def __init__(self, n: int):
        super().__init__(n, a=lambda x, z: np.eye(n), a0=lambda x, z: 1.0,
                         a_z=lambda x, z: np.zeros((n, n)), a0_z=lambda x, z: 0.0,
                         monotone_in_z=True)

    def dx(self, x, z, p):
        return np.zeros((self.n, self.n, self.n))

    def evaluate_batch(self, X, Z, P):
        P = np.asarray(P, dtype=float)
        eye = np.eye(self.n)
        return (0.5 * np.einsum("nk,nk->n", P, P)[:, None, None] * eye
                - np.einsum("ni,nj->nij", P, P))

    def dp_batch(self, X, Z, P):
        P = np.asarray(P, dtype=float)
        eye = np.eye(self.n)
        out = np.einsum("nk,ij->nijk", P, eye)
        out -= np.einsum("ik,nj->nijk", eye, P)
        out -= np.einsum("ni,jk->nijk", P, eye)
        return out

    def dz_batch(self, X, Z, P):
        return np.zeros((len(Z), self.n, self.n))


class ReflectorA(AugMatrixSpec):
    """A(z,p) = (|p|^2 - 1)/(2z) I from reflection of a parallel beam; z > 0."""

    family = "Reflector"

    def __init__(self, n: int):
        super().__init__(n, monotone_in_z=False)

    def _check_z(self, z):
        if not z > 0:
            raise ConstraintError(
                f"reflector matrix is defined on the surface z > 0, got z = {z}")

    def evaluate(self, x, z, p):
        self._check_z(z)
        p = _as_point(p, self.n)
        return (float(p @ p) - 1.0) / (2.0 * z) * np.eye(self.n)

    def dp(self, x, z, p):
        self._check_z(z)
        p = _as_point(p, self.n)
        return np.einsum("k,ij->ijk", p / z, np.eye(self.n))

    def dz(self, x, z, p):
        self._check_z(z)
        p = _as_point(p, self.n)
        return -(float(p @ p) - 1.0) / (2.0 * z * z) * np.eye(self.n)

    def dx(self, x, z, p):
        self._check_z(z)
        return np.zeros((self.n, self.n, self.n))

    def second_p_derivative_form(self, x, z, p, xi, eta):
        self._check_z(z)
        xi = _as_point(xi, self.n)
        eta = _as_point(eta, self.n)
        return float(xi @ xi) * float(eta @ eta) / z


class CustomA(AugMatrixSpec):
    """Callback-backed A with optional analytic derivative callbacks."""

    family = "Custom"

    def __init__(self, n: int, func: Callable, dp: Optional[Callable] = None,
                 dz: Optional[Callable] = None, monotone_in_z: bool = False):
        super().__init__(n, monotone_in_z)
        self._func = func
        self._dp = dp
        self._dz = dz

    def evaluate(self, x, z, p):
        a = np.asarray(self._func(x, z, p), dtype=float)
        if a.shape != (self.n, self.n):
            raise ArgumentError(f"custom A must return a {self.n}x{self.n} matrix")
        return 0.5 * (a + a.T)

    def dp(self, x, z, p):
        if self._dp is not None:
            return np.asarray(self._dp(x, z, p), dtype=float)
        return super().dp(x, z, p)

    def dz(self, x, z, p):
        if self._dz is not None:
            return np.asarray(self._dz(x, z, p), dtype=float)
        return super().dz(x, z, p)


def eval_A(spec: AugMatrixSpec, x, z, p) -> np.ndarray:
    """A(x, z, p) as an exactly symmetric (n, n) array."""
    a = spec.evaluate(x, float(z), p)
    return 0.5 * (a + a.T)


def second_p_derivative_form(spec: AugMatrixSpec, x, z, p, xi, eta) -> float:
    return spec.second_p_derivative_form(x, float(z), p, xi, eta)


# ----------------------------------------------------------------------------
# right sides


class RhsSpec:
    """Scalar right side B(x, z, p) with D_p and D^2_p evaluators.

    Pass ``vectorized=True`` when the callbacks accept node batches
    (X: (N,n), Z: (N,), P: (N,n)); the solver then avoids per-node loops.
    """

    family = "Custom"

    def __init__(self, n: int, func: Callable, dz: Optional[Callable] = None,
                 dp: Optional[Callable] = None, dpp: Optional[Callable] = None,
                 vectorized: bool = False):
        self.n = int(n)
        self._func = func
        self._dz = dz
        self._dp = dp
        self._dpp = dpp
        self.vectorized = bool(vectorized)

    def evaluate_batch(self, X, Z, P) -> np.ndarray:
        if self.vectorized:
            return np.asarray(self._func(X, Z, P), dtype=float).reshape(len(Z))
        return np.array([self.evaluate(x, z, p) for x, z, p in zip(X, Z, P)])

    def dz_batch(self, X, Z, P) -> np.ndarray:
        if self.vectorized and self._dz is not None:
            return np.asarray(self._dz(X, Z, P), dtype=float).reshape(len(Z))
        return np.array([self.dz(x, z, p) for x, z, p in zip(X, Z, P)])

    def dp_batch(self, X, Z, P) -> np.ndarray:
        if self.vectorized and self._dp is not None:
            return np.asarray(self._dp(X, Z, P), dtype=float).reshape(len(Z), self.n)
        return np.array([self.dp(x, z, p) for x, z, p in zip(X, Z, P)])

    def _single(self, x, z, p):
        return (np.asarray(x, dtype=float).reshape(1, -1),
                np.array([float(z)]),
                _as_point(p, self.n).reshape(1, -1))

    def evaluate(self, x, z, p) -> float:
        if self.vectorized:
            return float(self.evaluate_batch(*self._single(x, z, p))[0])
        return float(self._func(x, float(z), _as_point(p, self.n)))

    def dz(self, x, z, p) -> float:
        if self._dz is not None:
            if self.vectorized:
                return float(self.dz_batch(*self._single(x, z, p))[0])
            return float(self._dz(x, float(z), _as_point(p, self.n)))
        h = _FD_REL * (1.0 + abs(float(z)))
        return (self.evaluate(x, z + h, p) - self.evaluate(x, z - h, p)) / (2 * h)

    def dp(self, x, z, p) -> np.ndarray:
        p = _as_point(p, self.n)
        if self._dp is not None:
            if self.vectorized:
                return self.dp_batch(*self._single(x, z, p))[0]
            return np.asarray(self._dp(x, float(z), p), dtype=float).reshape(self.n)
        h = _FD_REL * (1.0 + float(np.linalg.norm(p)))
        out = np.empty(self.n)
        for k in range(self.n):
            e = np.zeros(self.n)
            e[k] = h
            out[k] = (self.evaluate(x, z, p + e) - self.evaluate(x, z, p - e)) / (2 * h)
        return out

    def dpp(self, x, z, p) -> np.ndarray:
        p = _as_point(p, self.n)
        if self._dpp is not None:
            return np.asarray(self._dpp(x, float(z), p), dtype=float).reshape(self.n, self.n)
        h = _FD_REL * (1.0 + float(np.linalg.norm(p)))
        out = np.empty((self.n, self.n))
        b0 = self.evaluate(x, z, p)
        for k in range(self.n):
            ek = np.zeros(self.n); ek[k] = h
            out[k, k] = (self.evaluate(x, z, p + ek) - 2 * b0 + self.evaluate(x, z, p - ek)) / h ** 2
            for l in range(k + 1, self.n):
                el = np.zeros(self.n); el[l] = h
                mixed = (self.evaluate(x, z, p + ek + el) - self.evaluate(x, z, p + ek - el)
                         - self.evaluate(x, z, p - ek + el) + self.evaluate(x, z, p - ek - el)) / (4 * h * h)
                out[k, l] = out[l, k] = mixed
        return out


def constant_rhs(n: int, value: float) -> RhsSpec:
    spec = RhsSpec(n, lambda x, z, p: np.full(np.shape(z), float(value)),
                   dz=lambda x, z, p: np.zeros(np.shape(z)),
                   dp=lambda x, z, p: np.zeros(np.shape(p)),
                   dpp=lambda x, z, p: np.zeros((n, n)),
                   vectorized=True)
    spec.family = "Constant"
    return spec


def transformed_yamabe_rhs(n: int, phi_tilde: Callable) -> RhsSpec:
    """B(x, z) = phi_tilde(x) e^{-2z} for the conformal deformation problem."""
    def b(x, z, p):
        v = float(phi_tilde(x))
        if v <= 0:
            raise ConstraintError("transformed Yamabe needs phi_tilde > 0")
        return v * np.exp(-2.0 * z)

    spec = RhsSpec(n, b,
                   dz=lambda x, z, p: -2.0 * b(x, z, p),
                   dp=lambda x, z, p: np.zeros(n),
                   dpp=lambda x, z, p: np.zeros((n, n)))
    spec.family = "TransformedYamabe"
    return spec


def exponential_rhs(n: int, b0: float, beta: float,
                    b_of_x: Optional[Callable] = None) -> RhsSpec:
    """B(x, z) = b0 * w(x) * e^{beta z}: positive and strictly monotone in z.

    ``b_of_x``, when given, must accept an (N, n) batch of points.
    """
    def w(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray(b_of_x(x), dtype=float) if b_of_x else np.ones(len(x))

    def b(x, z, p):
        return b0 * w(x) * np.exp(beta * np.asarray(z, dtype=float))

    spec = RhsSpec(n, b,
                   dz=lambda x, z, p: beta * b(x, z, p),
                   dp=lambda x, z, p: np.zeros(np.shape(p)),
                   dpp=lambda x, z, p: np.zeros((n, n)),
                   vectorized=True)
    spec.family = "Exponential"
    return spec


def custom_rhs(n: int, func: Callable, **kw) -> RhsSpec:
    return RhsSpec(n, func, **kw)


# ----------------------------------------------------------------------------
# regularity certification


@dataclass
class RegularityReport:
    """Estimated regularity constants and growth exponents for a matrix A."""

    lambda_est: float                    # inf over samples of the xi ⟂ eta form
    lambda_bar_est: float                # sup of the compensating constant
    c0_est: float                        # strictness constant on the sampled compactum
    c1_est: float
    growth_exponents: Dict[str, float] = field(default_factory=dict)
    mu0_est: float = float("nan")        # one-sided quadratic constant
    verdicts: Dict[str, bool] = field(default_factory=dict)
    shell_lambda: Dict[float, float] = field(default_factory=dict)
    dz_min_eig: float = float("nan")

    def verdict(self, name: str) -> bool:
        return bool(self.verdicts.get(name, False))


@dataclass
class RegularitySampler:
    """Covers Omega x [-M, M] x {|p| <= P_max} for the regularity certifier."""

    n: int
    rng: np.random.Generator
    x_radius: float = 1.0
    z_bound: float = 1.0
    p_max: float = 1e3
    points: int = 40
    pair_count: int = 64
    refine_rounds: int = 3

    def draw_points(self, count, p_scale):
        x = self.rng.uniform(-self.x_radius, self.x_radius, size=(count, self.n))
        z = self.rng.uniform(-self.z_bound, self.z_bound, size=count)
        d = self.rng.standard_normal((count, self.n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        mag = p_scale * self.rng.uniform(0.2, 1.0, size=count)
        return x, z, d * mag[:, None]


def _orthonormal_pairs(rng, n, count):
    xi = rng.standard_normal((count, n))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    eta = rng.standard_normal((count, n))
    eta -= (np.einsum("ni,ni->n", eta, xi))[:, None] * xi
    nz = np.linalg.norm(eta, axis=1)
    keep = nz > 1e-8
    return xi[keep], eta[keep] / nz[keep][:, None]


def _lambda_at(spec, x, z, p, rng, pair_count, refine_rounds):
    """inf over unit xi ⟂ eta of the second p-derivative form, with local
    refinement around the worst random pair."""
    xi, eta = _orthonormal_pairs(rng, spec.n, pair_count)
    vals = np.array([spec.second_p_derivative_form(x, z, p, a, b)
                     for a, b in zip(xi, eta)])
    i = int(np.argmin(vals))
    best, bxi, beta_ = vals[i], xi[i], eta[i]
    radius = 0.5
    for _ in range(refine_rounds):
        pert_xi = bxi[None, :] + radius * rng.standard_normal((16, spec.n))
        pert_xi /= np.linalg.norm(pert_xi, axis=1, keepdims=True)
        pert_eta = beta_[None, :] + radius * rng.standard_normal((16, spec.n))
        pert_eta -= np.einsum("ni,ni->n", pert_eta, pert_xi)[:, None] * pert_xi
        nz = np.linalg.norm(pert_eta, axis=1)
        ok = nz > 1e-8
        pert_xi, pert_eta = pert_xi[ok], pert_eta[ok] / nz[ok][:, None]
        vals = np.array([spec.second_p_derivative_form(x, z, p, a, b)
                         for a, b in zip(pert_xi, pert_eta)])
        if vals.size and vals.min() < best:
            i = int(np.argmin(vals))
            best, bxi, beta_ = vals[i], pert_xi[i], pert_eta[i]
        radius *= 0.4
    return float(best)


def _lambda_bar_at(spec, x, z, p, lam, rng, pair_count):
    """sup over unit pairs of (lam - form)/(xi.eta)^2, the constant needed to
    write the strict regularity in compensated form."""
    xi = rng.standard_normal((pair_count, spec.n))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    eta = rng.standard_normal((pair_count, spec.n))
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    # include aligned pairs, where the compensation is fully active
    xi = np.vstack([xi, xi[:8]])
    eta = np.vstack([eta, xi[-8:]])
    best = float("-inf")
    for a, b in zip(xi, eta):
        c2 = float(a @ b) ** 2
        if c2 < 1e-4:
            continue
        q = spec.second_p_derivative_form(x, z, p, a, b)
        best = max(best, (lam - q) / c2)
    return best


def _fit_slope(norms, values):
    """log-log slope over the top decade of |p|."""
    norms = np.asarray(norms, dtype=float)
    values = np.asarray(values, dtype=float)
    top = norms >= norms.max() / 10.0
    x = np.log(norms[top])
    y = np.log(np.maximum(values[top], 1e-300))
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def certify_regularity(spec: AugMatrixSpec, sampler: RegularitySampler,
                       M: float = None, B: Optional[RhsSpec] = None,
                       strict_floor: float = 1e-6,
                       regular_tol: float = 1e-8) -> RegularityReport:
    """Estimate the regularity constants of A on sampled jets.

    Verdicts: ``regular`` (form >= -tol), ``strictly_regular`` (form >= c0 > 0
    on the sampled compactum), ``uniformly_regular`` (lambda bounded below and
    lambda-bar above out to P_max), ``quadratic_growth`` (derivative norms fit
    the O(|p|^2)/O(|p|) exponents with the D_z lower bounds), and
    ``one_sided_quadratic`` (A >= -mu0 (1+|p|^2) I).
    """
    if M is not None:
        sampler.z_bound = float(M)
    rng = sampler.rng
    if sampler.points <= 0:
        raise ConfigError("regularity sampler needs a positive point count")

    # compactum pass: moderate |p|
    lam_vals = []
    lam_bar_vals = []
    dz_eigs = []
    for x, z, p in zip(*sampler.draw_points(sampler.points, p_scale=2.0)):
        lam = _lambda_at(spec, x, z, p, rng, sampler.pair_count, sampler.refine_rounds)
        lam_vals.append(lam)
        lam_bar_vals.append(_lambda_bar_at(spec, x, z, p, lam, rng, sampler.pair_count))
        dz_eigs.append(float(np.linalg.eigvalsh(0.5 * (spec.dz(x, z, p) + spec.dz(x, z, p).T))[0]))
    lam_est = float(min(lam_vals))
    lam_bar_est = float(max(lam_bar_vals))

    # shell pass: lambda and lambda-bar as |p| grows to P_max
    shells = np.geomspace(1.0, sampler.p_max, num=6)
    shell_lambda = {}
    shell_lambda_bar = {}
    growth = {"A": [], "DxA": [], "DzA_neg": [], "DpA": []}
    if B is not None:
        growth.update({"DxB": [], "DzB_neg": [], "DpB": []})
    norms_seen = []
    mu0 = 0.0
    per_shell = max(8, sampler.points // 4)
    for s in shells:
        lams, lbars = [], []
        for x, z, p in zip(*sampler.draw_points(per_shell, p_scale=s)):
            lam = _lambda_at(spec, x, z, p, rng, sampler.pair_count, 1)
            lams.append(lam)
            lbars.append(_lambda_bar_at(spec, x, z, p, lam, rng, sampler.pair_count))
            a = eval_A(spec, x, z, p)
            pn = float(np.linalg.norm(p))
            norms_seen.append(max(pn, 1e-6))
            growth["A"].append(np.linalg.norm(a))
            growth["DxA"].append(np.linalg.norm(spec.dx(x, z, p)))
            growth["DpA"].append(np.linalg.norm(spec.dp(x, z, p)))
            dza = 0.5 * (spec.dz(x, z, p) + spec.dz(x, z, p).T)
            growth["DzA_neg"].append(max(0.0, -float(np.linalg.eigvalsh(dza)[0])))
            mu0 = max(mu0, max(0.0, -float(np.linalg.eigvalsh(a)[0])) / (1.0 + pn ** 2))
            if B is not None:
                growth["DxB"].append(abs(float(np.linalg.norm(
                    _rhs_dx(B, x, z, p)))))
                growth["DzB_neg"].append(max(0.0, -B.dz(x, z, p)))
                growth["DpB"].append(float(np.linalg.norm(B.dp(x, z, p))))
        shell_lambda[float(s)] = float(min(lams))
        shell_lambda_bar[float(s)] = float(max(lbars))

    lam0_est = min(min(shell_lambda.values()), lam_est)
    lam_bar0_est = max(max(shell_lambda_bar.values()), lam_bar_est)

    exps = {key: _fit_slope(norms_seen, vals) for key, vals in growth.items()
            if len(vals) == len(norms_seen)}

    regular = lam0_est >= -regular_tol
    strictly = lam_est >= strict_floor
    uniformly = strictly and lam0_est >= strict_floor and np.isfinite(lam_bar0_est)
    quad = (exps.get("A", 0.0) <= 2.0 + 0.15
            and exps.get("DxA", 0.0) <= 2.0 + 0.15
            and exps.get("DpA", 0.0) <= 1.0 + 0.15)
    if B is not None:
        quad = quad and exps.get("DxB", 0.0) <= 2.0 + 0.15 \
            and exps.get("DpB", 0.0) <= 1.0 + 0.15
    one_sided = np.isfinite(mu0)

    verdicts = {
        "regular": bool(regular),
        "strictly_regular": bool(regular and strictly),
        "uniformly_regular": bool(regular and strictly and uniformly),
        "quadratic_growth": bool(quad),
        "one_sided_quadratic": bool(one_sided),
        "A_subquadratic": bool(exps.get("A", 0.0) <= 2.0 - 0.15),
    }
    if spec.monotone_in_z:
        verdicts["dz_monotone"] = bool(min(dz_eigs) >= -1e-8)

    return RegularityReport(
        lambda_est=lam0_est, lambda_bar_est=lam_bar0_est,
        c0_est=lam_est, c1_est=lam_bar_est,
        growth_exponents=exps, mu0_est=float(mu0), verdicts=verdicts,
        shell_lambda=shell_lambda, dz_min_eig=float(min(dz_eigs)))


def _rhs_dx(B: RhsSpec, x, z, p) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    h = _FD_REL * (1.0 + float(np.linalg.norm(x)))
    out = np.empty(x.size)
    for l in range(x.size):
        e = np.zeros(x.size)
        e[l] = h
        out[l] = (B.evaluate(x + e, z, p) - B.evaluate(x - e, z, p)) / (2 * h)
    return out

"""Built-in reference problems with known exact solutions.

Both problems live on the unit disk and are manufactured by back-substituting
an analytically admissible reference function u* into the equation and the
Neumann condition. The right side carries an e^{z - u*} factor so B is
strictly increasing in z: that pins the additive constant a pure Neumann
problem would otherwise leave free (and matches the monotonicity hypothesis
of the existence theory).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .augmenting import EuclideanYamabeA, RhsSpec
from .geometry import Disk, Neumann
from .grid import PolarDisk
from .operators import OperatorSpec, fk, mk
from .solver import QuadraticSeed, SolveConfig


@dataclass
class ManufacturedProblem:
    name: str
    operator: OperatorSpec
    A: EuclideanYamabeA
    B: RhsSpec
    G: Neumann
    domain: Disk
    u_exact: Callable
    grad_exact: Callable
    hess_exact: Callable
    seed: QuadraticSeed
    eps_schedule: Tuple[float, ...] = ()

    def config(self, n_r: int, n_theta: int, **kw) -> SolveConfig:
        grid = PolarDisk(self.domain.radius, n_r, n_theta)
        return SolveConfig(operator=self.operator, A=self.A, B=self.B,
                           G=self.G, grid=grid, initial=self.seed,
                           eps_schedule=self.eps_schedule, **kw)

    def exact_field(self, grid) -> np.ndarray:
        return self.u_exact(grid.nodes)

    def augmented_hessian_exact(self, X) -> np.ndarray:
        """M[u*] = D^2 u* - A(x, u*, Du*) at a batch of points."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        P = self.grad_exact(X)
        H = self.hess_exact(X)
        A = self.A.evaluate_batch(X, self.u_exact(X), P)
        return H - A


def _yamabe_pieces(gamma: float):
    def u(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        x, y = X[:, 0], X[:, 1]
        return 1.0 + 0.25 * (x ** 2 + y ** 2) + gamma * np.sin(x) * np.sin(y)

    def du(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        x, y = X[:, 0], X[:, 1]
        return np.column_stack([0.5 * x + gamma * np.cos(x) * np.sin(y),
                                0.5 * y + gamma * np.sin(x) * np.cos(y)])

    def d2u(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        x, y = X[:, 0], X[:, 1]
        out = np.empty((len(X), 2, 2))
        out[:, 0, 0] = 0.5 - gamma * np.sin(x) * np.sin(y)
        out[:, 1, 1] = 0.5 - gamma * np.sin(x) * np.sin(y)
        out[:, 0, 1] = out[:, 1, 0] = gamma * np.cos(x) * np.cos(y)
        return out

    return u, du, d2u


def yamabe_disk(gamma: float = 0.05) -> ManufacturedProblem:
    """F_2 (n = 2), A = conformal |p|^2/2 I - p x p, Neumann data, on Disk(1).

    u* = 1 + |x|^2/4 + gamma sin(x) sin(y); M[u*] stays positive definite on
    the closed disk for gamma up to ~0.15.
    """
    op = fk(2, 2)
    A = EuclideanYamabeA(2)
    domain = Disk(1.0)
    u, du, d2u = _yamabe_pieces(gamma)

    def m_exact(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return d2u(X) - A.evaluate_batch(X, u(X), du(X))

    def b_star(X):
        M = m_exact(X)
        return np.sqrt(np.linalg.det(M))

    def b(Xb, Z, P):
        Xb = np.atleast_2d(np.asarray(Xb, dtype=float))
        return b_star(Xb) * np.exp(np.asarray(Z, dtype=float) - u(Xb))

    B = RhsSpec(2, b, dz=lambda X, Z, P: b(X, Z, P),
                dp=lambda X, Z, P: np.zeros(np.shape(P)),
                vectorized=True)
    B.family = "ManufacturedYamabe"

    def phi(x, z):
        x = np.asarray(x, dtype=float)
        nu = -x / np.linalg.norm(x)
        return float(nu @ du(x[None, :])[0])

    G = Neumann(domain, phi)
    return ManufacturedProblem(
        name="yamabe-disk", operator=op, A=A, B=B, G=G, domain=domain,
        u_exact=u, grad_exact=du, hess_exact=d2u,
        seed=QuadraticSeed(c0=1.0, eps=0.5))


def degenerate_min_disk(eps_schedule=(0.1, 0.05, 0.025, 0.0125)) -> ManufacturedProblem:
    """m_1 (minimum eigenvalue, n = 2) with the conformal A on Disk(1).

    u* = 1 + (a x^2 + b y^2)/2 with a = 0.6, b = 0.4 keeps the eigenvalue gap
    of M[u*] at least 0.04 on the disk, so the active branch of the minimum
    never switches and the eps -> 0 limit is well resolved.
    """
    a_c, b_c = 0.6, 0.4
    op = mk(1, 2)
    A = EuclideanYamabeA(2)
    domain = Disk(1.0)

    def u(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return 1.0 + 0.5 * (a_c * X[:, 0] ** 2 + b_c * X[:, 1] ** 2)

    def du(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([a_c * X[:, 0], b_c * X[:, 1]])

    def d2u(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros((len(X), 2, 2))
        out[:, 0, 0] = a_c
        out[:, 1, 1] = b_c
        return out

    def m_exact(X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return d2u(X) - A.evaluate_batch(X, u(X), du(X))

    def b_star(X):
        M = m_exact(X)
        mid = 0.5 * (M[:, 0, 0] + M[:, 1, 1])
        rad = np.sqrt((0.5 * (M[:, 0, 0] - M[:, 1, 1])) ** 2 + M[:, 0, 1] ** 2)
        return mid - rad

    def b(Xb, Z, P):
        Xb = np.atleast_2d(np.asarray(Xb, dtype=float))
        return b_star(Xb) * np.exp(np.asarray(Z, dtype=float) - u(Xb))

    B = RhsSpec(2, b, dz=lambda X, Z, P: b(X, Z, P),
                dp=lambda X, Z, P: np.zeros(np.shape(P)),
                vectorized=True)
    B.family = "ManufacturedDegenerate"

    def phi(x, z):
        x = np.asarray(x, dtype=float)
        nu = -x / np.linalg.norm(x)
        return float(nu @ du(x[None, :])[0])

    G = Neumann(domain, phi)
    return ManufacturedProblem(
        name="degenerate-min-disk", operator=op, A=A, B=B, G=G, domain=domain,
        u_exact=u, grad_exact=du, hess_exact=d2u,
        seed=QuadraticSeed(c0=1.0, eps=0.5),
        eps_schedule=tuple(eps_schedule))


MANUFACTURED = {
    "yamabe-disk": yamabe_disk,
    "degenerate-min-disk": degenerate_min_disk,
}

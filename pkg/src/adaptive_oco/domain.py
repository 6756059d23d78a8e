"""Feasible sets and the projections onto them.

Two kinds of bounded convex domain are supported: Euclidean balls and
axis-aligned boxes. Besides the Euclidean projection, the online Newton step
experts need the projection in the norm induced by a positive-definite
matrix, ``argmin_{w in domain} (w - x)^T A (w - x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .exceptions import ConvergenceError, InvalidArgumentError

# Relative slack under which a point counts as lying on/inside the boundary.
# Keeps project() exactly idempotent after floating-point rescaling.
_MEMBERSHIP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """A bounded convex domain together with the gradient bound of the problem.

    Build instances through :meth:`ball` or :meth:`box`.
    """

    kind: str
    gradient_bound: float
    center: np.ndarray | None = None
    radius: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    _diameter: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind == "ball":
            c = np.asarray(self.center, dtype=float).reshape(-1)
            if c.size < 1:
                raise InvalidArgumentError("ball center must have at least one coordinate")
            if not self.radius or self.radius <= 0:
                raise InvalidArgumentError(f"ball radius must be positive, got {self.radius}")
            c.setflags(write=False)
            object.__setattr__(self, "center", c)
            object.__setattr__(self, "radius", float(self.radius))
            diameter = 2.0 * self.radius
        elif self.kind == "box":
            lo = np.asarray(self.lower, dtype=float).reshape(-1)
            hi = np.asarray(self.upper, dtype=float).reshape(-1)
            if lo.shape != hi.shape or lo.size < 1:
                raise InvalidArgumentError("box bounds must be non-empty vectors of equal length")
            if np.any(hi < lo):
                raise InvalidArgumentError("box upper bound below lower bound")
            lo.setflags(write=False)
            hi.setflags(write=False)
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
            diameter = float(np.linalg.norm(hi - lo))
        else:
            raise InvalidArgumentError(f"unknown domain kind {self.kind!r}")
        if not diameter > 0:
            raise InvalidArgumentError("domain must have positive diameter")
        if not self.gradient_bound or self.gradient_bound <= 0:
            raise InvalidArgumentError(f"gradient bound must be positive, got {self.gradient_bound}")
        object.__setattr__(self, "gradient_bound", float(self.gradient_bound))
        object.__setattr__(self, "_diameter", diameter)

    @classmethod
    def ball(cls, center, radius, gradient_bound):
        return cls("ball", gradient_bound, center=center, radius=radius)

    @classmethod
    def box(cls, lower, upper, gradient_bound):
        return cls("box", gradient_bound, lower=lower, upper=upper)

    @property
    def dimension(self) -> int:
        return int(self.center.size if self.kind == "ball" else self.lower.size)

    @property
    def diameter(self) -> float:
        return self._diameter

    @property
    def midpoint(self) -> np.ndarray:
        """Center of the ball, or center of the box."""
        if self.kind == "ball":
            return self.center.copy()
        return 0.5 * (self.lower + self.upper)

    @property
    def max_norm(self) -> float:
        """Largest Euclidean norm of a point in the domain."""
        if self.kind == "ball":
            return float(np.linalg.norm(self.center)) + self.radius
        corner = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(corner))

    def with_gradient_bound(self, gradient_bound) -> DomainSpec:
        if self.kind == "ball":
            return DomainSpec.ball(self.center, self.radius, gradient_bound)
        return DomainSpec.box(self.lower, self.upper, gradient_bound)

    def contains(self, x, tol=1e-9) -> bool:
        x = _check_vector(self, x)
        if self.kind == "ball":
            return bool(np.linalg.norm(x - self.center) <= self.radius + tol)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` points uniformly from the domain, shape ``(n, d)``."""
        d = self.dimension
        if self.kind == "ball":
            z = rng.standard_normal((n, d))
            z /= np.linalg.norm(z, axis=1, keepdims=True)
            r = self.radius * rng.random(n) ** (1.0 / d)
            return self.center + z * r[:, None]
        return self.lower + (self.upper - self.lower) * rng.random((n, d))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "gradient_bound": self.gradient_bound, "diameter": self.diameter}
        if self.kind == "ball":
            out.update(center=self.center.tolist(), radius=self.radius)
        else:
            out.update(lower=self.lower.tolist(), upper=self.upper.tolist())
        return out


def _check_vector(domain: DomainSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != domain.dimension:
        raise InvalidArgumentError(
            f"expected a vector of length {domain.dimension}, got shape {x.shape}"
        )
    return x


def _inside(domain: DomainSpec, x: np.ndarray) -> bool:
    if domain.kind == "ball":
        r = domain.radius
        return bool(np.linalg.norm(x - domain.center) <= r * (1.0 + _MEMBERSHIP_RTOL))
    return bool(np.all(x >= domain.lower) and np.all(x <= domain.upper))


def project(domain: DomainSpec, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto the domain.

    Points already in the domain are returned unchanged (as a copy), which
    makes the map exactly idempotent.
    """
    x = _check_vector(domain, x)
    if domain.kind == "ball":
        diff = x - domain.center
        n = float(np.linalg.norm(diff))
        if n <= domain.radius * (1.0 + _MEMBERSHIP_RTOL):
            return x.copy()
        return domain.center + diff * (domain.radius / n)
    return np.clip(x, domain.lower, domain.upper)


def _projected_gradient_residual(domain, A, x, w, step):
    grad = 2.0 * (A @ (w - x))
    return float(np.linalg.norm(w - project(domain, w - step * grad))) / step


def project_generalized(
    domain: DomainSpec, A, x, tol=1e-8, max_iter=10_000, method="auto", check=True
):
    """Projection of ``x`` onto the domain in the norm induced by ``A``.

    Parameters
    ----------
    domain : DomainSpec
    A : ndarray of shape (d, d)
        Symmetric positive-definite matrix.
    x : ndarray of shape (d,)
    tol : float
        Bound on the projected-gradient norm of the returned point.
    max_iter : int
        Iteration cap of the projected-gradient solver.
    method : {"auto", "pgd", "exact"}
        ``"pgd"`` runs projected gradient descent with step ``1/(2 lambda_max(A))``
        and works for every domain kind. ``"exact"`` (balls only) solves the
        KKT system through an eigendecomposition and a scalar root find.
        ``"auto"`` picks ``"exact"`` for balls and ``"pgd"`` otherwise.
    check : bool
        Validate symmetry and positive definiteness of ``A`` up front. Callers
        that build ``A`` as a sum of a positive multiple of the identity and
        outer products may skip it.

    Returns
    -------
    ndarray of shape (d,)

    Raises
    ------
    InvalidArgumentError
        If ``A`` is not symmetric positive definite or shapes disagree.
    ConvergenceError
        If the solver hits ``max_iter`` before reaching ``tol``.
    """
    x = _check_vector(domain, x)
    A = np.asarray(A, dtype=float)
    d = domain.dimension
    if A.shape != (d, d):
        raise InvalidArgumentError(f"matrix must be {d}x{d}, got {A.shape}")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    if check:
        if np.abs(A - A.T).max() > 1e-12 * max(np.abs(A).max(), 1e-300):
            raise InvalidArgumentError("matrix is not symmetric")
        if np.linalg.eigvalsh(A)[0] <= 0:
            raise InvalidArgumentError("matrix is not positive definite")
    if _inside(domain, x):
        return x.copy()

    if method == "auto":
        method = "exact" if domain.kind == "ball" else "pgd"
    if method == "exact":
        if domain.kind != "ball":
            raise InvalidArgumentError("exact generalized projection is only available for balls")
        evals, evecs = np.linalg.eigh(A)
        if evals[0] <= 0:
            raise InvalidArgumentError("matrix is not positive definite")
        u = _min_quadratic_in_ball(evals, evecs, A @ (x - domain.center), domain.radius)
        w = domain.center + u
        step = 1.0 / (2.0 * evals[-1])
        if _projected_gradient_residual(domain, A, x, w, step) <= tol:
            return w
        # Rare round-off miss: polish with the iterative solver.
        return _pgd_projection(domain, A, x, tol, max_iter, float(evals[-1]), w)
    if method == "pgd":
        evals = np.linalg.eigvalsh(A)
        if evals[0] <= 0:
            raise InvalidArgumentError("matrix is not positive definite")
        return _pgd_projection(domain, A, x, tol, max_iter, float(evals[-1]), project(domain, x))
    raise InvalidArgumentError(f"unknown method {method!r}")


def _pgd_projection(domain, A, x, tol, max_iter, lam_max, w0):
    step = 1.0 / (2.0 * lam_max)
    w = w0
    residual = math.inf
    for _ in range(max_iter):
        grad = 2.0 * (A @ (w - x))
        w_next = project(domain, w - step * grad)
        residual = float(np.linalg.norm(w - w_next)) / step
        if residual <= tol:
            return w
        w = w_next
    raise ConvergenceError(
        f"generalized projection did not converge in {max_iter} iterations "
        f"(residual {residual:.3e} > tol {tol:.1e})",
        residual=residual,
        best=w,
    )


def _min_quadratic_in_ball(evals, evecs, b, radius):
    """Minimize ``u^T A u - 2 b^T u`` over ``||u|| <= radius``.

    ``A`` is given by its eigendecomposition and must be positive
    semidefinite (singular allowed).
    """
    lam = np.clip(evals, 0.0, None)
    bt = evecs.T @ b
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b)
    scale = max(float(lam[-1]), bnorm / radius)
    null = lam <= 1e-12 * scale
    if not np.any(np.abs(bt[null]) > 1e-12 * bnorm):
        ut = np.where(null, 0.0, bt / np.where(null, 1.0, lam))
        if np.linalg.norm(ut) <= radius:
            return evecs @ ut

    def excess(mu):
        return float(np.linalg.norm(bt / (lam + mu))) - radius

    hi = bnorm / radius
    lo = hi * 1e-15
    if excess(lo) <= 0.0:
        mu = lo
    else:
        mu = brentq(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    u = evecs @ (bt / (lam + mu))
    n = float(np.linalg.norm(u))
    if n > radius:
        u *= radius / n
    return u


def minimize_quadratic(domain: DomainSpec, A, h, c0=0.0):
    """Minimize ``F(w) = w^T A w - 2 h^T w + c0`` over the domain.

    ``A`` must be symmetric positive semidefinite; it may be zero, in which
    case ``F`` is linear. Balls are solved exactly; boxes with L-BFGS-B.

    Returns
    -------
    w : ndarray of shape (d,)
    value : float
    """
    A = np.asarray(A, dtype=float)
    h = np.asarray(h, dtype=float)

    def F(w):
        return float(w @ A @ w - 2.0 * h @ w + c0)

    if domain.kind == "ball":
        c = domain.center
        b = h - A @ c
        diag = A.diagonal()
        if np.allclose(A, np.diag(np.full(A.shape[0], diag[0])), rtol=0, atol=1e-15 * max(1.0, abs(diag[0]))):
            # Isotropic curvature: u = b / (a + mu) with mu = max(0, |b|/R - a).
            a = float(diag[0])
            bnorm = float(np.linalg.norm(b))
            denom = max(a, bnorm / domain.radius)
            u = np.zeros_like(b) if bnorm == 0.0 else b / denom
        else:
            evals, evecs = np.linalg.eigh(A)
            u = _min_quadratic_in_ball(evals, evecs, b, domain.radius)
        w = c + u
        return w, F(w)

    lo, hi = domain.lower, domain.upper
    if not np.any(A):
        g = -2.0 * h
        w = np.where(g > 0, lo, hi)
        w = np.where(g == 0, 0.5 * (lo + hi), w)
        return w, F(w)
    res = minimize(
        F,
        domain.midpoint,
        jac=lambda w: 2.0 * (A @ w) - 2.0 * h,
        method="L-BFGS-B",
        bounds=list(zip(lo, hi)),
        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10_000},
    )
    w = np.clip(res.x, lo, hi)
    return w, F(w)

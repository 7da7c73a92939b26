"""
Coordinate charts for Riemannian manifolds.

Each chart exposes the metric tensor, Christoffel symbols, the curvature
endomorphism R(A, B)C, exponential/logarithm maps and the Riemannian distance.
Concrete charts: flat Euclidean space, the round unit 2-sphere, and a generic
chart built from a metric alone (Christoffel symbols and curvature by central
finite differences).

Curvature convention: R(X, Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_[X,Y] Z, so that
g(R(A, B)B, A) is the sectional curvature times |A ∧ B|².
"""
import math
from abc import ABC, abstractmethod
from typing import Callable

import numpy as np
from scipy import optimize


# Finite-difference step for charts defined only through their metric
FD_STEP = 1e-5

# Points with sin(colatitude) below this are treated as poles of the sphere chart
POLE_TOLERANCE = 1e-8


class ManifoldError(Exception):
    """Custom exception for chart and geometry errors."""
    pass


class ChartDomainError(ManifoldError):
    """Raised when a point lies outside the chart or on its singular set."""
    pass


class SingularityError(ManifoldError):
    """Raised when a geometric quantity is undefined (e.g. gradient of d(p, .) at p)."""
    pass


class ManifoldChart(ABC):
    """
    A coordinate chart of a Riemannian manifold.

    Attributes:
        name: Registry name of the chart (e.g. "euclidean:3", "sphere2")
        dim: Chart dimension n
        is_flat: True when Christoffel symbols and curvature vanish identically
        injectivity_radius: Radius below which log_at is defined
    """

    name: str = "chart"
    dim: int = 0
    is_flat: bool = False
    injectivity_radius: float = math.inf

    def check_point(self, q) -> np.ndarray:
        """
        Validate a chart point and return it as a float array.

        Raises:
            ChartDomainError: If the point has the wrong shape or is not finite
        """
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim,):
            raise ChartDomainError(
                f"Chart {self.name}: expected a point of shape ({self.dim},), got {q.shape}"
            )
        if not np.all(np.isfinite(q)):
            raise ChartDomainError(f"Chart {self.name}: non-finite point {q}")
        return q

    @abstractmethod
    def metric_at(self, q) -> np.ndarray:
        """Metric tensor g(q) as an n×n matrix."""

    @abstractmethod
    def christoffel_at(self, q) -> np.ndarray:
        """Christoffel symbols Γ^i_{jk}(q) as an n×n×n array indexed [i, j, k]."""

    @abstractmethod
    def curvature_apply(self, q, A, B, C) -> np.ndarray:
        """The curvature endomorphism R(A, B)C at q."""

    @abstractmethod
    def exp_at(self, q, v) -> np.ndarray:
        """Riemannian exponential map exp_q(v)."""

    @abstractmethod
    def log_at(self, q, y) -> np.ndarray:
        """Inverse of exp_q, defined inside the injectivity radius."""

    def distance(self, q, y) -> float:
        """Riemannian distance d(q, y)."""
        return self.norm(q, self.log_at(q, y))

    def distances(self, points, y) -> np.ndarray:
        """
        Distances from many points to a single point.

        Args:
            points: Array of shape (m, n)
            y: Point of shape (n,)

        Returns:
            Array of shape (m,) with d(points[i], y)
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.array([self.distance(p, y) for p in points])

    def inner(self, q, x, y) -> float:
        """Inner product g_q(x, y)."""
        return float(np.asarray(x) @ self.metric_at(q) @ np.asarray(y))

    def norm(self, q, v) -> float:
        """Riemannian norm ‖v‖_g at q."""
        return math.sqrt(max(self.inner(q, v, v), 0.0))

    def connection(self, q, x, y) -> np.ndarray:
        """Contraction Γ(q; x, y)^i = Γ^i_{jk}(q) x^j y^k."""
        return np.einsum("ijk,j,k->i", self.christoffel_at(q), x, y)

    def raise_index(self, q, covector) -> np.ndarray:
        """Convert a coordinate differential into a gradient via g^{-1}."""
        return np.linalg.solve(self.metric_at(q), np.asarray(covector, dtype=float))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class EuclideanChart(ManifoldChart):
    """Flat R^n with the identity metric."""

    is_flat = True

    def __init__(self, n: int):
        """
        Initialize the Euclidean chart.

        Args:
            n: Dimension (must be at least 1)
        """
        if int(n) != n or n < 1:
            raise ManifoldError(f"Euclidean chart dimension must be a positive integer, got {n}")
        self.dim = int(n)
        self.name = f"euclidean:{self.dim}"

    def metric_at(self, q) -> np.ndarray:
        self.check_point(q)
        return np.eye(self.dim)

    def christoffel_at(self, q) -> np.ndarray:
        self.check_point(q)
        return np.zeros((self.dim, self.dim, self.dim))

    def curvature_apply(self, q, A, B, C) -> np.ndarray:
        self.check_point(q)
        return np.zeros(self.dim)

    def exp_at(self, q, v) -> np.ndarray:
        return self.check_point(q) + np.asarray(v, dtype=float)

    def log_at(self, q, y) -> np.ndarray:
        return self.check_point(y) - self.check_point(q)

    def distance(self, q, y) -> float:
        return float(np.linalg.norm(self.check_point(y) - self.check_point(q)))

    def distances(self, points, y) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(points - np.asarray(y, dtype=float), axis=1)

    def inner(self, q, x, y) -> float:
        return float(np.dot(x, y))

    def connection(self, q, x, y) -> np.ndarray:
        return np.zeros(self.dim)

    def raise_index(self, q, covector) -> np.ndarray:
        return np.asarray(covector, dtype=float)


class SphereChart(ManifoldChart):
    """
    The unit 2-sphere in colatitude/longitude coordinates q = (θ, φ).

    Embedding: (sin θ cos φ, sin θ sin φ, cos θ). The metric is diag(1, sin²θ);
    the chart is singular at the poles (sin θ < 1e-8), where every operation
    raises ChartDomainError. Distances are great-circle angles computed in the
    embedding, so they do not depend on the chart.
    """

    name = "sphere2"
    dim = 2
    injectivity_radius = math.pi

    def check_point(self, q) -> np.ndarray:
        q = super().check_point(q)
        if abs(math.sin(q[0])) < POLE_TOLERANCE:
            raise ChartDomainError(f"Chart {self.name}: point {q} lies on a pole of the chart")
        return q

    @staticmethod
    def embed(q) -> np.ndarray:
        """Embedding of a chart point in R³."""
        theta, phi = q
        return np.array([
            math.sin(theta) * math.cos(phi),
            math.sin(theta) * math.sin(phi),
            math.cos(theta),
        ])

    @staticmethod
    def tangent_basis(q):
        """Coordinate vectors ∂θ and ∂φ at q, expressed in R³."""
        theta, phi = q
        e_theta = np.array([
            math.cos(theta) * math.cos(phi),
            math.cos(theta) * math.sin(phi),
            -math.sin(theta),
        ])
        e_phi = np.array([
            -math.sin(theta) * math.sin(phi),
            math.sin(theta) * math.cos(phi),
            0.0,
        ])
        return e_theta, e_phi

    def embed_tangent(self, q, v) -> np.ndarray:
        """Tangent vector in chart components mapped to R³."""
        q = self.check_point(q)
        e_theta, e_phi = self.tangent_basis(q)
        return v[0] * e_theta + v[1] * e_phi

    def chart_point(self, x, phi_reference: float = 0.0) -> np.ndarray:
        """
        Chart coordinates of a unit vector in R³.

        Args:
            x: Point on the unit sphere in R³
            phi_reference: Longitude the result is unwrapped around

        Returns:
            (θ, φ) with φ within π of phi_reference
        """
        x = np.asarray(x, dtype=float)
        theta = math.atan2(math.hypot(x[0], x[1]), x[2])
        phi = math.atan2(x[1], x[0])
        phi = phi_reference + (phi - phi_reference + math.pi) % (2 * math.pi) - math.pi
        return np.array([theta, phi])

    def metric_at(self, q) -> np.ndarray:
        q = self.check_point(q)
        return np.diag([1.0, math.sin(q[0]) ** 2])

    def christoffel_at(self, q) -> np.ndarray:
        q = self.check_point(q)
        s, c = math.sin(q[0]), math.cos(q[0])
        gamma = np.zeros((2, 2, 2))
        gamma[0, 1, 1] = -s * c
        gamma[1, 0, 1] = c / s
        gamma[1, 1, 0] = c / s
        return gamma

    def curvature_apply(self, q, A, B, C) -> np.ndarray:
        # Constant sectional curvature 1: R(A, B)C = g(B, C)A − g(A, C)B
        g = self.metric_at(q)
        A, B, C = (np.asarray(x, dtype=float) for x in (A, B, C))
        return (B @ g @ C) * A - (A @ g @ C) * B

    def connection(self, q, x, y) -> np.ndarray:
        q = self.check_point(q)
        s, c = math.sin(q[0]), math.cos(q[0])
        return np.array([
            -s * c * x[1] * y[1],
            (c / s) * (x[0] * y[1] + x[1] * y[0]),
        ])

    def exp_at(self, q, v) -> np.ndarray:
        q = self.check_point(q)
        w = self.embed_tangent(q, np.asarray(v, dtype=float))
        speed = float(np.linalg.norm(w))
        if speed < 1e-300:
            return q.copy()
        x = math.cos(speed) * self.embed(q) + math.sin(speed) * (w / speed)
        return self.chart_point(x, phi_reference=q[1])

    def log_at(self, q, y) -> np.ndarray:
        q = self.check_point(q)
        y = self.check_point(y)
        p_vec, y_vec = self.embed(q), self.embed(y)
        cos_angle = float(p_vec @ y_vec)
        w = y_vec - cos_angle * p_vec
        sin_angle = float(np.linalg.norm(w))
        if sin_angle < 1e-15:
            if cos_angle > 0:
                return np.zeros(2)
            raise SingularityError(f"Chart {self.name}: log undefined for antipodal points {q}, {y}")
        angle = math.atan2(sin_angle, cos_angle)
        u = angle * w / sin_angle
        e_theta, e_phi = self.tangent_basis(q)
        return np.array([u @ e_theta, (u @ e_phi) / math.sin(q[0]) ** 2])

    def distance(self, q, y) -> float:
        p_vec = self.embed(self.check_point(q))
        y_vec = self.embed(self.check_point(y))
        return math.atan2(float(np.linalg.norm(np.cross(p_vec, y_vec))), float(p_vec @ y_vec))

    def distances(self, points, y) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if np.any(np.abs(np.sin(points[:, 0])) < POLE_TOLERANCE):
            raise ChartDomainError(f"Chart {self.name}: sample lies on a pole of the chart")
        y_vec = self.embed(self.check_point(y))
        sin_t = np.sin(points[:, 0])
        vecs = np.column_stack([
            sin_t * np.cos(points[:, 1]),
            sin_t * np.sin(points[:, 1]),
            np.cos(points[:, 0]),
        ])
        cross = np.linalg.norm(np.cross(vecs, y_vec), axis=1)
        return np.arctan2(cross, vecs @ y_vec)


class MetricChart(ManifoldChart):
    """
    Chart defined by a metric function only.

    Christoffel symbols come from central differences of the metric and the
    Levi-Civita formula; curvature from central differences of the Christoffel
    symbols. The exponential map integrates the geodesic equation with RK4 and
    the logarithm inverts it by root finding.
    """

    def __init__(
        self,
        metric_fn: Callable[[np.ndarray], np.ndarray],
        dim: int,
        name: str = "metric",
        step: float = FD_STEP,
        exp_steps: int = 100,
    ):
        """
        Initialize the chart.

        Args:
            metric_fn: Map from a chart point to its n×n metric matrix
            dim: Chart dimension
            name: Registry name
            step: Central-difference step
            exp_steps: RK4 steps used by the exponential map
        """
        if int(dim) != dim or dim < 1:
            raise ManifoldError(f"Chart dimension must be a positive integer, got {dim}")
        self.metric_fn = metric_fn
        self.dim = int(dim)
        self.name = name
        self.step = step
        self.exp_steps = exp_steps

    def metric_at(self, q) -> np.ndarray:
        q = self.check_point(q)
        return np.asarray(self.metric_fn(q), dtype=float)

    def _metric_partials(self, q) -> np.ndarray:
        """dg[l, i, j] = ∂_l g_ij by central differences."""
        n, h = self.dim, self.step
        dg = np.empty((n, n, n))
        for l in range(n):
            e = np.zeros(n)
            e[l] = h
            dg[l] = (self.metric_at(q + e) - self.metric_at(q - e)) / (2 * h)
        return dg

    def christoffel_at(self, q) -> np.ndarray:
        q = self.check_point(q)
        g_inv = np.linalg.inv(self.metric_at(q))
        dg = self._metric_partials(q)
        # first kind: Γ_{l,jk} = ½ (∂_j g_lk + ∂_k g_lj − ∂_l g_jk)
        first = 0.5 * (
            np.einsum("jlk->ljk", dg) + np.einsum("klj->ljk", dg) - dg
        )
        gamma = np.einsum("il,ljk->ijk", g_inv, first)
        return 0.5 * (gamma + np.swapaxes(gamma, 1, 2))

    def riemann_tensor(self, q) -> np.ndarray:
        """
        Components R^i_{jkl}(q) with R(∂_k, ∂_l)∂_j = R^i_{jkl} ∂_i.
        """
        q = self.check_point(q)
        n, h = self.dim, self.step
        gamma = self.christoffel_at(q)
        d_gamma = np.empty((n, n, n, n))  # d_gamma[k, i, l, j] = ∂_k Γ^i_{lj}
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            d_gamma[k] = (self.christoffel_at(q + e) - self.christoffel_at(q - e)) / (2 * h)
        term_derivative = np.einsum("kilj->ijkl", d_gamma) - np.einsum("likj->ijkl", d_gamma)
        term_product = (
            np.einsum("ikm,mlj->ijkl", gamma, gamma) - np.einsum("ilm,mkj->ijkl", gamma, gamma)
        )
        return term_derivative + term_product

    def curvature_apply(self, q, A, B, C) -> np.ndarray:
        return np.einsum("ijkl,j,k,l->i", self.riemann_tensor(q), C, A, B)

    def _geodesic_rhs(self, y: np.ndarray) -> np.ndarray:
        q, v = y[: self.dim], y[self.dim:]
        return np.concatenate([v, -self.connection(q, v, v)])

    def exp_at(self, q, v) -> np.ndarray:
        q = self.check_point(q)
        y = np.concatenate([q, np.asarray(v, dtype=float)])
        h = 1.0 / self.exp_steps
        for _ in range(self.exp_steps):
            k1 = self._geodesic_rhs(y)
            k2 = self._geodesic_rhs(y + 0.5 * h * k1)
            k3 = self._geodesic_rhs(y + 0.5 * h * k2)
            k4 = self._geodesic_rhs(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return y[: self.dim]

    def log_at(self, q, y) -> np.ndarray:
        q = self.check_point(q)
        y = self.check_point(y)
        solution = optimize.root(lambda w: self.exp_at(q, w) - y, x0=y - q, tol=1e-13)
        if not solution.success:
            raise SingularityError(
                f"Chart {self.name}: log failed between {q} and {y}: {solution.message}"
            )
        return solution.x


def euclidean_chart(n: int) -> EuclideanChart:
    """Flat chart of dimension n."""
    return EuclideanChart(n)


def sphere_chart() -> SphereChart:
    """Unit 2-sphere chart in colatitude/longitude coordinates."""
    return SphereChart()


def metric_chart(metric_fn: Callable, dim: int, name: str = "metric") -> MetricChart:
    """Chart from a metric function; Γ and R by finite differences."""
    return MetricChart(metric_fn, dim, name=name)


def chart_from_name(name: str) -> ManifoldChart:
    """
    Resolve a chart from its registry name.

    Args:
        name: "euclidean:n" or "sphere2"

    Returns:
        ManifoldChart instance

    Raises:
        ManifoldError: If the name is unknown or malformed
    """
    name = str(name).strip()
    if name == "sphere2":
        return sphere_chart()
    if name.startswith("euclidean:"):
        try:
            n = int(name.split(":", 1)[1])
        except ValueError:
            raise ManifoldError(f"Malformed chart name: '{name}'")
        return euclidean_chart(n)
    raise ManifoldError(f"Unknown chart name: '{name}' (expected 'euclidean:n' or 'sphere2')")


def grad_distance_from(chart: ManifoldChart, p, q) -> np.ndarray:
    """
    Gradient in q of m -> d(p, m).

    Args:
        chart: Chart holding both points
        p: Reference point
        q: Evaluation point (q != p, within the injectivity radius of p)

    Returns:
        Unit tangent vector −log_q(p) / d(p, q)

    Raises:
        SingularityError: If q = p or q lies beyond the injectivity radius
    """
    d = chart.distance(p, q)
    if d == 0.0:
        raise SingularityError(f"Gradient of d({p}, .) undefined at the point itself")
    if d >= chart.injectivity_radius:
        raise SingularityError(
            f"Point {q} lies beyond the injectivity radius of {p} on {chart.name}"
        )
    if chart.is_flat:
        return (np.asarray(q, dtype=float) - np.asarray(p, dtype=float)) / d
    return -chart.log_at(q, p) / d

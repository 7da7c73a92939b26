"""
Compactly supported repulsive potentials.

V(q) = e·τ·exp(−1/(1 − (d/D)^{2k})) for d = d(p, q) < D, and 0 otherwise.
The value at the center is exactly τ; the profile decreases monotonically in d
and is smooth across d = D.
"""
import logging
import math
from typing import Optional

import numpy as np

from ..models.potential import PotentialSpec, PotentialSum
from .manifold import ManifoldChart, grad_distance_from

logger = logging.getLogger(__name__)

# 1 − s below this is treated as the seam d = D
SEAM_TOLERANCE = 1e-300

# Relative distance below which the gradient is taken as its limit 0
CENTER_TOLERANCE = 1e-12


class PotentialError(Exception):
    """Custom exception for potential configuration errors."""
    pass


def _support_power(spec: PotentialSpec, d: float, exponent: float) -> float:
    """(d/D)^exponent via exp/log, 0 at d = 0."""
    if d <= 0.0:
        return 0.0
    return math.exp(exponent * math.log(d / spec.D))


def profile_value(spec: PotentialSpec, d: float) -> float:
    """
    Radial profile of a term at distance d from its center.

    Args:
        spec: Potential term
        d: Distance to the center

    Returns:
        Potential value (exactly 0 outside the support)
    """
    if d >= spec.D:
        return 0.0
    s = _support_power(spec, d, 2 * spec.k)
    one_minus = 1.0 - s
    if one_minus < SEAM_TOLERANCE:
        return 0.0
    return spec.tau * math.exp(1.0 - 1.0 / one_minus)


def potential_profile_derivative(spec: PotentialSpec, d: float) -> float:
    """
    Radial derivative dV/dd of a term.

    Args:
        spec: Potential term
        d: Distance to the center

    Returns:
        dV/dd (≤ 0; exactly 0 at the center and outside the support)
    """
    value = profile_value(spec, d)
    if value == 0.0 or d <= 0.0:
        return 0.0
    s = _support_power(spec, d, 2 * spec.k)
    ds_dd = 2 * spec.k * _support_power(spec, d, 2 * spec.k - 1) / spec.D
    return -value * ds_dd / (1.0 - s) ** 2


def potential_value(chart: ManifoldChart, spec: PotentialSpec, q) -> float:
    """
    Evaluate one term at a chart point.

    Args:
        chart: Chart holding q and the center
        spec: Potential term
        q: Evaluation point

    Returns:
        Non-negative potential value
    """
    return profile_value(spec, chart.distance(spec.center, q))


def potential_gradient(chart: ManifoldChart, spec: PotentialSpec, q) -> np.ndarray:
    """
    Riemannian gradient of one term.

    Args:
        chart: Chart holding q and the center
        spec: Potential term
        q: Evaluation point

    Returns:
        grad V as a tangent vector (zero at the center and outside the support)
    """
    d = chart.distance(spec.center, q)
    if d >= spec.D or d <= CENTER_TOLERANCE * spec.D:
        return np.zeros(chart.dim)
    return potential_profile_derivative(spec, d) * grad_distance_from(chart, spec.center, q)


def sum_value(chart: ManifoldChart, potential: PotentialSum, q) -> float:
    """
    Evaluate a potential sum at a chart point.

    Args:
        chart: Chart holding q and the centers
        potential: Sum of terms (empty means V ≡ 0)
        q: Evaluation point

    Returns:
        Σ_i V_i(q)
    """
    if potential.is_empty:
        return 0.0
    dists = chart.distances(potential.centers, q)
    return float(sum(profile_value(t, d) for t, d in zip(potential.terms, dists)))


def sum_gradient(chart: ManifoldChart, potential: PotentialSum, q) -> np.ndarray:
    """
    Gradient of a potential sum.

    Args:
        chart: Chart holding q and the centers
        potential: Sum of terms (empty means V ≡ 0)
        q: Evaluation point

    Returns:
        Σ_i grad V_i(q)
    """
    grad = np.zeros(chart.dim)
    if potential.is_empty:
        return grad
    q = np.asarray(q, dtype=float)
    dists = chart.distances(potential.centers, q)
    for term, d in zip(potential.terms, dists):
        if d >= term.D or d <= CENTER_TOLERANCE * term.D:
            continue
        slope = potential_profile_derivative(term, d)
        if slope == 0.0:
            continue
        if chart.is_flat:
            grad += slope * (q - term.center) / d
        else:
            grad += slope * grad_distance_from(chart, term.center, q)
    return grad


def validate_sensing_radius(potential: PotentialSum, sensing_radius: Optional[float]):
    """
    Check that every term vanishes beyond the sensing radius.

    Args:
        potential: Sum to check
        sensing_radius: Sensing radius h, or None to skip the check

    Raises:
        PotentialError: If some term has D > h
    """
    if sensing_radius is None:
        return
    for i, term in enumerate(potential.terms):
        if term.D > sensing_radius:
            raise PotentialError(
                f"Potential term {i} has support radius D={term.D} "
                f"exceeding the sensing radius h={sensing_radius}"
            )
    logger.debug(f"All {len(potential)} potential terms lie within sensing radius {sensing_radius:g}")

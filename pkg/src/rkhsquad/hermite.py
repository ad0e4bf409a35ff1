"""Orthonormal probabilists' Hermite polynomials and Gauss-Hermite rules.

Everything here is relative to the standard normal distribution

    mu0(dx) = (2*pi)^(-1/2) * exp(-x^2/2) dx.

The polynomials h_0, h_1, ... are orthonormal in L^2(mu0) and satisfy the
stable three-term recurrence

    h_0(x) = 1,   h_1(x) = x,
    h_{nu+1}(x) = (x*h_nu(x) - sqrt(nu)*h_{nu-1}(x)) / sqrt(nu+1).

The n-point Gauss-Hermite rule for mu0 integrates polynomials of degree
up to 2n-1 exactly.  Nodes are the eigenvalues of the symmetric
tridiagonal Jacobi matrix with zero diagonal and off-diagonal entries
sqrt(1), ..., sqrt(n-1); the weight of node i is the squared first
component of the i-th normalized eigenvector.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (
    EvaluationError,
    NumericalConsistencyError,
    UnsupportedDegreeError,
    UnsupportedSizeError,
)

MAX_DEGREE = 512
MAX_RULE_SIZE = 256

_WEIGHT_SUM_TOL = 1e-13
_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class QuadratureRule1D:
    """Nodes and weights of a quadrature rule for the standard normal measure.

    Invariants checked at construction: strictly increasing nodes, positive
    weights summing to one within 1e-13, and node symmetry about zero
    within 1e-12.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        # copy before freezing so the caller's buffers stay writeable
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or weights.ndim != 1 or nodes.shape != weights.shape:
            raise UnsupportedSizeError("nodes and weights must be 1D arrays of equal length")
        if nodes.size == 0:
            raise UnsupportedSizeError("a quadrature rule needs at least one node")
        if np.any(np.diff(nodes) <= 0):
            raise NumericalConsistencyError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise NumericalConsistencyError("weights must be positive")
        if abs(weights.sum() - 1.0) > _WEIGHT_SUM_TOL:
            raise NumericalConsistencyError(
                f"weights sum to {weights.sum():.17g}, expected 1 within {_WEIGHT_SUM_TOL}"
            )
        if np.max(np.abs(nodes + nodes[::-1])) > _SYMMETRY_TOL:
            raise NumericalConsistencyError("nodes are not symmetric about 0")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.size


def hermite_row(nu_max: int, x: float) -> np.ndarray:
    """Evaluate (h_0(x), ..., h_{nu_max}(x)) in a single recurrence pass.

    Parameters
    ----------
    nu_max : int
        Highest degree, 0 <= nu_max <= 512.
    x : float
        Evaluation point.

    Returns
    -------
    ndarray of shape (nu_max + 1,)
    """
    if nu_max < 0:
        raise UnsupportedDegreeError("degree must be non-negative")
    if nu_max > MAX_DEGREE:
        raise UnsupportedDegreeError(f"degree {nu_max} exceeds the guard {MAX_DEGREE}")
    out = np.empty(nu_max + 1, dtype=float)
    out[0] = 1.0
    if nu_max >= 1:
        out[1] = x
    for nu in range(1, nu_max):
        out[nu + 1] = (x * out[nu] - np.sqrt(nu) * out[nu - 1]) / np.sqrt(nu + 1.0)
    return out


def hermite_normalized(nu: int, x: float) -> float:
    """Value of the degree-nu orthonormal Hermite polynomial at x."""
    return float(hermite_row(nu, x)[nu])


def hermite_table(nu_max: int, x: np.ndarray) -> np.ndarray:
    """Rows h_0..h_{nu_max} evaluated at an array of points.

    Returns an array of shape (nu_max + 1, len(x)); the same recurrence as
    :func:`hermite_row`, vectorized over points.
    """
    if nu_max < 0:
        raise UnsupportedDegreeError("degree must be non-negative")
    if nu_max > MAX_DEGREE:
        raise UnsupportedDegreeError(f"degree {nu_max} exceeds the guard {MAX_DEGREE}")
    x = np.asarray(x, dtype=float)
    out = np.empty((nu_max + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if nu_max >= 1:
        out[1] = x
    for nu in range(1, nu_max):
        out[nu + 1] = (x * out[nu] - np.sqrt(nu) * out[nu - 1]) / np.sqrt(nu + 1.0)
    return out


@lru_cache(maxsize=None)
def gauss_hermite_rule(n: int) -> QuadratureRule1D:
    """The n-point Gauss-Hermite rule for the standard normal measure.

    Exact for polynomials of degree <= 2n-1.  Nodes are the eigenvalues of
    the Jacobi matrix, symmetrized about zero.  Weights are evaluated
    through the Christoffel identity w_i = 1 / sum_{nu<n} h_nu(x_i)^2,
    which equals the squared first component of the i-th normalized
    eigenvector in exact arithmetic but keeps full relative accuracy for
    the extreme nodes, whose weights underflow eigenvector solvers.

    Parameters
    ----------
    n : int
        Number of nodes, 1 <= n <= 256.
    """
    if not 1 <= n <= MAX_RULE_SIZE:
        raise UnsupportedSizeError(f"rule size {n} outside [1, {MAX_RULE_SIZE}]")
    if n == 1:
        return QuadratureRule1D(np.zeros(1), np.ones(1))
    diag = np.zeros(n)
    offdiag = np.sqrt(np.arange(1.0, n))
    try:
        vals = eigh_tridiagonal(diag, offdiag, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise NumericalConsistencyError(
            f"tridiagonal eigensolver failed for n={n}: {exc}"
        ) from exc
    nodes = 0.5 * (vals - vals[::-1])
    table = hermite_table(n - 1, nodes)
    weights = 1.0 / np.sum(table * table, axis=0)
    weights = 0.5 * (weights + weights[::-1])
    weights = weights / weights.sum()
    return QuadratureRule1D(nodes, weights)


def integrate_gh(f: Callable[[float], float], n: int) -> float:
    """Approximate the standard-normal integral of f with the n-point rule.

    Summation runs left to right over the sorted nodes so results are
    bit-reproducible.
    """
    rule = gauss_hermite_rule(n)
    total = 0.0
    for x, w in zip(rule.nodes, rule.weights):
        fx = f(float(x))
        if not np.isfinite(fx):
            raise EvaluationError(f"integrand returned non-finite value {fx!r} at x={x!r}")
        total += w * fx
    return total

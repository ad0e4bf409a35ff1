"""Exact algorithm correspondences between Gaussian and Hermite spaces.

A Gaussian space with shape parameters sigma_j and a Hermite space with
matched base parameters beta_j carry the same integration and
L2-approximation problems up to an explicit constant: any algorithm on one
space has a twin on the other with proportionally identical worst-case
error, and the map preserves evaluation cost exactly.

Integration uses the correspondence

    1 - beta_j = 1 / (1 + 2 sigma_j^2),
    c_j   = (1 + 4 sigma_j^2)^(1/2),
    tau_j = (1 + 2 sigma_j^2)^(1/2),
    e_j   = c_j / tau_j,

and maps a rule with nodes x_i and weights a_i to nodes e*x_i and weights
(prod_j e_j) * exp(-sum_j sigma_j^2 x_ij^2 / (1+2 sigma_j^2)) * a_i; the
error ratio is the Gaussian initial error prod_j (1+4 sigma_j^2)^(-1/4).

Approximation uses

    1 - beta_j = 2 / (1 + (1 + 8 sigma_j^2)^(1/2)),
    c_j = (1 + 8 sigma_j^2)^(1/4),

the weight function phi_c(x) = exp(-sum_j (c_j^2-1) x_j^2 / 4) and the
unitary change of variables

    (Q_c f)(x) = (prod_j c_j)^(1/2) * phi_c(x) * f(c x),

which is an isometry of L2(mu).  A sampling method transfers to nodes
c*x_i with coefficient rows rescaled by (prod_j c_j)^(1/2) phi_c(x_i);
stored in each space's own eigenbasis, this is a table rescaling, not a
quadrature-computed change of basis.  The error ratio is
prod_j (1-beta_j)^(1/2), again the Gaussian initial error.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import DomainError, ShapeMismatchError
from .hermite import gauss_hermite_rule
from .kernels import APPROXIMATION, INTEGRATION, KernelSpec, _check_problem
from .worst_case import (
    MultiIndexSet,
    QuadratureRule,
    SamplingMethod,
    spectral_system,
)


def beta_from_sigma(problem: str, sigma: float) -> float:
    """Base parameter matched to a shape parameter; strictly increasing in sigma."""
    _check_problem(problem)
    if sigma <= 0:
        raise DomainError("shape parameter must be positive")
    s2 = sigma * sigma
    if problem == INTEGRATION:
        return 2.0 * s2 / (1.0 + 2.0 * s2)
    return 1.0 - 2.0 / (1.0 + sqrt(1.0 + 8.0 * s2))


def sigma_from_beta(problem: str, beta: float) -> float:
    """Inverse of :func:`beta_from_sigma`."""
    _check_problem(problem)
    if not 0.0 < beta < 1.0:
        raise DomainError("base parameter must lie strictly inside (0, 1)")
    if problem == INTEGRATION:
        return sqrt(beta / (2.0 * (1.0 - beta)))
    return sqrt(beta / 2.0) / (1.0 - beta)


@dataclass(frozen=True)
class TransferConstants:
    """All per-coordinate constants tying a Gaussian algorithm to its twin."""

    problem: str
    sigma: np.ndarray
    beta: np.ndarray
    c: np.ndarray
    tau: np.ndarray | None
    e: np.ndarray | None
    gauss_prefactor: float

    @classmethod
    def integration(cls, sigma) -> "TransferConstants":
        sigma = _as_sigma(sigma)
        s2 = sigma * sigma
        beta = 2.0 * s2 / (1.0 + 2.0 * s2)
        c = np.sqrt(1.0 + 4.0 * s2)
        tau = np.sqrt(1.0 + 2.0 * s2)
        e = c / tau
        prefactor = float(np.prod((1.0 + 4.0 * s2) ** -0.25))
        return cls(INTEGRATION, sigma, beta, c, tau, e, prefactor)

    @classmethod
    def approximation(cls, sigma) -> "TransferConstants":
        sigma = _as_sigma(sigma)
        s2 = sigma * sigma
        root = np.sqrt(1.0 + 8.0 * s2)
        beta = 1.0 - 2.0 / (1.0 + root)
        c = root**0.5
        prefactor = float(np.prod(np.sqrt(1.0 - beta)))
        return cls(APPROXIMATION, sigma, beta, c, None, None, prefactor)

    @property
    def dimension(self) -> int:
        return self.sigma.size

    def gaussian_spec(self) -> KernelSpec:
        return KernelSpec.gaussian(tuple(self.sigma))

    def hermite_spec(self) -> KernelSpec:
        return KernelSpec.hermite(tuple(self.beta))


def _as_sigma(sigma) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(sigma, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("sigma must be a non-empty 1D sequence")
    if np.any(arr <= 0):
        raise DomainError("shape parameters must be positive")
    arr.flags.writeable = False
    return arr


def phi_c(c, x) -> float:
    """The positive weight exp(-sum_j (c_j^2 - 1) x_j^2 / 4)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if c.shape != x.shape:
        raise ShapeMismatchError("c and x must have the same length")
    return float(np.exp(-np.sum((c * c - 1.0) / 4.0 * x * x)))


def q_c_apply(c, f, x) -> float:
    """(prod c)^(1/2) * phi_c(x) * f(c*x)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if c.shape != x.shape:
        raise ShapeMismatchError("c and x must have the same length")
    return float(np.prod(c)) ** 0.5 * phi_c(c, x) * float(f(c * x))


def q_c_inverse_apply(c, f, x) -> float:
    """(prod c)^(-1/2) * phi_c(x/c)^(-1) * f(x/c)."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if c.shape != x.shape:
        raise ShapeMismatchError("c and x must have the same length")
    y = x / c
    return float(f(y)) / (float(np.prod(c)) ** 0.5 * phi_c(c, y))


def _node_damping(constants: TransferConstants, nodes: np.ndarray) -> np.ndarray:
    """phi_c(tau^{-1} x_i) = exp(-sum_j sigma_j^2 x_ij^2 / (1 + 2 sigma_j^2))."""
    s2 = constants.sigma**2
    return np.exp(-np.sum(s2[None, :] * nodes**2 / (1.0 + 2.0 * s2)[None, :], axis=1))


def transfer_quadrature_to_hermite(rule: QuadratureRule, sigma) -> QuadratureRule:
    """Twin of a Gaussian-space quadrature rule on the matched Hermite space.

    The worst-case errors satisfy
    e(A, Gaussian) = prod_j (1+4 sigma_j^2)^(-1/4) * e(twin, Hermite), and
    the evaluation cost is preserved node by node.
    """
    constants = TransferConstants.integration(sigma)
    if rule.dimension != constants.dimension:
        raise ShapeMismatchError("rule dimension does not match sigma length")
    nodes = rule.nodes * constants.e[None, :]
    weights = float(np.prod(constants.e)) * _node_damping(constants, rule.nodes) * rule.weights
    return QuadratureRule(nodes, weights)


def transfer_quadrature_to_gaussian(rule: QuadratureRule, sigma) -> QuadratureRule:
    """Inverse of :func:`transfer_quadrature_to_hermite`."""
    constants = TransferConstants.integration(sigma)
    if rule.dimension != constants.dimension:
        raise ShapeMismatchError("rule dimension does not match sigma length")
    nodes = rule.nodes / constants.e[None, :]
    weights = rule.weights / (float(np.prod(constants.e)) * _node_damping(constants, nodes))
    return QuadratureRule(nodes, weights)


def spectral_pair(sigma, index_set: MultiIndexSet):
    """Matched Gaussian and Hermite spectral systems sharing one index set."""
    constants = TransferConstants.approximation(sigma)
    gauss = spectral_system(constants.gaussian_spec(), index_set)
    herm = spectral_system(constants.hermite_spec(), index_set)
    return gauss, herm


def _sampling_row_scale(constants: TransferConstants, nodes: np.ndarray) -> np.ndarray:
    c = constants.c
    phi = np.exp(-np.sum((c * c - 1.0)[None, :] / 4.0 * nodes**2, axis=1))
    return float(np.prod(c)) ** 0.5 * phi


def transfer_sampling_to_hermite(method: SamplingMethod, sigma) -> SamplingMethod:
    """Twin of a Gaussian-space sampling method on the matched Hermite space.

    Nodes scale by c_j; coefficient row i rescales by
    (prod c)^(1/2) phi_c(x_i), mapping the Gaussian eigenbasis expansion
    onto the tensor-Hermite expansion index by index.  The errors satisfy
    e(A, Gaussian) = prod_j (1-beta_j)^(1/2) * e(twin, Hermite), up to the
    reported truncation tails.
    """
    constants = TransferConstants.approximation(sigma)
    if method.dimension != constants.dimension:
        raise ShapeMismatchError("method dimension does not match sigma length")
    scale = _sampling_row_scale(constants, method.nodes)
    return SamplingMethod(
        method.nodes * constants.c[None, :],
        method.coeff_table * scale[:, None],
        method.index_set,
    )


def transfer_sampling_to_gaussian(method: SamplingMethod, sigma) -> SamplingMethod:
    """Inverse of :func:`transfer_sampling_to_hermite`."""
    constants = TransferConstants.approximation(sigma)
    if method.dimension != constants.dimension:
        raise ShapeMismatchError("method dimension does not match sigma length")
    nodes = method.nodes / constants.c[None, :]
    scale = _sampling_row_scale(constants, nodes)
    return SamplingMethod(nodes, method.coeff_table / scale[:, None], method.index_set)


def sampling_coeffs_via_quadrature(
    method: SamplingMethod, sigma, n_quad: int = 64
) -> np.ndarray:
    """Quadrature oracle for the Hermite-side coefficient table.

    Evaluates each transferred coefficient function pointwise through the
    inverse change of variables and projects it onto the tensor-Hermite
    basis by tensor Gauss-Hermite quadrature.  Cross-check for the
    rescaling path of :func:`transfer_sampling_to_hermite`; O(n_quad^d).
    """
    constants = TransferConstants.approximation(sigma)
    d = constants.dimension
    gauss_sys = spectral_system(constants.gaussian_spec(), method.index_set)
    rule = gauss_hermite_rule(n_quad)
    grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    wgrid = np.ones(points.shape[0])
    for g in np.meshgrid(*([rule.weights] * d), indexing="ij"):
        wgrid *= g.ravel()
    # b_i(z) = (prod c)^(1/2) phi_c(x_i) * Q_c^{-1} a_i (z), evaluated
    # pointwise through the inverse change of variables.
    pre_images = points / constants.c[None, :]
    E_at = gauss_sys.eigenfunction_matrix(pre_images)  # [nu, point]
    a_vals = method.coeff_table @ E_at  # [i, point]
    node_scale = _sampling_row_scale(constants, method.nodes)
    inv_scale = 1.0 / _sampling_row_scale(constants, pre_images)
    b_vals = node_scale[:, None] * a_vals * inv_scale[None, :]
    herm_sys = spectral_system(constants.hermite_spec(), method.index_set)
    H_at = herm_sys.eigenfunction_matrix(points)  # [m, point]
    return b_vals @ (H_at * wgrid[None, :]).T

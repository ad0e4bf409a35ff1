"""Convergence studies: decay exponents, information complexity, curves.

The decay of an error-versus-cost curve is estimated by least squares of
ln(error) against ln(cost) over the largest-cost half of the data (at
least three points), which is robust to pre-asymptotic transients; the
fit quality is reported as r^2.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .algorithms import (
    KernelGenerator,
    gh_error_on_space,
    integration_error_lower_bound,
    level_choice_for_eps,
    mdm_build,
    mdm_wce,
    tensor_rule_for_eps,
)
from .errors import DomainError, InsufficientDataError
from .hermite import gauss_hermite_rule
from .kernels import GAUSSIAN, HERMITE, INTEGRATION, KernelSpec, initial_error
from .transference import beta_from_sigma
from .worst_case import CostModel, tensor_wce_integration

THREAD_ENV_VAR = "RKHS_THREADS"


def thread_cap() -> int:
    """Worker cap for independent experiment points (RKHS_THREADS, default 1)."""
    raw = os.environ.get(THREAD_ENV_VAR, "")
    try:
        cap = int(raw)
    except ValueError:
        return 1
    return max(1, cap)


def _map_points(fn, items):
    cap = thread_cap()
    if cap <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class DecayEstimate:
    """Fitted polynomial decay rate of an error-versus-cost curve."""

    exponent: float
    intercept: float
    points_used: int
    r_squared: float


def decay_estimate(pairs) -> DecayEstimate:
    """Least-squares decay exponent of ln(error) against ln(cost).

    Fits the largest-cost half of the curve (never fewer than three
    points).  Errors must be positive; the exponent is the negated slope.
    """
    pairs = [(float(c), float(e)) for c, e in pairs]
    if len(pairs) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(pairs)}")
    if any(c <= 0 for c, _ in pairs):
        raise DomainError("costs must be positive")
    if any(e <= 0 for _, e in pairs):
        raise DomainError("errors must be positive")
    pairs.sort(key=lambda p: p[0])
    k = max(3, (len(pairs) + 1) // 2)
    window = pairs[-k:]
    x = np.log([c for c, _ in window])
    y = np.log([e for _, e in window])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res <= 1e-24 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return DecayEstimate(float(-slope), float(intercept), k, r2)


def empirical_info_complexity(curve, eps: float, e0: float, criterion: str = "absolute") -> float:
    """Smallest recorded cost reaching error <= eps (or eps * e0, normalized).

    Returns ``math.inf`` when no curve point reaches the target.
    """
    if criterion not in ("absolute", "normalized"):
        raise DomainError(f"criterion must be 'absolute' or 'normalized', got {criterion!r}")
    if not curve:
        raise InsufficientDataError("empty curve")
    target = eps if criterion == "absolute" else eps * e0
    costs = [float(c) for c, e in curve if float(e) <= target]
    return min(costs) if costs else math.inf


def fit_stretched_exponent(ns, errors, p_grid=None):
    """Best exponent p for the model error ~ C * exp(-c * n^p).

    Deterministic grid search: for each candidate p, ordinary least
    squares of ln(error) on n^p; returns (p, c, ln C) of the smallest
    residual.
    """
    ns = np.asarray(ns, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        raise DomainError("errors must be positive")
    if p_grid is None:
        p_grid = np.arange(0.10, 1.2001, 0.005)
    y = np.log(errors)
    best = None
    for p in p_grid:
        x = ns**p
        slope, intercept = np.polyfit(x, y, 1)
        res = float(np.sum((slope * x + intercept - y) ** 2))
        if best is None or res < best[0]:
            best = (res, float(p), float(-slope), float(intercept))
    return best[1], best[2], best[3]


# ---------------------------------------------------------------------------
# experiment curves (CSV row producers)


def univariate_decay_curve(space: str, param: float, n_max: int):
    """Rows (n, error, lower_bound, rate_fit) for the n-point rules on one space.

    ``error`` is the worst-case integration error of the plain n-point
    Gauss-Hermite rule; ``lower_bound`` the universal minimal-error lower
    bound; ``rate_fit`` the least-squares slope of ln(error) against n
    over the whole curve (repeated on every row).
    """
    if space not in (GAUSSIAN, HERMITE):
        raise DomainError(f"space must be 'gaussian' or 'hermite', got {space!r}")
    if n_max < 1:
        raise DomainError("n_max must be positive")
    spec = KernelSpec(space, (param,))
    errors = _map_points(lambda n: gh_error_on_space(n, spec)[0], range(1, n_max + 1))
    lower = [integration_error_lower_bound(spec, n) for n in range(1, n_max + 1)]
    slope = float(np.polyfit(np.arange(1, n_max + 1), np.log(errors), 1)[0]) if n_max >= 2 else 0.0
    return [
        (n, errors[n - 1], lower[n - 1], slope)
        for n in range(1, n_max + 1)
    ]


def tensor_decay_curve(sigma, eps_list, space: str = GAUSSIAN):
    """Rows (eps, n_choice, size, error) for the eps-driven tensor rules.

    The error column is the worst-case integration error of the built
    rule, evaluated through the factorized product identity (the Gaussian
    side through the exact transference ratio), so large grids never
    materialize a dense Gram matrix.
    """
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    herm_spec = KernelSpec.hermite(tuple(beta_from_sigma(INTEGRATION, s) for s in sigma))
    ratio = initial_error(KernelSpec.gaussian(tuple(sigma)), INTEGRATION)

    def point(eps):
        ns = level_choice_for_eps(eps, sigma)
        rule = tensor_rule_for_eps(eps, sigma, space)
        factors = [gauss_hermite_rule(int(n)) for n in ns]
        err = tensor_wce_integration(factors, herm_spec)
        if space == GAUSSIAN:
            err *= ratio
        return eps, ";".join(str(int(n)) for n in ns), rule.n, err

    return _map_points(point, [float(e) for e in eps_list])


def mdm_run_curve(gen: KernelGenerator, budgets, model: CostModel, trunc: int = 2048,
                  max_coord: int = 512, pool_size: int = 2048):
    """Rows (cost, error, tail_bound) for greedy MDM plans at several budgets."""
    rows = []
    for budget in budgets:
        plan = mdm_build(gen, float(budget), model, max_coord=max_coord, pool_size=pool_size)
        value, tail = mdm_wce(plan, gen, trunc)
        rows.append((plan.cost, value, tail))
    return rows

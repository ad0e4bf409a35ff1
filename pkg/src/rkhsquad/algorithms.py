"""Constructive algorithm families with cost-aware planning.

Univariate Gauss-Hermite rules, full tensor rules with an accuracy-driven
per-coordinate level choice, Smolyak sparse-grid combinations, the
anchored decomposition of functions of many variables, and multivariate
decomposition methods (MDMs) built from all of the above.

The tensor level choice: with zeta_j = ln(1 + 1/(2 sigma_j^2)) and
n_j = ceil(ln(d/eps) / zeta_j), the construction guarantees
sum_j exp(-n_j zeta_j) <= eps, the bound that drives the accuracy of the
product rule in the normalized sense.

The MDM approximates the integral of f as f(0) plus, for a finite family
of active coordinate sets u, a Smolyak estimate of the integral of the
anchored component

    f_u(x) = sum_{v subset u} (-1)^(|u|-|v|) f(x_v, 0),

flattened into a single quadrature rule over anchored points.  Set
selection and per-set budgets follow a deterministic greedy scheme scored
by the product surrogate prod_{j in u} beta_j: the candidate upgrade with
the best predicted error decrease per unit cost is granted until the cost
budget is exhausted.
"""

from __future__ import annotations

import heapq
import json
import re
from dataclasses import dataclass
from math import ceil, exp, expm1, inf, log, prod, sqrt

import numpy as np

from .errors import (
    BudgetError,
    DomainError,
    NumericalConsistencyError,
    ShapeMismatchError,
)
from .hermite import gauss_hermite_rule
from .kernels import GAUSSIAN, HERMITE, INTEGRATION, KernelSpec
from .transference import (
    beta_from_sigma,
    transfer_quadrature_to_gaussian,
    transfer_quadrature_to_hermite,
)
from .worst_case import CostModel, QuadratureRule, hermite_wce_integration_spectral, rule_cost

TENSOR_BUDGET = 10**6
ANCHOR_SET_GUARD = 20

_BLOCK_CHUNK = 2**21  # max entries of one pairwise block slice


# ---------------------------------------------------------------------------
# univariate building blocks


def gh_rule_on_space(n: int, spec: KernelSpec) -> QuadratureRule:
    """The n-point Gauss-Hermite rule packaged for a univariate space."""
    if spec.dimension != 1:
        raise ShapeMismatchError("gh_rule_on_space expects a univariate kernel")
    rule = gauss_hermite_rule(n)
    return QuadratureRule(rule.nodes[:, None], rule.weights)


def gh_error_on_space(n: int, spec: KernelSpec):
    """Worst-case integration error of the n-point Gauss-Hermite rule.

    Computed through the eigen-expansion on the Hermite side, which stays
    accurate far below the cancellation floor of the Gram identity; the
    Gaussian case goes through the exact transference identity (twin rule
    error times the Gaussian initial error).  Returns ``(value, tail)``.
    """
    if spec.dimension != 1:
        raise ShapeMismatchError("gh_error_on_space expects a univariate kernel")
    rule = gh_rule_on_space(n, spec)
    if spec.is_gaussian:
        sigma = spec.params[0]
        beta = beta_from_sigma(INTEGRATION, sigma)
        prefactor = (1.0 + 4.0 * sigma * sigma) ** -0.25
        twin = transfer_quadrature_to_hermite(rule, [sigma])
        value, tail = hermite_wce_integration_spectral(twin.nodes[:, 0], twin.weights, beta)
        return prefactor * value, prefactor * tail
    return hermite_wce_integration_spectral(rule.nodes[:, 0], rule.weights, spec.params[0])


def integration_error_lower_bound(spec: KernelSpec, n: int) -> float:
    """Universal lower bound on the n-th minimal integration error.

    Hermite space: (1/2) (beta/2)^(2n) (n+1)^(-2).  Gaussian space: the
    same bound at the matched base parameter, scaled by the Gaussian
    initial error.
    """
    if spec.dimension != 1:
        raise ShapeMismatchError("univariate bound")
    if spec.is_gaussian:
        sigma = spec.params[0]
        beta = beta_from_sigma(INTEGRATION, sigma)
        prefactor = (1.0 + 4.0 * sigma * sigma) ** -0.25
    else:
        beta = spec.params[0]
        prefactor = 1.0
    return prefactor * 0.5 * (beta / 2.0) ** (2 * n) * (n + 1) ** -2


# ---------------------------------------------------------------------------
# tensor rules


def tensor_rule(factors) -> QuadratureRule:
    """Full product grid of univariate rules; weights multiply."""
    factors = list(factors)
    if not factors:
        raise ShapeMismatchError("need at least one factor")
    size = prod(f.n for f in factors)
    if size > TENSOR_BUDGET:
        raise BudgetError(f"tensor grid of {size} nodes exceeds the budget {TENSOR_BUDGET}")
    node_grids = np.meshgrid(*[f.nodes for f in factors], indexing="ij")
    nodes = np.stack([g.ravel() for g in node_grids], axis=1)
    weights = np.ones(size)
    for g in np.meshgrid(*[f.weights for f in factors], indexing="ij"):
        weights *= g.ravel()
    return QuadratureRule(nodes, weights)


def level_choice_for_eps(eps: float, sigma) -> np.ndarray:
    """Sizes n_j = ceil(ln(d/eps)/zeta_j) with zeta_j = ln(1 + 1/(2 sigma_j^2))."""
    if not 0.0 < eps < 1.0:
        raise DomainError("eps must lie strictly inside (0, 1)")
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if np.any(sigma <= 0):
        raise DomainError("shape parameters must be positive")
    d = sigma.size
    zeta = np.log1p(1.0 / (2.0 * sigma * sigma))
    return np.array([max(1, ceil(log(d / eps) / z)) for z in zeta], dtype=int)


def tensor_rule_for_eps(eps: float, sigma, space: str = GAUSSIAN) -> QuadratureRule:
    """Tensor Gauss-Hermite rule sized for target accuracy eps.

    The constructed sizes guarantee sum_j exp(-n_j zeta_j) <= eps.  The
    base product rule is natural on the Hermite space matched to sigma;
    for ``space="gaussian"`` it is mapped through the integration
    transference (cost preserved, error scaled by the initial error).
    """
    ns = level_choice_for_eps(eps, sigma)
    size = prod(int(n) for n in ns)
    if size > TENSOR_BUDGET:
        worst = int(np.argmax(ns))
        raise BudgetError(
            f"tensor grid of {size} nodes exceeds {TENSOR_BUDGET}; "
            f"largest factor n_{worst + 1} = {ns[worst]}"
        )
    rule = tensor_rule([gauss_hermite_rule(int(n)) for n in ns])
    if space == GAUSSIAN:
        return transfer_quadrature_to_gaussian(rule, sigma)
    if space == HERMITE:
        return rule
    raise DomainError(f"unknown space {space!r}")


# ---------------------------------------------------------------------------
# Smolyak combinations


@dataclass(frozen=True)
class SmolyakLevels:
    """Strictly increasing univariate size schedule plus a combination level."""

    schedule: tuple
    level: int

    def __post_init__(self):
        schedule = tuple(int(m) for m in self.schedule)
        if not schedule or schedule[0] < 1:
            raise DomainError("schedule must start at a positive size")
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise DomainError("schedule must be strictly increasing")
        if self.level < 1:
            raise DomainError("level must be positive")
        if self.level > len(schedule):
            raise DomainError("level exceeds the schedule length")
        object.__setattr__(self, "schedule", schedule)

    @classmethod
    def unit(cls, level: int) -> "SmolyakLevels":
        """The one-extra-point-per-level schedule m_i = i."""
        return cls(tuple(range(1, level + 1)), level)


def _difference_block(schedule, k):
    """Signed node/weight list of B_{m_k} - B_{m_{k-1}} (with B_{m_0} = 0)."""
    hi = gauss_hermite_rule(schedule[k - 1])
    entries: dict[float, float] = {}
    for x, w in zip(hi.nodes, hi.weights):
        entries[float(x)] = entries.get(float(x), 0.0) + float(w)
    if k >= 2:
        lo = gauss_hermite_rule(schedule[k - 2])
        for x, w in zip(lo.nodes, lo.weights):
            entries[float(x)] = entries.get(float(x), 0.0) - float(w)
    return list(entries.items())


_LOCAL_SMOLYAK_CACHE: dict = {}


def _smolyak_local(size: int, schedule, level: int) -> dict:
    """Combination rule over ``size`` local coordinates, merged exactly.

    Keys are length-``size`` value tuples; identical for every coordinate
    set of that size, so results are cached by (size, schedule, level).
    """
    cache_key = (size, schedule, level)
    hit = _LOCAL_SMOLYAK_CACHE.get(cache_key)
    if hit is not None:
        return hit
    blocks = {k: _difference_block(schedule, k) for k in range(1, level - size + 2)}
    acc: dict[tuple, float] = {}
    point = [0.0] * size

    def recurse(pos, remaining, weight):
        if pos == size:
            key = tuple(point)
            acc[key] = acc.get(key, 0.0) + weight
            return
        slots_left = size - pos - 1
        for k in range(1, remaining - slots_left + 1):
            for x, w in blocks[k]:
                point[pos] = x
                recurse(pos + 1, remaining - k, weight * w)
            point[pos] = 0.0

    recurse(0, level, 1.0)
    out = {k: v for k, v in acc.items() if v != 0.0}
    _LOCAL_SMOLYAK_CACHE[cache_key] = out
    return out


def _embed_local(local: dict, u, dim: int):
    """Materialize local (values-on-u, weight) entries as ambient arrays."""
    items = sorted(local.items())
    nodes = np.zeros((len(items), dim))
    cols = list(u)
    for i, (key, _) in enumerate(items):
        nodes[i, cols] = key
    weights = np.array([v for _, v in items], dtype=float)
    return nodes, weights


def smolyak_rule(u, levels: SmolyakLevels, dim: int | None = None) -> QuadratureRule:
    """Sparse-grid rule over the coordinates in u, flattened and merged.

    Standard combination: the sum over multi-indices i >= 1 with
    |i|_1 <= level of tensor products of univariate difference rules.
    Duplicate nodes merge by exact coordinate equality (all node values
    come from identical univariate rules, so collisions are exact) and
    exactly cancelled weights are dropped.  The returned rule lives in
    ``dim`` ambient coordinates (default max(u) + 1) with inactive
    coordinates pinned at zero.
    """
    u = tuple(sorted(int(j) for j in u))
    if len(u) == 0 or len(set(u)) != len(u) or u[0] < 0:
        raise DomainError("u must be a non-empty set of distinct coordinate indices")
    q = levels.level
    if q < len(u):
        raise DomainError(f"level {q} below |u| = {len(u)}")
    if dim is None:
        dim = u[-1] + 1
    if dim <= u[-1]:
        raise ShapeMismatchError("ambient dimension too small for u")
    local = _smolyak_local(len(u), levels.schedule, q)
    if len(local) > TENSOR_BUDGET:
        raise BudgetError(f"sparse grid of {len(local)} nodes exceeds {TENSOR_BUDGET}")
    nodes, weights = _embed_local(local, u, dim)
    return QuadratureRule(nodes, weights)


# ---------------------------------------------------------------------------
# anchored decomposition


def anchored_component_eval(f, u, x) -> float:
    """Value of the anchored component f_u at a point supported on u.

    The signed sum over the 2^|u| anchor restrictions; constants and any
    dependence on coordinates outside u cancel exactly.
    """
    u = tuple(sorted(int(j) for j in u))
    if len(u) > ANCHOR_SET_GUARD:
        raise BudgetError(f"|u| = {len(u)} exceeds the guard {ANCHOR_SET_GUARD}")
    x = np.asarray(x, dtype=float)
    active = set(u)
    for j, v in enumerate(x):
        if v != 0.0 and j not in active:
            raise DomainError(f"point has non-zero coordinate {j} outside u")
    if not u:
        return float(f(x))
    total = 0.0
    for mask in range(1 << len(u)):
        point = np.zeros_like(x)
        bits = 0
        for pos, j in enumerate(u):
            if mask >> pos & 1:
                point[j] = x[j]
                bits += 1
        total += (-1) ** (len(u) - bits) * float(f(point))
    return total


def _anchored_local(local: dict, size: int) -> dict:
    """Apply anchoring signs to a local rule: f_u evaluations to f evaluations."""
    acc: dict[tuple, float] = {}
    masks = []
    for mask in range(1 << size):
        pattern = tuple(mask >> pos & 1 for pos in range(size))
        sign = (-1) ** (size - sum(pattern))
        masks.append((pattern, sign))
    for key, w in local.items():
        for pattern, sign in masks:
            masked = tuple(v if b else 0.0 for v, b in zip(key, pattern))
            acc[masked] = acc.get(masked, 0.0) + sign * w
    return {k: v for k, v in acc.items() if v != 0.0}


_LOCAL_COMPONENT_CACHE: dict = {}


def _component_local(size: int, level: int) -> dict:
    """Anchored-flattened Smolyak component in local coordinates, cached.

    Identical for every coordinate set of one size (unit schedule), so the
    greedy planner shares it across all pooled candidates.
    """
    key = (size, level)
    hit = _LOCAL_COMPONENT_CACHE.get(key)
    if hit is None:
        schedule = tuple(range(1, level + 1))
        hit = _anchored_local(_smolyak_local(size, schedule, level), size)
        _LOCAL_COMPONENT_CACHE[key] = hit
    return hit


# ---------------------------------------------------------------------------
# parameter generators for infinitely many coordinates


@dataclass(frozen=True)
class ParamRule:
    """Coordinate-parameter generator from the restricted grammar.

    ``power``: value(j) = j^(-a); ``geometric``: value(j) = a^j with
    0 < a < 1.  Tail sums of integer powers of the values carry closed or
    integral-comparison upper bounds, used for rigorous truncation
    control.
    """

    kind: str
    a: float

    def __post_init__(self):
        if self.kind not in ("power", "geometric"):
            raise DomainError(f"unknown rule kind {self.kind!r}")
        if self.kind == "power" and self.a <= 0:
            raise DomainError("power exponent must be positive")
        if self.kind == "geometric" and not 0.0 < self.a < 1.0:
            raise DomainError("geometric ratio must lie strictly inside (0, 1)")

    @classmethod
    def parse(cls, text: str) -> "ParamRule":
        text = text.strip()
        m = re.fullmatch(r"j\^(-?\d+(?:\.\d+)?)", text)
        if m:
            p = float(m.group(1))
            if p >= 0:
                raise DomainError("power rule must decay: use j^-p with p > 0")
            return cls("power", -p)
        m = re.fullmatch(r"(\d*\.?\d+(?:e-?\d+)?)\^j", text)
        if m:
            return cls("geometric", float(m.group(1)))
        raise DomainError(f"cannot parse rule {text!r}; expected 'j^-p' or 'r^j'")

    def value(self, j: int) -> float:
        if j < 1:
            raise DomainError("coordinate index is 1-based")
        if self.kind == "power":
            return float(j) ** -self.a
        return self.a**j

    def values(self, d: int) -> np.ndarray:
        return np.array([self.value(j) for j in range(1, d + 1)])

    def tail_power_sum(self, start: int, power: float) -> float:
        """Rigorous upper bound for sum_{j >= start} value(j)^power."""
        if start < 1:
            raise DomainError("start is 1-based")
        if self.kind == "geometric":
            r = self.a**power
            return r**start / (1.0 - r)
        q = self.a * power
        if q <= 1.0:
            raise DomainError(f"tail sum diverges: power-rule exponent {q} <= 1")
        return float(start) ** -q + float(start) ** (1.0 - q) / (q - 1.0)


@dataclass(frozen=True)
class KernelGenerator:
    """Infinite-variate tensor kernel described by a parameter rule.

    ``gaussian``: sigma_j from the rule.  ``hermite``: beta_j from the
    rule.  ``hermite_twin``: the Hermite space matched to a Gaussian
    sigma rule through the integration correspondence, on which
    worst-case errors equal the normalized errors of the transferred
    Gaussian algorithms.
    """

    family: str
    rule: ParamRule

    def __post_init__(self):
        if self.family not in (GAUSSIAN, HERMITE, "hermite_twin"):
            raise DomainError(f"unknown generator family {self.family!r}")
        if self.family in (GAUSSIAN, "hermite_twin"):
            if self.rule.kind == "power" and 2 * self.rule.a <= 1:
                raise DomainError("sigma_j^2 must be summable: need p > 1/2 in j^-p")
        elif self.rule.kind == "power" and self.rule.a <= 1:
            raise DomainError("beta_j must be summable: need p > 1 in j^-p")

    @classmethod
    def gaussian(cls, rule: ParamRule) -> "KernelGenerator":
        return cls(GAUSSIAN, rule)

    @classmethod
    def hermite(cls, rule: ParamRule) -> "KernelGenerator":
        return cls(HERMITE, rule)

    @classmethod
    def hermite_twin_of_gaussian(cls, rule: ParamRule) -> "KernelGenerator":
        return cls("hermite_twin", rule)

    @property
    def measured_family(self) -> str:
        return GAUSSIAN if self.family == GAUSSIAN else HERMITE

    def params(self, d: int) -> np.ndarray:
        raw = self.rule.values(d)
        if self.family == GAUSSIAN:
            return raw
        if self.family == "hermite_twin":
            s2 = raw * raw
            return 2.0 * s2 / (1.0 + 2.0 * s2)
        if np.any(raw >= 1.0):
            raise DomainError("hermite rule produced beta >= 1")
        return raw

    def spec(self, d: int) -> KernelSpec:
        return KernelSpec(self.measured_family, tuple(self.params(d)))

    def score_beta(self, j: int) -> float:
        """Base parameter feeding the greedy surrogate score."""
        if self.family == HERMITE:
            return self.rule.value(j)
        return beta_from_sigma(INTEGRATION, self.rule.value(j))

    def param_tail_sq_bound(self, start: int) -> float:
        """Upper bound for the tail sum of squared parameters from ``start`` on."""
        if self.family in (GAUSSIAN, HERMITE):
            return self.rule.tail_power_sum(start, 2.0)
        # beta_j <= 2 sigma_j^2, hence beta_j^2 <= 4 sigma_j^4
        return 4.0 * self.rule.tail_power_sum(start, 4.0)

    def sigma_tail_sq_bound(self, start: int) -> float:
        if self.family == HERMITE:
            raise DomainError("no sigma sequence behind a plain Hermite generator")
        return self.rule.tail_power_sum(start, 2.0)


# ---------------------------------------------------------------------------
# multivariate decomposition methods


@dataclass(frozen=True)
class MdmPlan:
    """A finite family of active sets with budgets and the flattened rule.

    ``budgets`` counts the function evaluations of each per-set sub-rule
    after anchored flattening; ``levels`` keeps the per-set Smolyak levels
    for the component-wise evaluation path (in-memory only, not part of
    the JSON contract).
    """

    active_sets: tuple
    budgets: tuple
    flattened: QuadratureRule
    cost: float
    levels: tuple | None = None
    dedupe_anchor: bool = True

    def to_json(self) -> dict:
        return {
            "active_sets": [list(u) for u in self.active_sets],
            "budgets": list(self.budgets),
            "flattened": self.flattened.to_json(),
            "cost": self.cost,
        }

    @classmethod
    def from_json(cls, obj) -> "MdmPlan":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            tuple(tuple(u) for u in obj["active_sets"]),
            tuple(obj["budgets"]),
            QuadratureRule.from_json(obj["flattened"]),
            float(obj["cost"]),
            None,
        )


def assemble_mdm_plan(active_levels, model: CostModel, dedupe_anchor: bool = True) -> MdmPlan:
    """Build an MDM plan from explicit per-set Smolyak levels.

    ``active_levels`` maps coordinate sets (0-based tuples) to combination
    levels.  The flattened rule starts with the anchor evaluation f(0) of
    weight one; each set contributes its anchored-flattened Smolyak rule.
    With ``dedupe_anchor`` the anchor rows of all components merge into a
    single evaluation, otherwise each occurrence is charged separately.
    """
    normalized = {tuple(sorted(int(j) for j in u)): int(q) for u, q in active_levels.items()}
    if len(normalized) != len(active_levels):
        raise DomainError("duplicate active sets")
    contributing = [
        (u, normalized[u], _component_local(len(u), normalized[u]))
        for u in sorted(normalized)
        if _component_local(len(u), normalized[u])  # empty: every term cancelled
    ]
    dim = max((u[-1] + 1 for u, _, _ in contributing), default=1)

    node_blocks = [np.zeros((1, dim))]
    weight_blocks = [np.ones(1)]
    anchor_weight_extra = 0.0
    sets = []
    budgets = []
    levels = []
    for u, q, comp in contributing:
        sets.append(u)
        budgets.append(len(comp))
        levels.append(q)
        local_anchor = (0.0,) * len(u)
        if dedupe_anchor and local_anchor in comp:
            anchor_weight_extra += comp[local_anchor]
            comp = {k: v for k, v in comp.items() if k != local_anchor}
        if comp:
            nodes, ws = _embed_local(comp, u, dim)
            node_blocks.append(nodes)
            weight_blocks.append(ws)
    weight_blocks[0][0] += anchor_weight_extra
    flattened = QuadratureRule(np.vstack(node_blocks), np.concatenate(weight_blocks))
    cost = rule_cost(flattened, model)
    return MdmPlan(tuple(sets), tuple(budgets), flattened, cost, tuple(levels), dedupe_anchor)


def _subset_pool(betas, max_coord: int, pool_size: int):
    """Non-empty subsets of {0..max_coord-1} by decreasing product score.

    Children of a sorted tuple u = (.., last): append last+1, or shift
    last up by one; every subset is reached exactly once from (0,).
    """
    heap = [(-betas[0], (0,))]
    out = []
    while heap and len(out) < pool_size:
        neg, u = heapq.heappop(heap)
        out.append((u, -neg))
        last = u[-1]
        if last + 1 < max_coord:
            heapq.heappush(heap, (neg * betas[last + 1], u + (last + 1,)))
            shifted = u[:-1] + (last + 1,)
            if len(u) == 1 or shifted[-1] > u[-2]:
                heapq.heappush(heap, (neg / betas[last] * betas[last + 1], shifted))
    return out


def mdm_build(
    gen: KernelGenerator,
    budget: float,
    model: CostModel,
    *,
    max_coord: int = 512,
    pool_size: int = 2048,
    dedupe_anchor: bool = True,
) -> MdmPlan:
    """Greedy cost-aware MDM plan within an evaluation-cost budget.

    Candidate sets are the ``pool_size`` best product-surrogate scores
    over coordinates below ``max_coord``.  Each greedy step grants one
    more Smolyak level to the candidate with the best predicted error
    decrease per unit of exact flattened cost; a candidate that no longer
    fits the remaining budget is dropped for good (costs only grow).
    Ties prefer the lexicographically smaller set.  The anchor evaluation
    is always included and charged dollar(0).
    """
    anchor_cost = model.charge(0)
    if budget < anchor_cost:
        raise BudgetError(f"budget {budget} below the anchor evaluation cost {anchor_cost}")
    betas = [gen.score_beta(j) for j in range(1, max_coord + 1)]
    pool = _subset_pool(betas, max_coord, pool_size)

    cost_cache: dict[tuple, float] = {}

    def comp_cost(u: tuple, q: int) -> float:
        # the anchored component is size-generic, hence so is its cost
        key = (len(u), q)
        if key not in cost_cache:
            comp = _component_local(len(u), q)
            cost_cache[key] = sum(
                model.charge(sum(1 for v in point if v != 0.0)) for point in comp
            )
        return cost_cache[key]

    remaining = budget - anchor_cost
    chosen: dict[tuple, int] = {}
    options = []

    def push(u, q, dcost, score, beta_u, dpe):
        # a free upgrade (odd rules reuse the anchor node) is always worth taking
        ratio = inf if dcost <= 0 else dpe / dcost
        heapq.heappush(options, (-ratio, u, q, dcost, score, beta_u))

    for u, score in pool:
        beta_u = max(betas[c] for c in u)
        q0 = len(u) + 1
        push(u, q0, comp_cost(u, q0), score, beta_u, score * (1.0 - beta_u))

    while options:
        _, u, q, dcost, score, beta_u = heapq.heappop(options)
        if dcost > remaining:
            continue
        remaining -= dcost
        chosen[u] = q
        nxt_cost = comp_cost(u, q + 1) - comp_cost(u, q)
        dpe = score * beta_u ** (q - len(u)) * (1.0 - beta_u)
        push(u, q + 1, nxt_cost, score, beta_u, dpe)

    plan = assemble_mdm_plan(chosen, model, dedupe_anchor)
    if plan.cost > budget:
        raise NumericalConsistencyError(f"assembled cost {plan.cost} exceeds budget {budget}")
    return plan


def mdm_apply(plan: MdmPlan, f, path: str = "flattened") -> float:
    """Apply the MDM to a function, by the flattened rule or component-wise."""
    if path == "flattened":
        return plan.flattened.apply(f)
    if path != "components":
        raise DomainError(f"unknown path {path!r}")
    if plan.levels is None:
        raise DomainError("component path needs the in-memory plan (levels lost in JSON)")
    dim = plan.flattened.dimension
    total = float(f(np.zeros(dim)))
    for u, q in zip(plan.active_sets, plan.levels):
        rule = smolyak_rule(u, SmolyakLevels.unit(q), dim)
        total += rule.apply(lambda row, u=u: anchored_component_eval(f, u, row))
    return total


# -- exact worst-case error of the flattened rule on the infinite-variate space


def _group_by_support(rule: QuadratureRule):
    groups: dict[tuple, list] = {}
    for i, row in enumerate(rule.nodes):
        supp = tuple(np.nonzero(row)[0].tolist())
        groups.setdefault(supp, []).append(i)
    out = []
    for supp in sorted(groups):
        idx = np.array(groups[supp], dtype=int)
        out.append((supp, rule.nodes[idx], rule.weights[idx]))
    return out


def _hermite_ratio(beta: float, x, y):
    """k_beta(x, y) / k_beta(0, 0): the exponential part of the closed form."""
    b2 = beta * beta
    return np.exp(-(b2 * (x * x + y * y) - 2.0 * beta * x * y) / (2.0 * (1.0 - b2)))


def _pairwise_quadratic(groups, params, family: str) -> float:
    """w^T K w over support groups; products run over active coordinates only."""
    total = 0.0
    for a, (supp_a, nodes_a, w_a) in enumerate(groups):
        for b in range(a, len(groups)):
            supp_b, nodes_b, w_b = groups[b]
            union = sorted(set(supp_a) | set(supp_b))
            n_a, n_b = nodes_a.shape[0], nodes_b.shape[0]
            step = max(1, _BLOCK_CHUNK // max(n_b, 1))
            contrib = 0.0
            for lo in range(0, n_a, step):
                hi = min(lo + step, n_a)
                block = np.ones((hi - lo, n_b))
                for c in union:
                    xa = nodes_a[lo:hi, c][:, None]
                    xb = nodes_b[:, c][None, :]
                    if family == GAUSSIAN:
                        block *= np.exp(-(params[c] ** 2) * (xa - xb) ** 2)
                    else:
                        block *= _hermite_ratio(params[c], xa, xb)
                contrib += float(w_a[lo:hi] @ block @ w_b)
            total += contrib if a == b else 2.0 * contrib
    return total


def mdm_wce(plan: MdmPlan, gen: KernelGenerator, trunc: int = 2048):
    """Worst-case integration error of the flattened rule, with tail control.

    The value uses exact prefix products over the first ``trunc``
    coordinates; the effect of all later coordinates (where every node
    sits at the anchor) is bounded rigorously from the generator's tail
    sums.  Returns ``(value, tail_bound)``.
    """
    rule = plan.flattened
    if rule.dimension > trunc:
        raise ShapeMismatchError(
            f"plan touches coordinate {rule.dimension - 1}, beyond trunc = {trunc}"
        )
    all_params = gen.params(trunc)
    groups = _group_by_support(rule)
    w = rule.weights
    wsum = float(w.sum())

    if gen.measured_family == HERMITE:
        beta = all_params
        g0 = exp(-0.5 * float(np.sum(np.log1p(-beta * beta))))
        quad = _pairwise_quadratic(groups, beta, HERMITE)
        e2 = 1.0 - 2.0 * wsum + g0 * quad
        s_tail = gen.param_tail_sq_bound(trunc + 1)
        beta_next = beta[-1]  # rules are non-increasing in j
        delta = expm1(s_tail / (2.0 * (1.0 - beta_next * beta_next))) * abs(g0 * quad)
    else:
        sigma = all_params
        s2 = sigma * sigma
        di = float(np.prod((1.0 + 4.0 * s2) ** -0.5))
        m0 = float(np.prod((1.0 + 2.0 * s2) ** -0.5))
        m_active = np.ones(rule.n)
        for c in range(rule.dimension):
            col = rule.nodes[:, c]
            m_active *= np.exp(-s2[c] * col * col / (1.0 + 2.0 * s2[c]))
        m_vec = m0 * m_active
        quad = _pairwise_quadratic(groups, sigma, GAUSSIAN)
        e2 = di - 2.0 * float(w @ m_vec) + quad
        s_tail = gen.sigma_tail_sq_bound(trunc + 1)
        delta = di * -expm1(-2.0 * s_tail) + 2.0 * -expm1(-s_tail) * float(
            np.abs(w) @ m_vec
        )

    scale = max(1.0, float(np.abs(w).sum()) ** 2)
    if e2 < -1e-10 * scale:
        raise NumericalConsistencyError(f"squared error {e2:.3e} badly negative")
    e2 = max(e2, 0.0)
    value = sqrt(e2)
    upper = sqrt(e2 + delta)
    lower = sqrt(max(e2 - delta, 0.0))
    return value, max(upper - value, value - lower)

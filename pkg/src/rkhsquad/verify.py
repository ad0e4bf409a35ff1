"""Self-check batteries: oracle cross-validations runnable from the CLI.

Each suite returns a list of named check results; a suite passes when all
its checks do.  The batteries are deterministic (fixed seeds) so failures
are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .hermite import gauss_hermite_rule, hermite_table
from .kernels import (
    KernelSpec,
    hermite_kernel,
    hermite_kernel_series,
    product_kernel_eval,
)
from .transference import (
    TransferConstants,
    transfer_quadrature_to_gaussian,
    transfer_quadrature_to_hermite,
)
from .worst_case import (
    CostModel,
    MultiIndexSet,
    QuadratureRule,
    SamplingMethod,
    rule_cost,
    spectral_system,
    wce_approximation,
    wce_integration,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name, passed, detail=""):
    return CheckResult(name, bool(passed), detail)


# ---------------------------------------------------------------------------


def suite_mehler():
    """Closed Hermite-kernel form against the certified truncated series.

    The oracle reports its own certified error (truncation tail plus a
    rounding bound); the closed form must match within 1e-12 relative
    wherever the oracle can speak at that accuracy, and within the
    certificate everywhere.
    """
    worst = 0.0
    ok = True
    for beta in (0.1, 0.5, 0.9):
        for x in range(-4, 5):
            for y in range(-4, 5):
                closed = float(hermite_kernel(beta, float(x), float(y)))
                series, cert = hermite_kernel_series(beta, float(x), float(y), terms=400)
                allowed = 1e-12 * abs(series) + cert
                gap = abs(closed - series)
                if gap > allowed:
                    ok = False
                if allowed > 0:
                    worst = max(worst, gap / allowed)
    checks = [_result("mehler-vs-series-grid", ok, f"worst gap/allowance {worst:.3e}")]

    # spot value with an analytically tiny tail
    series, cert = hermite_kernel_series(0.3, 1.0, 1.0, terms=120)
    closed = float(hermite_kernel(0.3, 1.0, 1.0))
    checks.append(
        _result(
            "mehler-spot-beta-0.3",
            abs(closed - series) <= 1e-13 * abs(series) + cert and cert < 1e-14 * series,
            f"certified tail {cert:.3e}",
        )
    )
    return checks


# ---------------------------------------------------------------------------


def _double_factorial(p: int) -> float:
    out = 1.0
    while p > 1:
        out *= p
        p -= 2
    return out


def suite_spectral():
    checks = []

    # Gauss-Hermite orthonormality of the polynomial family
    worst = 0.0
    for n in (8, 24, 64):
        rule = gauss_hermite_rule(n)
        deg = 2 * n - 1
        table = hermite_table(deg, rule.nodes)
        gram = (table * rule.weights[None, :]) @ table.T
        target = np.eye(deg + 1)
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                worst = max(worst, abs(gram[i, j] - target[i, j]))
    checks.append(_result("gh-orthonormality", worst <= 1e-10, f"max deviation {worst:.3e}"))

    # moment exactness against (p-1)!!
    worst = 0.0
    for n in (2, 8, 64):
        rule = gauss_hermite_rule(n)
        for p in range(0, 2 * n):
            approx = float(np.sum(rule.weights * rule.nodes**p))
            if p % 2 == 1:
                scale = float(np.sum(rule.weights * np.abs(rule.nodes) ** p))
                worst = max(worst, abs(approx) / max(scale, 1.0))
            else:
                exact = _double_factorial(p - 1) if p else 1.0
                worst = max(worst, abs(approx - exact) / exact)
    checks.append(_result("gh-moment-exactness", worst <= 1e-10, f"max rel deviation {worst:.3e}"))

    # Mercer expansion of the Gaussian kernel from its spectral system.
    # Absolute tolerance: the kernel diagonal is 1, and at far-apart points
    # the partial sums cancel below what double precision can resolve
    # relative to the tiny kernel value.
    worst = 0.0
    for sigma in (0.5, 1.0):
        spec = KernelSpec.gaussian((sigma,))
        system = spectral_system(spec, MultiIndexSet.box(1, 60))
        pts = np.linspace(-2.5, 2.5, 7)[:, None]
        E = system.eigenfunction_matrix(pts)
        mercer = (E * system.eigenvalues[:, None]).T @ E
        for i, x in enumerate(pts):
            for j, y in enumerate(pts):
                exact = product_kernel_eval(spec, x, y)
                worst = max(worst, abs(mercer[i, j] - exact))
    checks.append(_result("gaussian-mercer-expansion", worst <= 1e-10, f"max abs {worst:.3e}"))

    # zero-method approximation errors match the initial errors
    idx = MultiIndexSet.box(1, 40)
    herm = spectral_system(KernelSpec.hermite((0.5,)), idx)
    v_h, t_h = wce_approximation(SamplingMethod.zero(1, idx), herm)
    gauss = spectral_system(KernelSpec.gaussian((1.0,)), idx)
    v_g, t_g = wce_approximation(SamplingMethod.zero(1, idx), gauss)
    checks.append(
        _result(
            "zero-method-initial-errors",
            abs(v_h - 1.0) <= 1e-12 and t_h <= 1e-15 and abs(v_g - sqrt(0.5)) <= 1e-12,
            f"hermite {v_h:.15f} tail {t_h:.2e}, gaussian {v_g:.15f} tail {t_g:.2e}",
        )
    )
    return checks


# ---------------------------------------------------------------------------


def _random_rule(rng, n, d, scale=1.2):
    nodes = rng.normal(0.0, scale, size=(n, d))
    weights = rng.normal(0.0, 1.0 / n, size=n)
    return QuadratureRule(nodes, weights)


def integration_identity_battery(draws: int = 100, seed: int = 2024):
    """Relative residual of the integration transference identity."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        d = int(rng.integers(1, 5))
        n = int(rng.integers(1, 17))
        sigma = np.exp(rng.uniform(np.log(0.05), np.log(3.0), size=d))
        rule = _random_rule(rng, n, d)
        constants = TransferConstants.integration(sigma)
        twin = transfer_quadrature_to_hermite(rule, sigma)
        e_gauss = wce_integration(rule, constants.gaussian_spec())
        e_herm = wce_integration(twin, constants.hermite_spec())
        residual = abs(e_gauss - constants.gauss_prefactor * e_herm) / e_gauss
        worst = max(worst, residual)
    return worst


def cost_invariance_battery(draws: int = 50, seed: int = 7):
    """Exact cost preservation under transference for sparse rules."""
    rng = np.random.default_rng(seed)
    for _ in range(draws):
        d = int(rng.integers(2, 7))
        n = int(rng.integers(1, 9))
        sigma = np.exp(rng.uniform(np.log(0.1), np.log(2.0), size=d))
        nodes = np.zeros((n, d))
        for i in range(n):
            k = int(rng.integers(0, min(d, 3) + 1))
            cols = rng.choice(d, size=k, replace=False)
            nodes[i, cols] = rng.normal(0.0, 1.0, size=k)
        rule = QuadratureRule(nodes, rng.normal(0.0, 1.0, size=n))
        model = CostModel.dollar([float(2**m) for m in range(d + 1)])
        twin = transfer_quadrature_to_hermite(rule, sigma)
        back = transfer_quadrature_to_gaussian(twin, sigma)
        if rule_cost(rule, model) != rule_cost(twin, model):
            return False
        if rule_cost(back, model) != rule_cost(rule, model):
            return False
    return True


def _tensor_gh_grid(d: int, n: int):
    rule = gauss_hermite_rule(n)
    grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.ones(points.shape[0])
    for g in np.meshgrid(*([rule.weights] * d), indexing="ij"):
        weights *= g.ravel()
    return points, weights


def _random_poly(rng, d, degree=3):
    coeffs = rng.normal(size=(degree + 1,) * d)

    def f(x):
        x = np.atleast_2d(x)
        out = np.zeros(x.shape[0])
        it = np.ndindex(coeffs.shape)
        for idx in it:
            term = coeffs[idx] * np.ones(x.shape[0])
            for j, p in enumerate(idx):
                term = term * x[:, j] ** p
            out += term
        return out

    return f


def qc_isometry_battery(draws: int = 8, seed: int = 11):
    """Relative defect of the L2(mu) isometry of the change of variables."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        d = int(rng.integers(1, 3))
        sigma = np.exp(rng.uniform(np.log(0.1), np.log(2.0), size=d))
        constants = TransferConstants.approximation(sigma)
        f = _random_poly(rng, d, degree=3)
        points, weights = _tensor_gh_grid(d, 64)
        norm_f = sqrt(float(weights @ f(points) ** 2))
        c = constants.c
        phi = np.exp(-np.sum((c * c - 1.0)[None, :] / 4.0 * points**2, axis=1))
        qf = float(np.prod(c)) ** 0.5 * phi * f(points * c[None, :])
        norm_qf = sqrt(float(weights @ qf**2))
        worst = max(worst, abs(norm_qf - norm_f) / norm_f)
    return worst


def scaled_integral_identity_battery(draws: int = 8, seed: int = 13):
    """Residual of I(Q_c f o t_tau) = (tau_*/c_*^(1/2)) I(f) for polynomials."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        d = int(rng.integers(1, 3))
        sigma = np.exp(rng.uniform(np.log(0.1), np.log(1.5), size=d))
        constants = TransferConstants.integration(sigma)
        f = _random_poly(rng, d, degree=3)
        points, weights = _tensor_gh_grid(d, 64)
        c, tau = constants.c, constants.tau
        pre = points / tau[None, :]
        phi = np.exp(-np.sum((c * c - 1.0)[None, :] / 4.0 * pre**2, axis=1))
        lhs = float(np.prod(c)) ** 0.5 * float(weights @ (phi * f(pre * c[None, :])))
        rhs = float(np.prod(tau)) / float(np.prod(c)) ** 0.5 * float(weights @ f(points))
        scale = max(abs(rhs), 1e-8)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def suite_transference():
    checks = []
    worst = integration_identity_battery()
    checks.append(
        _result("integration-identity-100-rules", worst <= 1e-10, f"worst residual {worst:.3e}")
    )
    checks.append(_result("cost-invariance-sparse-rules", cost_invariance_battery(), ""))
    worst = qc_isometry_battery()
    checks.append(_result("l2-isometry-polynomials", worst <= 1e-8, f"worst defect {worst:.3e}"))
    worst = scaled_integral_identity_battery()
    checks.append(
        _result("scaled-integral-identity", worst <= 1e-8, f"worst residual {worst:.3e}")
    )
    return checks


SUITES = {
    "mehler": suite_mehler,
    "spectral": suite_spectral,
    "transference": suite_transference,
}


def run_suite(name: str):
    if name == "all":
        out = []
        for key in ("mehler", "spectral", "transference"):
            out.extend(SUITES[key]())
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; pick from {sorted(SUITES)} or 'all'")
    return SUITES[name]()

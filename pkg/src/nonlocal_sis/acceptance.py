"""Executable acceptance battery.

Twelve numbered checks covering the spectral threshold machinery, equilibrium
solvers, time integration, and the large-diffusivity limits, each returning a
pass/fail verdict with measured numbers. The default fixture is the interval
(-1, 1) with 400 nodes and a triangle kernel of half-width 0.5. The battery is
what `nonlocal-sis suite` runs and what the acceptance test module asserts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache
from math import log, pi

import numpy as np

from .dynamics import SimulationResult, fit_decay_rate, integrate_to
from .equilibria import (
    ModelParams,
    endemic_equilibrium,
    iterate_reduced_map,
    limit_profile_both_infinity,
    limit_profile_di_infinity,
    limit_profile_ds_infinity,
    limit_system_residual,
    recover_equilibrium,
    solve_reduced_infected,
)
from .mesh import Kernel, KernelSpec, build_kernel, build_mesh, integrate
from .spectral import (
    RateFields,
    find_critical_dispersal,
    principal_eigenvalue,
    r0_all_routes,
)

DEFAULT_N = 400


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: str
    seconds: float


@lru_cache(maxsize=4)
def _kernel(n: int = DEFAULT_N) -> Kernel:
    return build_kernel(build_mesh(-1.0, 1.0, n), KernelSpec(family="triangle", delta=0.5))


def _cosine_rates(kernel: Kernel, base: float, amplitude: float,
                  gamma_const: float) -> RateFields:
    x = kernel.mesh.nodes
    return RateFields(base + amplitude * np.cos(pi * x), np.full(x.size, gamma_const))


def _check_constant_rates() -> tuple[bool, str]:
    kernel = _kernel()
    n = kernel.mesh.n
    rep = r0_all_routes(kernel, 1.0, RateFields(np.full(n, 2.0), np.full(n, 1.0)))
    routes = (rep.r0_weighted, rep.r0_variational, rep.r0_nextgen)
    route_err = max(abs(r - 2.0) for r in routes)
    lam_err = abs(rep.lambda_p + 1.0)
    ok = route_err <= 1e-9 and lam_err <= 1e-10
    return ok, f"max route error {route_err:.2e} (tol 1e-9), lambda error {lam_err:.2e} (tol 1e-10)"


@lru_cache(maxsize=1)
def _random_battery():
    """100 random rate fields and diffusivities, shared by the sign-relation
    and route-agreement checks. Fields are log-uniform in [0.5, 2], d_I
    log-uniform in [0.01, 10]; fixed seed for reproducibility."""
    kernel = _kernel()
    n = kernel.mesh.n
    rng = np.random.default_rng(42)
    reports = []
    for _ in range(100):
        beta = np.exp(rng.uniform(log(0.5), log(2.0), n))
        gamma = np.exp(rng.uniform(log(0.5), log(2.0), n))
        d_I = 10.0 ** rng.uniform(-2.0, 1.0)
        reports.append(r0_all_routes(kernel, d_I, RateFields(beta, gamma)))
    return tuple(reports)


def _check_sign_relation() -> tuple[bool, str]:
    violations = 0
    decided = 0
    for rep in _random_battery():
        if abs(rep.lambda_p) <= 1e-9:
            continue
        decided += 1
        if np.sign(rep.lambda_p) != np.sign(1.0 - rep.r0_weighted):
            violations += 1
    return violations == 0, f"{violations} violations in {decided} decided of 100 trials"


def _check_route_agreement() -> tuple[bool, str]:
    worst = 0.0
    for rep in _random_battery():
        routes = (rep.r0_weighted, rep.r0_variational, rep.r0_nextgen)
        worst = max(worst, (max(routes) - min(routes)) / max(abs(r) for r in routes))
    return worst <= 1e-7, f"worst relative route spread {worst:.2e} (tol 1e-7)"


def _check_dispersal_limits() -> tuple[bool, str]:
    kernel = _kernel()
    rates = _cosine_rates(kernel, 1.0, 0.8, 1.0)
    diff = rates.gamma - rates.beta

    lam_small, _ = principal_eigenvalue(kernel, 1e-4, rates)
    err_small = abs(lam_small - float(diff.min()))
    ok_small = err_small <= 5e-3

    lam_large, _ = principal_eigenvalue(kernel, 1e4, rates)
    err_large = abs(lam_large - float(diff.mean()))
    ok_large = err_large <= 1e-4

    grid = np.logspace(-3.0, 3.0, 25)
    lams = np.array([principal_eigenvalue(kernel, float(d), rates)[0] for d in grid])
    min_step = float(np.diff(lams).min())
    ok_mono = min_step > 1e-10

    detail = (f"small-d error {err_small:.2e} (tol 5e-3), large-d error {err_large:.2e} "
              f"(tol 1e-4), min monotone step {min_step:.2e} (slack 1e-10)")
    return ok_small and ok_large and ok_mono, detail


def _check_critical_dispersal() -> tuple[bool, str]:
    kernel = _kernel()
    x = kernel.mesh.nodes
    beta = 1.0 + 1.5 * np.exp(-20.0 * x**2)
    rates = RateFields(beta, np.full(x.size, 1.4))
    found = find_critical_dispersal(kernel, rates, 0.01, 1000.0)
    if not found.found:
        return False, f"no threshold found: {found.reason}"
    lam_lo, _ = principal_eigenvalue(kernel, found.value / 2.0, rates)
    lam_hi, _ = principal_eigenvalue(kernel, 2.0 * found.value, rates)
    ok = lam_lo < -1e-6 and lam_hi > 1e-6
    return ok, (f"d*={found.value:.6g}, lambda(d*/2)={lam_lo:.3e} (< -1e-6), "
                f"lambda(2d*)={lam_hi:.3e} (> 1e-6)")


def _random_initials(rng, mesh, mass_s: float, mass_i: float):
    S0 = rng.uniform(0.5, 1.5, mesh.n)
    I0 = rng.uniform(0.5, 1.5, mesh.n)
    return (mass_s / integrate(mesh, S0)) * S0, (mass_i / integrate(mesh, I0)) * I0


@lru_cache(maxsize=1)
def _dfe_runs() -> tuple[ModelParams, tuple[SimulationResult, ...]]:
    kernel = _kernel()
    n = kernel.mesh.n
    params = ModelParams(kernel=kernel, rates=RateFields(np.full(n, 1.0), np.full(n, 2.0)),
                         d_S=1.0, d_I=1.0, N=2.0)
    rng = np.random.default_rng(7)
    runs = tuple(
        integrate_to(params, *_random_initials(rng, params.mesh, 1.0, 1.0),
                     t_end=200.0, store_fields=True)
        for _ in range(3)
    )
    return params, runs


def _check_dfe_convergence() -> tuple[bool, str]:
    params, runs = _dfe_runs()
    lam, _ = principal_eigenvalue(params.kernel, params.d_I, params.rates)
    rate_floor = 0.9 * (lam / 2.0)
    worst_dist, worst_rate = 0.0, np.inf
    for res in runs:
        dist = float(max(np.abs(res.final_S - 1.0).max(), np.abs(res.final_I).max()))
        worst_dist = max(worst_dist, dist)
        sup_i = np.array([np.abs(I).max() for _, I in res.fields])
        keep = res.times >= 10.0
        worst_rate = min(worst_rate, fit_decay_rate(res.times[keep], sup_i[keep]))
    ok = worst_dist <= 1e-4 and worst_rate >= rate_floor
    return ok, (f"worst final distance {worst_dist:.2e} (tol 1e-4), worst fitted decay "
                f"rate {worst_rate:.4f} (floor {rate_floor:.4f})")


def _endemic_params() -> ModelParams:
    kernel = _kernel()
    return ModelParams(kernel=kernel, rates=_cosine_rates(kernel, 1.0, 0.8, 1.0),
                       d_S=0.1, d_I=0.1, N=2.0)


def _check_endemic_equilibrium() -> tuple[bool, str]:
    params = _endemic_params()
    # Reaching a result at all certifies the bracket gap: the monotone
    # iteration only terminates once sup(upper - lower) <= 1e-10.
    reduced = solve_reduced_infected(params)
    end = recover_equilibrium(params, reduced)
    k_dev = float(np.abs(params.d_S * end.S_tilde + params.d_I * end.I_tilde - end.k).max())
    probe_up = iterate_reduced_map(params, np.clip(1.1 * reduced, 0.0, 0.999))
    probe_down = iterate_reduced_map(params, 0.9 * reduced)
    probe_dev = float(max(np.abs(probe_up - reduced).max(), np.abs(probe_down - reduced).max()))
    ok = end.residual <= 1e-8 and k_dev <= 1e-8 * end.k and probe_dev <= 1e-8
    return ok, (f"residual {end.residual:.2e} (tol 1e-8), k deviation {k_dev:.2e} "
                f"(tol {1e-8 * end.k:.1e}), uniqueness probe {probe_dev:.2e} (tol 1e-8)")


@lru_cache(maxsize=1)
def _equal_diffusivity_run() -> tuple[ModelParams, SimulationResult]:
    kernel = _kernel()
    n = kernel.mesh.n
    params = ModelParams(kernel=kernel, rates=RateFields(np.full(n, 2.0), np.full(n, 1.0)),
                         d_S=1.0, d_I=1.0, N=2.0)
    rng = np.random.default_rng(11)
    S0, I0 = _random_initials(rng, params.mesh, 1.0, 1.0)
    return params, integrate_to(params, S0, I0, t_end=200.0)


def _check_equal_diffusivity() -> tuple[bool, str]:
    params, res = _equal_diffusivity_run()
    # With beta = r*gamma constant and equal diffusivities the endemic state is
    # the explicit pair (N/(r|domain|), (1 - 1/r) N/|domain|); here r = 2.
    r = 2.0
    target_s = params.N / (r * params.mesh.length)
    target_i = (1.0 - 1.0 / r) * params.N / params.mesh.length
    dist = float(max(np.abs(res.final_S - target_s).max(),
                     np.abs(res.final_I - target_i).max()))
    return dist <= 1e-4, f"final distance to ({target_s:g}, {target_i:g}) = {dist:.2e} (tol 1e-4)"


@lru_cache(maxsize=1)
def _lyapunov_runs() -> tuple[ModelParams, tuple[SimulationResult, ...]]:
    kernel = _kernel()
    x = kernel.mesh.nodes
    gamma = 1.0 + 0.3 * np.cos(pi * x)
    params = ModelParams(kernel=kernel, rates=RateFields(2.0 * gamma, gamma),
                         d_S=1.0, d_I=0.5, N=2.0)
    end = endemic_equilibrium(params)
    runs = []
    for seed in (101, 102, 103):
        rng = np.random.default_rng(seed)
        S0, I0 = _random_initials(rng, params.mesh, 1.0, 1.0)
        runs.append(integrate_to(params, S0, I0, t_end=120.0, endemic=end))
    return params, tuple(runs)


def _check_lyapunov_decrease() -> tuple[bool, str]:
    _, runs = _lyapunov_runs()
    worst = max(float(np.diff(res.lyapunov).max()) for res in runs)
    return worst <= 1e-10, f"largest Lyapunov increment {worst:.2e} (tol 1e-10)"


def _check_mass_conservation() -> tuple[bool, str]:
    bundles = [_dfe_runs()[1], (_equal_diffusivity_run()[1],), _lyapunov_runs()[1]]
    worst = 0.0
    for runs in bundles:
        for res in runs:
            worst = max(worst, float(np.abs(res.mass - 2.0).max()) / 2.0)
    return worst <= 1e-10, f"worst relative mass drift {worst:.2e} over 7 trajectories (tol 1e-10)"


def _check_diffusivity_limits() -> tuple[bool, str]:
    kernel = _kernel()
    n = kernel.mesh.n

    # (a) constant rates: the both-diffusivities limit is an explicit pair of
    # constants, and the endemic state already equals it at any finite d.
    const = RateFields(np.full(n, 2.0), np.full(n, 1.0))
    s_lim, i_lim = limit_profile_both_infinity(const, 2.0, kernel.mesh)
    formula = (0.5, 0.5)
    err_a = max(abs(s_lim - formula[0]), abs(i_lim - formula[1]))
    end_const = endemic_equilibrium(ModelParams(kernel=kernel, rates=const,
                                                d_S=1.0, d_I=1.0, N=2.0))
    err_a = max(err_a, float(np.abs(end_const.S_tilde - s_lim).max()),
                float(np.abs(end_const.I_tilde - i_lim).max()))
    ok_a = err_a <= 1e-9

    rates = _cosine_rates(kernel, 1.0, 0.8, 0.8)

    # (b) susceptible diffusivity large: compare against the ratio-profile limit.
    end_ds = endemic_equilibrium(ModelParams(kernel=kernel, rates=rates,
                                             d_S=1000.0, d_I=1.0, N=2.0))
    S_lim, I_lim = limit_profile_ds_infinity(kernel, 1.0, rates, 2.0)
    rel_b = max(float(np.abs(end_ds.S_tilde - S_lim).max() / np.abs(S_lim).max()),
                float(np.abs(end_ds.I_tilde - I_lim).max() / np.abs(I_lim).max()))
    ok_b = rel_b <= 2e-2

    # (c) infected diffusivity large: compare against the flat-infecteds limit,
    # which must itself satisfy its stationary system tightly.
    end_di = endemic_equilibrium(ModelParams(kernel=kernel, rates=rates,
                                             d_S=1.0, d_I=1000.0, N=2.0))
    S_star, i_star = limit_profile_di_infinity(kernel, 1.0, rates, 2.0)
    res_c = limit_system_residual(kernel, 1.0, rates, 2.0, S_star, i_star)
    rel_c = max(float(np.abs(end_di.S_tilde - S_star).max() / np.abs(S_star).max()),
                float(np.abs(end_di.I_tilde - i_star).max() / i_star))
    ok_c = rel_c <= 2e-2 and res_c <= 1e-8

    detail = (f"constants error {err_a:.2e} (tol 1e-9); large-d_S relative error {rel_b:.2e} "
              f"(tol 2e-2); large-d_I relative error {rel_c:.2e} (tol 2e-2), "
              f"limit residual {res_c:.2e} (tol 1e-8)")
    return ok_a and ok_b and ok_c, detail


def _check_mesh_refinement() -> tuple[bool, str]:
    vals = {}
    for n in (200, 800):
        kernel = _kernel(n)
        rep = r0_all_routes(kernel, 0.1, _cosine_rates(kernel, 1.0, 0.8, 1.0))
        vals[n] = (rep.lambda_p, rep.r0_weighted)
    rel_lam = abs(vals[200][0] - vals[800][0]) / abs(vals[800][0])
    rel_r0 = abs(vals[200][1] - vals[800][1]) / abs(vals[800][1])
    ok = rel_lam <= 1e-3 and rel_r0 <= 1e-3
    return ok, f"relative changes: lambda {rel_lam:.2e}, R0 {rel_r0:.2e} (tol 1e-3)"


CRITERIA = (
    (1, "constant_rates_spectrum", _check_constant_rates),
    (2, "sign_relation", _check_sign_relation),
    (3, "route_agreement", _check_route_agreement),
    (4, "small_large_dispersal_limits", _check_dispersal_limits),
    (5, "critical_dispersal_bracket", _check_critical_dispersal),
    (6, "disease_free_convergence", _check_dfe_convergence),
    (7, "endemic_equilibrium_structure", _check_endemic_equilibrium),
    (8, "equal_diffusivity_convergence", _check_equal_diffusivity),
    (9, "lyapunov_decrease", _check_lyapunov_decrease),
    (10, "mass_conservation", _check_mass_conservation),
    (11, "large_diffusivity_limits", _check_diffusivity_limits),
    (12, "mesh_refinement_consistency", _check_mesh_refinement),
)


def run_one(number: int) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            start = time.perf_counter()
            passed, details = fn()
            return CriterionResult(num, name, passed, details, time.perf_counter() - start)
    raise ValueError(f"no criterion numbered {number}")


def run_all() -> list[CriterionResult]:
    return [run_one(num) for num, _, _ in CRITERIA]

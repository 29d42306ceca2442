"""Named identity checks with Monte-Carlo 3-sigma verdicts.

Each suite draws its own replicates from seeded streams and returns a
:class:`VerifyReport` whose lines read as one check per line.  Statistical
checks use 3-standard-error acceptance bands around exact expectations, so a
correct implementation fails any single check with probability about 0.3%.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import designs as dsg
from .approximants import qi_transform
from .metrics import beta_N, epsilon_m_N, mean_with_stderr
from .spectral import TargetFunction, make_periodic_sobolev, random_gaussian_target

#: target used across the quadrature-moment suites: a few low modes plus one
#: component past the quadrature order, so tails are exactly computable
EZ_COEFFS = {1: 1.0, 2: -0.5, 3: 0.25, 12: 0.1}


@dataclass
class VerifyReport:
    name: str
    passed: bool
    lines: list[str]

    def __str__(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"
        return "\n".join([head] + ["  " + l for l in self.lines])


def _band_line(label: str, value: float, expect: float, stderr: float) -> tuple[bool, str]:
    z = (value - expect) / stderr if stderr > 0 else math.inf * np.sign(value - expect + 1e-300)
    ok = abs(value - expect) <= 3.0 * stderr
    return ok, f"{label}: {value:+.6f} vs {expect:+.6f} (3se = {3 * stderr:.2e}, z = {z:+.2f}) {'ok' if ok else 'VIOLATED'}"


def qi_coefficient_draws(model, f: TargetFunction, N: int, replicates: int, master_seed: int) -> np.ndarray:
    """Quasi-interpolant coefficient vectors over fresh projection-DPP designs.

    Returns an array of shape (replicates, N); row r is drawn from the
    stream derived from (master_seed, N, r).
    """
    T = np.arange(1, N + 1)
    out = np.empty((replicates, N))
    for r in range(replicates):
        rng = np.random.default_rng([master_seed, N, r])
        design = dsg.sample_projection_dpp(model, T, rng)
        fx = f.evaluate(model, design.nodes)
        out[r] = qi_transform(model, design, fx).coeffs
    return out


def _ez_setup(budget: int, seed: int, N: int = 7):
    model = make_periodic_sobolev(1, 2000)
    f = TargetFunction.from_dict(EZ_COEFFS)
    draws = qi_coefficient_draws(model, f, N, budget, seed)
    return model, f, draws


def ez_unbiased(budget: int = 10_000, seed: int = 2024) -> VerifyReport:
    """Each quadrature coefficient has the exact basis coefficient as mean."""
    _, f, draws = _ez_setup(budget, seed)
    lines, ok_all = [], True
    for m in range(1, draws.shape[1] + 1):
        mean, se = mean_with_stderr(draws[:, m - 1])
        ok, line = _band_line(f"mean coeff m={m}", mean, f.coeff(m), se)
        ok_all &= ok
        lines.append(line)
    return VerifyReport("ez-unbiased", ok_all, lines)


def ez_variance(budget: int = 10_000, seed: int = 2024) -> VerifyReport:
    """Each coefficient's variance equals the squared tail past order N."""
    _, f, draws = _ez_setup(budget, seed)
    N = draws.shape[1]
    exact = f.tail_sq(N)
    lines, ok_all = [], True
    for m in range(1, N + 1):
        sq = (draws[:, m - 1] - f.coeff(m)) ** 2
        mean, se = mean_with_stderr(sq)
        ok, line = _band_line(f"var coeff m={m}", mean, exact, se)
        ok_all &= ok
        lines.append(line)
    return VerifyReport("ez-variance", ok_all, lines)


def ez_uncorrelated(budget: int = 10_000, seed: int = 2024) -> VerifyReport:
    """Distinct quadrature coefficients are uncorrelated."""
    _, f, draws = _ez_setup(budget, seed)
    N = draws.shape[1]
    lines, ok_all = [], True
    for m1, m2 in itertools.combinations(range(1, N + 1), 2):
        prod = (draws[:, m1 - 1] - f.coeff(m1)) * (draws[:, m2 - 1] - f.coeff(m2))
        mean, se = mean_with_stderr(prod)
        ok, line = _band_line(f"cov ({m1},{m2})", mean, 0.0, se)
        ok_all &= ok
        lines.append(line)
    return VerifyReport("ez-uncorrelated", ok_all, lines)


def kale(budget: int = 10_000, seed: int = 2024) -> VerifyReport:
    """Mean squared residual identities of the quasi-interpolant.

    The estimation part satisfies E ||qi - f_N||^2 = N ||f - f_N||^2; adding
    the deterministic projection tail, the full residual satisfies
    E ||f - qi||^2 = (N + 1) ||f - f_N||^2.  (The second value is forced by
    the first together with the orthogonal tail; the two checks are the same
    draw, reported separately.)
    """
    _, f, draws = _ez_setup(budget, seed)
    N = draws.shape[1]
    cf = f.coeffs[:N]
    est = ((draws - cf) ** 2).sum(axis=1)
    tail = f.tail_sq(N)
    mean_e, se_e = mean_with_stderr(est)
    ok1, line1 = _band_line("mean ||qi - f_N||^2", mean_e, N * tail, se_e)
    mean_f, se_f = mean_with_stderr(est + tail)
    ok2, line2 = _band_line("mean ||f - qi||^2", mean_f, (N + 1) * tail, se_f)
    return VerifyReport("kale", ok1 and ok2, [line1, line2])


def tels_identity(budget: int = 10_000, seed: int = 2024, N: int = 10, M: int = 4) -> VerifyReport:
    """Mean squared residual of the truncated empirical least squares equals
    ||f - f_M||^2 + M ||f - f_N||^2, and its ratio to ||f - f_M||^2 stays
    within the (1 + M) multiplicative bound."""
    model = make_periodic_sobolev(1, 2000)
    f = TargetFunction.from_dict(EZ_COEFFS)
    draws = qi_coefficient_draws(model, f, N, budget, seed)[:, :M]
    errs = ((draws - f.coeffs[:M]) ** 2).sum(axis=1) + f.tail_sq(M)
    mean, se = mean_with_stderr(errs)
    expect = f.tail_sq(M) + M * f.tail_sq(N)
    ok1, line1 = _band_line("mean ||f - tels||^2", mean, expect, se)
    ratio = mean / f.tail_sq(M)
    bound = (1.0 + M) + 3.0 * se / f.tail_sq(M)
    ok2 = ratio <= bound
    line2 = f"instance-optimality ratio: {ratio:.4f} <= {1 + M} + band ({bound:.4f}) {'ok' if ok2 else 'VIOLATED'}"
    return VerifyReport("tels-identity", ok1 and ok2, [line1, line2])


def iop(budget: int = 10_000, seed: int = 2024) -> VerifyReport:
    """Multiplicative error bound of the truncated empirical least squares:
    tight (an equality) at M = N, an inequality for M < N."""
    model = make_periodic_sobolev(1, 2000)
    f = random_gaussian_target(model, 15, np.random.default_rng(seed + 1))
    lines, oks = [], []
    # tight case M = N
    N = 6
    draws = qi_coefficient_draws(model, f, N, budget, seed)
    errs = ((draws - f.coeffs[:N]) ** 2).sum(axis=1) + f.tail_sq(N)
    mean, se = mean_with_stderr(errs)
    ok, line = _band_line("ratio at M=N", mean / f.tail_sq(N), 1.0 + N, se / f.tail_sq(N))
    oks.append(ok)
    lines.append(line)
    # strict truncation M < N
    M = 3
    errs_t = ((draws[:, :M] - f.coeffs[:M]) ** 2).sum(axis=1) + f.tail_sq(M)
    mean_t, se_t = mean_with_stderr(errs_t)
    bound = (1.0 + M) * f.tail_sq(M) + 3.0 * se_t
    ok = mean_t <= bound
    lines.append(
        f"mean at M={M}: {mean_t:.5f} <= (1+M)||f - f_M||^2 + band ({bound:.5f}) {'ok' if ok else 'VIOLATED'}"
    )
    oks.append(ok)
    return VerifyReport("iop", all(oks), lines)


def eps_bound(N_max: int = 50) -> VerifyReport:
    """Deterministic spectral-ratio checks: monotonicity in the index and the
    sigma_{N+1} (1 + beta_N) upper bound, on a polynomially decaying spectrum."""
    model = make_periodic_sobolev(1, 2000)
    sig = model.sigmas
    lines, oks = [], []
    for N in range(1, N_max + 1):
        e1 = epsilon_m_N(sig, 1, N)
        bound = sig[N] * (1.0 + beta_N(sig, N, model.tail_sigma))
        oks.append(e1 <= bound * (1.0 + 1e-12))
        if N in (1, 10, 25, N_max):
            lines.append(f"N={N}: eps_1 = {e1:.6e} <= sigma_(N+1)(1+beta) = {bound:.6e} "
                         f"{'ok' if oks[-1] else 'VIOLATED'}")
    for N in (5, 20):
        eps = [epsilon_m_N(sig, m, N) for m in range(1, 11)]
        mono = all(a >= b - 1e-15 for a, b in zip(eps, eps[1:]))
        oks.append(mono)
        lines.append(f"N={N}: eps_m non-increasing over m=1..10 {'ok' if mono else 'VIOLATED'}")
    return VerifyReport("eps-bound", all(oks), lines)


def cvs_mixture(budget: int = 100_000, seed: int = 2024) -> VerifyReport:
    """Subset frequencies of the eigenvalue-product mixture match their
    enumerated probabilities (chi-squared test on all size-2 subsets of a
    six-eigenvalue spectrum)."""
    sig = np.array([1.0, 0.7, 0.45, 0.3, 0.2, 0.1])
    N = 2
    subsets = list(itertools.combinations(range(1, 7), N))
    probs = np.array([sig[np.array(T) - 1].prod() for T in subsets])
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    table = dsg.esp_log_table(sig, N)
    counts = {T: 0 for T in subsets}
    for _ in range(budget):
        T = tuple(dsg.sample_subset_esp(sig, N, rng, table=table).tolist())
        counts[T] += 1
    observed = np.array([counts[T] for T in subsets])
    chi2, p = stats.chisquare(observed, probs * budget)
    ok = p > 0.001
    line = f"chi2 = {chi2:.2f} over {len(subsets) - 1} dof, p = {p:.4f} {'ok' if ok else 'VIOLATED'}"
    return VerifyReport("cvs-mixture", ok, [line])


SUITES = {
    "ez-unbiased": ez_unbiased,
    "ez-variance": ez_variance,
    "ez-uncorrelated": ez_uncorrelated,
    "kale": kale,
    "tels-identity": tels_identity,
    "iop": iop,
    "eps-bound": eps_bound,
    "cvs-mixture": cvs_mixture,
}


def run_suite(name: str, budget: int | None = None, seed: int = 2024) -> VerifyReport:
    try:
        fn = SUITES[name]
    except KeyError as exc:
        raise ValueError(f"unknown verification suite {name!r}; "
                         f"choose from {', '.join(sorted(SUITES))}") from exc
    if name == "eps-bound":
        return fn()
    if budget is None:
        return fn(seed=seed)
    return fn(budget, seed)

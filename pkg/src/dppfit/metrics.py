"""Exact and Monte-Carlo error functionals, spectral tail quantities, and
the seeded replication harness.

Squared L2(omega) residuals of kernel mixes are computed by the closed
identity

    ||f - sum_i w_i k(x_i, .)||^2 = ||f||^2 - 2 sum_i w_i (Sf)(x_i) + w^T K_2(x) w

where Sf is the image of f under the kernel integral operator and K_2 the
Gram matrix of the squared-spectrum kernel; residuals of eigen-expansions
close by Parseval.  The spectral quantities r, eps and beta that appear in
the mean-error bounds are evaluated over the materialized spectrum with the
model's certified tail corrections, and in log space where products of
eigenvalues would underflow.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from . import designs as dsg
from .approximants import EigenExpansion, KernelMix, els, kernel_weight_solve, ls, oka, okq_transform, qi_transform, tels
from .linalg import IllConditionedSystem
from .spectral import LegendreModel, SpectralModel, TargetFunction

log = logging.getLogger(__name__)

#: squared metrics may come out slightly negative by cancellation; anything
#: below this floor is a numerical failure, anything above is clipped to 0
NEGATIVE_FLOOR = -1e-10


def clip_squared(value: float, what: str = "squared metric") -> float:
    if value < NEGATIVE_FLOOR:
        log.warning("%s = %.3e is negative beyond the floor; clipping", what, value)
    return max(float(value), 0.0)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------


def l2_residual_kernelmix(model: SpectralModel, f: TargetFunction, approx: KernelMix) -> float:
    """Exact squared L2(omega) residual of a kernel mix against f.

    For closed-form kernels this is the three-term identity
    ||f||^2 - 2 w.(Sf)(x) + w^T K_2(x) w.  For spectral-factor models the
    squared-spectrum Gram is the materialized sum, and expanding the same
    identity coefficient by coefficient (the mix has eigenbasis coefficients
    sigma_m sum_i w_i e_m(x_i)) avoids the large-term cancellation that
    otherwise floors the value near machine precision times the norms.
    """
    w = approx.weights
    if model.use_spectral_factor:
        if f.max_index > model.truncation_order:
            raise ValueError("target support exceeds the truncation order")
        ms = np.arange(1, model.truncation_order + 1)
        Phi = model.eigen_block(ms, approx.nodes)
        d = -model.sigmas * (Phi.T @ w)
        d[: f.max_index] += f.coeffs
        return float(d @ d)
    sf = model.smoothed_eval(f, approx.nodes)
    K2 = model.gram(2, approx.nodes)
    return float(f.l2_norm_sq() - 2.0 * (w @ sf) + w @ (K2 @ w))


def l2_residual_eigen(f: TargetFunction, approx: EigenExpansion) -> float:
    """Squared L2(omega) residual of an eigen-expansion by Parseval."""
    top = max(f.max_index, approx.order)
    cf = np.zeros(top)
    cf[: f.max_index] = f.coeffs
    ca = np.zeros(top)
    ca[: approx.order] = approx.coeffs
    d = cf - ca
    return float(d @ d)


def rkhs_residual_oka(model: SpectralModel, design, f_evals, f_rkhs_norm_sq: float) -> float:
    """Squared kernel-norm residual of the interpolating mix:
    ||f||_F^2 - f(x)^T K_1(x)^{-1} f(x)."""
    nodes = design.nodes if isinstance(design, dsg.Design) else np.asarray(design, dtype=float)
    f_evals = np.asarray(f_evals, dtype=float)
    w, _ = kernel_weight_solve(model, nodes, 1, f_evals, "kernel gram (order 1)")
    return float(f_rkhs_norm_sq - f_evals @ w)


# ---------------------------------------------------------------------------
# spectral tail quantities
# ---------------------------------------------------------------------------


def epsilon_m_N(sigmas, m: int, N: int) -> float:
    """Leave-one-out spectral ratio sigma_m e_N(sigma w/o m) / e_N(sigma),
    evaluated with log-space elementary symmetric polynomials."""
    sigmas = np.asarray(sigmas, dtype=float)
    if not 1 <= m <= len(sigmas):
        raise ValueError("index m out of range")
    if len(sigmas) < N + 20:
        raise ValueError("spectrum too short: need at least N + 20 entries")
    full = dsg.esp_log_table(sigmas, N)
    wo = dsg.esp_log_table(np.delete(sigmas, m - 1), N)
    return float(sigmas[m - 1] * np.exp(wo[N, -1] - full[N, -1]))


def beta_N(sigmas, N: int, tail: float = 0.0) -> float:
    """min over M in [2, N+1] of (sum_{m >= M} sigma_m) / ((N - M + 2) sigma_{N+1}).

    ``tail`` is the certified bound on the eigenvalue sum beyond the
    materialized spectrum; it is added to every partial tail sum.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if len(sigmas) < N + 1:
        raise ValueError("need sigma_{N+1}: spectrum too short")
    suffix = np.concatenate([np.cumsum(sigmas[::-1])[::-1], [0.0]])  # suffix[i] = sum sigmas[i:]
    Ms = np.arange(2, N + 2)
    tails = suffix[Ms - 1] + tail  # sum_{m >= M}
    return float(np.min(tails / ((N - Ms + 2) * sigmas[N])))


class SpectralTails:
    """Tail sums and mixture ratios of a materialized spectrum, corrected by
    the model's certified truncation bounds."""

    def __init__(self, model_or_sigmas, tail_sigma: float = 0.0, tail_sigma_sq: float = 0.0):
        if isinstance(model_or_sigmas, SpectralModel):
            m = model_or_sigmas
            self.sigmas = m.sigmas
            self.tail_sigma = m.tail_sigma
            self.tail_sigma_sq = m.tail_sigma_sq
        else:
            self.sigmas = np.asarray(model_or_sigmas, dtype=float)
            self.tail_sigma = float(tail_sigma)
            self.tail_sigma_sq = float(tail_sigma_sq)
        self._suffix = np.concatenate([np.cumsum(self.sigmas[::-1])[::-1], [0.0]])
        self._suffix2 = np.concatenate([np.cumsum((self.sigmas**2)[::-1])[::-1], [0.0]])

    def r(self, N: int) -> float:
        """sum_{m >= N+1} sigma_m, including the certified truncation tail."""
        if N > len(self.sigmas):
            raise ValueError("N beyond the materialized spectrum")
        return float(self._suffix[N] + self.tail_sigma)

    def r2(self, N: int) -> float:
        """sum_{m >= N+1} sigma_m^2, including the certified truncation tail."""
        if N > len(self.sigmas):
            raise ValueError("N beyond the materialized spectrum")
        return float(self._suffix2[N] + self.tail_sigma_sq)

    def eps(self, m: int, N: int) -> float:
        return epsilon_m_N(self.sigmas, m, N)

    def beta(self, N: int) -> float:
        return beta_N(self.sigmas, N, self.tail_sigma)


# ---------------------------------------------------------------------------
# replicated Monte-Carlo studies
# ---------------------------------------------------------------------------

CSV_FIELDS = ("kernel", "design", "scheme", "target", "N", "M", "replicate", "metric", "value", "seed")


@dataclass(frozen=True)
class ErrorRecord:
    kernel: str
    design: str
    scheme: str
    target: str
    N: int
    M: int
    replicate: int
    metric: str
    value: float
    seed: int

    def row(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


@dataclass(frozen=True)
class DesignSpec:
    """Declarative description of a node distribution."""

    family: str  # "dpp" | "cvs" | "christoffel"
    basis: str = "model"  # projection basis for dpp: "model" | "legendre"
    M: int | None = None  # christoffel density order; defaults to N
    q_mode: str = "optimal"
    conditioned: bool = True

    def tag(self, N: int) -> str:
        if self.family == "dpp":
            return "dpp" if self.basis == "model" else f"dpp-{self.basis}"
        if self.family == "christoffel":
            return f"christoffel(M={self.M or N},{self.q_mode}" + (
                ")" if self.conditioned else ",unconditioned)"
            )
        return self.family


@dataclass(frozen=True)
class SchemeSpec:
    """Reconstruction scheme plus its order parameter, when one applies."""

    name: str  # oka | ls | okq | qi | els | tels
    M: int | None = None
    q_mode: str = "optimal"


class StudyBudgetExceeded(RuntimeError):
    """More than the tolerated fraction of replicates failed at some N."""

    def __init__(self, message: str, records: list):
        super().__init__(message)
        self.records = records


def _legendre_aux(model: SpectralModel, N: int) -> LegendreModel:
    aux = model._cache.get("legendre_aux")
    if aux is None or aux.truncation_order < N:
        dom = model.domain
        if dom.ndim != 1:
            raise ValueError("a Legendre projection basis needs an interval domain")
        if abs(dom.lo + dom.hi) > 1e-12:
            raise ValueError("a Legendre projection basis needs a centered interval")
        aux = LegendreModel(dom.length, max(2 * N, 64))
        model._cache["legendre_aux"] = aux
    return aux


def build_design(model: SpectralModel, spec: DesignSpec, N: int, rng) -> dsg.Design:
    if spec.family == "dpp":
        if spec.basis == "model":
            return dsg.sample_projection_dpp(model, np.arange(1, N + 1), rng)
        if spec.basis == "legendre":
            aux = _legendre_aux(model, N)
            d = dsg.sample_projection_dpp(aux, np.arange(1, N + 1), rng)
            return replace(d, distribution="dpp-legendre")
        raise ValueError(f"unknown dpp basis {spec.basis!r}")
    if spec.family == "cvs":
        return dsg.sample_cvs(model, N, rng)
    if spec.family == "christoffel":
        return dsg.sample_christoffel_iid(
            model, N, spec.M or N, spec.q_mode, rng, conditioned=spec.conditioned
        )
    raise ValueError(f"unknown design family {spec.family!r}")


def model_id(model: SpectralModel) -> str:
    d = model.descriptor()
    inner = ",".join(f"{k}={v}" for k, v in d.items() if k != "family")
    return f"{d['family']}({inner})"


def _apply_scheme(model, scheme: SchemeSpec, design, target: TargetFunction):
    """Build the approximant and return its applicable metrics."""
    nodes = design.nodes
    name = scheme.name
    metrics: dict[str, float] = {}
    if name == "ls":
        approx = ls(model, design, target)
        metrics["l2_sq"] = l2_residual_kernelmix(model, target, approx)
        return approx, metrics
    f_evals = target.evaluate(model, nodes)
    if name == "oka":
        approx = oka(model, design, f_evals)
        metrics["l2_sq"] = l2_residual_kernelmix(model, target, approx)
        metrics["rkhs_sq"] = float(target.rkhs_norm_sq(model) - f_evals @ approx.weights)
        return approx, metrics
    M = scheme.M or len(nodes)
    if name == "okq":
        approx = okq_transform(model, design, f_evals, M)
    elif name == "qi":
        approx = qi_transform(model, design, f_evals)
    elif name == "els":
        q_evals = dsg.christoffel_q(model, M, nodes, scheme.q_mode)
        approx = els(model, design, f_evals, q_evals, M)
    elif name == "tels":
        approx = tels(model, design, f_evals, M)
    else:
        raise ValueError(f"unknown scheme {name!r}")
    metrics["l2_sq"] = l2_residual_eigen(target, approx)
    return approx, metrics


def _study_replicate(model, design_spec, scheme_spec, target, N, rep, master_seed):
    rng = np.random.default_rng([master_seed, N, rep])
    kern = model_id(model)
    M = scheme_spec.M or N
    base = dict(kernel=kern, scheme=scheme_spec.name, target=target.name,
                N=N, M=M, replicate=rep, seed=master_seed)
    try:
        design = build_design(model, design_spec, N, rng)
        _, metrics = _apply_scheme(model, scheme_spec, design, target)
    except (IllConditionedSystem, dsg.RejectionBudgetExceeded,
            dsg.ResampleBudgetExceeded, dsg.IllConditionedGram,
            dsg.EnvelopeViolation) as exc:
        log.warning("replicate (N=%d, rep=%d) failed: %s", N, rep, exc)
        return [ErrorRecord(design=design_spec.tag(N), metric="failed", value=1.0, **base)]
    out = []
    for metric, value in metrics.items():
        out.append(ErrorRecord(design=design.distribution, metric=metric,
                               value=clip_squared(value, metric), **base))
    return out


def mc_error_study(
    model: SpectralModel,
    design_spec: DesignSpec,
    scheme_spec: SchemeSpec,
    target: TargetFunction,
    N_grid,
    replicates: int,
    master_seed: int,
    n_jobs: int = 1,
) -> list[ErrorRecord]:
    """Replicated error study: for each N and replicate, a fresh design, a
    fresh approximant, and every applicable metric.

    Deterministic given ``master_seed`` regardless of worker count; each
    replicate draws from an independent stream derived from
    (master_seed, N, replicate).  Individual replicate failures are recorded
    as ``metric="failed"`` rows; the study aborts only if more than 20% of
    replicates fail at some N.
    """
    N_grid = [int(n) for n in N_grid]
    if sorted(set(N_grid)) != N_grid:
        raise ValueError("N_grid must be strictly increasing")
    if replicates < 1:
        raise ValueError("need at least one replicate")
    if scheme_spec.name == "ls" and not isinstance(target, TargetFunction):
        raise ValueError("the ls scheme needs an eigen-expansion target")
    tasks = [(N, r) for N in N_grid for r in range(replicates)]
    if n_jobs == 1:
        chunks = [_study_replicate(model, design_spec, scheme_spec, target, N, r, master_seed)
                  for N, r in tasks]
    else:
        chunks = Parallel(n_jobs=n_jobs)(
            delayed(_study_replicate)(model, design_spec, scheme_spec, target, N, r, master_seed)
            for N, r in tasks
        )
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r.N, r.replicate, r.metric))
    for N in N_grid:
        failed = sum(1 for r in records if r.N == N and r.metric == "failed")
        if failed > 0.2 * replicates:
            raise StudyBudgetExceeded(
                f"{failed}/{replicates} replicates failed at N={N}", records
            )
    return records


def mean_with_stderr(values) -> tuple[float, float]:
    """Order-independent mean and standard error (exact pairwise-free sums)."""
    vals = list(map(float, values))
    n = len(vals)
    mean = math.fsum(vals) / n
    if n < 2:
        return mean, math.inf
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
    return mean, math.sqrt(var / n)


def summarize(records, metric: str = "l2_sq") -> dict[int, tuple[float, float]]:
    """Per-N mean and standard error of one metric, skipping failed rows."""
    byN: dict[int, list[float]] = {}
    for r in records:
        if r.metric == metric:
            byN.setdefault(r.N, []).append(r.value)
    return {N: mean_with_stderr(v) for N, v in sorted(byN.items())}


def fit_loglog_slope(records, N_range, metric: str = "l2_sq") -> float:
    """Least-squares slope of log(mean error) against log N over N_range."""
    means = summarize(records, metric)
    Ns = [N for N in N_range if N in means]
    if len(Ns) < 3:
        raise ValueError("need at least three grid points in range")
    m = np.array([means[N][0] for N in Ns])
    if np.any(m <= 0):
        raise ValueError("non-positive mean error in the fitting range")
    A = np.vstack([np.log(Ns), np.ones(len(Ns))]).T
    slope, _ = np.linalg.lstsq(A, np.log(m), rcond=None)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# CSV sink
# ---------------------------------------------------------------------------


def write_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for rec in records:
            writer.writerow(rec.row())


def read_records(path) -> list[ErrorRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                ErrorRecord(
                    kernel=row["kernel"], design=row["design"], scheme=row["scheme"],
                    target=row["target"], N=int(row["N"]), M=int(row["M"]),
                    replicate=int(row["replicate"]), metric=row["metric"],
                    value=float(row["value"]), seed=int(row["seed"]),
                )
            )
    return out

"""Reconstruction schemes from node evaluations.

Two representations are produced:

* :class:`KernelMix` -- a weighted sum of kernel translates at the design
  nodes (kernel-norm-optimal interpolation ``oka`` and the L2(omega)
  projection ``ls``);
* :class:`EigenExpansion` -- coefficients on the eigenbasis (the quadrature
  transform ``okq_transform``, the quasi-interpolant ``qi_transform``, the
  empirical least squares ``els`` and its truncated variant ``tels``).

No scheme applies regularization; a singular or ill-conditioned system is a
typed failure carrying the condition estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designs import Design
from .linalg import SolveInfo, factor_solve, square_solve, sym_solve
from .spectral import SpectralModel, TargetFunction


@dataclass(frozen=True)
class KernelMix:
    """Approximant sum_i w_i k(x_i, .)."""

    scheme: str
    nodes: np.ndarray
    weights: np.ndarray
    info: SolveInfo

    def __post_init__(self):
        if len(self.weights) != len(self.nodes):
            raise ValueError("one weight per node required")


@dataclass(frozen=True)
class EigenExpansion:
    """Approximant sum_m coeffs[m-1] e_m."""

    scheme: str
    coeffs: np.ndarray
    info: SolveInfo
    beyond_interpolative: bool = False  # order exceeds the node count

    @property
    def order(self) -> int:
        return len(self.coeffs)


Approximant = KernelMix | EigenExpansion


def _nodes_of(design) -> np.ndarray:
    return design.nodes if isinstance(design, Design) else np.asarray(design, dtype=float)


def kernel_weight_solve(model: SpectralModel, nodes, nu: int, rhs, what: str):
    """Solve K_nu(x) w = rhs, routing through the spectral factor for models
    whose assembled kernel matrix must not see sub-floor spectral content."""
    if model.use_spectral_factor:
        return factor_solve(model.spectral_factor(nu, nodes), rhs, what)
    return sym_solve(model.gram(nu, nodes), rhs, what)


def oka(model: SpectralModel, design, f_evals) -> KernelMix:
    """Kernel-norm-optimal weights: the mix interpolating f at the nodes."""
    nodes = _nodes_of(design)
    f_evals = np.asarray(f_evals, dtype=float)
    w, info = kernel_weight_solve(model, nodes, 1, f_evals, "kernel gram (order 1)")
    return KernelMix("oka", nodes, w, info)


def ls(model: SpectralModel, design, f: TargetFunction) -> KernelMix:
    """L2(omega)-optimal weights on the same span of kernel translates.

    Needs the target as an eigen-expansion: the right-hand side is the
    smoothed function (the kernel operator applied to f) at the nodes, which
    point evaluations of f alone cannot provide.
    """
    nodes = _nodes_of(design)
    rhs = model.smoothed_eval(f, nodes)
    w, info = kernel_weight_solve(model, nodes, 2, rhs, "kernel gram (order 2)")
    return KernelMix("ls", nodes, w, info)


def okq_transform(model: SpectralModel, design, f_evals, M: int) -> EigenExpansion:
    """Interpolative-quadrature coefficients sigma_m e_m(x)^T K_1(x)^{-1} f(x).

    Equals the eigenbasis projection of the `oka` mix, coefficient by
    coefficient.  Orders beyond the node count are allowed but flagged: the
    defining exactness on kernel translates only holds up to m = N.
    """
    if M > model.truncation_order:
        raise ValueError("M exceeds the truncation order")
    nodes = _nodes_of(design)
    f_evals = np.asarray(f_evals, dtype=float)
    v, info = kernel_weight_solve(model, nodes, 1, f_evals, "kernel gram (order 1)")
    E = model.eigen_block(np.arange(1, M + 1), nodes)
    coeffs = model.sigmas[:M] * (E.T @ v)
    return EigenExpansion("okq", coeffs, info, beyond_interpolative=M > len(nodes))


def qi_transform(model: SpectralModel, design, f_evals) -> EigenExpansion:
    """Quasi-interpolant of order N: coefficients eta solving E eta = f(x)
    with E_{i m} = e_m(x_i); exact whenever f lies in the span of the first
    N eigenfunctions."""
    nodes = _nodes_of(design)
    f_evals = np.asarray(f_evals, dtype=float)
    N = len(nodes)
    E = model.eigen_block(np.arange(1, N + 1), nodes)
    eta, info = square_solve(E, f_evals, "collocation matrix")
    return EigenExpansion("qi", eta, info)


def els(model: SpectralModel, design, f_evals, q_evals, M: int) -> EigenExpansion:
    """Empirical least squares of order M for the discrete seminorm weighted
    by q at the nodes: solves G eta = d with
    G = (1/N) sum_i q_i e_m(x_i) e_m'(x_i), d = (1/N) sum_i q_i f_i e_m(x_i)."""
    nodes = _nodes_of(design)
    f_evals = np.asarray(f_evals, dtype=float)
    q_evals = np.asarray(q_evals, dtype=float)
    if M > len(nodes):
        raise ValueError("order M must not exceed the node count")
    E = model.eigen_block(np.arange(1, M + 1), nodes)
    G = (E * q_evals[:, None]).T @ E / len(nodes)
    d = E.T @ (q_evals * f_evals) / len(nodes)
    eta, info = sym_solve(G, d, "empirical gram")
    return EigenExpansion("els", eta, info)


def tels(model: SpectralModel, design, f_evals, M: int) -> EigenExpansion:
    """Truncated empirical least squares: the first M coefficients of the
    order-N quasi-interpolant.

    The full-order empirical least squares coincides with the
    quasi-interpolant and is invariant to the weight q, so the truncation is
    computed through the collocation solve rather than an M x M empirical
    system (whose solution differs in general).
    """
    nodes = _nodes_of(design)
    if M > len(nodes):
        raise ValueError("order M must not exceed the node count")
    full = qi_transform(model, design, f_evals)
    return EigenExpansion("tels", full.coeffs[:M].copy(), full.info)


def evaluate(model: SpectralModel, approx: Approximant, x) -> np.ndarray:
    """Pointwise values of an approximant."""
    if isinstance(approx, KernelMix):
        K = model.kernel_closed(x, approx.nodes)
        if K is None:
            ms = np.arange(1, model.truncation_order + 1)
            Ex = model.eigen_block(ms, x)
            En = model.eigen_block(ms, approx.nodes)
            K = (Ex * model.sigmas) @ En.T
        return K @ approx.weights
    ms = np.arange(1, approx.order + 1)
    return model.eigen_block(ms, x) @ approx.coeffs


def as_target(approx: EigenExpansion, name: str | None = None) -> TargetFunction:
    """View an eigen-expansion approximant as a target function."""
    return TargetFunction(approx.coeffs.copy(), name or approx.scheme)


def write_approximant(path, approx: Approximant) -> None:
    """Serialize an approximant to CSV: a header row with the scheme and
    representation kind, then one row per node (coordinates and weight) or
    per basis index (index and coefficient)."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if isinstance(approx, KernelMix):
            nodes = np.atleast_2d(approx.nodes.reshape(len(approx.nodes), -1))
            ndim = nodes.shape[1]
            writer.writerow([approx.scheme, "kernel_mix"])
            writer.writerow([f"coordinate_{i}" for i in range(ndim)] + ["weight"])
            for row, w in zip(nodes, approx.weights):
                writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])
        else:
            writer.writerow([approx.scheme, "eigen_expansion"])
            writer.writerow(["index", "coefficient"])
            for m, c in enumerate(approx.coeffs, start=1):
                writer.writerow([m, repr(float(c))])


def read_approximant(path) -> Approximant:
    """Read back an approximant written by :func:`write_approximant`.

    Solve diagnostics are not serialized; the returned object carries
    placeholder values."""
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    scheme, kind = rows[0]
    body = rows[2:]
    info = SolveInfo(float("nan"), float("nan"))
    if kind == "kernel_mix":
        vals = np.array([[float(v) for v in row] for row in body])
        nodes = vals[:, :-1]
        if nodes.shape[1] == 1:
            nodes = nodes[:, 0]
        return KernelMix(scheme, nodes, vals[:, -1], info)
    coeffs = np.array([float(row[1]) for row in body])
    return EigenExpansion(scheme, coeffs, info)

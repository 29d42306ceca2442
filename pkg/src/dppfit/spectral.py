"""Kernel families with exact spectral (Mercer) data.

Each model materializes a finite, non-increasing eigenvalue sequence together
with an evaluator for the matching L2(omega)-orthonormal eigenfunctions, where
omega is the uniform probability measure on the model's domain.  Infinite
spectra are truncated at a fixed order with an analytically certified bound on
the discarded tail, so that truncation error can always be attributed.

Families
--------
periodic_sobolev : translation-invariant kernel on [0, 1] whose eigenbasis is
    the Fourier basis; closed form in terms of Bernoulli polynomials.
sphere_sobolev   : dot-product kernel on the unit sphere S^2 with polynomially
    decaying eigenvalues repeated along spherical-harmonic multiplicities.
sinc_pswf        : Sinc kernel on a centered interval, diagonalized numerically
    in a normalized Legendre basis; eigenfunctions are the prolate spheroidal
    wave functions.
legendre         : nominal-spectrum carrier for the normalized Legendre basis,
    used to build projection designs that are not tied to a kernel's own
    eigenbasis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import special

# Eigenvalues computed below this value are clipped up to it and flagged;
# designs and Gram solves must not depend on spectral content under the floor.
MACHINE_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


class Interval:
    """Closed interval carrying the uniform probability measure."""

    ndim = 1

    def __init__(self, lo: float, hi: float):
        if not hi > lo:
            raise ValueError("empty interval")
        self.lo = float(lo)
        self.hi = float(hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, n)

    def envelope_grid(self, n: int = 4096) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)

    def quadrature(self, n: int = 10_000, panels: int = 100):
        """Composite Gauss-Legendre rule; weights sum to 1."""
        per = max(1, n // panels)
        t, w = npleg.leggauss(per)
        edges = np.linspace(self.lo, self.hi, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        ww = (half[:, None] * w[None, :]).ravel() / self.length
        return x, ww

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x)
        return (x >= self.lo) & (x <= self.hi)

    def __eq__(self, other):
        return isinstance(other, Interval) and (self.lo, self.hi) == (other.lo, other.hi)


class Sphere:
    """Unit sphere S^2 in R^3 with the uniform probability measure.

    Points are unit 3-vectors, arrays of shape (n, 3).
    """

    ndim = 3

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        v = rng.standard_normal((n, 3))
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def envelope_grid(self, n_theta: int = 200, n_phi: int = 400) -> np.ndarray:
        x, _ = self.quadrature(n_theta, n_phi)
        return x

    def quadrature(self, n_theta: int = 200, n_phi: int = 400):
        """Product rule: Gauss-Legendre in cos(theta) x uniform in phi."""
        u, wu = npleg.leggauss(n_theta)
        phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
        st = np.sqrt(1.0 - u**2)
        pts = np.empty((n_theta * n_phi, 3))
        pts[:, 0] = np.outer(st, np.cos(phi)).ravel()
        pts[:, 1] = np.outer(st, np.sin(phi)).ravel()
        pts[:, 2] = np.outer(u, np.ones(n_phi)).ravel()
        w = np.outer(wu / 2.0, np.full(n_phi, 1.0 / n_phi)).ravel()
        return pts, w

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x))
        return np.abs(np.linalg.norm(x, axis=-1) - 1.0) < 1e-9

    def __eq__(self, other):
        return isinstance(other, Sphere)


# ---------------------------------------------------------------------------
# target functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TargetFunction:
    """Function given by a finite expansion on the orthonormal eigenbasis.

    ``coeffs[i]`` is the L2(omega) inner product of f with eigenfunction
    ``i + 1`` (indices are 1-based everywhere in the public API).  This is the
    only target representation for which squared-error formulas close exactly.
    """

    coeffs: np.ndarray
    name: str = "f"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, coeffs: dict[int, float], name: str = "f") -> "TargetFunction":
        top = max(coeffs)
        c = np.zeros(top)
        for m, v in coeffs.items():
            if m < 1:
                raise ValueError("eigenfunction indices are 1-based")
            c[m - 1] = v
        return cls(c, name)

    @property
    def max_index(self) -> int:
        return len(self.coeffs)

    def coeff(self, m: int) -> float:
        return float(self.coeffs[m - 1]) if m <= len(self.coeffs) else 0.0

    def l2_norm_sq(self) -> float:
        return float(self.coeffs @ self.coeffs)

    def rkhs_norm_sq(self, model: "SpectralModel") -> float:
        sig = model.sigmas[: len(self.coeffs)]
        return float(np.sum(self.coeffs**2 / sig))

    def tail_sq(self, M: int) -> float:
        """Squared L2 distance to the projection on the first M eigenfunctions."""
        return float(np.sum(self.coeffs[M:] ** 2))

    def evaluate(self, model: "SpectralModel", x) -> np.ndarray:
        ms = np.arange(1, len(self.coeffs) + 1)
        return model.eigen_block(ms, x) @ self.coeffs


def eigen_target(model: "SpectralModel", m: int, rkhs_normalized: bool = True) -> TargetFunction:
    """Target e_m (or sqrt(sigma_m) e_m, the RKHS-normalized version)."""
    scale = math.sqrt(model.sigma(m)) if rkhs_normalized else 1.0
    return TargetFunction.from_dict({m: scale}, name=f"e{m}F" if rkhs_normalized else f"e{m}")


def random_gaussian_target(model: "SpectralModel", order: int, rng) -> TargetFunction:
    """Random element of the span of the first `order` RKHS-normalized
    eigenfunctions, with i.i.d. standard Gaussian coordinates."""
    rng = as_rng(rng)
    xi = rng.standard_normal(order)
    c = np.sqrt(model.sigmas[:order]) * xi
    return TargetFunction(c, name=f"gauss{order}")


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# model base
# ---------------------------------------------------------------------------


class SpectralModel:
    """Base class: immutable after construction; evaluators are pure."""

    family: str = "abstract"
    #: route Gram solves through the spectral factor D^{1/2} Phi^T instead of
    #: assembling the (possibly numerically singular) kernel matrix
    use_spectral_factor: bool = False

    def __init__(self, domain, sigmas: np.ndarray, tail_sigma: float, tail_sigma_sq: float):
        sigmas = np.asarray(sigmas, dtype=float)
        if sigmas.ndim != 1 or len(sigmas) < 1:
            raise ValueError("need at least one eigenvalue")
        if not np.all(sigmas > 0):
            raise ValueError("eigenvalues must be strictly positive")
        if np.any(np.diff(sigmas) > 0):
            raise ValueError("eigenvalues must be non-increasing")
        sigmas.setflags(write=False)
        self.domain = domain
        self.sigmas = sigmas
        self.tail_sigma = float(tail_sigma)
        self.tail_sigma_sq = float(tail_sigma_sq)
        self._cache: dict = {}

    # -- spectrum ----------------------------------------------------------

    @property
    def truncation_order(self) -> int:
        return len(self.sigmas)

    def sigma(self, m: int) -> float:
        """Eigenvalue of index m (1-based)."""
        return float(self.sigmas[m - 1])

    def design_eligible(self) -> np.ndarray:
        """1-based indices usable in sigma-weighted designs (excludes any
        floor-clipped part of the spectrum)."""
        return np.arange(1, self.truncation_order + 1)

    # -- evaluation --------------------------------------------------------

    def eigen_block(self, ms, x) -> np.ndarray:
        """Matrix e_m(x_i) of shape (npoints, len(ms)); ms is 1-based."""
        raise NotImplementedError

    def kernel_closed(self, x, y):
        """Closed-form kernel matrix k(x_i, y_j), or None if unavailable."""
        return None

    def kernel_sq_closed(self, x, y):
        """Closed-form matrix of the squared-spectrum kernel, if available."""
        return None

    @property
    def closed_form(self):
        return self.kernel_closed if type(self).kernel_closed is not SpectralModel.kernel_closed else None

    def kernel_nu_T(self, nu: int, T, x, y) -> np.ndarray:
        """Truncated kernel sum_{m in T} sigma_m^nu e_m(x) e_m(y)."""
        if nu not in (0, 1, 2):
            raise ValueError("nu must be 0, 1 or 2")
        T = self._check_indices(T)
        ex = self.eigen_block(T, x)
        ey = self.eigen_block(T, y)
        d = self.sigmas[T - 1] ** nu
        out = (ex * d) @ ey.T
        return out[0, 0] if out.size == 1 else out

    def gram(self, nu: int, pts) -> np.ndarray:
        """Kernel matrix k_nu(x_i, x_j), via closed form when one exists."""
        if nu == 1 and self.kernel_closed(pts, pts) is not None:
            return self.kernel_closed(pts, pts)
        if nu == 2 and self.kernel_sq_closed(pts, pts) is not None:
            return self.kernel_sq_closed(pts, pts)
        ms = np.arange(1, self.truncation_order + 1)
        Phi = self.eigen_block(ms, pts)
        return (Phi * self.sigmas**nu) @ Phi.T

    def spectral_factor(self, nu: int, pts) -> np.ndarray:
        """Factor B with B^T B = gram(nu, pts), over the materialized spectrum."""
        ms = np.arange(1, self.truncation_order + 1)
        Phi = self.eigen_block(ms, pts)
        return np.sqrt(self.sigmas**nu)[:, None] * Phi.T

    def kernel_diag(self, nu: int, pts) -> np.ndarray:
        """Diagonal k_nu(x, x) over the materialized spectrum."""
        ms = np.arange(1, self.truncation_order + 1)
        Phi = self.eigen_block(ms, pts)
        return (Phi**2) @ (self.sigmas**nu)

    def smoothed_eval(self, f: TargetFunction, x) -> np.ndarray:
        """Image of f under the kernel integral operator, evaluated at x."""
        if f.max_index > self.truncation_order:
            raise ValueError("target support exceeds the truncation order")
        ms = np.arange(1, f.max_index + 1)
        return self.eigen_block(ms, x) @ (self.sigmas[: f.max_index] * f.coeffs)

    # -- helpers -----------------------------------------------------------

    def _check_indices(self, ms) -> np.ndarray:
        ms = np.atleast_1d(np.asarray(ms, dtype=int))
        if ms.size and (ms.min() < 1 or ms.max() > self.truncation_order):
            raise IndexError(
                f"eigenfunction index out of range 1..{self.truncation_order}"
            )
        return ms

    def descriptor(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# periodic Sobolev family on [0, 1]
# ---------------------------------------------------------------------------


def bernoulli_poly(n: int, t: np.ndarray) -> np.ndarray:
    """Bernoulli polynomial B_n(t)."""
    bn = special.bernoulli(n)  # B_0 .. B_n
    coeffs = np.array([math.comb(n, k) * bn[n - k] for k in range(n + 1)])
    return np.polynomial.polynomial.polyval(t, coeffs)


def _zeta_tail(p: float, k: int) -> float:
    """Upper bound on sum_{j > k} j^(-p) for p > 1 by the integral test."""
    return float(k) ** (1.0 - p) / (p - 1.0)


class PeriodicSobolevModel(SpectralModel):
    """Periodic kernel on [0, 1] with Fourier eigenbasis.

    Eigenpairs (1-based, ties broken cosine before sine):
      m = 1          -> e = 1,                       sigma = 1
      m = 2j, 2j+1   -> sqrt(2) cos(2 pi j x),
                        sqrt(2) sin(2 pi j x),       sigma = j^(-2s)
    """

    family = "periodic_sobolev"

    def __init__(self, s: int, M_spec: int = 2000):
        if s < 1 or int(s) != s:
            raise ValueError("smoothness order s must be an integer >= 1")
        if M_spec < 1:
            raise ValueError("M_spec must be >= 1")
        self.s = int(s)
        idx = np.arange(M_spec)
        j = (idx + 1) // 2
        sig = np.ones(M_spec)
        sig[1:] = j[1:].astype(float) ** (-2.0 * s)
        # complete cosine/sine pairs are materialized up to frequency K,
        # plus a lone cosine of frequency K+1 when M_spec is even
        K = (M_spec - 1) // 2
        if M_spec % 2 == 0:
            tail = (K + 1.0) ** (-2.0 * s) + 2.0 * _zeta_tail(2.0 * s, K + 1)
            tail_sq = (K + 1.0) ** (-4.0 * s) + 2.0 * _zeta_tail(4.0 * s, K + 1)
        elif K == 0:
            tail = 2.0 + 2.0 * _zeta_tail(2.0 * s, 1)
            tail_sq = 2.0 + 2.0 * _zeta_tail(4.0 * s, 1)
        else:
            tail = 2.0 * _zeta_tail(2.0 * s, K)
            tail_sq = 2.0 * _zeta_tail(4.0 * s, K)
        super().__init__(Interval(0.0, 1.0), sig, tail, tail_sq)

    def eigen_block(self, ms, x) -> np.ndarray:
        ms = self._check_indices(ms)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = ms - 1
        j = (idx + 1) // 2
        ang = 2.0 * np.pi * np.outer(x, j)
        out = np.where(idx % 2 == 1, np.sqrt(2.0) * np.cos(ang), np.sqrt(2.0) * np.sin(ang))
        out[:, idx == 0] = 1.0
        return out

    def _bernoulli_kernel(self, order: int, x, y) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        t = np.mod(np.subtract.outer(x, y), 1.0)
        n = 2 * order
        amp = (-1.0) ** (order - 1) * (2.0 * np.pi) ** n / math.factorial(n)
        return 1.0 + amp * bernoulli_poly(n, t)

    def kernel_closed(self, x, y):
        return self._bernoulli_kernel(self.s, x, y)

    def kernel_sq_closed(self, x, y):
        return self._bernoulli_kernel(2 * self.s, x, y)

    def descriptor(self) -> dict:
        return {"family": self.family, "s": self.s, "M_spec": self.truncation_order}


def make_periodic_sobolev(s: int, M_spec: int = 2000) -> PeriodicSobolevModel:
    return PeriodicSobolevModel(s, M_spec)


# ---------------------------------------------------------------------------
# Sobolev-like family on the sphere S^2
# ---------------------------------------------------------------------------


def harmonic_count(d: int, ell: int) -> int:
    """Number of linearly independent spherical harmonics of exact degree
    ell on S^(d-1): (2 ell + d - 2) Gamma(ell + d - 2) / (Gamma(d-1) Gamma(ell + 1));
    equal to 2 ell + 1 when d = 3."""
    if ell == 0:
        return 1
    num = (2 * ell + d - 2) * math.gamma(ell + d - 2)
    return round(num / (math.gamma(d - 1) * math.gamma(ell + 1)))


class SphereSobolevModel(SpectralModel):
    """Dot-product kernel on S^2 with eigenvalues (1 + ell)^(-2s).

    Each eigenvalue is repeated along the 2 ell + 1 real spherical harmonics
    of degree ell, ordered as: zonal (order 0), then (order q cosine,
    order q sine) for q = 1..ell.  No closed form; the kernel and its
    squared-spectrum companion are truncated sums with a certified tail.
    """

    family = "sphere_sobolev"

    def __init__(self, d: int, s: float, L_max: int = 60):
        if d != 3:
            raise ValueError(
                f"unsupported dimension d={d}: real spherical harmonics are "
                "implemented for d = 3 only"
            )
        if s < 1.0:
            raise ValueError("smoothness order s must be >= (d - 1) / 2 = 1")
        if L_max < 0:
            raise ValueError("L_max must be >= 0")
        self.d = d
        self.s = float(s)
        self.L_max = int(L_max)
        degs = np.arange(L_max + 1)
        sig = np.repeat((1.0 + degs) ** (-2.0 * s), 2 * degs + 1)
        L1 = float(L_max + 1)
        if s > 1.0:
            # sum_{l > L} (2l+1)(1+l)^(-2s) <= 2 int_{L+1}^inf u^(1-2s) du
            tail = 2.0 * L1 ** (2.0 - 2.0 * s) / (2.0 * s - 2.0)
        else:
            tail = math.inf  # trace tail diverges at the boundary order
        tail_sq = 2.0 * L1 ** (2.0 - 4.0 * s) / (4.0 * s - 2.0)
        super().__init__(Sphere(), sig, tail, tail_sq)
        # per-index (degree, order, is_sine) lookup
        ell = np.repeat(degs, 2 * degs + 1)
        pos = np.arange(len(sig)) - np.repeat(np.cumsum(2 * degs + 1) - (2 * degs + 1), 2 * degs + 1)
        self._ell = ell
        self._order = (pos + 1) // 2
        self._is_sine = (pos > 0) & (pos % 2 == 0)

    @property
    def tail_divergent(self) -> bool:
        return not math.isfinite(self.tail_sigma)

    def eigen_block(self, ms, x) -> np.ndarray:
        ms = self._check_indices(ms)
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        theta = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
        phi = np.arctan2(pts[:, 1], pts[:, 0])
        idx = ms - 1
        Lneed = int(self._ell[idx].max()) if idx.size else 0
        Y = special.sph_harm_y_all(Lneed, Lneed, theta, phi)  # (L+1, 2L+1, n)
        out = np.empty((len(pts), len(idx)))
        r4pi = math.sqrt(4.0 * math.pi)
        for col, i in enumerate(idx):
            ell, q, sine = int(self._ell[i]), int(self._order[i]), bool(self._is_sine[i])
            if q == 0:
                vals = Y[ell, 0].real
            else:
                z = Y[ell, q] * ((-1.0) ** q) * math.sqrt(2.0)
                vals = z.imag if sine else z.real
            out[:, col] = r4pi * vals
        return out

    def degree_slice(self, ell: int) -> np.ndarray:
        """1-based indices of the eigenfunctions of exact degree ell."""
        return np.where(self._ell == ell)[0] + 1

    def descriptor(self) -> dict:
        return {"family": self.family, "d": self.d, "s": self.s, "L_max": self.L_max}


def make_sphere_sobolev(d: int, s: float, L_max: int = 60) -> SphereSobolevModel:
    return SphereSobolevModel(d, s, L_max)


# ---------------------------------------------------------------------------
# Sinc kernel / prolate spheroidal wave functions
# ---------------------------------------------------------------------------


class SincPSWFModel(SpectralModel):
    """Sinc kernel on [-T/2, T/2], diagonalized in the normalized Legendre basis.

    The integral operator is discretized as a symmetric Galerkin matrix whose
    entries are computed with a Gauss-Legendre rule of order at least twice
    the basis size.  Eigenvalues decay exponentially past the time-bandwidth
    plunge; values under the machine floor are clipped up to it and flagged,
    and the clipped part of the spectrum is excluded from sigma-weighted
    designs.  Gram solves route through the clipped spectral factor so they
    never touch sub-floor spectral content.
    """

    family = "sinc_pswf"
    use_spectral_factor = True

    def __init__(self, T_len: float, F: float, legendre_order: int = 128):
        if T_len <= 0 or F <= 0:
            raise ValueError("T_len and F must be positive")
        if legendre_order < 20:
            raise ValueError("legendre_order must be >= 20")
        self.T_len = float(T_len)
        self.F = float(F)
        self.legendre_order = int(legendre_order)

        nq = 2 * legendre_order + 32
        t, w = npleg.leggauss(nq)
        xq = t * (T_len / 2.0)
        wq = w / 2.0  # probability weights on [-T/2, T/2]
        norms = np.sqrt(2.0 * np.arange(legendre_order) + 1.0)
        Phi = npleg.legvander(t, legendre_order - 1) * norms
        K = self._sinc(xq, xq)
        WPhi = wq[:, None] * Phi
        A = WPhi.T @ K @ WPhi
        A = 0.5 * (A + A.T)
        raw, V = np.linalg.eigh(A)
        raw, V = raw[::-1], V[:, ::-1]
        if raw[-1] < -1e-10:
            raise ValueError(
                f"Galerkin matrix is not positive semidefinite: min eigenvalue {raw[-1]:.3e}"
            )
        self.clip_count = int(np.sum(raw < MACHINE_FLOOR))
        sig = np.maximum(raw, MACHINE_FLOOR)
        self._legendre_norms = norms
        self._eigvecs = V  # columns: Legendre coefficients of eigenfunctions

        tail = max(0.0, 1.0 - float(np.sum(np.maximum(raw, 0.0))))
        hs_sq = float(wq @ (K * K) @ wq)  # Hilbert-Schmidt norm squared
        tail_sq = max(0.0, hs_sq - float(np.sum(np.maximum(raw, 0.0) ** 2)))
        super().__init__(Interval(-T_len / 2.0, T_len / 2.0), sig, tail, tail_sq)

    def _sinc(self, x, y) -> np.ndarray:
        u = self.F * np.subtract.outer(np.atleast_1d(x), np.atleast_1d(y))
        safe = np.where(u == 0.0, 1.0, u)
        return np.where(u == 0.0, 1.0, np.sin(safe) / safe)

    def eigen_block(self, ms, x) -> np.ndarray:
        ms = self._check_indices(ms)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        P = npleg.legvander(2.0 * x / self.T_len, self.legendre_order - 1) * self._legendre_norms
        return P @ self._eigvecs[:, ms - 1]

    def kernel_closed(self, x, y):
        return self._sinc(x, y)

    def design_eligible(self) -> np.ndarray:
        top = self.truncation_order - self.clip_count
        return np.arange(1, top + 1)

    def eigenfunction_coefficients(self, m: int) -> np.ndarray:
        """Normalized-Legendre coefficient vector of eigenfunction m."""
        self._check_indices([m])
        return self._eigvecs[:, m - 1].copy()

    def descriptor(self) -> dict:
        return {
            "family": self.family,
            "T_len": self.T_len,
            "F": self.F,
            "legendre_order": self.legendre_order,
        }


def make_sinc_pswf(T_len: float, F: float, legendre_order: int = 128) -> SincPSWFModel:
    return SincPSWFModel(T_len, F, legendre_order)


# ---------------------------------------------------------------------------
# normalized Legendre basis carrier
# ---------------------------------------------------------------------------


class LegendreModel(SpectralModel):
    """Normalized Legendre basis on a centered interval with a nominal
    geometric spectrum.

    This model exists to build projection designs on a polynomial basis;
    its spectrum carries no modeling meaning and it is not intended as a
    reconstruction kernel.
    """

    family = "legendre"
    use_spectral_factor = True

    def __init__(self, T_len: float, M_spec: int = 128):
        if T_len <= 0:
            raise ValueError("T_len must be positive")
        if M_spec < 1:
            raise ValueError("M_spec must be >= 1")
        self.T_len = float(T_len)
        sig = 0.5 ** np.arange(1, M_spec + 1)
        super().__init__(Interval(-T_len / 2.0, T_len / 2.0), sig, 0.5**M_spec, (0.25**M_spec) / 3.0)

    def eigen_block(self, ms, x) -> np.ndarray:
        ms = self._check_indices(ms)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        norms = np.sqrt(2.0 * np.arange(self.truncation_order) + 1.0)
        P = npleg.legvander(2.0 * x / self.T_len, self.truncation_order - 1) * norms
        return P[:, ms - 1]

    def descriptor(self) -> dict:
        return {"family": self.family, "T_len": self.T_len, "M_spec": self.truncation_order}


def make_legendre(T_len: float, M_spec: int = 128) -> LegendreModel:
    return LegendreModel(T_len, M_spec)


# ---------------------------------------------------------------------------
# factory / serialization
# ---------------------------------------------------------------------------

_FAMILIES = {
    "periodic_sobolev": lambda d: make_periodic_sobolev(d["s"], d.get("M_spec", 2000)),
    "sphere_sobolev": lambda d: make_sphere_sobolev(d.get("d", 3), d["s"], d.get("L_max", 60)),
    "sinc_pswf": lambda d: make_sinc_pswf(d["T_len"], d["F"], d.get("legendre_order", 128)),
    "legendre": lambda d: make_legendre(d["T_len"], d.get("M_spec", 128)),
}


def make_model(descriptor: dict) -> SpectralModel:
    """Build a model from its serialized descriptor block."""
    try:
        build = _FAMILIES[descriptor["family"]]
    except KeyError as exc:
        raise ValueError(f"unknown kernel family: {descriptor.get('family')!r}") from exc
    return build(descriptor)

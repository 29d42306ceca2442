"""Dense symmetric solves with explicit, typed conditioning failures.

Every solved system reports its smallest singular value and the condition
number that was compared against the failure threshold.  No ridge or other
regularization is ever applied: an ill-conditioned system is an error, not
something to damp silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Condition number beyond which a solve is declared a failure.
COND_THRESHOLD = 1e12


class IllConditionedSystem(RuntimeError):
    """Raised when a linear system is singular or beyond the condition gate."""

    def __init__(self, what: str, condition: float, min_singular_value: float):
        super().__init__(
            f"{what}: condition estimate {condition:.3e} exceeds "
            f"{COND_THRESHOLD:.0e} (min singular value {min_singular_value:.3e})"
        )
        self.what = what
        self.condition = condition
        self.min_singular_value = min_singular_value


@dataclass(frozen=True)
class SolveInfo:
    """Diagnostics of a linear solve.

    ``condition`` is the quantity compared against the failure threshold;
    for factored solves this is the condition number of the factor actually
    decomposed, whose square is the condition of the assembled Gram matrix.
    """

    min_singular_value: float
    condition: float


def sym_solve(K: np.ndarray, rhs: np.ndarray, what: str = "gram system"):
    """Solve the symmetric system K x = rhs via eigendecomposition.

    Returns ``(x, SolveInfo)``.  Raises :class:`IllConditionedSystem` when
    the condition number exceeds the threshold or an eigenvalue is not
    strictly positive.
    """
    K = np.asarray(K, dtype=float)
    vals, vecs = np.linalg.eigh(0.5 * (K + K.T))
    smin, smax = vals[0], vals[-1]
    if smin <= 0.0 or not np.isfinite(smax):
        raise IllConditionedSystem(what, np.inf, float(smin))
    cond = smax / smin
    if cond > COND_THRESHOLD:
        raise IllConditionedSystem(what, float(cond), float(smin))
    x = vecs @ ((vecs.T @ rhs) / vals)
    return x, SolveInfo(float(smin), float(cond))


def factor_solve(B: np.ndarray, rhs: np.ndarray, what: str = "factored gram system"):
    """Solve (B^T B) x = rhs through an SVD of the factor B.

    This is the numerically preferred route when the Gram matrix is known in
    factored form B^T B: the factor's condition number is the square root of
    the Gram's, so systems whose assembled matrix would be numerically
    singular remain solvable without any regularization.
    """
    B = np.asarray(B, dtype=float)
    _, s, Vt = np.linalg.svd(B, full_matrices=False)
    n = B.shape[1]
    if len(s) < n or s[-1] <= 0.0:
        raise IllConditionedSystem(what, np.inf, 0.0)
    cond = s[0] / s[-1]
    if cond > COND_THRESHOLD:
        raise IllConditionedSystem(what, float(cond), float(s[-1] ** 2))
    x = Vt.T @ ((Vt @ rhs) / s**2)
    return x, SolveInfo(float(s[-1] ** 2), float(cond))


def square_solve(A: np.ndarray, rhs: np.ndarray, what: str = "square system"):
    """Solve a general square system A x = rhs with an SVD condition gate."""
    A = np.asarray(A, dtype=float)
    U, s, Vt = np.linalg.svd(A)
    if s[-1] <= 0.0:
        raise IllConditionedSystem(what, np.inf, float(s[-1]))
    cond = s[0] / s[-1]
    if cond > COND_THRESHOLD:
        raise IllConditionedSystem(what, float(cond), float(s[-1]))
    x = Vt.T @ ((U.T @ rhs) / s)
    return x, SolveInfo(float(s[-1]), float(cond))

"""Dense linear algebra for Sigma-Delta error analysis.

Matrices are plain 2-D ``numpy.ndarray`` objects of float64. The difference
operator ``D`` is lower bidiagonal (1 on the diagonal, -1 below it), so
``D^{-1}`` is the all-ones lower-triangular matrix and ``D^{-r}`` has the
closed-form entries ``binom(i - j + r - 1, r - 1)`` for ``i >= j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import comb

# Relative rank tolerance used by the pseudo-inverse.
RANK_TOL = 1e-12
# Largest integer exactly representable in float64.
EXACT_INT_LIMIT = 2.0**53


class LinalgError(Exception):
    """Base class for errors raised by this module."""


class CapacityError(LinalgError):
    """An exact integer matrix would not fit in float64 without rounding."""


class SingularMatrixError(LinalgError):
    def __init__(self, smallest: float, largest: float):
        self.smallest = smallest
        self.largest = largest
        super().__init__(
            f"matrix is numerically rank deficient: sigma_min={smallest:.3e}, "
            f"sigma_max={largest:.3e}"
        )


class NumericalFailure(LinalgError):
    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.3e})")


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray

    def reconstruct(self) -> np.ndarray:
        m, n = self.u.shape[0], self.vt.shape[0]
        s = np.zeros((m, n))
        p = len(self.singular_values)
        s[:p, :p] = np.diag(self.singular_values)
        return self.u @ s @ self.vt


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` as a finite, non-empty 2-D float matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def difference_matrix(m: int) -> np.ndarray:
    """The m x m first-order difference matrix D."""
    if m < 1:
        raise ValueError("m must be positive")
    return np.eye(m) - np.eye(m, k=-1)


def difference_power(m: int, r: int) -> np.ndarray:
    """D^r; entry (i, j) is (-1)^(i-j) binom(r, i-j)."""
    if m < 1 or r < 0:
        raise ValueError("need m >= 1 and r >= 0")
    out = np.zeros((m, m))
    for t in range(min(r, m - 1) + 1):
        out += (-1) ** t * comb(r, t, exact=True) * np.eye(m, k=-t)
    return out


def max_inverse_difference_entry(m: int, r: int) -> int:
    """Largest entry of D^{-r}, attained in the bottom-left corner."""
    return comb(m - 1 + r - 1, r - 1, exact=True)


@lru_cache(maxsize=32)
def _inverse_difference_power(m: int, r: int) -> np.ndarray:
    # binom(t + r - 1, r - 1) for t = 0..m-1, via exact int64 running sums
    coeffs = np.ones(m, dtype=np.int64)
    for _ in range(r - 1):
        coeffs = np.cumsum(coeffs)
    out = toeplitz(coeffs.astype(float), np.zeros(m))
    out.setflags(write=False)
    return out


def inverse_difference_power(m: int, r: int) -> np.ndarray:
    """D^{-r} from its binomial closed form.

    Raises CapacityError when the largest entry exceeds 2**53, beyond which
    float64 can no longer hold the integers exactly.
    """
    if m < 1 or r < 1:
        raise ValueError("need m >= 1 and r >= 1")
    peak = max_inverse_difference_entry(m, r)
    if peak > EXACT_INT_LIMIT:
        raise CapacityError(
            f"D^-{r} for m={m} has entries up to {peak}, above 2**53"
        )
    return _inverse_difference_power(m, r).copy()


def apply_inverse_difference(x: np.ndarray, r: int) -> np.ndarray:
    """Compute D^{-r} @ x by r running sums along axis 0."""
    out = np.asarray(x, dtype=float)
    for _ in range(r):
        out = np.cumsum(out, axis=0)
    return out


def apply_difference(x: np.ndarray, r: int) -> np.ndarray:
    """Compute D^r @ x with zero initial conditions."""
    out = np.asarray(x, dtype=float)
    for _ in range(r):
        out = np.diff(out, axis=0, prepend=np.zeros((1,) + out.shape[1:]))
    return out


def svd(a, full_matrices: bool = True, check: bool = True) -> SvdResult:
    """Singular value decomposition backed by LAPACK.

    With ``check`` set, the factorization is verified against the input and
    a NumericalFailure is raised if the relative Frobenius residual exceeds
    1e-9.
    """
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    result = SvdResult(u, s, vt)
    if check:
        k = len(s)
        residual = np.linalg.norm(a - (u[:, :k] * s) @ vt[:k]) / max(
            np.linalg.norm(a), np.finfo(float).tiny
        )
        if residual > 1e-9:
            raise NumericalFailure("SVD reconstruction check failed", residual)
    return result


def singular_values(a) -> np.ndarray:
    a = as_matrix(a)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


def smallest_singular_value(a) -> float:
    return float(singular_values(a).min())


def operator_norm(a) -> float:
    return float(singular_values(a).max())


def pseudo_inverse(a) -> np.ndarray:
    """Moore-Penrose left inverse (A^T A)^{-1} A^T of a full-column-rank A."""
    a = as_matrix(a)
    m, n = a.shape
    if m < n:
        raise SingularMatrixError(0.0, operator_norm(a))
    res = svd(a, full_matrices=False)
    s = res.singular_values
    if s[-1] <= RANK_TOL * s[0]:
        raise SingularMatrixError(float(s[-1]), float(s[0]))
    return (res.vt.T / s) @ res.u.T


def sobolev_dual(e, r: int) -> np.ndarray:
    """The r-th order Sobolev dual F = (D^{-r} E)^dagger D^{-r}.

    F is the left inverse of E minimizing the operator norm of F D^r.
    """
    e = as_matrix(e)
    m, _ = e.shape
    d_inv = inverse_difference_power(m, r)
    return pseudo_inverse(d_inv @ e) @ d_inv


def l2_to_linf_norm(a) -> float:
    """Operator norm from l2 to l-infinity, i.e. the largest row norm."""
    a = as_matrix(a)
    return float(np.sqrt((a * a).sum(axis=1)).max())

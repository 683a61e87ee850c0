"""Dense complex linear algebra used by the local Fourier extension solvers.

The factorizations themselves come from LAPACK through :mod:`numpy.linalg`;
this module fixes a deterministic phase convention on top of them and adds
the truncated-SVD pseudo-solve and the one-unknown least-squares kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_EPS_REL = 1e-12


class DegenerateSystemError(ValueError):
    """Raised when truncation discards every singular value."""


class NoConstraintError(ValueError):
    """Raised when a one-unknown problem carries no information on the unknown."""


@dataclass(frozen=True)
class SvdFactors:
    """Factors of ``A = U @ diag(S) @ V^H``.

    ``U`` is ``m x k`` and ``V`` is ``n x r`` with ``r = min(m, n)``; ``k`` equals
    ``r`` for the thin factorization and ``m`` for the full one. Columns of
    ``U`` beyond ``r`` span the left null space and carry singular value zero.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.shape[0], self.V.shape[0]

    @property
    def full(self) -> bool:
        return self.U.shape[1] > self.S.shape[0]

    def padded_singular_values(self) -> np.ndarray:
        """Singular values extended with zeros to match the columns of ``U``."""
        out = np.zeros(self.U.shape[1])
        out[: self.S.size] = self.S
        return out

    def reconstruct(self) -> np.ndarray:
        r = self.S.size
        return (self.U[:, :r] * self.S) @ self.V.conj().T

    def retained_count(self, eps_rel: float = DEFAULT_EPS_REL) -> int:
        return retained_count(self.S, eps_rel)


def _as_complex_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _fix_phases(u: np.ndarray, v: np.ndarray, r: int) -> None:
    # Largest-magnitude entry of every U column made real and positive; the
    # first r columns carry the same rotation into V so that A is unchanged.
    idx = np.argmax(np.abs(u), axis=0)
    lead = u[idx, np.arange(u.shape[1])]
    phase = np.ones(u.shape[1], dtype=complex)
    nz = np.abs(lead) > 0
    phase[nz] = lead[nz].conj() / np.abs(lead[nz])
    u *= phase
    v *= phase[:r]


def svd(a, full: bool = False) -> SvdFactors:
    """Singular value decomposition with a reproducible column phase.

    Parameters
    ----------
    a : array_like
        Complex (or real) ``m x n`` matrix with finite entries.
    full : bool
        Return all ``m`` left singular vectors instead of ``min(m, n)``.
    """
    a = _as_complex_matrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=full)
    r = s.size
    v = vh[:r].conj().T.copy()
    u = u.copy()
    _fix_phases(u, v, r)
    return SvdFactors(U=u, S=s, V=v)


def retained_count(s: np.ndarray, eps_rel: float = DEFAULT_EPS_REL) -> int:
    """Number of singular values strictly above ``eps_rel * s[0]``."""
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > eps_rel * s[0]))


def tsvd_solve(factors: SvdFactors, b, eps_rel: float = DEFAULT_EPS_REL,
               return_count: bool = False):
    """Truncated-SVD least-squares solution ``V_I diag(1/S_I) U_I^H b``.

    ``b`` may be a vector or a matrix whose columns are independent right-hand
    sides. The projection ``U_I^H b`` is formed before the division by the
    singular values; forming the pseudo-inverse first loses several digits
    on Fourier extension matrices.
    """
    if not 0 <= eps_rel < 1:
        raise ValueError(f"eps_rel must lie in [0, 1), got {eps_rel}")
    b = np.asarray(b, dtype=complex)
    m = factors.U.shape[0]
    if b.shape[0] != m:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {m}")
    count = retained_count(factors.S, eps_rel)
    if count == 0:
        raise DegenerateSystemError("all singular values fall below the truncation threshold")
    s = factors.S[:count]
    proj = factors.U[:, :count].conj().T @ b
    proj = proj / (s if b.ndim == 1 else s[:, None])
    x = factors.V[:, :count] @ proj
    return (x, count) if return_count else x


def lstsq_one_var(a, b) -> complex:
    """Minimizer of ``||b + a * alpha||_2`` over a single complex ``alpha``."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if not scale > 0:
        raise NoConstraintError("coefficient vector vanishes; the unknown is undetermined")
    a_n = a / scale
    return complex(-np.vdot(a_n, b) / np.vdot(a_n, a_n).real / scale)

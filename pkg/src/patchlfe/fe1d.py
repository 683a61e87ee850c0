"""One-dimensional TSVD-stabilized Fourier extension operators.

A Fourier extension of order ``N`` represents data sampled on
``[0, 2*pi/T]`` by ``sum_{l=-N..N} c_l exp(i l t)``, a series that is periodic
on the larger interval ``[0, 2*pi]``. Coefficients are always stored in
``l = -N, ..., N`` order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_EPS_REL,
    DegenerateSystemError,
    NoConstraintError,
    SvdFactors,
    lstsq_one_var,
    retained_count,
    svd,
)


class CompletionImpossibleError(ValueError):
    """Raised when an operator has no discarded singular direction to exploit."""


@dataclass(frozen=True)
class Fe1dParams:
    """Parameters of a one-dimensional Fourier extension.

    Attributes
    ----------
    T : float
        Extension parameter; the data interval is ``[0, 2*pi/T]``.
    N : int
        Fourier order; modes ``|l| <= N``.
    gamma : float
        Oversampling ratio, ``m = floor(gamma * (2N + 1))`` uniform nodes.
    eps_rel : float
        Relative TSVD truncation threshold.
    """

    T: float = 4.0
    N: int = 10
    gamma: float = 1.2
    eps_rel: float = DEFAULT_EPS_REL

    def __post_init__(self):
        if not self.T > 1:
            raise ValueError(f"T must exceed 1, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.gamma >= 1:
            raise ValueError(f"gamma must be at least 1, got {self.gamma}")
        if not 0 <= self.eps_rel < 1:
            raise ValueError(f"eps_rel must lie in [0, 1), got {self.eps_rel}")

    @property
    def q(self) -> int:
        return 2 * self.N + 1

    @property
    def m(self) -> int:
        # The tiny offset keeps products such as 1.2 * 25 = 30 from rounding down.
        return int(math.floor(self.gamma * self.q + 1e-9))

    @property
    def length(self) -> float:
        return interval_length(self.T)


def interval_length(T: float) -> float:
    """Length ``2*pi/T`` of the data interval."""
    return 2.0 * math.pi / T


def effective_frequency(omega: float, width: float, T: float) -> float:
    """Oscillation rate ``omega * width * T / (2*pi)`` seen by the local series."""
    return omega * width * T / (2.0 * math.pi)


def modes(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def fe_matrix(points, N: int) -> np.ndarray:
    """Matrix with entries ``exp(i l t_k)`` for ``l = -N..N``."""
    points = np.asarray(points, dtype=float)
    return np.exp(1j * np.multiply.outer(points, modes(N)))


@dataclass(frozen=True)
class Fe1dOperator:
    """A node set, its Fourier extension matrix and the matrix's SVD."""

    params: Fe1dParams
    nodes: np.ndarray
    A: np.ndarray = field(repr=False)
    factors: SvdFactors = field(repr=False)
    retained: int

    @property
    def m(self) -> int:
        return self.nodes.size

    @property
    def q(self) -> int:
        return self.params.q

    def transfer_matrix(self, targets) -> np.ndarray:
        """Matrix mapping node values to the fitted series at ``targets``.

        Equivalent to ``fe_matrix(targets) @ pinv_I(A)``, assembled so that
        the division by small singular values happens after the projection
        onto ``V``.
        """
        i = self.retained
        ev = fe_matrix(targets, self.params.N) @ self.factors.V[:, :i]
        return (ev / self.factors.S[:i]) @ self.factors.U[:, :i].conj().T

    def projector(self) -> np.ndarray:
        """Node-to-node projection ``Q = U_I U_I^H`` onto the fitted values."""
        u = self.factors.U[:, : self.retained]
        return u @ u.conj().T


def _make_operator(nodes: np.ndarray, p: Fe1dParams) -> Fe1dOperator:
    a = fe_matrix(nodes, p.N)
    f = svd(a)
    return Fe1dOperator(params=p, nodes=nodes, A=a, factors=f,
                        retained=retained_count(f.S, p.eps_rel))


def uniform_nodes(p: Fe1dParams, m: int | None = None) -> np.ndarray:
    m = p.m if m is None else m
    return np.linspace(0.0, p.length, m)


def build_uniform_operator(p: Fe1dParams) -> Fe1dOperator:
    """Operator on ``m = floor(gamma * q)`` equispaced nodes including both ends."""
    if p.m < 2:
        raise ValueError(f"need at least two nodes, got m={p.m}")
    return _make_operator(uniform_nodes(p), p)


def build_custom_operator(nodes, p: Fe1dParams) -> Fe1dOperator:
    """Operator on caller-supplied sorted nodes in ``[0, 2*pi/T]``."""
    nodes = np.array(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise ValueError("need a 1-D array of at least two nodes")
    length = p.length
    tol = 1e-12 * length
    if nodes[0] < -tol or nodes[-1] > length + tol:
        raise ValueError("nodes must lie within [0, 2*pi/T]")
    if np.any(np.diff(nodes) < tol):
        raise ValueError("nodes must be strictly increasing and distinct")
    return _make_operator(nodes, p)


def solve_coeffs(op: Fe1dOperator, values) -> np.ndarray:
    """TSVD coefficients of ``values`` sampled at ``op.nodes``.

    ``values`` may carry extra trailing axes; each is solved independently.
    """
    values = np.asarray(values, dtype=complex)
    if values.shape[0] != op.m:
        raise ValueError(f"expected {op.m} values, got {values.shape[0]}")
    i = op.retained
    f = op.factors
    proj = f.U[:, :i].conj().T @ values
    proj = proj / f.S[:i].reshape((i,) + (1,) * (values.ndim - 1))
    return f.V[:, :i] @ proj


def eval_series(coeffs, T: float, points) -> np.ndarray:
    """Evaluate ``sum_l c_l exp(i l t)`` at ``points``.

    ``T`` fixes the data interval only; the series itself does not depend on
    it and the argument is kept for symmetry with the 2-D evaluator.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape[0] % 2 != 1:
        raise ValueError("coefficient count must be odd")
    N = (coeffs.shape[0] - 1) // 2
    return fe_matrix(points, N) @ coeffs


def transfer(op: Fe1dOperator, values, targets) -> np.ndarray:
    """Fit ``values`` at the operator nodes and evaluate at ``targets``.

    Mathematically ``eval_series(solve_coeffs(op, values), T, targets)``.
    The coefficients of a TSVD fit can be many orders of magnitude larger
    than the data, and summing the series then cancels catastrophically;
    the fused :meth:`Fe1dOperator.transfer_matrix` keeps every
    intermediate quantity of data size.
    """
    return op.transfer_matrix(targets) @ np.asarray(values, dtype=complex)


def batched_transfer_matrices(node_sets, p: Fe1dParams, targets) -> np.ndarray:
    """Transfer matrices of many custom node sets, from one stacked SVD.

    Node sets of different sizes are zero-padded to a common row count.
    Zero rows leave each matrix's singular values and right singular
    vectors unchanged and receive zero columns in the result, so padded
    data entries never contribute. Returns an array of shape
    ``(len(node_sets), len(targets), max_size)``; entry ``k`` restricted to
    its first ``len(node_sets[k])`` columns equals
    ``build_custom_operator(node_sets[k], p).transfer_matrix(targets)`` up
    to rounding.
    """
    count = len(node_sets)
    rows = max(len(n) for n in node_sets)
    length = p.length
    tol = 1e-12 * length
    a = np.zeros((count, rows, p.q), dtype=complex)
    for k, nodes in enumerate(node_sets):
        nodes = np.asarray(nodes, dtype=float)
        if nodes.size < 2 or nodes[0] < -tol or nodes[-1] > length + tol or np.any(np.diff(nodes) < tol):
            raise ValueError(f"node set {k} must be increasing, distinct and within [0, 2*pi/T]")
        a[k, : nodes.size] = fe_matrix(nodes, p.N)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    keep = s > p.eps_rel * s[:, :1]
    if not keep[:, 0].all():
        raise DegenerateSystemError("a column matrix has no singular value above the threshold")
    w = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    # Same ordering as Fe1dOperator.transfer_matrix: evaluate the right
    # singular functions first, then scale, then apply U^H.
    ev = fe_matrix(targets, p.N) @ vh.conj().transpose(0, 2, 1)
    return (ev * w[:, None, :]) @ u.conj().transpose(0, 2, 1)


def _discarded_left(op: Fe1dOperator) -> np.ndarray:
    full = svd(op.A, full=True)
    s = full.padded_singular_values()
    discarded = s <= op.params.eps_rel * s[0]
    if not discarded.any():
        raise CompletionImpossibleError(
            "every left singular direction is retained; nothing constrains the extra node")
    u0 = full.U[:, discarded]
    if np.linalg.norm(u0[-1]) < 1e-14:
        raise NoConstraintError("discarded directions do not involve the extra node")
    return u0


def complete_one_value(op: Fe1dOperator, known) -> complex:
    """Recover the value at the operator's last node from the others.

    The completed vector is chosen to have the smallest component in the
    left singular directions that truncation discards. Those directions
    include the left null space of a tall matrix, which carries singular
    value zero.
    """
    known = np.asarray(known, dtype=complex)
    if known.shape != (op.m - 1,):
        raise ValueError(f"expected {op.m - 1} known values, got shape {known.shape}")
    u0 = _discarded_left(op)
    return lstsq_one_var(u0[-1].conj(), u0[:-1].conj().T @ known)


def completion_weights(op: Fe1dOperator) -> np.ndarray:
    """Row vector ``w`` with ``complete_one_value(op, known) == w @ known``.

    The completion is linear in the known values, so it can be folded into
    a column's transfer matrix ahead of sampling.
    """
    u0 = _discarded_left(op)
    a = u0[-1].conj()
    scale = np.max(np.abs(a))
    a_n = a / scale
    return -(a_n.conj() @ u0[:-1].conj().T) / np.vdot(a_n, a_n).real / scale


def stability_estimate(op: Fe1dOperator, samples: int = 500, seed: int = 0) -> float:
    """Largest ratio ``||Q v|| / ||v||`` over random complex unit vectors ``v``."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((op.m, samples)) + 1j * rng.standard_normal((op.m, samples))
    v /= np.linalg.norm(v, axis=0)
    qv = op.A @ solve_coeffs(op, v)
    return float(np.max(np.linalg.norm(qv, axis=0)))

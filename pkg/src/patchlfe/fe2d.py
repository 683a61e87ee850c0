"""Tensor-product Fourier extension on a reference rectangle.

Local data arrays are indexed ``data[j, k]`` with ``j`` running over the
``y`` nodes and ``k`` over the ``x`` nodes. Coefficient matrices follow the
same layout: ``c[q, l]`` multiplies ``exp(i q s) exp(i l t)``.
"""

from __future__ import annotations

import numpy as np

from .fe1d import Fe1dOperator, fe_matrix, solve_coeffs


def _check_shape(data: np.ndarray, op_x: Fe1dOperator, op_y: Fe1dOperator) -> np.ndarray:
    data = np.asarray(data, dtype=complex)
    if data.shape != (op_y.m, op_x.m):
        raise ValueError(f"data shape {data.shape} does not match nodes ({op_y.m}, {op_x.m})")
    return data


def solve2d(data, op_x: Fe1dOperator, op_y: Fe1dOperator) -> np.ndarray:
    """Coefficients of the tensor fit: every row with ``op_x``, then every column with ``op_y``.

    Truncated fits do not pin down coefficients in directions with tiny
    singular values, so two routes to the same fit can differ there by far
    more than rounding. Compare fits through :func:`eval2d`, or use
    :func:`tensor_transfer` for values.
    """
    data = _check_shape(data, op_x, op_y)
    row_coeffs = solve_coeffs(op_x, data.T)  # q_x x m_y
    return solve_coeffs(op_y, row_coeffs.T)  # q_y x q_x


def eval2d(c, pts_x, pts_y, T_x: float = 1.0, T_y: float = 1.0) -> np.ndarray:
    """Evaluate the tensor series on the grid ``pts_y x pts_x``.

    The result has shape ``(len(pts_y), len(pts_x))``. The ``T`` arguments
    name the data intervals and do not enter the series.
    """
    c = np.asarray(c, dtype=complex)
    ny, nx = c.shape
    if nx % 2 != 1 or ny % 2 != 1:
        raise ValueError("coefficient matrix dimensions must be odd")
    ex = fe_matrix(pts_x, (nx - 1) // 2)
    ey = fe_matrix(pts_y, (ny - 1) // 2)
    return ey @ c @ ex.T


def tensor_transfer(data, op_x: Fe1dOperator, op_y: Fe1dOperator, targets_x, targets_y) -> np.ndarray:
    """Evaluate the tensor fit of ``data`` on the grid ``targets_y x targets_x``.

    Equal to ``eval2d(solve2d(data, op_x, op_y), targets_x, targets_y)`` in
    exact arithmetic, computed with fused transfer matrices so that rounding
    is not amplified by large coefficients.
    """
    data = _check_shape(data, op_x, op_y)
    return op_y.transfer_matrix(targets_y) @ data @ op_x.transfer_matrix(targets_x).T


def trapezoid_weights(nodes) -> np.ndarray:
    """Trapezoidal quadrature weights on a sorted node set."""
    nodes = np.asarray(nodes, dtype=float)
    w = np.zeros_like(nodes)
    gaps = np.diff(nodes)
    w[:-1] += gaps / 2
    w[1:] += gaps / 2
    return w


def weighted_norm(arr, wx, wy) -> float:
    """Discrete L2 norm of a node array under trapezoid weights."""
    arr = np.asarray(arr)
    return float(np.sqrt(np.sum(np.abs(arr) ** 2 * np.outer(wy, wx))))


def apply_rows(data, op_x: Fe1dOperator) -> np.ndarray:
    """Row-wise node projection ``Q_x`` (fit each row, evaluate at the nodes)."""
    return data @ op_x.projector().T


def apply_cols(data, op_y: Fe1dOperator) -> np.ndarray:
    """Column-wise node projection ``Q_y``."""
    return op_y.projector() @ data


def weighted_operator_norm(op: Fe1dOperator) -> float:
    """Spectral norm of the node projection under the trapezoid inner product."""
    w = np.sqrt(trapezoid_weights(op.nodes))
    q = op.projector()
    return float(np.linalg.norm((w[:, None] * q) / w[None, :], 2))


def directional_errors(data, op_x: Fe1dOperator, op_y: Fe1dOperator) -> tuple[float, float, float]:
    """Directional fit errors ``E_x``, ``E_y`` and the row-operator norm ``kappa_x``.

    ``E_x`` measures what the row fits miss, ``E_y`` what the column fits
    miss, both in the trapezoid-weighted node norm. Together they bound the
    tensor residual by ``E_x + kappa_x * E_y``.
    """
    data = _check_shape(data, op_x, op_y)
    wx = trapezoid_weights(op_x.nodes)
    wy = trapezoid_weights(op_y.nodes)
    e_x = weighted_norm(data - apply_rows(data, op_x), wx, wy)
    e_y = weighted_norm(data - apply_cols(data, op_y), wx, wy)
    return e_x, e_y, weighted_operator_norm(op_x)


def tensor_residual(data, op_x: Fe1dOperator, op_y: Fe1dOperator) -> float:
    """Weighted node norm of ``data - Q data`` for the full tensor projection."""
    data = _check_shape(data, op_x, op_y)
    fitted = apply_cols(apply_rows(data, op_x), op_y)
    return weighted_norm(data - fitted, trapezoid_weights(op_x.nodes), trapezoid_weights(op_y.nodes))

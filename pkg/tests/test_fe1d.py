import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patchlfe.fe1d import (
    CompletionImpossibleError,
    Fe1dParams,
    batched_transfer_matrices,
    build_custom_operator,
    build_uniform_operator,
    complete_one_value,
    completion_weights,
    effective_frequency,
    eval_series,
    fe_matrix,
    solve_coeffs,
    stability_estimate,
    transfer,
    uniform_nodes,
)
from patchlfe.fixtures import rough_patch, rough_top
from patchlfe.functions import u1
from patchlfe.linalg import NoConstraintError
from patchlfe.patches import attach_cover

DEFAULT = Fe1dParams()


@pytest.fixture(scope="module")
def op():
    return build_uniform_operator(DEFAULT)


def test_default_sizes(op):
    assert (DEFAULT.m, DEFAULT.q) == (25, 21)
    assert op.A.shape == (25, 21)
    assert 0 < op.retained <= 21


def test_square_case_sizes():
    p = Fe1dParams(T=6, N=9, gamma=1)
    assert (p.m, p.q) == (19, 19)


@pytest.mark.parametrize("kw", [dict(T=1.0), dict(N=0), dict(gamma=0.9), dict(eps_rel=1.0)])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        Fe1dParams(**kw)


def test_uniform_nodes_include_both_ends(op):
    assert op.nodes[0] == 0.0
    assert op.nodes[-1] == pytest.approx(2 * np.pi / DEFAULT.T)
    assert np.allclose(np.diff(op.nodes), np.diff(op.nodes)[0])


def test_custom_on_uniform_nodes_is_identical(op):
    other = build_custom_operator(uniform_nodes(DEFAULT), DEFAULT)
    np.testing.assert_array_equal(other.A, op.A)
    np.testing.assert_array_equal(other.factors.S, op.factors.S)
    assert other.retained == op.retained


def test_custom_shape():
    rng = np.random.default_rng(0)
    nodes = np.sort(rng.uniform(0, DEFAULT.length, 10))
    assert build_custom_operator(nodes, DEFAULT).A.shape == (10, 21)


@pytest.mark.parametrize("nodes", [[0.1, 0.1, 0.5], [0.0, 2.0], [0.3], [0.5, 0.2]])
def test_custom_rejects_bad_nodes(nodes):
    with pytest.raises(ValueError):
        build_custom_operator(nodes, DEFAULT)


def test_custom_nonuniform_reproduces_mode():
    rng = np.random.default_rng(1)
    nodes = np.sort(np.r_[0.0, rng.uniform(0, DEFAULT.length, 23), DEFAULT.length])
    o = build_custom_operator(nodes, DEFAULT)
    probes = np.linspace(0, DEFAULT.length, 100)
    got = transfer(o, np.exp(5j * nodes), probes)
    assert np.max(np.abs(got - np.exp(5j * probes))) <= 1e-9


def test_constant_data(op):
    c = solve_coeffs(op, np.ones(op.m))
    np.testing.assert_allclose(eval_series(c, DEFAULT.T, op.nodes), 1, atol=1e-10)
    np.testing.assert_allclose(transfer(op, np.ones(op.m), np.linspace(0, DEFAULT.length, 37)), 1,
                               atol=1e-12)


def test_zero_data(op):
    assert np.all(solve_coeffs(op, np.zeros(op.m)) == 0)


def test_single_mode_residual(op):
    v = np.exp(3j * op.nodes)
    assert np.max(np.abs(eval_series(solve_coeffs(op, v), DEFAULT.T, op.nodes) - v)) <= 1e-10


def test_solve_rejects_wrong_length(op):
    with pytest.raises(ValueError):
        solve_coeffs(op, np.ones(op.m + 1))


def test_eval_one_hot():
    c = np.zeros(21, complex)
    c[10] = 1
    np.testing.assert_array_equal(eval_series(c, 4, [0.0, 0.3, 1.1]), 1)
    c = np.zeros(21, complex)
    c[11] = 1
    assert eval_series(c, 4, [np.pi / 2])[0] == pytest.approx(1j)


def test_eval_matches_naive_sum():
    rng = np.random.default_rng(2)
    c = rng.standard_normal(21) + 1j * rng.standard_normal(21)
    pts = rng.uniform(0, DEFAULT.length, 50)
    naive = np.array([sum(c[l + 10] * np.exp(1j * l * t) for l in range(-10, 11)) for t in pts])
    np.testing.assert_allclose(eval_series(c, 4, pts), naive, atol=1e-14 * np.abs(c).sum())


def test_eval_rejects_even_length():
    with pytest.raises(ValueError):
        eval_series(np.ones(4), 4, [0.0])


def test_self_transfer(op):
    v = np.exp(np.cos(op.nodes))
    assert np.max(np.abs(transfer(op, v, op.nodes) - v)) <= 1e-9


def test_sine_transfer(op):
    omega = 1.5  # well inside the resolvable band N T / (2 pi) - margin
    targets = np.linspace(0, DEFAULT.length, 100)
    got = transfer(op, np.sin(omega * op.nodes), targets)
    assert np.max(np.abs(got - np.sin(omega * targets))) <= 1e-9


def test_in_space_reproduction_all_modes(op):
    probes = np.linspace(0, DEFAULT.length, 200)
    for l in range(-DEFAULT.N, DEFAULT.N + 1):
        err = np.max(np.abs(transfer(op, np.exp(1j * l * op.nodes), probes) - np.exp(1j * l * probes)))
        assert err <= 1e-9, l


def test_transfer_matches_coefficient_path(op):
    v = np.exp(0.4j * op.nodes)
    t = np.linspace(0, DEFAULT.length, 30)
    np.testing.assert_allclose(transfer(op, v, t), eval_series(solve_coeffs(op, v), DEFAULT.T, t),
                               atol=1e-9)


def test_batched_matches_single():
    rng = np.random.default_rng(3)
    sets = [np.sort(np.r_[0, rng.uniform(0, DEFAULT.length, k), DEFAULT.length]) for k in (20, 26, 23)]
    targets = np.linspace(0, DEFAULT.length, 25)
    batch = batched_transfer_matrices(sets, DEFAULT, targets)
    assert batch.shape == (3, 25, 28)
    for k, nodes in enumerate(sets):
        # Entries are not unique near the truncation edge; their action on data is.
        single = build_custom_operator(nodes, DEFAULT).transfer_matrix(targets)
        data = np.exp(0.7j * nodes) + np.cos(2 * nodes)
        np.testing.assert_allclose(batch[k, :, : nodes.size] @ data, single @ data, atol=1e-9)
        assert np.all(batch[k, :, nodes.size:] == 0)


def test_stability_estimate(op):
    kappa = stability_estimate(op, seed=0)
    assert np.isfinite(kappa) and 0 < kappa <= 1 + 1e-12
    assert stability_estimate(op, seed=0) == kappa


def test_effective_frequency():
    assert effective_frequency(2 * np.pi, 1.0, 4.0) == pytest.approx(4.0)


# One-value completion -----------------------------------------------------------

def _completion_op():
    # Known nodes span most of the interval; the artificial node sits just beyond.
    nodes = np.r_[np.linspace(0, 0.97, 24), 1.0] * DEFAULT.length
    return build_custom_operator(nodes, DEFAULT)


def test_completion_of_pure_mode():
    o = _completion_op()
    alpha = complete_one_value(o, np.exp(2j * o.nodes[:-1]))
    assert abs(alpha - np.exp(2j * o.nodes[-1])) <= 1e-8


def test_completion_of_zero():
    o = _completion_op()
    assert complete_one_value(o, np.zeros(o.m - 1)) == 0


def test_completion_weights_agree():
    o = _completion_op()
    known = np.cos(3 * o.nodes[:-1]) + 0.5j
    w = completion_weights(o)
    scale = np.abs(w) @ np.abs(known)
    assert abs(w @ known - complete_one_value(o, known)) <= 1e-13 * scale


def test_completion_on_cover_column():
    patch = attach_cover(rough_patch(), 3, 1e-3)
    u = 0.1
    b = float(rough_top(u))
    c = float(patch.cover(np.array([u]))[0])
    heights = np.arange(0, b, 1 / 24)
    heights = np.r_[heights[heights < b - 1e-9], b, c]
    o = build_custom_operator(heights / c * DEFAULT.length, DEFAULT)
    assert abs(complete_one_value(o, u1(u, heights[:-1])) - u1(u, c)) <= 1e-6


def test_completion_minimizes_discarded_component():
    o = _completion_op()
    rng = np.random.default_rng(4)
    known = rng.standard_normal(o.m - 1) + 1j * rng.standard_normal(o.m - 1)
    full = np.linalg.svd(o.A, full_matrices=True)
    s = np.zeros(o.m)
    s[: full[1].size] = full[1]
    u0 = full[0][:, s <= DEFAULT.eps_rel * s[0]]
    alpha = complete_one_value(o, known)
    best = np.linalg.norm(u0.conj().T @ np.r_[known, alpha])
    for other in alpha + np.array([1e-3, -1e-3j, 0.1, 1 + 1j]):
        assert best <= np.linalg.norm(u0.conj().T @ np.r_[known, other]) + 1e-12


def test_completion_requires_discarded_directions():
    nodes = np.linspace(0, DEFAULT.length, 21)  # square system: nothing discarded
    o = build_custom_operator(nodes, Fe1dParams(T=1.5, eps_rel=0.0))
    with pytest.raises(CompletionImpossibleError):
        complete_one_value(o, np.ones(20))


def test_completion_shape_check():
    o = _completion_op()
    with pytest.raises(ValueError):
        complete_one_value(o, np.ones(o.m))


def test_no_constraint_error_type():
    assert issubclass(NoConstraintError, ValueError)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_linearity_property(seed, a, b):
    op = build_uniform_operator(DEFAULT)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(op.m) + 1j * rng.standard_normal(op.m)
    v = rng.standard_normal(op.m) + 1j * rng.standard_normal(op.m)
    lhs = solve_coeffs(op, a * u + b * v)
    rhs = a * solve_coeffs(op, u) + b * solve_coeffs(op, v)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * max(1.0, np.linalg.norm(lhs), np.linalg.norm(rhs)) * 1e3


@settings(max_examples=25, deadline=None)
@given(st.floats(1.5, 8.0), st.integers(3, 14), st.floats(1.0, 3.0))
def test_node_projector_is_contraction_property(T, N, gamma):
    p = Fe1dParams(T=T, N=N, gamma=gamma)
    if p.m < 2:
        return
    op = build_uniform_operator(p)
    # U_I U_I^H is an orthogonal projector, so its norm is at most one.
    assert np.linalg.norm(op.projector(), 2) <= 1 + 1e-10
    assert np.allclose(fe_matrix(op.nodes, N), op.A)

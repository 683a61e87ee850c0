import numpy as np
import pytest

from patchlfe.calibration import (
    CalibrationError,
    SweepResult,
    TimingRecord,
    _first_stable,
    bench_scaling,
    find_Nthreshold,
    find_Tmin,
    rect_error,
    sweep_N,
    sweep_T,
    t_values,
    table_csv,
    timing_csv,
)
from patchlfe.geometry import builtin_curve
from patchlfe.solvers import SolverConfig


def test_t_values_grid():
    ts = t_values()
    assert ts[0] == 1.05 and ts[-1] == 8.0
    assert np.allclose(np.diff(ts), 0.05)


def test_first_stable_needs_a_run():
    errs = [1, 1e-20, 1, 1e-20, 1e-20, 1e-20, 1e-20]
    assert _first_stable(errs, 1e-13) == 3
    assert _first_stable(errs, 1e-13, run=1) == 1
    assert _first_stable([1, 1, 1], 1e-13) is None


def test_step_must_be_fine():
    with pytest.raises(ValueError):
        find_Tmin(4.0, step=0.2)


def test_unreachable_target_signals():
    with pytest.raises(CalibrationError):
        find_Nthreshold(4.0, target_err=1e-30, n_max=12)
    with pytest.raises(CalibrationError):
        find_Tmin(1.0, N=6, target_err=1e-30)


def test_nthreshold_examples():
    assert abs(find_Nthreshold(4.0) - 10) <= 2
    assert abs(find_Nthreshold(6.0) - 9) <= 2


def test_nthreshold_weakly_decreasing():
    found = [find_Nthreshold(T) for T in (2.0, 3.0, 4.0, 6.0)]
    assert found == sorted(found, reverse=True)


@pytest.mark.slow
def test_nthreshold_small_T():
    assert abs(find_Nthreshold(1.2) - 58) <= 4


@pytest.mark.slow
def test_tmin_large_oversampling():
    assert abs(find_Tmin(4.0) - 1.2) <= 0.3


@pytest.mark.slow
@pytest.mark.parametrize("gamma,expected", [(1.2, 3.9), (1.0, 5.5)])
def test_tmin_small_oversampling(gamma, expected):
    assert abs(find_Tmin(gamma) - expected) <= 0.5


@pytest.mark.slow
def test_tmin_weakly_coupled_to_transverse_frequency():
    found = [find_Tmin(4.0, omega_y=w) for w in (1.0, 5.0, 10.0)]
    assert max(found) - min(found) <= 0.3


def test_admissible_side_is_better():
    # At gamma = 2 the detected bound lies near 2.55.
    t_min = 2.55
    assert rect_error(t_min + 0.3, 30, 2.0) <= rect_error(t_min - 0.3, 30, 2.0)


def test_sweeps_and_csv():
    res = sweep_N(4.0, 4.0, Ns=range(6, 14))
    assert isinstance(res, SweepResult)
    assert np.all(np.isfinite(res.errors))
    assert res.detected == find_Nthreshold(4.0)
    lines = res.to_csv().strip().split("\n")
    assert lines[0] == "T,gamma,omega,N,max_error" and len(lines) == 9
    t = sweep_T(4.0, 20, Ts=[1.5, 2.0, 2.5, 3.0, 3.5], threads=2)
    assert t.values.size == 5 and t.parameter == "T"


def test_table_csv_format():
    text = table_csv(("gamma", "T_min"), {1.2: 3.9, 4.0: 1.2})
    assert text == "gamma,T_min\n1.2,3.8999999999999999\n4,1.2\n"


def test_bench_records_and_statistic():
    records, stat = bench_scaling(builtin_curve("smooth-blob"), [4, 5, 6], SolverConfig(), repeats=3)
    assert [r.K for r in records] == [4, 5, 6]
    assert stat >= 1.0
    for r in records:
        assert r.points > 0 and r.solve_s > 0
        assert r.total_s >= r.build_s + r.solve_s - 1e-3 or r.total_s > 0
    text = timing_csv(records)
    assert text.startswith("K,N_p,points,build_s,solve_s,total_s\n")
    assert len(text.strip().split("\n")) == 4


def test_bench_needs_three_ascending_values():
    with pytest.raises(ValueError):
        bench_scaling(builtin_curve("smooth-blob"), [5, 10], SolverConfig())
    with pytest.raises(ValueError):
        bench_scaling(builtin_curve("smooth-blob"), [10, 5, 20], SolverConfig())


def test_timing_record_per_point():
    assert TimingRecord(10, 3, 200, 1.0, 0.5, 1.6).solve_per_point == 0.0025

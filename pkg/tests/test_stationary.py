import io
import math

import numpy as np
import pytest

from evorate import (
    ConvergenceError,
    Incentive,
    MutationModel,
    NotReversibleError,
    ReducibleChainError,
    StationaryDistribution,
    ValidationError,
    build_kernel,
    check_detailed_balance,
    export_stationary_csv,
    log_rising_factorial,
    neutral_stationary,
    raw_kernel,
    reversible_stationary,
    rising_factorial,
    solve_stationary,
    stationary_residual,
)
from evorate.catalog import moran_landscape, rsp_landscape


def neutral_kernel(n, N, mu):
    return build_kernel(n, N, Incentive.neutral(), None, MutationModel.uniform(mu))


def test_rising_factorial():
    assert rising_factorial(2.0, 3) == 24.0
    assert rising_factorial(5.0, 0) == 1.0
    assert rising_factorial(0.0, 0) == 1.0
    assert rising_factorial(0.0, 2) == 0.0
    assert rising_factorial(0.5, 2) == 0.75
    with pytest.raises(ValidationError):
        rising_factorial(1.0, -1)


def test_log_rising_factorial_matches_direct():
    for x in (0.3, 1.0, 2.5, 40.0):
        for k in (0, 1, 2, 7):
            assert log_rising_factorial(x, k) == pytest.approx(
                math.log(rising_factorial(x, k)), abs=1e-12
            )
    with pytest.raises(ValidationError):
        log_rising_factorial(0.0, 2)


def test_neutral_stationary_hand_computed():
    # n=2, N=2, mu=0.2: alpha = 2/3 and s = (5/14, 4/14, 5/14)
    dist = neutral_stationary(2, 2, 0.2)
    assert dist.method == "closed_form"
    assert np.allclose(dist.probabilities, [5 / 14, 4 / 14, 5 / 14], atol=1e-14)


def test_neutral_stationary_uniform_reproduction():
    # mu = (n-1)/n: s_a = multinomial(N; a) / n^N
    dist = neutral_stationary(2, 3, 0.5)
    assert np.allclose(dist.probabilities, np.array([1, 3, 3, 1]) / 8, atol=1e-15)
    dist = neutral_stationary(3, 2, 2 / 3)
    assert np.allclose(dist.probabilities, np.array([1, 2, 2, 1, 2, 1]) / 9, atol=1e-15)


def test_neutral_stationary_is_exchangeable():
    dist = neutral_stationary(2, 12, 0.07)
    assert np.allclose(dist.probabilities, dist.probabilities[::-1], atol=1e-15)


@pytest.mark.parametrize("n,N,mu", [(2, 20, 0.1), (3, 12, 0.05), (4, 8, 0.3)])
def test_closed_form_is_stationary_and_balanced(n, N, mu):
    kern = neutral_kernel(n, N, mu)
    dist = neutral_stationary(n, N, mu)
    assert stationary_residual(kern, dist.probabilities) < 1e-13
    ok, violation = check_detailed_balance(kern, dist.probabilities)
    assert ok and violation < 1e-15


def test_neutral_stationary_falls_back_above_uniform_mu():
    with pytest.warns(RuntimeWarning, match="falling back"):
        dist = neutral_stationary(2, 6, 0.9)
    assert dist.method == "iterative"
    exact = reversible_stationary(neutral_kernel(2, 6, 0.9))
    assert np.allclose(dist.probabilities, exact.probabilities, atol=1e-10)


def test_neutral_stationary_validates_mu():
    for mu in (0.0, -0.1, 1.0001, float("nan")):
        with pytest.raises(ValidationError):
            neutral_stationary(2, 5, mu)


@pytest.mark.parametrize("n,N,mu", [(2, 10, 0.1), (3, 8, 0.2)])
def test_power_iteration_matches_closed_form(n, N, mu):
    kern = neutral_kernel(n, N, mu)
    dist = solve_stationary(kern)
    assert dist.method == "iterative"
    assert dist.residual <= 1e-12
    assert dist.iterations is not None and dist.iterations > 0
    # the residual bounds s T - s, not the gap to the exact vector, so
    # allow for the mixing-time amplification
    closed = neutral_stationary(n, N, mu)
    assert np.abs(dist.probabilities - closed.probabilities).max() < 1e-9


def test_power_iteration_requires_irreducibility():
    frozen = neutral_kernel(2, 6, 0.0)
    with pytest.raises(ReducibleChainError):
        solve_stationary(frozen)


def test_power_iteration_budget():
    kern = build_kernel(
        3, 6, Incentive.fermi(beta=1.0), rsp_landscape(1, 1), MutationModel.uniform(0.1)
    )
    with pytest.raises(ConvergenceError):
        solve_stationary(kern, max_iters=3)
    with pytest.raises(ValidationError):
        solve_stationary(kern, tol=-1.0)
    with pytest.raises(ValidationError):
        solve_stationary(kern, max_iters=0)


def test_reversible_matches_closed_form_exactly_enough():
    kern = neutral_kernel(2, 25, 0.08)
    dist = reversible_stationary(kern)
    assert dist.method == "reversible_exact"
    closed = neutral_stationary(2, 25, 0.08)
    assert np.abs(dist.probabilities - closed.probabilities).max() < 1e-13
    assert dist.residual < 1e-14


def test_reversible_on_selection_chain():
    kern = build_kernel(
        2, 15, Incentive.fermi(beta=2.0), moran_landscape(3), MutationModel.uniform(0.05)
    )
    dist = reversible_stationary(kern)
    iterative = solve_stationary(kern)
    assert np.abs(dist.probabilities - iterative.probabilities).max() < 1e-10


def test_reversible_rejects_cyclic_flow():
    # symmetric support but unbalanced flow around the triangle
    T = raw_kernel([[0.2, 0.6, 0.2], [0.2, 0.2, 0.6], [0.6, 0.2, 0.2]])
    with pytest.raises(NotReversibleError, match="detailed balance"):
        reversible_stationary(T)


def test_reversible_rejects_one_way_edges():
    T = raw_kernel([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    with pytest.raises(NotReversibleError, match="one-way"):
        reversible_stationary(T)


def test_reversible_rejects_disconnected_support():
    with pytest.raises(ReducibleChainError):
        reversible_stationary(raw_kernel(np.eye(2)))


def test_rsp_chain_is_genuinely_irreversible():
    kern = build_kernel(
        3, 6, Incentive.fermi(beta=1.0), rsp_landscape(1, 1), MutationModel.uniform(0.1)
    )
    dist = solve_stationary(kern)
    ok, violation = check_detailed_balance(kern, dist.probabilities)
    assert not ok and violation > 1e-6
    with pytest.raises(NotReversibleError):
        reversible_stationary(kern)


def test_distribution_validation():
    with pytest.raises(ValidationError):
        StationaryDistribution(np.array([0.7, 0.7]), method="test")
    with pytest.raises(ValidationError):
        StationaryDistribution(np.array([1.2, -0.2]), method="test")
    with pytest.raises(ValidationError):
        stationary_residual(neutral_kernel(2, 5, 0.1), np.ones(3) / 3)


def test_export_stationary_csv():
    kern = neutral_kernel(2, 4, 0.25)
    dist = neutral_stationary(2, 4, 0.25)
    buf = io.StringIO()
    export_stationary_csv(kern, dist, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "rank,count_1,count_2,probability"
    assert len(lines) == 6
    cells = [line.split(",") for line in lines[1:]]
    assert [int(row[0]) for row in cells] == list(range(5))
    assert [int(row[1]) for row in cells] == [4, 3, 2, 1, 0]
    back = np.array([float(row[3]) for row in cells])
    assert (back == dist.probabilities).all()


def test_export_requires_lattice():
    with pytest.raises(ValidationError):
        export_stationary_csv(
            raw_kernel(np.eye(2)), StationaryDistribution(np.array([0.5, 0.5]), "x"), io.StringIO()
        )

import numpy as np
import pytest

from helpers import ac1_spec
from organic_effects import Dataset, bootstrap_effects, simulate_observed
from organic_effects.errors import TooManyFailures
from organic_effects.model import ESTIMANDS


def _two_point(n=40):
    a = np.tile([0, 1], n // 2)
    return Dataset(a=a, c=np.where(a == 1, 1.0, -1.0)[:, None], l=np.where(a == 1, 2.0, 0.5)[:, None],
                   m=np.where(a == 1, 3.0, 1.0), y=np.where(a == 1, 5.0, 2.0))


@pytest.mark.filterwarnings("ignore::organic_effects.errors.RankDeficiencyWarning")
def test_degenerate_population_collapses():
    s = bootstrap_effects(_two_point(), b=30, seed=1)
    assert s.failures == 0
    assert np.ptp(s.replicates, axis=0) == pytest.approx(np.zeros(5), abs=1e-9)
    for name in ESTIMANDS:
        assert s.se[name] == pytest.approx(0.0, abs=1e-9)
        assert s.ci_lower[name] == pytest.approx(getattr(s.point, name), abs=1e-9)
        assert s.ci_upper[name] == pytest.approx(getattr(s.point, name), abs=1e-9)


def test_serial_and_parallel_identical():
    d = simulate_observed(ac1_spec(), 400, 3)
    serial = bootstrap_effects(d, b=40, seed=11)
    parallel = bootstrap_effects(d, b=40, seed=11, n_jobs=4)
    assert np.array_equal(serial.replicates, parallel.replicates)
    assert serial.to_dict() == parallel.to_dict()


def test_seed_changes_replicates():
    d = simulate_observed(ac1_spec(), 400, 3)
    assert not np.array_equal(bootstrap_effects(d, b=10, seed=1).replicates,
                              bootstrap_effects(d, b=10, seed=2).replicates)


def test_summary_invariants_and_monotone_intervals():
    d = simulate_observed(ac1_spec(), 500, 4)
    s95 = bootstrap_effects(d, b=100, alpha=0.05, seed=5)
    s99 = bootstrap_effects(d, b=100, alpha=0.01, seed=5)
    assert s95.failures + len(s95.replicates) == s95.b
    for name in ESTIMANDS:
        assert s95.se[name] >= 0
        assert s95.ci_lower[name] <= s95.ci_upper[name]
        assert s99.ci_lower[name] <= s95.ci_lower[name]
        assert s99.ci_upper[name] >= s95.ci_upper[name]


def test_percentile_interval_uses_linear_interpolation():
    d = simulate_observed(ac1_spec(), 300, 6)
    s = bootstrap_effects(d, b=21, alpha=0.1, seed=7)
    col = np.sort(s.replicates[:, 2])
    # position (b - 1) * 0.05 = 1.0 exactly; 0.95 -> 19.0
    assert s.ci_lower["ey1I"] == col[1] and s.ci_upper["ey1I"] == col[19]
    assert s.se["ey1I"] == pytest.approx(np.std(col, ddof=1), rel=1e-12)


@pytest.mark.filterwarnings("ignore::organic_effects.errors.HeteroscedasticityWarning")
def test_failed_replicates_are_counted():
    # three treated units among 30: many resamples keep fewer than two
    a = np.zeros(30, int)
    a[:3] = 1
    d = Dataset(a=a, c=np.zeros((30, 0)), l=np.zeros((30, 0)), m=np.arange(30.0), y=np.arange(30.0))
    with pytest.raises(TooManyFailures) as err:
        bootstrap_effects(d, [()], b=50, seed=1, estimator="parametric")
    assert "EmptyArm" in str(err.value) or "DegenerateDesign" in str(err.value)
    assert err.value.causes


def test_discrete_bootstrap():
    d = simulate_observed(ac1_spec().replace(discretize=True), 2000, 8)
    s = bootstrap_effects(d, b=50, seed=3, estimator="discrete")
    assert s.estimator == "discrete"
    assert s.failures <= 5 and all("IdentificationGap" in cause for _, cause in s.failure_causes)
    assert all(s.se[name] > 0 for name in ESTIMANDS)
    again = bootstrap_effects(d, b=50, seed=3, estimator="discrete", n_jobs=3)
    assert np.array_equal(s.replicates, again.replicates)


def test_argument_checks():
    d = _two_point()
    with pytest.raises(ValueError):
        bootstrap_effects(d, b=1)
    with pytest.raises(ValueError):
        bootstrap_effects(d, b=10, alpha=1.0)
    with pytest.raises(ValueError):
        bootstrap_effects(d, b=10, estimator="bayes")

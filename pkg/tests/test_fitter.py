import math

import numpy as np
import pytest

from sce.core.engine.fitter import GeneratorFitter
from sce.core.engine.sampler import PairSampler
from sce.core.exceptions import DomainError, InputDataError
from sce.core.models import BasisSet, FitConfig, GeneratorSpec, PseudoSample, SampleConfig

fitter = GeneratorFitter()
sampler = PairSampler()
BASIS = BasisSet(s_max=4)


def sample(k, n, seed):
    return sampler.sample_pairs(GeneratorSpec.analytic(k), SampleConfig(n=n, seed=seed))


# region Rank transform
def test_rank_transform_examples():
    ps = fitter.rank_transform([3, 1, 2], [30, 10, 20])
    assert np.allclose(ps.u, [1.0, 1 / 3, 2 / 3])
    assert np.allclose(ps.v, [1.0, 1 / 3, 2 / 3])
    assert np.allclose(ps.w_sorted, [1 / 3, 2 / 3, 1.0])

    ties = fitter.rank_transform([5, 5], [1, 2])
    assert np.allclose(ties.u, [0.75, 0.75])

    comonotone = fitter.rank_transform([1, 2, 3, 4], [10, 20, 30, 40])
    assert np.allclose(comonotone.w_sorted, [0.25, 0.5, 0.75, 1.0])


def test_rank_transform_rejects_bad_input():
    with pytest.raises(InputDataError, match="differ in length"):
        fitter.rank_transform([1, 2, 3], [1, 2])
    with pytest.raises(InputDataError, match="at least 2"):
        fitter.rank_transform([1], [1])
    with pytest.raises(InputDataError, match="row 2"):
        fitter.rank_transform([1, float("nan"), 3], [1, 2, 3])


def test_rank_transform_is_rank_invariant():
    x, y = sample(2.0, 200, 11)
    first = fitter.rank_transform(x, y)
    second = fitter.rank_transform(np.exp(x), y ** 3)
    assert np.array_equal(first.u, second.u)
    assert np.array_equal(first.w_sorted, second.w_sorted)
# endregion


# region Problem assembly
def test_build_problem_examples():
    single = fitter.build_problem(PseudoSample.from_uv([0.5], [0.25]), BasisSet(s_max=0))
    assert single.b == pytest.approx([0.5])
    assert single.M[0, 0] == pytest.approx(1.0)

    clamped = fitter.build_problem(PseudoSample.from_uv([0.5, 1.0], [0.5, 1.0]), BasisSet(s_max=0))
    assert clamped.b == pytest.approx([math.sqrt(1 / 12), 0.0])


def test_build_problem_zero_radicand():
    n = 6
    w = np.sqrt(np.arange(1, n + 1) / (n + 1))
    problem = fitter.build_problem(PseudoSample.from_uv(w, w), BASIS)
    assert np.allclose(problem.b, 0.0, atol=1e-7)
    assert problem.M.shape == (n, BASIS.size)
# endregion


def test_fitted_generator_is_feasible_and_vanishes_at_boundary():
    x, y = sample(2.0, 100, 5)
    generator, result = fitter.fit_generator(x, y, BASIS)
    problem = fitter.build_problem(fitter.rank_transform(x, y), BASIS)

    assert (problem.M @ result.a >= -1e-8).all()
    assert (np.abs(problem.Mp @ result.a) <= 1.0 + 1e-8).all()
    assert result.kkt_residual <= 1e-8
    assert 1 <= result.nnz <= BASIS.size
    assert fitter.model.psi_eval(generator, 0.0) == 0.0
    assert fitter.model.psi_eval(generator, 1.0) == 0.0


@pytest.mark.parametrize("k", [1.0, 2.0, 4.0, 8.0])
def test_fits_are_certified_across_seeds(k):
    for seed in range(20):
        x, y = sample(k, 100, seed)
        problem = fitter.build_problem(fitter.rank_transform(x, y), BASIS)
        _, result = fitter.fit_generator(x, y, BASIS)

        assert (problem.M @ result.a >= -1e-8).all()
        assert (np.abs(problem.Mp @ result.a) <= 1.0 + 1e-8).all()
        assert result.max_violation <= 1e-8
        assert result.kkt_residual <= 1e-8


def test_fit_recovers_analytic_generator():
    x, y = sample(2.0, 100, 1)
    generator, _ = fitter.fit_generator(x, y, BASIS)
    assert fitter.l2_error(GeneratorSpec.analytic(2.0), generator) <= 0.10


def test_fit_on_independent_data_stays_small():
    x, y = sample(1.0, 100, 3)
    generator, _ = fitter.fit_generator(x, y, BASIS)
    assert fitter.l2_error(GeneratorSpec.independence(), generator) <= 0.20


def test_fit_on_comonotone_data_approaches_the_tent():
    x = np.arange(1.0, 101.0)
    generator, result = fitter.fit_generator(x, x, BASIS)
    integral = float(result.a @ fitter.model.basis.integrals(BASIS))
    assert integral >= 0.15


def test_doubling_sample_size_does_not_increase_median_error():
    truth = GeneratorSpec.analytic(2.0)
    medians = []
    for n in (100, 200):
        errors = []
        for r in range(20):
            x, y = sample(2.0, n, 1000 + r)
            generator, _ = fitter.fit_generator(x, y, BASIS)
            errors.append(fitter.l2_error(truth, generator))
        medians.append(float(np.median(errors)))
    assert medians[1] <= medians[0]


def test_fit_config_drives_the_truncation():
    x, y = sample(4.0, 60, 9)
    generator, result = fitter.fit_generator(x, y, cfg=FitConfig(s_max=2))
    assert result.m == BasisSet(s_max=2).size
    assert generator.basis.s_max == 2


def test_l2_error_requires_odd_point_count():
    with pytest.raises(DomainError):
        fitter.l2_error(GeneratorSpec.analytic(2.0), GeneratorSpec.analytic(2.0), quad_points=100)
    assert fitter.l2_error(GeneratorSpec.analytic(2.0), GeneratorSpec.analytic(2.0)) == 0.0

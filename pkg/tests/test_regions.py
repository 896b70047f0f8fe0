import itertools
import math

import numpy as np
import pytest

from sce.core.engine.fitter import GeneratorFitter
from sce.core.engine.regions import RegionEstimator
from sce.core.engine.sampler import PairSampler
from sce.core.enums import ProbabilitySource
from sce.core.exceptions import DomainError, InsufficientMassError
from sce.core.models import BasisSet, CellProbabilities, GeneratorSpec, PseudoSample, SampleConfig

regions = RegionEstimator()
fitter = GeneratorFitter()
sampler = PairSampler()


def cells(p):
    p = np.asarray(p, dtype=float)
    return CellProbabilities(n_grid=p.shape[0], p=p, source=ProbabilitySource.TRUE)


# region Cell probabilities
def test_cell_probs_true_examples():
    uniform = regions.cell_probs_true(GeneratorSpec.analytic(1.0), 4)
    assert np.allclose(uniform.p, 1 / 16)

    limit = regions.cell_probs_true(GeneratorSpec.analytic(math.inf), 2)
    assert np.allclose(limit.p, [[0.5, 0.0], [0.0, 0.5]])

    g2 = regions.cell_probs_true(GeneratorSpec.analytic(2.0), 2)
    assert g2.p[0, 0] == pytest.approx(0.25 + (1 - 2 ** -0.5) ** 2)
    assert g2.p[0, 0] == pytest.approx(0.33579, abs=1e-5)


@pytest.mark.parametrize("k", [1.0, 2.0, 4.0, 8.0, math.inf])
def test_true_cells_are_nonnegative_and_sum_to_one(k):
    cp = regions.cell_probs_true(GeneratorSpec.analytic(k), 30)
    assert cp.p.min() >= -1e-15
    assert cp.total_mass == pytest.approx(1.0, abs=1e-9)


def test_cell_probs_sp_examples():
    zero = GeneratorSpec.fitted(BasisSet(s_max=2), np.zeros(BasisSet(s_max=2).size))
    assert np.allclose(regions.cell_probs_sp(zero, 8).p, 1 / 64)

    exact = regions.cell_probs_sp(GeneratorSpec.analytic(2.0), 30)
    assert np.array_equal(exact.p, regions.cell_probs_true(GeneratorSpec.analytic(2.0), 30).p)


def test_cell_probs_sp_clamps_negative_cells():
    steep = GeneratorSpec.fitted(BasisSet(s_max=0), [2.0])
    cp = regions.cell_probs_sp(steep, 10)
    assert cp.clamped_cells > 0
    assert cp.p.min() >= 0.0
    assert cp.total_mass == pytest.approx(1.0, abs=1e-12)


def test_cell_probs_np_examples():
    single = regions.cell_probs_np(PseudoSample.from_uv([0.1], [0.9]), 2)
    assert single.p[0, 1] == 1.0
    assert single.total_mass == 1.0

    centers = regions.cell_probs_np(PseudoSample.from_uv([0.25, 0.25, 0.75, 0.75], [0.25, 0.75, 0.25, 0.75]), 2)
    assert np.allclose(centers.p, 0.25)


def test_cell_membership_is_right_closed():
    assert list(RegionEstimator.cell_index(np.array([0.0, 0.25, 0.2500001, 0.5, 1.0]), 4)) == [1, 1, 2, 2, 4]


def test_cell_probs_np_close_to_truth():
    n = 500
    u, v = sampler.sample_pairs(GeneratorSpec.analytic(2.0), SampleConfig(n=n, seed=17))
    empirical = regions.cell_probs_np(fitter.rank_transform(u, v), 8)
    truth = regions.cell_probs_true(GeneratorSpec.analytic(2.0), 8)
    assert np.abs(empirical.p - truth.p).max() <= 3 * math.sqrt(0.25 / n)


def test_invalid_grid_is_rejected():
    with pytest.raises(DomainError):
        regions.cell_probs_true(GeneratorSpec.analytic(2.0), 0)
# endregion


# region Greedy selection
def test_greedy_region_examples():
    uniform = regions.greedy_region(regions.cell_probs_true(GeneratorSpec.analytic(1.0), 4), 0.25)
    assert uniform.selected_count == 4
    assert uniform.area == 0.25

    limit = regions.cell_probs_true(GeneratorSpec.analytic(math.inf), 2)
    both = regions.greedy_region(limit, 0.75)
    assert both.selected_count == 2
    assert both.achieved_mass == pytest.approx(1.0)
    assert both.area == 0.5
    assert both.delta[0, 0] and both.delta[1, 1]

    one = regions.greedy_region(limit, 0.5)
    assert one.selected_count == 1
    assert one.area == 0.25
    assert one.last_cell == (1, 1)


@pytest.mark.parametrize("n_grid", [3, 7, 10])
def test_uniform_area_is_ceiling_of_level(n_grid):
    cp = regions.cell_probs_true(GeneratorSpec.analytic(1.0), n_grid)
    for alpha in (0.1, 0.25, 0.5, 0.75, 1.0):
        mask = regions.greedy_region(cp, alpha)
        assert mask.area == pytest.approx(math.ceil(alpha * n_grid * n_grid - 1e-9) / n_grid ** 2)


def test_greedy_mask_is_minimal():
    cp = regions.cell_probs_true(GeneratorSpec.analytic(4.0), 30)
    for alpha in (0.25, 0.5, 0.75):
        mask = regions.greedy_region(cp, alpha)
        assert mask.achieved_mass >= alpha - 1e-12
        k, ell = mask.last_cell
        assert mask.achieved_mass - cp.p[k - 1, ell - 1] < alpha


def test_greedy_matches_exhaustive_search():
    rng = np.random.default_rng(99)
    for trial in range(50):
        n_grid = 2 + trial % 2
        p = rng.dirichlet(np.ones(n_grid * n_grid)).reshape(n_grid, n_grid)
        alpha = float(rng.uniform(0.05, 1.0))
        mask = regions.greedy_region(cells(p), alpha)

        flat = p.ravel()
        best = min(sum(choice) for choice in itertools.product((0, 1), repeat=flat.shape[0])
                   if np.dot(choice, flat) >= alpha - 1e-12)
        assert mask.selected_count == best


def test_greedy_breaks_ties_lexicographically():
    mask = regions.greedy_region(cells(np.full((2, 2), 0.25)), 0.5)
    assert mask.delta.tolist() == [[True, True], [False, False]]
    assert mask.last_cell == (1, 2)


def test_greedy_rejects_bad_levels():
    cp = cells(np.full((2, 2), 0.25))
    with pytest.raises(DomainError):
        regions.greedy_region(cp, 0.0)
    with pytest.raises(DomainError):
        regions.greedy_region(cp, 1.5)
    with pytest.raises(InsufficientMassError):
        regions.greedy_region(cells(np.full((2, 2), 0.2)), 0.9)


def test_masks_are_nested():
    cp = regions.cell_probs_true(GeneratorSpec.analytic(2.0), 30)
    masks = regions.nested_masks(cp, (0.75, 0.25, 0.5))
    assert list(masks) == [0.25, 0.5, 0.75]
    assert np.all(masks[0.25].delta <= masks[0.5].delta)
    assert np.all(masks[0.5].delta <= masks[0.75].delta)
# endregion


# region Comparisons
def test_stronger_dependence_concentrates_on_diagonal_blocks():
    shares = []
    for k in (2.0, 4.0, 8.0):
        mask = regions.greedy_region(regions.cell_probs_true(GeneratorSpec.analytic(k), 30), 0.5)
        shares.append(RegionEstimator.diagonal_block_share(mask))
    assert shares == sorted(shares)
    assert shares[-1] == 1.0


def test_stronger_dependence_concentrates_on_the_diagonal():
    shares = []
    for k in (2.0, 4.0, 8.0):
        mask = regions.greedy_region(regions.cell_probs_true(GeneratorSpec.analytic(k), 30), 0.5)
        shares.append(RegionEstimator.diagonal_share(mask, 0))
    assert shares == sorted(shares)
    assert shares == pytest.approx([0.0719, 0.0851, 0.0885], abs=1e-3)


def test_comparison_helpers():
    first = cells([[0.5, 0.0], [0.0, 0.5]])
    second = cells(np.full((2, 2), 0.25))
    assert RegionEstimator.total_variation(first, second) == pytest.approx(0.5)

    a = regions.greedy_region(first, 0.5)
    b = regions.greedy_region(second, 0.5)
    assert RegionEstimator.symmetric_difference_area(a, b) == pytest.approx(0.25)
    assert RegionEstimator.diagonal_share(a) == 1.0


def test_fitted_regions_are_close_to_true_regions():
    u, v = sampler.sample_pairs(GeneratorSpec.analytic(2.0), SampleConfig(n=500, seed=31))
    generator, _ = fitter.fit_generator(u, v, BasisSet(s_max=4))
    fitted = regions.cell_probs_sp(generator, 30)
    truth = regions.cell_probs_true(GeneratorSpec.analytic(2.0), 30)

    assert RegionEstimator.total_variation(fitted, truth) <= 0.15
    area = RegionEstimator.symmetric_difference_area(regions.greedy_region(fitted, 0.5), regions.greedy_region(truth, 0.5))
    assert area <= 0.20
# endregion

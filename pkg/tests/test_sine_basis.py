import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import simpson

from sce.core.basis.sine_basis import SineBasis
from sce.core.exceptions import DomainError
from sce.core.models import BasisIndex, BasisSet

basis = SineBasis()


def test_basis_eval_examples():
    assert basis.basis_eval(BasisIndex(s=0, ell=0), 0.5) == pytest.approx(1.0)
    assert basis.basis_eval(BasisIndex(s=1, ell=1), 0.5) == pytest.approx(1.0)
    assert basis.basis_eval(BasisIndex(s=0, ell=0), 0.0) == 0.0


def test_basis_deriv_examples():
    assert basis.basis_deriv(BasisIndex(s=0, ell=0), 0.5) == pytest.approx(0.0, abs=1e-15)
    assert basis.basis_deriv(BasisIndex(s=0, ell=0), 0.0) == pytest.approx(math.pi)
    assert basis.basis_deriv(BasisIndex(s=1, ell=0), 0.9) == 0.0


def test_basis_integral_examples():
    assert SineBasis.basis_integral(BasisIndex(s=0, ell=0)) == pytest.approx(2.0 / math.pi)
    assert SineBasis.basis_integral(BasisIndex(s=1, ell=2)) == pytest.approx(1.0 / math.pi)
    for ell in range(15):
        assert SineBasis.basis_integral(BasisIndex(s=3, ell=ell)) == pytest.approx(0.25 / math.pi)


def test_invalid_index_and_domain_are_rejected():
    with pytest.raises(ValidationError):
        BasisIndex(s=1, ell=3)
    with pytest.raises(ValidationError):
        BasisIndex(s=-1, ell=0)
    with pytest.raises(DomainError):
        basis.basis_eval(BasisIndex(s=0, ell=0), 1.5)


def test_every_basis_function_vanishes_at_the_boundary():
    matrix = basis.basis_matrix(BasisSet(s_max=6), np.array([0.0, 1.0]))
    assert np.all(matrix == 0.0)


def test_integral_matches_simpson_quadrature():
    x = np.linspace(0.0, 1.0, 2 ** 12 + 1)
    for index in BasisSet(s_max=5).indices:
        numeric = simpson(basis.basis_eval(index, x), x=x)
        assert abs(numeric - SineBasis.basis_integral(index)) <= 1e-8


def test_derivative_matches_central_differences_inside_support():
    h = 1e-6
    for index in BasisSet(s_max=3).indices:
        width = 2.0 ** -index.s
        start = index.ell * width / 2
        x = start + width * np.linspace(0.05, 0.95, 9)
        numeric = (basis.basis_eval(index, x + h) - basis.basis_eval(index, x - h)) / (2 * h)
        assert np.allclose(basis.basis_deriv(index, x), numeric, rtol=1e-6, atol=1e-6)


def test_values_are_bounded_and_supported_on_dyadic_interval():
    x = np.linspace(0.0, 1.0, 1025)
    for index in BasisSet(s_max=4).indices:
        values = basis.basis_eval(index, x)
        assert np.abs(values).max() <= 1.0
        support = x[values > 0.0]
        assert support.max() - support.min() <= 2.0 ** -index.s


def test_basis_set_ordering_and_positions():
    basis_set = BasisSet(s_max=4)
    assert basis_set.size == 57
    assert basis_set.indices[0].key == (0, 0)
    assert basis_set.indices[-1].key == (4, 30)
    for position, index in enumerate(basis_set.indices):
        assert basis_set.position(index) == position


def test_matrices_agree_with_pointwise_evaluation():
    basis_set = BasisSet(s_max=2)
    x = np.array([0.0, 0.1, 0.25, 0.5, 0.8, 1.0])
    values = basis.basis_matrix(basis_set, x)
    slopes = basis.basis_deriv_matrix(basis_set, x)
    for column, index in enumerate(basis_set.indices):
        assert np.array_equal(values[:, column], basis.basis_eval(index, x))
        assert np.array_equal(slopes[:, column], basis.basis_deriv(index, x))
    assert np.allclose(basis.integrals(basis_set), [SineBasis.basis_integral(i) for i in basis_set.indices])

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgqi.errors import CapabilityError, DomainError, SingularityError
from sgqi.kernel import (
    KernelSpec,
    eval_phi,
    eval_psi_c,
    eval_psi_ch,
    eval_tensor_kernel,
    eval_weighted_psi,
    quadrature_weight,
)
from sgqi.oracle import finite_diff

# references computed with mpmath at 40 digits from the defining formulas
PSI_CH_REFERENCE = [
    # c, h, x, order, value
    (0.1, 0.25, 0.0, 0, 5.7173875731324697),
    (0.05, 0.0625, 0.3, 0, 0.007847086836479122),
    (0.05, 0.0625, 0.3, 1, -0.055712044327440073),
    (0.05, 0.0625, 0.3, 2, 0.77306610973593609),
    (0.2, 0.125, 0.71, 1, 1.2409118232243776),
    (0.2, 0.125, 0.71, 2, 18.445487332362302),
    (0.001, 0.001953125, 0.0, 0, 435.32402014590071),
]

PHI_REFERENCE = [
    (0.3, 0.2, 0, 0.10502917991104381),
    (0.3, 0.2, 1, 0.36029355331616596),
    (0.3, 0.2, 2, -0.50040565880802127),
    (0.01, 0.37, 2, -1.4414879787938613),
]


class TestPhi:
    def test_value_at_origin(self):
        assert eval_phi(0.1, 0.0) == pytest.approx(0.1 / (2 * math.pi), rel=1e-15)

    def test_first_derivative_vanishes_at_origin(self):
        assert eval_phi(0.1, 0.0, 1) == 0.0

    def test_second_derivative_at_origin(self):
        assert eval_phi(0.1, 0.0, 2) == pytest.approx(math.pi / 0.2, rel=1e-12)
        assert finite_diff(lambda x: eval_phi(0.1, x), 0.0, 2, 1e-5) == pytest.approx(15.7079633, abs=1e-3)

    @pytest.mark.parametrize("c,x,order,expected", PHI_REFERENCE)
    def test_against_high_precision(self, c, x, order, expected):
        assert eval_phi(c, x, order) == pytest.approx(expected, rel=1e-13)

    def test_array_input_keeps_shape(self):
        out = eval_phi(0.2, np.zeros((3, 4)), 1)
        assert out.shape == (3, 4)

    def test_unsupported_order(self):
        with pytest.raises(CapabilityError):
            eval_phi(0.1, 0.3, 3)

    def test_negative_shape_parameter(self):
        with pytest.raises(DomainError):
            eval_phi(-0.1, 0.3)

    def test_zero_c_derivative_at_integer_is_singular(self):
        with pytest.raises(SingularityError):
            eval_phi(0.0, np.array([0.25, 0.0]), 1)
        assert eval_phi(0.0, 0.5) == pytest.approx(1 / (2 * math.pi))


class TestPsiC:
    def test_peak_value(self):
        assert eval_psi_c(0.1, 0.0) == pytest.approx(15.8650429, rel=1e-8)

    def test_value_at_half(self):
        expected = math.pi * 0.01 * 1.01 / (2 * 1.01**1.5)
        assert eval_psi_c(0.1, 0.5) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(1.563001e-2, rel=1e-6)

    def test_periodic(self):
        x = np.linspace(-2, 2, 41)
        np.testing.assert_allclose(eval_psi_c(0.07, x), eval_psi_c(0.07, x + 1), rtol=1e-12)

    def test_matches_operator_definition(self):
        x = np.linspace(0.01, 0.99, 50)
        for c in (0.05, 0.2):
            np.testing.assert_allclose(eval_phi(c, x, 2) + math.pi**2 * eval_phi(c, x), eval_psi_c(c, x),
                                       rtol=1e-9)

    def test_rejects_nonpositive_c(self):
        with pytest.raises(DomainError):
            eval_psi_c(0.0, 0.3)


class TestPsiCH:
    @pytest.mark.parametrize("c,h,x,order,expected", PSI_CH_REFERENCE)
    def test_against_high_precision(self, c, h, x, order, expected):
        assert eval_psi_ch(c, h, x, order) == pytest.approx(expected, rel=1e-12)

    def test_step_domain(self):
        for h in (0.0, 0.5, 0.7, -0.1):
            with pytest.raises(DomainError):
                eval_psi_ch(0.1, h, 0.0)

    def test_converges_to_continuous_kernel_at_second_order(self):
        levels = np.arange(4, 11)
        errs = [abs(eval_psi_ch(0.1, 2.0**-l, 0.3) - eval_psi_c(0.1, 0.3)) for l in levels]
        slope = np.polyfit(levels, -np.log2(errs), 1)[0]
        assert slope >= 1.9

    def test_derivatives_match_finite_differences(self):
        c, h, x = 0.08, 2.0**-5, 0.41
        d1 = finite_diff(lambda t: eval_psi_ch(c, h, t), x, 1, 1e-6)
        d2 = finite_diff(lambda t: eval_psi_ch(c, h, t), x, 2, 1e-4)
        assert eval_psi_ch(c, h, x, 1) == pytest.approx(d1, rel=1e-6)
        assert eval_psi_ch(c, h, x, 2) == pytest.approx(d2, rel=1e-5)

    def test_zero_c_limit_is_finite(self):
        vals = eval_psi_ch(0.0, 0.125, np.linspace(-1, 1, 17))
        assert np.all(np.isfinite(vals))

    @settings(max_examples=60, deadline=None)
    @given(st.floats(1e-3, 0.35), st.integers(2, 9), st.floats(-3, 3))
    def test_positive(self, c, level, x):
        assert eval_psi_ch(c, 2.0**-level, x) > 0


class TestWeightedKernel:
    def test_equals_kernel_times_weight(self):
        x = np.linspace(0, 1, 33)
        for h in (0.25, 0.125, 2.0**-7):
            np.testing.assert_allclose(eval_weighted_psi(0.05, h, x, 1),
                                       eval_psi_ch(0.05, h, x, 1) * quadrature_weight(h), rtol=1e-12)

    def test_finite_at_half_step(self):
        assert eval_weighted_psi(0.3, 0.5, 0.2) == pytest.approx(0.86284905817151687, rel=1e-13)

    def test_zero_c_reproduces_constants_at_nodes(self):
        # c = 0: evaluated at a node, the weighted kernel sums to 1
        for level in (2, 5, 8):
            h = 2.0**-level
            nodes = np.arange(2**level) * h
            for x in (0.0, 3 * h):
                assert np.sum(eval_weighted_psi(0.0, h, x - nodes)) == pytest.approx(1.0, abs=1e-12)

    def test_quadrature_weight(self):
        assert quadrature_weight(0.25) == pytest.approx(1 / (2 * math.pi))
        assert quadrature_weight(2.0**-10) == pytest.approx(2.0**-10, rel=1e-4)


class TestTensorKernel:
    def test_one_dimensional_example(self):
        spec = KernelSpec((0.1,), (0.25,))
        assert eval_tensor_kernel(spec, np.array([0.0])) == pytest.approx(5.71735, rel=1e-5)

    def test_factorizes(self):
        spec = KernelSpec((0.1, 0.2), (0.25, 0.125))
        x = np.array([0.13, 0.77])
        a = eval_tensor_kernel(KernelSpec((0.1,), (0.25,)), x[:1], (1,))
        b = eval_tensor_kernel(KernelSpec((0.2,), (0.125,)), x[1:], (2,))
        assert eval_tensor_kernel(spec, x, (1, 2)) == pytest.approx(a * b, rel=1e-14)

    def test_batch_shape(self):
        spec = KernelSpec((0.1, 0.2, 0.3), (0.25, 0.125, 0.5))
        assert eval_tensor_kernel(spec, np.zeros((7, 3))).shape == (7,)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            eval_tensor_kernel(KernelSpec((0.1,), (0.25,)), np.zeros(2))

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            KernelSpec((0.1, 0.2), (0.25,))
        with pytest.raises(DomainError):
            KernelSpec((-0.1,), (0.25,))
        assert KernelSpec.from_levels((0.1, 0.1), (1, 3)).h == (0.5, 0.125)

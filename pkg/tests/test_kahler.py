import numpy as np
import pytest

from superquant.kahler import (MomentValue, SuperKahlerData,
                               UncertifiedPotentialError, build_form,
                               dolbeault_check, moment_map, verify_axioms,
                               verify_moment_identity)
from superquant.potential import (ConvexPotential, certify_strict_convexity,
                                  eval_jet2, gradient_oracle, parse)

SAMPLES_2D = [[0.5, -1.0], [0.0, 0.3], [1.2, 0.7], [-0.8, -0.2]]


class TestBuildForm:
    def test_normalizes_equal_pairs(self, quadratic2):
        form = build_form(quadratic2, 2, odd_coefficients=[(4.0, 4.0), (4.0, 4.0)])
        assert form.odd_coefficients == ((1.0, 1.0), (1.0, 1.0))
        assert form.normalized_from == ((4.0, 4.0), (4.0, 4.0))

    def test_default_coefficients_are_ones(self, quadratic2):
        assert build_form(quadratic2, 3).odd_coefficients == ((1.0, 1.0),) * 3

    def test_rejects_unequal_pair(self, quadratic2):
        with pytest.raises(ValueError, match="a != b"):
            build_form(quadratic2, 1, odd_coefficients=[(2.0, 3.0)])

    def test_rejects_nonpositive_pair(self, quadratic2):
        with pytest.raises(ValueError, match="positive"):
            build_form(quadratic2, 1, odd_coefficients=[(-1.0, -1.0)])

    def test_rejects_uncertified(self):
        bare = ConvexPotential(parse("x1^2"), (1, 0))
        with pytest.raises(UncertifiedPotentialError):
            build_form(bare, 1)

    def test_rejects_refuted(self):
        quartic = ConvexPotential(parse("x1^4"), (1, 0))
        refutation = certify_strict_convexity(quartic, [(-1, 1)], 11)
        with pytest.raises(UncertifiedPotentialError):
            build_form(quartic.with_certificate(refutation), 1)


class TestVerifyAxioms:
    def test_passes_for_suite(self, suite_potentials):
        for pot in suite_potentials:
            form = build_form(pot, 2)
            assert verify_axioms(form, SAMPLES_2D).passed

    def test_asymmetrized_block_fails_closedness(self, quadratic2):
        form = build_form(quadratic2, 1)

        def tampered(x):
            g = eval_jet2(quadratic2, x).hessian.copy()
            g[0, 1] += 0.3 * x[1]  # x-dependent asymmetry, not closed
            return g

        report = verify_axioms(form, SAMPLES_2D, even_block=tampered)
        by_name = {c.name: c for c in report.checks}
        assert not by_name["closedness"].passed
        assert by_name["positivity"].passed

    def test_negative_odd_coefficient_fails_positivity(self, quadratic2):
        broken = SuperKahlerData(quadratic2, (2, 0, 1), ((-1.0, -1.0),))
        report = verify_axioms(broken, SAMPLES_2D)
        assert not {c.name: c for c in report.checks}["positivity"].passed

    def test_report_serializes(self, quadratic2):
        report = verify_axioms(build_form(quadratic2, 1), SAMPLES_2D)
        data = report.to_dict()
        assert data["passed"] is True
        assert {c["name"] for c in data["checks"]} \
            == {"positivity", "closedness", "consistency"}


class TestMomentMap:
    def test_quadratic_example(self, quadratic2):
        form = build_form(quadratic2, 1)
        value = moment_map(form, [1.0, -1.0], [0.5])
        assert value == MomentValue((-2.0, 2.0), (1.0,))

    def test_tilted_at_origin(self, tilted):
        form = build_form(tilted, 1)
        value = moment_map(form, [0.0, 0.0], [0.0])
        assert value.even_part == (3.0, -2.0)

    def test_zero_odd_coordinates(self, quadratic2):
        form = build_form(quadratic2, 2)
        assert moment_map(form, [0.3, 0.4], [0.0, 0.0]).odd_part == (0.0, 0.0)

    def test_invariant_under_unused_coordinates(self, quadratic2):
        form = build_form(quadratic2, 1)
        base = moment_map(form, [0.7, -0.2], [0.1])
        shifted = moment_map(form, [0.7, -0.2], [0.1],
                             y=[5.0, -3.0], eta=[9.0])
        assert base == shifted

    def test_even_part_matches_independent_differences(self, suite_potentials):
        rng = np.random.default_rng(21)
        for pot in suite_potentials:
            form = build_form(pot, 1)
            oracle = gradient_oracle(pot, step=1e-6)
            for _ in range(10):
                x = rng.uniform(-1.5, 1.5, size=pot.dim)
                even = np.asarray(moment_map(form, x, [0.0]).even_part)
                assert np.abs(even + oracle(x)).max() < 1e-6


class TestMomentIdentity:
    def test_quadratic_even_direction(self, quadratic2):
        # with the antiderivation convention both sides carry -2 on dx_1
        form = build_form(quadratic2, 1)
        x = np.array([0.4, -1.1])
        lhs = -eval_jet2(quadratic2, x).hessian @ np.array([1.0, 0.0])
        assert lhs.tolist() == [-2.0, 0.0]
        report = verify_moment_identity(form, [1.0, 0.0], [0.0], [x])
        assert report.passed

    def test_odd_direction_coefficient(self, quadratic2):
        form = build_form(quadratic2, 2)
        report = verify_moment_identity(form, [0.0, 0.0], [1.0, 0.0],
                                        SAMPLES_2D)
        assert report.passed
        assert {c.name: c for c in report.checks}[
            "odd-block identity"].worst_residual == 0.0

    def test_zero_directions(self, quadratic2):
        form = build_form(quadratic2, 1)
        report = verify_moment_identity(form, [0.0, 0.0], [0.0], SAMPLES_2D)
        for check in report.checks:
            assert check.worst_residual == 0.0

    def test_residual_below_tolerance_for_suite(self, suite_potentials):
        rng = np.random.default_rng(22)
        for pot in suite_potentials:
            form = build_form(pot, 2)
            u = rng.standard_normal(pot.dim)
            w = rng.standard_normal(2)
            report = verify_moment_identity(form, u, w, SAMPLES_2D)
            assert report.passed
            for check in report.checks:
                assert check.worst_residual <= 1e-8


class TestDolbeault:
    def test_quadratic_value(self, quadratic2):
        # quarter of the constant Hessian 2I has diagonal 1/2
        form = build_form(quadratic2, 1)
        assert (0.25 * eval_jet2(quadratic2, [0.0, 0.0]).hessian)[0, 0] == 0.5
        assert dolbeault_check(form, SAMPLES_2D).passed

    def test_tilted_value_at_origin(self, tilted):
        form = build_form(tilted, 1)
        quarter = 0.25 * eval_jet2(tilted, [0.0, 0.0]).hessian
        assert quarter[0, 0] == pytest.approx(0.5 / 4)
        assert dolbeault_check(form, [[0.0, 0.0]]).passed

    def test_constant_potential_both_sides_vanish(self):
        flat = ConvexPotential(parse("0"), (1, 0))
        form = SuperKahlerData(flat, (1, 0, 1), ((1.0, 1.0),))
        report = dolbeault_check(form, [[0.0], [1.0]])
        assert {c.name: c for c in report.checks}[
            "quarter-Hessian identity"].worst_residual < 1e-9

    def test_suite_residuals(self, suite_potentials):
        for pot in suite_potentials:
            form = build_form(pot, 1)
            report = dolbeault_check(form, SAMPLES_2D)
            assert report.passed
            residual = {c.name: c for c in report.checks}[
                "quarter-Hessian identity"].worst_residual
            assert residual <= 1e-7

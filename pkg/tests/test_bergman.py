import inspect
import math

import numpy as np
import pytest

from superquant.bergman import (NewtonParams, Occurrence, SectionCoefficient,
                                TruncationSchedule, VerdictKind,
                                classify_weight, legendre_attainment,
                                metric_axioms_check, section_norm,
                                weighted_norm_integral)
from superquant.grassmann import Blade
from superquant.potential import quadratic_potential, tilted_hyperbolic_potential

GAUSSIAN_HALF = math.sqrt(math.pi / 2.0)  # closed form of the weight-0 norm


class TestSchedule:
    def test_validation(self):
        with pytest.raises(ValueError):
            TruncationSchedule(initial_radius=0.0)
        with pytest.raises(ValueError):
            TruncationSchedule(growth=1.0)
        with pytest.raises(ValueError):
            TruncationSchedule(max_doublings=2)

    def test_radii_double(self):
        radii = list(TruncationSchedule(max_doublings=3).radii())
        assert radii == [4.0, 8.0, 16.0, 32.0]


class TestWeightedNormIntegral:
    def test_gaussian_benchmark(self):
        verdict = weighted_norm_integral([0.0], quadratic_potential(1))
        assert verdict.is_convergent
        assert abs(verdict.value - GAUSSIAN_HALF) <= 1e-6 * GAUSSIAN_HALF

    def test_shifted_weight_converges_inside_cube(self, tilted):
        verdict = weighted_norm_integral([3.0, -2.0], tilted)
        assert verdict.is_convergent

    def test_diverges_outside_cube(self, tilted):
        verdict = weighted_norm_integral([4.0, -2.0], tilted)
        assert verdict.is_divergent
        witness = verdict.growth_witness
        assert len(witness) >= 3
        ratios = [b / a for a, b in zip(witness, witness[1:])
                  if np.isfinite(a) and np.isfinite(b) and a > 0]
        assert all(r >= 10.0 for r in ratios)

    def test_truncations_monotone(self, tilted):
        for lam in ([3.0, -2.0], [4.0, -2.0]):
            history = weighted_norm_integral(lam, tilted).history
            values = [v for _, v in history if np.isfinite(v)]
            assert all(a <= b * (1 + 1e-12) for a, b in zip(values, values[1:]))

    def test_boundary_weight_is_inconclusive(self):
        # exactly on the closure of the gradient image: integrand tends to a
        # constant, growth is too slow for a definite divergence call
        pot = tilted_hyperbolic_potential((0.0,), 0.5)
        verdict = weighted_norm_integral([0.5], pot)
        assert verdict.kind is VerdictKind.INCONCLUSIVE

    def test_dimension_mismatch(self, tilted):
        with pytest.raises(ValueError):
            weighted_norm_integral([0.0], tilted)


class TestLegendreAttainment:
    def test_quadratic_minimizer(self):
        # solve grad(x^2) + lam = 0 by hand: x = -lam/2
        pot = quadratic_potential(2)
        verdict = legendre_attainment([3.0, -1.0], pot)
        assert verdict.is_convergent
        assert np.allclose(verdict.point, [-1.5, 0.5], atol=1e-9)

    def test_zero_weight_attains_at_origin(self):
        verdict = legendre_attainment([0.0], quadratic_potential(1))
        assert verdict.is_convergent
        assert abs(verdict.point[0]) < 1e-9

    def test_boundary_weight_escapes(self):
        # gradient image is (-1/2, 1/2); its endpoint is not attained
        pot = tilted_hyperbolic_potential((0.0,), 0.5)
        verdict = legendre_attainment([0.5], pot)
        assert verdict.is_divergent
        assert abs(verdict.point[0]) > 1e6

    def test_outside_cube_escapes(self, tilted):
        verdict = legendre_attainment([4.0, -2.0], tilted)
        assert verdict.is_divergent

    def test_requires_certificate(self):
        from superquant.potential import ConvexPotential, parse
        with pytest.raises(ValueError):
            legendre_attainment([0.0], ConvexPotential(parse("x1^2"), (1, 0)))


class TestClassifyWeight:
    def test_full_image_occurs(self, quadratic2):
        result = classify_weight([7, -4], [], quadratic2)
        assert result.verdict is Occurrence.OCCURS
        assert np.allclose(result.attainment_point, [-3.5, 2.0], atol=1e-9)

    def test_cube_membership(self, tilted):
        assert classify_weight([3, -2], [], tilted).verdict is Occurrence.OCCURS
        assert classify_weight([4, -2], [], tilted).verdict \
            is Occurrence.DOES_NOT_OCCUR

    def test_non_integral_center_never_occurs_on_lattice(self):
        pot = tilted_hyperbolic_potential((2.5, -2.0), 0.25)
        for torus in ([2, -2], [3, -2]):
            assert classify_weight(torus, [], pot).verdict \
                is Occurrence.DOES_NOT_OCCUR

    def test_flat_components_probe_neighborhood(self):
        pot = quadratic_potential((1, 1))
        result = classify_weight([0], [0.5], pot)
        assert result.verdict is Occurrence.OCCURS
        assert len(result.probes) == 2  # +-delta along the flat axis

    def test_rejects_non_integer_torus(self, quadratic2):
        with pytest.raises(ValueError):
            classify_weight([0.5, 0], [], quadratic2)

    def test_rejects_wrong_split(self, quadratic2):
        with pytest.raises(ValueError):
            classify_weight([0], [0.0], quadratic2)

    def test_api_admits_no_unused_coordinates(self):
        params = inspect.signature(classify_weight).parameters
        assert "y" not in params and "eta" not in params

    def test_no_contradictory_definite_verdicts(self, tilted):
        for t1 in range(1, 6):
            for t2 in (-3, -2, -1):
                result = classify_weight([t1, t2], [], tilted)
                assert not result.center.disagreement
                assert not result.discrepancies


class TestSectionNorm:
    def test_even_gaussian(self):
        section = SectionCoefficient((0.0,), Blade(()), 1.0, k=1)
        verdict = section_norm(section, quadratic_potential(1))
        assert verdict.is_convergent
        assert verdict.i_power == 0
        assert abs(verdict.value - GAUSSIAN_HALF) <= 1e-6 * GAUSSIAN_HALF

    def test_scalar_amplitude_squares(self):
        section = SectionCoefficient((0.0,), Blade(()), 2.0 - 1.0j, k=1)
        verdict = section_norm(section, quadratic_potential(1))
        assert verdict.value == pytest.approx(5.0 * GAUSSIAN_HALF, rel=1e-6)

    def test_odd_section_carries_i_power(self):
        section = SectionCoefficient((0.0,), Blade((1,)), 1.0, k=1)
        verdict = section_norm(section, quadratic_potential(1))
        assert verdict.is_convergent and verdict.i_power == 1

    def test_divergent_weight_passes_through(self):
        pot = tilted_hyperbolic_potential((3.0,), 0.5)
        section = SectionCoefficient((5.0,), Blade(()), 1.0, k=1)
        assert section_norm(section, pot).is_divergent

    def test_zero_section(self):
        section = SectionCoefficient((9.0,), Blade((1,)), 0.0, k=1)
        verdict = section_norm(section, quadratic_potential(1))
        assert verdict.is_convergent and verdict.value == 0.0

    def test_antiholomorphic_blade_rejected(self):
        with pytest.raises(ValueError):
            SectionCoefficient((0.0,), Blade((2,)), 1.0, k=1)


class TestMetricAxioms:
    def family(self):
        return [
            SectionCoefficient((0.0,), Blade(()), 1.0, k=1),
            SectionCoefficient((0.0,), Blade(()), 0.5 + 2.0j, k=1),
            SectionCoefficient((1.0,), Blade(()), 1.0, k=1),
            SectionCoefficient((0.0,), Blade((1,)), 1.0 - 1.0j, k=1),
        ]

    def test_axioms_hold(self):
        report = metric_axioms_check(self.family(), quadratic_potential(1))
        assert report.passed
        names = {c.name for c in report.checks}
        assert names == {"consistency", "super Hermitian symmetry",
                         "super positivity"}

    def test_divergent_member_rejected(self):
        pot = tilted_hyperbolic_potential((3.0,), 0.5)
        bad = [SectionCoefficient((0.0,), Blade(()), 1.0, k=1)]
        with pytest.raises(ValueError, match="divergent"):
            metric_axioms_check(bad, pot)

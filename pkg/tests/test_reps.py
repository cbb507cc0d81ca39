import random

import numpy as np
import pytest

from superquant.bergman import Occurrence
from superquant.grassmann import Parity, ResourceError
from superquant.potential import quadratic_potential, tilted_hyperbolic_potential
from superquant.reps import (IrrepLabel, SuperHilbertSample, Weight, WeightBox,
                             character_eval, gelfand_model_check,
                             lambda_module_checks, occurrences,
                             odd_triviality_check, operator_parity, pi_switch,
                             sample_unitary_algebra, tensor, u_B_membership)


def label(torus, parity, flat=()):
    return IrrepLabel(Weight(tuple(torus), tuple(flat)), parity)


class TestLattice:
    def test_tensor_example(self):
        a = label((1, 2), Parity.EVEN)
        b = label((3, -1), Parity.ODD)
        out = tensor(a, b)
        assert out.weight == Weight((4, 1))
        assert out.parity is Parity.ODD

    def test_identity_element(self):
        e = label((0, 0), Parity.EVEN)
        x = label((2, -5), Parity.ODD)
        assert tensor(e, x) == x

    def test_inverse(self):
        a = label((3,), Parity.ODD)
        b = label((-3,), Parity.ODD)
        assert tensor(a, b) == label((0,), Parity.EVEN)

    def test_abelian_group_random(self):
        rng = random.Random(5)

        def rand_label():
            return IrrepLabel(
                Weight((rng.randint(-9, 9), rng.randint(-9, 9)),
                       (rng.randint(-8, 8) / 4,)),
                Parity(rng.randint(0, 1)))

        for _ in range(200):
            a, b, c = rand_label(), rand_label(), rand_label()
            assert tensor(tensor(a, b), c) == tensor(a, tensor(b, c))
            assert tensor(a, b) == tensor(b, a)
            inv = IrrepLabel(-a.weight, a.parity)
            identity = tensor(a, inv)
            assert identity.weight == Weight((0, 0), (0.0,))
            assert identity.parity is Parity.EVEN

    def test_pi_switch(self):
        a = label((2,), Parity.EVEN)
        assert pi_switch(a).parity is Parity.ODD
        assert pi_switch(a).weight == a.weight
        assert pi_switch(pi_switch(a)) == a

    def test_weight_requires_integers(self):
        with pytest.raises(ValueError):
            Weight((0.5,), ())

    def test_mismatched_sum(self):
        with pytest.raises(ValueError):
            Weight((1,), ()) + Weight((1, 2), ())


class TestCharacters:
    def test_trivial_character(self):
        w = Weight((0, 0), (0.0,))
        for r in ([0.1, 0.9], [0.5, 0.25]):
            assert character_eval(w, r, [1.3]) == pytest.approx(1.0)

    def test_multiplicativity(self):
        rng = random.Random(6)
        for _ in range(50):
            a = Weight((rng.randint(-5, 5),), (rng.uniform(-2, 2),))
            b = Weight((rng.randint(-5, 5),), (rng.uniform(-2, 2),))
            r, s = [rng.random()], [rng.uniform(-3, 3)]
            lhs = character_eval(a, r, s) * character_eval(b, r, s)
            rhs = character_eval(a + b, r, s)
            assert abs(lhs - rhs) < 1e-12

    def test_half_point_value(self):
        # adopted normalization: exp(2*pi*i * 1 * 0.5) = -1
        assert character_eval(Weight((1,), ()), [0.5]) \
            == pytest.approx(-1.0 + 0.0j)

    def test_torus_periodicity(self):
        rng = random.Random(7)
        for _ in range(50):
            w = Weight((rng.randint(-6, 6), rng.randint(-6, 6)))
            r = [rng.random(), rng.random()]
            shifted = [r[0] + rng.randint(-3, 3), r[1] + rng.randint(-3, 3)]
            assert abs(character_eval(w, r) - character_eval(w, shifted)) < 1e-12

    def test_dimension_check(self):
        with pytest.raises(ValueError):
            character_eval(Weight((1,), ()), [0.1, 0.2])


class TestWeightBox:
    def test_count_and_order(self):
        box = WeightBox(((0, 2),), ((0.5, -0.5),))
        weights = list(box.weights())
        assert box.count == 6 == len(weights)
        assert weights[0] == Weight((0,), (-0.5,))
        assert weights == sorted(weights, key=lambda w: w.components())

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            WeightBox(((2, 0),))

    def test_empty_flat_axis(self):
        assert WeightBox(((0, 3),), ((),)).count == 0


class TestOccurrences:
    def test_finite_cube(self):
        # oracle: integer weights inside the open cube |l - mu| < 1.5,
        # enumerated directly from the closed-form gradient image
        mu = (3, -2)
        pot = tilted_hyperbolic_potential(mu, 1.5)
        box = WeightBox(((0, 6), (-5, 1)))
        expected = {(float(a), float(b))
                    for a in range(0, 7) for b in range(-5, 2)
                    if max(abs(a - mu[0]), abs(b - mu[1])) < 1.5}
        assert len(expected) == 9
        report = occurrences(pot, box)
        got = {e.weight.components() for e in report.entries
               if e.verdict is Occurrence.OCCURS}
        assert got == expected
        assert not report.inconclusive
        assert not report.discrepancies

    def test_odd_labels_never_occur(self):
        pot = quadratic_potential(1)
        report = occurrences(pot, WeightBox(((-2, 2),)))
        odd = [e for e in report.entries if e.parity is Parity.ODD]
        assert len(odd) == 5
        assert all(e.verdict is Occurrence.DOES_NOT_OCCUR for e in odd)
        assert all(e.verdict is not Occurrence.OCCURS for e in odd)

    def test_box_shape_mismatch(self):
        with pytest.raises(ValueError):
            occurrences(quadratic_potential(2), WeightBox(((0, 1),)))

    def test_report_serializes(self):
        report = occurrences(quadratic_potential(1), WeightBox(((0, 1),)))
        data = report.to_dict()
        assert {e["parity"] for e in data["entries"]} == {"+", "-"}
        assert data["conventions"]["torus_haar_volume"] == 1


class TestGelfandModel:
    def test_surjective_gradient_confirms(self):
        pot = quadratic_potential((1, 1))
        box = WeightBox(((-1, 1),), ((-0.5, 0.75),))
        report = gelfand_model_check(pot, box)
        assert report.passed
        assert report.metadata["labels"] == 6

    def test_small_cube_fails(self):
        pot = tilted_hyperbolic_potential((0, 0), 0.5)
        box = WeightBox(((-1, 1), (-1, 1)))
        report = gelfand_model_check(pot, box)
        assert not report.passed
        coverage = {c.name: c for c in report.checks}["coverage"]
        assert "1/9" in coverage.detail  # only the center weight occurs

    def test_empty_box_vacuous(self):
        pot = quadratic_potential((1, 1))
        report = gelfand_model_check(pot, WeightBox(((0, 3),), ((),)))
        assert report.passed


class TestUnitaryAlgebra:
    def diag_sample(self):
        return SuperHilbertSample(1, 1, np.diag([1.0, 1j]))

    def test_zero_operator(self):
        assert u_B_membership(np.zeros((2, 2)), self.diag_sample()) == 0.0

    def test_diagonal_member(self):
        # direct substitution: u = diag(i, i) satisfies the graded skew rule
        assert u_B_membership(np.diag([1j, 1j]), self.diag_sample()) < 1e-15

    def test_random_operator_is_not_member(self):
        rng = np.random.default_rng(8)
        mat = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        mat[0, 1] = mat[1, 0] = 0.0
        assert u_B_membership(mat, self.diag_sample()) > 1e-3

    def test_non_homogeneous_rejected(self):
        with pytest.raises(ValueError, match="homogeneous"):
            u_B_membership(np.ones((2, 2)), self.diag_sample())

    def test_operator_parity(self):
        sample = self.diag_sample()
        assert operator_parity(np.diag([1.0, 2.0]), sample) == 0
        assert operator_parity(np.array([[0, 1], [2, 0]], dtype=float),
                               sample) == 1

    @pytest.mark.parametrize("dims", [(1, 1), (2, 3), (8, 8)])
    def test_sampled_members_have_tiny_residual(self, dims):
        rng = np.random.default_rng(9)
        sample = SuperHilbertSample.random(rng, *dims)
        for parity in (0, 1):
            for mat in sample_unitary_algebra(sample, parity, rng, count=10):
                assert u_B_membership(mat, sample) < 1e-12

    def test_metric_validation(self):
        bad = np.array([[1.0, 0.5], [0.5, 1j]])
        with pytest.raises(ValueError, match="block diagonal"):
            SuperHilbertSample(1, 1, bad)
        with pytest.raises(ValueError, match="positive definite"):
            SuperHilbertSample(1, 1, np.diag([-1.0, 1j]))
        with pytest.raises(ValueError, match="Hermitian"):
            SuperHilbertSample(2, 0, np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestOddTriviality:
    def test_identity_and_solver_on_diag(self):
        sample = SuperHilbertSample(1, 1, np.diag([1.0, 1j]))
        report = odd_triviality_check(sample, trials=100,
                                      rng=np.random.default_rng(10))
        assert report.passed
        solver = {c.name: c for c in report.checks}["square-zero solutions"]
        assert solver.worst_residual > 1e-6  # scale-invariant floor

    def test_identity_on_random_metrics(self):
        rng = np.random.default_rng(11)
        for dims in ((2, 2), (3, 4)):
            sample = SuperHilbertSample.random(rng, *dims)
            report = odd_triviality_check(sample, trials=100, rng=rng)
            assert report.passed
            identity = {c.name: c for c in report.checks}[
                "square pairing identity"]
            assert identity.worst_residual < 1e-10


class TestLambdaModule:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_checks_pass(self, k):
        report = lambda_module_checks(k)
        assert report.passed
        names = [c.name for c in report.checks]
        assert names == ["filtration drop", "joint kernel", "nontrivial action"]

    def test_bound(self):
        with pytest.raises(ResourceError):
            lambda_module_checks(5)

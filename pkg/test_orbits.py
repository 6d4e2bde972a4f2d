"""
test_orbits.py
Unit tests for orbit iteration, limits, uniformity and family sweeps
"""

import json
import unittest

import numpy as np

from config import TestingConfig
from domains import Ball, Bidisc, DomainFactory, PointOutsideDomainError
from moebius import (
    BallMap, CPoint2, DomainParameterError, hyperbolic_generator, lambda_pair, mu, parabolic_family, psi,
)
from orbits import (
    FamilyKind, FamilySpec, OrbitRecord, accumulation_samples, iterate_orbit, orbit_limit,
    uniformity_check,
)
from scenarios import mu_base_points


class TestIterateOrbit(unittest.TestCase):
    """Test orbit records and limit extraction"""

    def setUp(self):
        self.phi = hyperbolic_generator()
        self.origin = CPoint2(0, 0)

    def test_forward_orbit_reaches_boundary(self):
        record = iterate_orbit(self.phi, self.origin, 0, 40, DomainFactory.create("ex11"))
        self.assertEqual(len(record.entries), 41)
        self.assertEqual([e.j for e in record.entries], list(range(41)))
        self.assertLess(record.entries[-1].bdist, 1e-2)
        self.assertLess(record.entries[-1].point.distance(CPoint2(-1, 0)), 1e-3)

    def test_two_sided_limits(self):
        record = iterate_orbit(self.phi, self.origin, -60, 60, Ball())
        self.assertTrue(record.converged)
        self.assertLess(record.limit.distance(CPoint2(-1, 0)), 1e-6)
        self.assertLess(record.backward_limit.distance(CPoint2(1, 0)), 1e-6)

    def test_no_limit_on_short_orbit(self):
        record = iterate_orbit(self.phi, self.origin, 0, 12, Ball())
        self.assertIsNone(record.limit)
        self.assertFalse(record.converged)

    def test_identity_orbit_is_constant(self):
        start = CPoint2(0.1, 0)
        record = iterate_orbit(BallMap.identity(), start, 0, 5, Ball())
        self.assertEqual(len(record.entries), 6)
        for entry in record.entries:
            self.assertLess(entry.point.distance(start), 1e-15)
            self.assertAlmostEqual(entry.bdist, 0.9)

    def test_parabolic_family_tails(self):
        record = iterate_orbit(parabolic_family, self.origin, -1000, 1000, Ball())
        self.assertLess(record.entries[0].point.distance(CPoint2(-1, 0)), 1e-2)
        self.assertLess(record.entries[-1].point.distance(CPoint2(-1, 0)), 1e-2)

    def test_bidisc_family_orbit(self):
        record = iterate_orbit(mu, CPoint2(0, 0.5), -60, 60, Bidisc())
        self.assertLess(record.limit.distance(CPoint2(1, 0.5)), 1e-6)
        self.assertLess(record.backward_limit.distance(CPoint2(-1, 0.5)), 1e-6)

    def test_psi_orbit_far_out(self):
        family = lambda j: psi(j, 0.5)
        forward = iterate_orbit(family, self.origin, 0, 40, Bidisc())
        self.assertEqual(len(forward.entries), 41)
        self.assertLess(forward.entries[-1].bdist, 1e-2)
        self.assertLess(forward.entries[-1].point.distance(CPoint2(1, -1)), 1e-5)
        backward = iterate_orbit(family, self.origin, -40, 0, Bidisc())
        self.assertLess(backward.entries[0].bdist, 1e-2)
        self.assertLess(backward.entries[0].point.distance(CPoint2(-1, 1)), 1e-5)

    def test_hyperbolic_orbit_far_out(self):
        record = iterate_orbit(self.phi, self.origin, -1000, 1000, Ball())
        self.assertLess(record.entries[0].point.distance(CPoint2(1, 0)), 1e-9)
        self.assertLess(record.entries[-1].point.distance(CPoint2(-1, 0)), 1e-9)
        self.assertLess(record.limit.distance(CPoint2(-1, 0)), 1e-9)
        self.assertLess(record.backward_limit.distance(CPoint2(1, 0)), 1e-9)

    def test_orbit_stays_in_domain(self):
        ball, bidisc = Ball(), Bidisc()
        for entry in iterate_orbit(self.phi, CPoint2(0.3, 0.2j), -30, 30, ball).entries:
            self.assertTrue(ball.contains(entry.point))
        for entry in iterate_orbit(mu, CPoint2(0.1, 0.5), -30, 30, bidisc).entries:
            self.assertTrue(bidisc.contains(entry.point))

    def test_invalid_orbits(self):
        with self.assertRaises(DomainParameterError):
            iterate_orbit(self.phi, self.origin, 5, 1, Ball())
        with self.assertRaises(PointOutsideDomainError):
            iterate_orbit(self.phi, CPoint2(1, 0), 0, 5, Ball())

    def test_orbit_limit_needs_tail(self):
        with self.assertRaises(DomainParameterError):
            orbit_limit(OrbitRecord(), tail=10)

    def test_serialization(self):
        record = iterate_orbit(self.phi, self.origin, 0, 3, Ball())
        frame = record.to_frame()
        self.assertEqual(list(frame.columns), ["j", "re1", "im1", "re2", "im2", "bdist"])
        self.assertTrue(record.to_csv().startswith("j,re1,im1,re2,im2,bdist\n"))
        document = json.loads(record.to_json())
        self.assertEqual(len(document["entries"]), 4)
        self.assertAlmostEqual(document["entries"][1]["point"][0], -0.2)


class TestUniformity(unittest.TestCase):
    """Test uniform convergence on compact balls"""

    def test_forward_and_backward(self):
        phi = hyperbolic_generator()
        self.assertLess(uniformity_check(phi, 0.5, 60, limit=CPoint2(-1, 0)), 1e-4)
        self.assertLess(uniformity_check(phi, 0.5, -60, limit=CPoint2(1, 0)), 1e-4)

    def test_default_limit(self):
        self.assertLess(uniformity_check(hyperbolic_generator(), 0.5, 60), 1e-4)

    def test_slow_at_small_j(self):
        self.assertGreater(uniformity_check(hyperbolic_generator(), 0.5, 5, limit=CPoint2(-1, 0)), 1e-2)

    def test_identity_does_not_converge(self):
        values = [uniformity_check(BallMap.identity(), 0.5, j, limit=CPoint2(0, 0)) for j in (5, 20, 40)]
        self.assertEqual(len(set(values)), 1)
        self.assertAlmostEqual(values[0], 0.5, places=12)

    def test_monotone_decay(self):
        phi = hyperbolic_generator()
        values = [uniformity_check(phi, 0.5, j, limit=CPoint2(-1, 0)) for j in range(10, 45, 5)]
        for earlier, later in zip(values, values[1:]):
            self.assertLess(later, earlier)

    def test_radius_validated(self):
        with self.assertRaises(DomainParameterError):
            uniformity_check(hyperbolic_generator(), 1.0, 10)


class TestFamilies(unittest.TestCase):
    """Test declared family samples and the accumulation sweep"""

    def test_member_counts(self):
        self.assertEqual(FamilySpec.cyclic(hyperbolic_generator(), range(-3, 4)).member_count(), 7)
        self.assertEqual(FamilySpec.psi((1, 2), [0.5, 0.5j, -0.5]).member_count(), 6)
        self.assertEqual(FamilySpec.mu((1, 2, 3)).member_count(), 3)
        self.assertEqual(FamilySpec.full_bidisc(1234, chunk=500).member_count(), 1234)

    def test_psi_rejects_zero_parameter(self):
        with self.assertRaises(DomainParameterError):
            FamilySpec.psi((1,), [0.5, 0.0])

    def test_cyclic_batch_matches_maps(self):
        family = FamilySpec.cyclic(lambda_pair(), (2, -3))
        batch = next(family.batches())
        base = np.array([[0.1 + 0.2j, -0.3j]])
        images = batch.apply(base)
        self.assertEqual(images.shape, (2, 1, 2))
        expected = lambda_pair()
        np.testing.assert_allclose(images[0, 0], expected.compose(expected).apply_array(base)[0], atol=1e-12)

    def test_full_sampler_deterministic(self):
        family = FamilySpec.full_bidisc(1000, seed=3, chunk=400)
        sizes = [len(b) for b in family.batches()]
        self.assertEqual(sizes, [400, 400, 200])
        first = [b.first.copy() for b in family.batches()]
        second = [b.first.copy() for b in FamilySpec.full_bidisc(1000, seed=3, chunk=400).batches()]
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_full_sampler_stays_in_bidisc(self):
        batch = next(FamilySpec.full_bidisc(500, seed=4, chunk=500).batches())
        self.assertEqual(batch.apply(np.zeros((1, 2), dtype=complex)).shape, (500, 1, 2))
        images = batch.apply(np.zeros((1, 2), dtype=complex))[:, 0, :]
        self.assertTrue(np.all(np.max(np.abs(images), axis=1) < 1))
        self.assertTrue(np.all(np.max(np.abs(images), axis=1) > 1 - 1e-3))

    def test_cyclic_accumulation_two_points(self):
        family = FamilySpec.cyclic(hyperbolic_generator(), range(-60, 61))
        cloud = accumulation_samples(family, [CPoint2(0, 0)], Ball(), 1e-3)
        self.assertFalse(cloud.is_empty)
        signs = np.sign(cloud.points[:, 0])
        np.testing.assert_allclose(np.abs(cloud.points[:, 0]), 1.0, atol=1e-12)
        np.testing.assert_allclose(cloud.points[:, 1:], 0.0, atol=1e-12)
        self.assertEqual(int(np.sum(signs > 0)), int(np.sum(signs < 0)))

    def test_accumulation_order_is_deterministic(self):
        family = FamilySpec.mu((-30, 30))
        base = mu_base_points(8)
        domain = DomainFactory.create("ex23", config=TestingConfig)
        one = accumulation_samples(family, base, domain, 1e-3, workers=1)
        four = accumulation_samples(family, base, domain, 1e-3, workers=4)
        np.testing.assert_array_equal(one.points, four.points)
        self.assertEqual(one.provenance["family"], FamilyKind.MU.value)

    def test_base_points_must_be_inside(self):
        family = FamilySpec.cyclic(hyperbolic_generator(), (1,))
        with self.assertRaises(PointOutsideDomainError):
            accumulation_samples(family, [CPoint2(1, 0)], Ball())

    def test_threshold_validated(self):
        family = FamilySpec.cyclic(hyperbolic_generator(), (1,))
        with self.assertRaises(DomainParameterError):
            accumulation_samples(family, [CPoint2(0, 0)], Ball(), 0.0)


def run_tests():
    """Run all tests"""
    test_classes = [
        TestIterateOrbit,
        TestUniformity,
        TestFamilies,
    ]

    suite = unittest.TestSuite()

    for test_class in test_classes:
        tests = unittest.TestLoader().loadTestsFromTestCase(test_class)
        suite.addTests(tests)

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    return result.wasSuccessful()


if __name__ == "__main__":
    success = run_tests()
    print(f"\n{'='*50}")
    print(f"Tests {'PASSED' if success else 'FAILED'}")
    print(f"{'='*50}")

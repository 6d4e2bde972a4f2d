"""
test_levi.py
Unit tests for complex Hessians and Levi-form classification
"""

import math
import unittest

import numpy as np

from domains import Ball, Bidisc, DomainFactory, OmegaPrime, sample_boundary
from levi import (
    BoundaryClass, DegenerateDefiningFunctionError, NonFiniteSampleError, classify_boundary,
    classify_many, complex_hessian, complex_tangent,
)
from moebius import CPoint2, DomainParameterError
from verification import POLYNOMIAL_CORPUS


def sphere(p):
    return abs(p.z1) ** 2 + abs(p.z2) ** 2 - 1


class TestComplexHessian(unittest.TestCase):
    """Test the finite-difference complex Hessian"""

    def setUp(self):
        self.p = CPoint2(0.3 + 0.1j, -0.2 + 0.4j)

    def test_sphere_identity(self):
        np.testing.assert_allclose(complex_hessian(sphere, self.p).h, np.eye(2), atol=1e-6)

    def test_weighted_sphere(self):
        f = lambda p: abs(p.z1) ** 2 + 2 * abs(p.z2) ** 2 - 1
        np.testing.assert_allclose(complex_hessian(f, self.p).h, np.diag([1, 2]), atol=1e-6)

    def test_pluriharmonic_is_zero(self):
        np.testing.assert_allclose(complex_hessian(lambda p: p.z1.real, self.p).h, np.zeros((2, 2)), atol=1e-6)

    def test_polynomial_corpus(self):
        for f, oracle in POLYNOMIAL_CORPUS:
            form = complex_hessian(f, self.p)
            np.testing.assert_allclose(form.h, oracle(self.p), atol=1e-5)
            self.assertTrue(form.is_hermitian(1e-10))

    def test_eigenvalues_real(self):
        eigenvalues = complex_hessian(lambda p: abs(p.z1) ** 2 + 2 * abs(p.z2) ** 2, self.p).eigenvalues()
        np.testing.assert_allclose(sorted(eigenvalues), [1, 2], atol=1e-6)

    def test_non_finite_sample(self):
        with self.assertRaises(NonFiniteSampleError):
            complex_hessian(lambda p: float("nan"), self.p)


class TestComplexTangent(unittest.TestCase):
    """Test the complex tangent direction"""

    def test_sphere_at_pole(self):
        v = complex_tangent(sphere, CPoint2(1, 0))
        self.assertLess(abs(v[0]), 1e-8)
        self.assertAlmostEqual(abs(v[1]), 1.0)

    def test_sphere_on_diagonal(self):
        s = 1 / math.sqrt(2)
        v = complex_tangent(sphere, CPoint2(s, s))
        self.assertAlmostEqual(abs(np.vdot(np.array([1, -1]) / math.sqrt(2), v)), 1.0, places=8)

    def test_omega_prime_far_from_dent(self):
        p = CPoint2(1, 0)
        v_sphere = complex_tangent(sphere, p)
        v_dented = complex_tangent(OmegaPrime(), p)
        self.assertAlmostEqual(abs(np.vdot(v_sphere, v_dented)), 1.0, places=8)

    def test_vanishing_gradient(self):
        with self.assertRaises(DegenerateDefiningFunctionError):
            complex_tangent(lambda p: abs(p.z1) ** 2 + abs(p.z2) ** 2, CPoint2(0, 0))


class TestClassification(unittest.TestCase):
    """Test boundary classification by the sign of the Levi form"""

    def test_sphere_samples_strongly_pseudoconvex(self):
        ball = Ball()
        for p in sample_boundary(ball, 20, seed=9):
            result = classify_boundary(ball, p)
            self.assertEqual(result.boundary_class, BoundaryClass.STRONGLY_PSEUDOCONVEX)
            self.assertLess(abs(result.levi_value - 1.0), 1e-4)

    def test_accumulation_centers(self):
        ball = Ball()
        for p in (CPoint2(1, 0), CPoint2(-1, 0)):
            self.assertEqual(classify_boundary(ball, p).boundary_class, BoundaryClass.STRONGLY_PSEUDOCONVEX)

    def test_saddle_not_pseudoconvex(self):
        saddle = lambda p: p.z1.real - abs(p.z2) ** 2
        result = classify_boundary(saddle, CPoint2(0, 0))
        self.assertEqual(result.boundary_class, BoundaryClass.NOT_PSEUDOCONVEX)
        self.assertAlmostEqual(result.levi_value, -1.0, places=5)

    def test_class_invariant_under_scaling(self):
        saddle = lambda p: p.z1.real - abs(p.z2) ** 2
        convex = lambda p: p.z1.real + abs(p.z2) ** 2
        for c in (0.5, 2, 10):
            scaled_saddle = classify_boundary(lambda p: c * saddle(p), CPoint2(0, 0))
            scaled_convex = classify_boundary(lambda p: c * convex(p), CPoint2(0, 0))
            self.assertEqual(scaled_saddle.boundary_class, BoundaryClass.NOT_PSEUDOCONVEX)
            self.assertEqual(scaled_convex.boundary_class, BoundaryClass.STRONGLY_PSEUDOCONVEX)

    def test_bidisc_face_and_corner(self):
        bidisc = Bidisc()
        self.assertEqual(classify_boundary(bidisc, CPoint2(1, 0.5)).boundary_class,
                         BoundaryClass.LEVI_DEGENERATE)
        corner = classify_boundary(bidisc, CPoint2(1, 1j))
        self.assertEqual(corner.boundary_class, BoundaryClass.NON_SMOOTH)
        self.assertTrue(math.isnan(corner.levi_value))
        self.assertIsNone(corner.to_dict(CPoint2(1, 1j))["levi_value"])

    def test_dented_ball_away_from_dent(self):
        ex11 = DomainFactory.create("ex11")
        result = classify_boundary(ex11, CPoint2(1, 0))
        self.assertEqual(result.boundary_class, BoundaryClass.STRONGLY_PSEUDOCONVEX)

    def test_interior_point_rejected(self):
        with self.assertRaises(DomainParameterError):
            classify_boundary(Ball(), CPoint2(0.5, 0))

    def test_classify_many(self):
        points = [CPoint2(1, 0), CPoint2(0, 1)]
        results = classify_many(Ball(), points)
        self.assertEqual(len(results), 2)
        self.assertEqual(results[1].to_dict(points[1])["class"], "strongly_pseudoconvex")


def run_tests():
    """Run all tests"""
    test_classes = [
        TestComplexHessian,
        TestComplexTangent,
        TestClassification,
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

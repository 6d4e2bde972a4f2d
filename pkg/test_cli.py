"""
test_cli.py
Unit tests for the command line, configuration profiles, the acceptance
suite and performance accounting
"""

import json
import os
import tempfile
import time
import unittest

import numpy as np
import pandas as pd

from accum import PointCloud
from cli import main, merge_negative_values, parse_j_range, parse_point
from config import Config, QuickConfig, TestingConfig, get_config, validate_profile_config
from moebius import CPoint2, DomainParameterError
from performance_monitor import PerformanceMonitor, monitor_performance
from scenarios import default_run_config
from verification import AcceptanceSuite, CheckRow, VerifyReport


class TestArgumentHandling(unittest.TestCase):
    """Test argument parsing helpers"""

    def test_merge_negative_values(self):
        argv = ["orbit", "--scenario", "ex12", "--j", "-1000:1000", "--from", "-0.5,0", "--format", "csv"]
        self.assertEqual(merge_negative_values(argv),
                         ["orbit", "--scenario", "ex12", "--j=-1000:1000", "--from=-0.5,0", "--format", "csv"])

    def test_parse_point(self):
        self.assertEqual(parse_point("0,0"), CPoint2(0, 0))
        self.assertEqual(parse_point("0,1,0.5,0"), CPoint2(1j, 0.5))

    def test_parse_j_range(self):
        self.assertEqual(parse_j_range("-5:5"), (-5, 5))

    def test_usage_errors(self):
        self.assertEqual(main(["orbit", "--scenario", "ex11", "--j", "5:1"]), 2)
        self.assertEqual(main(["saccum", "--scenario", "ex99"]), 2)
        self.assertEqual(main(["orbit", "--scenario", "ex11", "--from", "1,2,3"]), 2)
        self.assertEqual(main(["verify-paper", "--expect", "nonsense=3"]), 2)
        self.assertEqual(main([]), 2)


class TestCommands(unittest.TestCase):
    """Test the subcommands end to end"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.tmp.name, "out")

    def tearDown(self):
        self.tmp.cleanup()

    def read_json(self):
        with open(self.out) as handle:
            return json.load(handle)

    def test_orbit_ex11(self):
        code = main(["orbit", "--scenario", "ex11", "--from", "0,0", "--j", "0:40", "--out", self.out])
        self.assertEqual(code, 0)
        frame = pd.read_csv(self.out)
        self.assertEqual(list(frame.columns), ["j", "re1", "im1", "re2", "im2", "bdist"])
        self.assertEqual(len(frame), 41)
        last = frame.iloc[-1]
        self.assertLess(last["bdist"], 1e-2)
        self.assertLess(abs(last["re1"] + 1), 1e-3)

    def test_orbit_expect_limit(self):
        base = ["orbit", "--scenario", "ex11", "--j", "0:40", "--out", self.out]
        self.assertEqual(main(base + ["--expect-limit", "-1,0,0,0"]), 0)
        self.assertEqual(main(base + ["--expect-limit", "1,0,0,0"]), 1)

    def test_orbit_identity_constant(self):
        code = main(["orbit", "--map", "identity", "--from", "0.1,0", "--j", "0:5", "--out", self.out])
        self.assertEqual(code, 0)
        frame = pd.read_csv(self.out)
        self.assertEqual(len(frame), 6)
        self.assertTrue((frame["re1"] == 0.1).all())
        self.assertTrue((frame["bdist"] == frame["bdist"].iloc[0]).all())

    def test_orbit_ex12_both_tails(self):
        code = main(["orbit", "--scenario", "ex12", "--from", "0,0", "--j", "-1000:1000",
                     "--expect-limit", "-1,0,0,0", "--limit-tol", "1e-2", "--out", self.out])
        self.assertEqual(code, 0)

    def test_orbit_ex22_far_out(self):
        code = main(["orbit", "--scenario", "ex22", "--j", "0:40", "--expect-limit", "1,0,-1,0",
                     "--out", self.out])
        self.assertEqual(code, 0)
        frame = pd.read_csv(self.out)
        self.assertEqual(len(frame), 41)
        self.assertLess(frame["bdist"].iloc[-1], 1e-2)
        self.assertEqual(main(["orbit", "--scenario", "ex22", "--j", "-40:0", "--out", self.out]), 0)

    def test_orbit_json_byte_identical(self):
        args = ["orbit", "--scenario", "ex21", "--j", "-10:10", "--format", "json", "--out", self.out]
        main(args)
        with open(self.out) as handle:
            first = handle.read()
        main(args)
        with open(self.out) as handle:
            self.assertEqual(handle.read(), first)
        self.assertEqual(len(json.loads(first)["entries"]), 21)

    def test_saccum_ex11(self):
        code = main(["saccum", "--scenario", "ex11", "--profile", "testing", "--format", "json",
                     "--out", self.out])
        self.assertEqual(code, 0)
        document = self.read_json()
        self.assertEqual(len(document["clusters"]), 2)
        self.assertTrue(document["dimension"]["degenerate"])

    def test_saccum_csv_and_points(self):
        points = os.path.join(self.tmp.name, "cloud.csv")
        code = main(["saccum", "--scenario", "ex21", "--profile", "testing", "--out", self.out,
                     "--points", points])
        self.assertEqual(code, 0)
        self.assertEqual(len(pd.read_csv(self.out)), 2)
        self.assertFalse(PointCloud.from_csv(points).is_empty)

    def test_saccum_empty_accumulation(self):
        self.assertEqual(main(["saccum", "--scenario", "ex11", "--j", "0:2", "--out", self.out]), 1)

    def test_dimension_from_input(self):
        n = 4096
        x = (np.arange(n) + 0.5) / n
        cloud = PointCloud(np.stack([x, 0 * x, 0 * x, 0 * x], axis=1))
        source = os.path.join(self.tmp.name, "line.csv")
        with open(source, "w") as handle:
            handle.write(cloud.to_csv())
        code = main(["dimension", "--input", source, "--scales", "0.125,0.0625,0.03125", "--out", self.out])
        self.assertEqual(code, 0)
        self.assertAlmostEqual(self.read_json()["slope"], 1.0, places=6)

    def test_dimension_needs_source(self):
        self.assertEqual(main(["dimension", "--out", self.out]), 2)

    def test_levi(self):
        code = main(["levi", "--point", "1,0,0,0", "--point", "-1,0,0,0", "--out", self.out])
        self.assertEqual(code, 0)
        document = self.read_json()
        self.assertEqual([row["class"] for row in document], ["strongly_pseudoconvex"] * 2)
        self.assertAlmostEqual(document[0]["levi_value"], 1.0, places=4)

    def test_levi_sampled_and_interior(self):
        self.assertEqual(main(["levi", "--samples", "3", "--seed", "4", "--out", self.out]), 0)
        self.assertEqual(len(self.read_json()), 3)
        self.assertEqual(main(["levi", "--point", "0.5,0,0,0", "--out", self.out]), 2)

    def test_cayley(self):
        self.assertEqual(main(["cayley", "--from", "0,0", "--out", self.out]), 0)
        document = self.read_json()
        self.assertEqual(document["w"], [0.0, 1.0, 0.0, 0.0])
        self.assertTrue(document["in_siegel"])
        self.assertEqual(main(["cayley", "--from", "-1,0", "--out", self.out]), 2)

    def test_cayley_translation_fit(self):
        self.assertEqual(main(["cayley", "--map", "parabolic", "--out", self.out]), 0)
        self.assertAlmostEqual(self.read_json()["t"], 1.0, places=9)
        self.assertEqual(main(["cayley", "--map", "hyperbolic", "--out", self.out]), 1)

    def test_verify_subset_json(self):
        code = main(["verify-paper", "--only", "group_law", "--only", "parabolic_limit", "--json",
                     "--out", self.out])
        self.assertEqual(code, 0)
        document = self.read_json()
        self.assertTrue(document["overall"])
        self.assertTrue(all(row["passed"] for row in document["checks"]))

    def test_verify_table(self):
        code = main(["verify-paper", "--only", "siegel_translation", "--out", self.out])
        self.assertEqual(code, 0)
        with open(self.out) as handle:
            table = handle.read()
        self.assertIn("siegel_translation_t", table)
        self.assertIn("Overall: PASS", table)


class TestAcceptanceSuite(unittest.TestCase):
    """Test the acceptance harness logic"""

    def test_tampered_expectation_fails_one_row(self):
        suite = AcceptanceSuite(TestingConfig, {"ex11_cluster_count": 3})
        report = suite.run(["cardinality"])
        self.assertFalse(report.overall)
        self.assertEqual([row.name for row in report.failures()], ["ex11_cluster_count"])

    def test_unknown_check_fails(self):
        report = AcceptanceSuite(TestingConfig).run(["no_such_check"])
        self.assertFalse(report.overall)
        self.assertEqual(len(report.checks), 1)

    def test_fast_checks_pass(self):
        report = AcceptanceSuite(TestingConfig).run(
            ["group_law", "hyperbolic_limits", "siegel_translation", "levi", "membership_invariance", "cartan"])
        failing = [(row.name, row.observed) for row in report.failures()]
        self.assertEqual(failing, [])

    def test_report_serialization_matches_table(self):
        report = VerifyReport([CheckRow("a", "< 1", 0.5, 1.0, True), CheckRow("b", "2", 3, 0.0, False)])
        self.assertFalse(report.overall)
        document = json.loads(report.to_json())
        self.assertEqual([row["name"] for row in document["checks"]], list(report.to_frame()["name"]))
        self.assertIn("Overall: FAIL", report.to_table())

    def test_timings_recorded(self):
        suite = AcceptanceSuite(TestingConfig)
        suite.run(["parabolic_limit"])
        self.assertIn("parabolic_limit", suite.monitor.timings())


class TestConfiguration(unittest.TestCase):
    """Test configuration profiles and run configurations"""

    def test_profiles_valid(self):
        for profile in ("default", "quick", "testing"):
            result = validate_profile_config(profile)
            self.assertTrue(result["valid"], result["errors"])

    def test_get_config(self):
        self.assertIs(get_config("testing"), TestingConfig)
        self.assertIs(get_config("QUICK"), QuickConfig)
        self.assertIs(get_config("unknown"), Config)
        self.assertEqual(Config.get_summary()["profile"], "Config")

    def test_run_config_defaults(self):
        run = default_run_config("ex12")
        self.assertEqual(run.j_values[0], -1000)
        self.assertEqual(len(run.j_values), 2001)
        self.assertEqual(default_run_config("ex23").scales, Config.MU_SCALES)
        self.assertEqual(default_run_config("ex11", seed=None).seed, Config.SEED)

    def test_run_config_validation(self):
        run = default_run_config("ex11", threshold=2.0)
        self.assertTrue(run.validate())
        with self.assertRaises(DomainParameterError):
            default_run_config("ex99")


class TestPerformanceMonitor(unittest.TestCase):
    """Test wall-time and memory accounting"""

    def test_record_and_budget(self):
        monitor = PerformanceMonitor()
        start = time.perf_counter() - 2.0
        metrics = monitor.record("slow", start)
        self.assertGreaterEqual(metrics.wall_seconds, 2.0)
        self.assertGreater(metrics.rss_mb, 0.0)
        self.assertEqual(len(monitor.over_budget({"slow": 1.0})), 1)
        self.assertEqual(monitor.over_budget({"slow": 10.0}), [])

    def test_decorator_records_failures(self):
        monitor = PerformanceMonitor()

        @monitor_performance("explode", monitor)
        def explode():
            raise ValueError("boom")

        with self.assertRaises(ValueError):
            explode()
        summary = monitor.get_performance_summary()
        self.assertEqual(summary["total_errors"], 1)
        self.assertIn("explode", summary["timings"])

    def test_empty_summary_and_reset(self):
        monitor = PerformanceMonitor()
        self.assertEqual(monitor.get_performance_summary(), {"status": "No metrics available"})
        monitor.record("x", time.perf_counter())
        monitor.reset()
        self.assertEqual(monitor.timings(), {})


def run_tests():
    """Run all tests"""
    test_classes = [
        TestArgumentHandling,
        TestCommands,
        TestAcceptanceSuite,
        TestConfiguration,
        TestPerformanceMonitor,
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

#!/usr/bin/env python3
"""
setup_and_test.py
Setup and smoke-test script for the orbit accumulation toolkit
"""

import importlib
import logging
import subprocess
import sys

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

MODULES = ["config", "moebius", "domains", "orbits", "accum", "levi", "scenarios",
           "performance_monitor", "verification", "cli"]

TEST_MODULES = ["test_moebius", "test_domains", "test_orbits", "test_accum", "test_levi", "test_cli"]


def check_python_version():
    """Check if Python version is compatible"""
    version = sys.version_info
    if version.major < 3 or (version.major == 3 and version.minor < 8):
        logger.error(f"Python 3.8+ required, found {version.major}.{version.minor}")
        return False
    logger.info(f"Python {version.major}.{version.minor} is compatible")
    return True


def install_requirements():
    """Install required packages"""
    try:
        logger.info("Installing requirements...")
        result = subprocess.run([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"],
                                capture_output=True, text=True)
        if result.returncode == 0:
            logger.info("Requirements installed")
            return True
        logger.error(f"Failed to install requirements: {result.stderr}")
        return False
    except Exception as e:
        logger.error(f"Error installing requirements: {e}")
        return False


def test_imports():
    """Test if all modules can be imported"""
    failed = []
    for module in MODULES:
        try:
            importlib.import_module(module)
        except ImportError as e:
            logger.error(f"{module}: {e}")
            failed.append(module)
    if failed:
        logger.error(f"Failed to import: {', '.join(failed)}")
        return False
    logger.info("All modules imported")
    return True


def test_configuration():
    """Validate every configuration profile"""
    from config import validate_profile_config

    ok = True
    for profile in ("default", "quick", "testing"):
        result = validate_profile_config(profile)
        for warning in result["warnings"]:
            logger.warning(f"{profile}: {warning}")
        if not result["valid"]:
            logger.error(f"{profile}: {result['errors']}")
            ok = False
    return ok


def test_smoke_checks():
    """Run the fast acceptance checks under the testing profile"""
    from config import TestingConfig
    from verification import run_verification

    report = run_verification(TestingConfig, only=["group_law", "siegel_translation", "parabolic_limit"])
    for row in report.failures():
        logger.error(f"{row.name}: expected {row.expected}, observed {row.observed}")
    return report.overall


def run_unit_tests():
    """Run every test module through its run_tests()"""
    ok = True
    for name in TEST_MODULES:
        logger.info(f"Running {name}")
        if not importlib.import_module(name).run_tests():
            ok = False
    return ok


def run_comprehensive_test(install: bool = False):
    """Run comprehensive test suite"""
    results = {"python_version": check_python_version()}
    if install:
        results["requirements"] = install_requirements()
    results["imports"] = test_imports()

    if all(results.values()):
        results["configuration"] = test_configuration()
        results["smoke_checks"] = test_smoke_checks()
        results["unit_tests"] = run_unit_tests()

    logger.info("=" * 60)
    for name, result in results.items():
        logger.info(f"{name.replace('_', ' ').title()}: {'PASS' if result else 'FAIL'}")
    passed = sum(results.values())
    logger.info(f"Results: {passed}/{len(results)} steps passed")
    if passed == len(results):
        print_usage_instructions()
    return passed == len(results)


def print_usage_instructions():
    """Print usage instructions"""
    print("""
Command line usage:
  python cli.py orbit --scenario ex11 --from 0,0 --j 0:40
  python cli.py saccum --scenario ex21 --format json
  python cli.py dimension --scenario ex23 --format csv
  python cli.py levi --domain ball --samples 5
  python cli.py cayley --map parabolic
  python cli.py verify-paper --json --out results/verify.json

Profiles: --profile default | quick | testing
""")


if __name__ == "__main__":
    sys.exit(0 if run_comprehensive_test(install="--install" in sys.argv) else 1)

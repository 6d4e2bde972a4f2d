"""
cli.py
Command-line surface: orbit, saccum, dimension, levi, cayley and verify-paper
"""

import argparse
import json
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from accum import NoAccumulationError, PointCloud, box_counting_dimension, estimate_S
from config import Config, get_config
from domains import DomainFactory, sample_boundary
from levi import classify_boundary
from moebius import (
    BallMap, CPoint2, DomainParameterError, SiegelPoint, cayley_to_siegel, detect_translation, power,
    siegel_to_ball,
)
from orbits import iterate_orbit
from scenarios import MAPS, SCENARIOS, default_run_config, scenario_generator
from verification import AcceptanceSuite, EXPECTATIONS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

# Flags whose values may start with '-'
VALUE_FLAGS = ("--j", "--from", "--dent-center", "--point", "--expect-limit")
BALL_MAPS = ("hyperbolic", "identity", "parabolic")


# ---------------------------------------------------------------------------
# Argument types


def parse_point(text: str) -> CPoint2:
    try:
        values = [float(v) for v in text.split(",")]
        return CPoint2.from_reals(values)
    except (ValueError, DomainParameterError) as e:
        raise argparse.ArgumentTypeError(f"Bad point '{text}': expected re1,im1,re2,im2 ({e})")


def parse_j_range(text: str) -> Tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Bad j range '{text}': expected a:b")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"Empty j range '{text}'")
    return lo, hi


def parse_scales(text: str) -> Tuple[float, ...]:
    try:
        scales = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Bad scales '{text}': expected comma-separated floats")
    if len(scales) < 2 or any(s <= 0 for s in scales):
        raise argparse.ArgumentTypeError("Need at least two positive scales")
    return scales


def parse_dent_center(text: str) -> Tuple[complex, complex]:
    p = parse_point(text)
    return (p.z1, p.z2)


def parse_expectation(text: str) -> Tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep or name not in EXPECTATIONS:
        raise argparse.ArgumentTypeError(
            f"Bad expectation '{text}': expected NAME=VALUE with NAME in {sorted(EXPECTATIONS)}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Bad expectation value '{value}'")


def merge_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite '--j -5:5' as '--j=-5:5' so argparse does not read the value as a flag"""
    merged: List[str] = []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token in VALUE_FLAGS and i + 1 < len(tokens) and tokens[i + 1].startswith("-") \
                and not tokens[i + 1].startswith("--"):
            merged.append(f"{token}={tokens[i + 1]}")
            i += 2
            continue
        merged.append(token)
        i += 1
    return merged


# ---------------------------------------------------------------------------
# Output


def emit(text: str, out: Optional[str]):
    """Write command output to a file or stdout; a trailing newline is ensured"""
    if not text.endswith("\n"):
        text += "\n"
    if out:
        directory = os.path.dirname(out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(out, "w", newline="") as handle:
            handle.write(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _point_list(p: Optional[CPoint2]):
    return None if p is None else [round(x, 12) for x in p.as_reals()]


# ---------------------------------------------------------------------------
# Commands


def cmd_orbit(args, config) -> int:
    if args.map:
        family, domain_name = MAPS[args.map]()
    else:
        family, domain_name = scenario_generator(args.scenario), args.scenario
    domain = DomainFactory.create(domain_name, dent_center=args.dent_center, config=config)
    j_min, j_max = args.j
    record = iterate_orbit(family, args.start, j_min, j_max, domain, tol=args.tol)
    emit(record.to_json() if args.format == "json" else record.to_csv(), args.out)

    verdict = {"limit": _point_list(record.limit), "backward_limit": _point_list(record.backward_limit),
               "converged": record.converged,
               "final_bdist": float(f"{record.entries[-1].bdist:.12g}")}
    if args.expect_limit is not None:
        target = args.expect_limit
        tails = [record.entries[-1].point]
        if j_min < 0:
            tails.append(record.entries[0].point)
        gaps = [p.distance(target) for p in tails]
        verdict["expected_limit"] = _point_list(target)
        verdict["tail_distances"] = [float(f"{g:.12g}") for g in gaps]
        verdict["limit_ok"] = all(g < args.limit_tol for g in gaps)
        print(json.dumps(verdict), file=sys.stderr)
        if not verdict["limit_ok"]:
            logger.error(f"Orbit does not approach {target} within {args.limit_tol:g}: {gaps}")
            return EXIT_FAILURE
        return EXIT_OK
    print(json.dumps(verdict), file=sys.stderr)
    return EXIT_OK


def _run_config(args, config):
    j_values = tuple(range(args.j[0], args.j[1] + 1)) if args.j else None
    return default_run_config(
        args.scenario, config,
        j_values=j_values, threshold=args.threshold, scales=args.scales, seed=args.seed,
        dent_center=args.dent_center, output_format=args.format,
    )


def cmd_saccum(args, config) -> int:
    run = _run_config(args, config)
    clusters, dimension, cloud = estimate_S(run)
    if args.points:
        emit(cloud.to_csv(), args.points)
    if args.format == "json":
        document = {"scenario": run.scenario, "seed": run.seed, "points": len(cloud),
                    **clusters.to_dict(), "dimension": dimension.to_dict()}
        emit(json.dumps(document, indent=2), args.out)
    else:
        emit(clusters.to_frame().to_csv(index=False, float_format="%.12g"), args.out)
        print(json.dumps(dimension.to_dict()), file=sys.stderr)
    return EXIT_OK


def cmd_dimension(args, config) -> int:
    if args.input:
        cloud = PointCloud.from_csv(args.input)
        if cloud.is_empty:
            raise NoAccumulationError(f"{args.input} holds no points")
        dimension = box_counting_dimension(cloud, args.scales or config.DEFAULT_SCALES, workers=config.WORKERS)
    else:
        if not args.scenario:
            raise DomainParameterError("dimension needs --scenario or --input")
        _, dimension, _ = estimate_S(_run_config(args, config))
    if args.format == "csv":
        lines = ["eps,count"] + [f"{eps:.12g},{count}" for eps, count in dimension.scales]
        emit("\n".join(lines), args.out)
        print(json.dumps({"slope": dimension.to_dict()["slope"], "r2": dimension.to_dict()["r2"]}),
              file=sys.stderr)
    else:
        emit(dimension.to_json(), args.out)
    return EXIT_OK


def cmd_levi(args, config) -> int:
    domain = DomainFactory.create(args.domain, dent_center=args.dent_center, config=config)
    points = list(args.point or [])
    if not points:
        points = sample_boundary(domain, args.samples, args.seed if args.seed is not None else config.SEED)
    results = [classify_boundary(domain, p, tau=args.tol).to_dict(p) for p in points]
    emit(json.dumps(results, indent=2), args.out)
    return EXIT_OK


def cmd_cayley(args, config) -> int:
    if args.map:
        family, _ = MAPS[args.map]()
        if isinstance(family, BallMap):
            generator = family
            family = lambda j: power(generator, j)
        fit = detect_translation(family)
        emit(json.dumps({"map": args.map, "success": fit.success, "t": float(f"{fit.t:.12g}"),
                         "max_deviation": float(f"{fit.max_deviation:.6g}"), "tolerance": fit.tolerance},
                        indent=2), args.out)
        return EXIT_OK if fit.success else EXIT_FAILURE

    if args.inverse:
        w = SiegelPoint(args.start.z1, args.start.z2)
        p = siegel_to_ball(w)
        document = {"w": _point_list(CPoint2(w.w1, w.w2)), "z": _point_list(p), "in_siegel": w.in_siegel()}
    else:
        w = cayley_to_siegel(args.start)
        document = {"z": _point_list(args.start), "w": _point_list(CPoint2(w.w1, w.w2)),
                    "in_siegel": w.in_siegel()}
    emit(json.dumps(document, indent=2), args.out)
    return EXIT_OK


def cmd_verify_paper(args, config) -> int:
    suite = AcceptanceSuite(config, dict(args.expect or []))
    report = suite.run(args.only)
    logger.info(f"Performance: {suite.monitor.get_performance_summary()}")
    emit(report.to_json() if args.json else report.to_table(), args.out)
    return EXIT_OK if report.overall else EXIT_FAILURE


COMMANDS: Dict[str, Callable] = {
    "orbit": cmd_orbit,
    "saccum": cmd_saccum,
    "dimension": cmd_dimension,
    "levi": cmd_levi,
    "cayley": cmd_cayley,
    "verify-paper": cmd_verify_paper,
}


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", choices=["default", "quick", "testing"], default="default",
                        help="Configuration profile")
    common.add_argument("--log-level", type=str.upper, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level (default from config)")
    common.add_argument("--out", help="Write output to PATH instead of stdout")

    parser = argparse.ArgumentParser(description="Boundary orbit accumulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    orbit = sub.add_parser("orbit", parents=[common], help="Iterate an orbit and report its limits")
    source = orbit.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", choices=SCENARIOS)
    source.add_argument("--map", choices=sorted(MAPS))
    orbit.add_argument("--from", dest="start", type=parse_point, default=CPoint2(0, 0),
                       help="Start point re1,im1,re2,im2")
    orbit.add_argument("--j", type=parse_j_range, default=(0, 40), help="Exponent range a:b")
    orbit.add_argument("--format", choices=["csv", "json"], default="csv")
    orbit.add_argument("--expect-limit", type=parse_point, help="Fail unless the orbit tails reach this point")
    orbit.add_argument("--limit-tol", type=float, default=Config.CLI_CONVERGENCE_TOL)
    orbit.add_argument("--tol", type=float, default=Config.CONVERGENCE_TOL, help="Limit extraction tolerance")
    orbit.add_argument("--dent-center", type=parse_dent_center)

    for name, help_text, default_format in (("saccum", "Estimate the boundary orbit accumulation set", "csv"),
                                            ("dimension", "Box-counting dimension of an accumulation set", "json")):
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.add_argument("--scenario", choices=SCENARIOS, required=(name == "saccum"))
        cmd.add_argument("--j", type=parse_j_range, help="Override the scenario's j range a:b")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--threshold", type=float)
        cmd.add_argument("--scales", type=parse_scales)
        cmd.add_argument("--format", choices=["csv", "json"], default=default_format)
        cmd.add_argument("--dent-center", type=parse_dent_center)
        if name == "saccum":
            cmd.add_argument("--points", help="Also write the harvested point cloud CSV to PATH")
        else:
            cmd.add_argument("--input", help="Point cloud CSV (re1,im1,re2,im2) to measure")

    levi = sub.add_parser("levi", parents=[common], help="Classify boundary points by their Levi form")
    levi.add_argument("--domain", default="ball", choices=DomainFactory.NAMES)
    levi.add_argument("--point", type=parse_point, action="append", help="Boundary point (repeatable)")
    levi.add_argument("--samples", type=int, default=5, help="Sampled boundary points when no --point")
    levi.add_argument("--seed", type=int)
    levi.add_argument("--tol", type=float, default=Config.LEVI_TOL, help="Levi tolerance tau")
    levi.add_argument("--dent-center", type=parse_dent_center)

    cayley = sub.add_parser("cayley", parents=[common], help="Cayley transform and translation detection")
    cayley.add_argument("--from", dest="start", type=parse_point, default=CPoint2(0, 0))
    cayley.add_argument("--inverse", action="store_true", help="Map a Siegel point back to the ball")
    cayley.add_argument("--map", choices=BALL_MAPS, help="Fit a Siegel translation to this map")

    verify = sub.add_parser("verify-paper", parents=[common], help="Run the acceptance suite")
    verify.add_argument("--json", action="store_true", help="Machine-readable report")
    verify.add_argument("--expect", type=parse_expectation, action="append", help="Override NAME=VALUE")
    verify.add_argument("--only", action="append", help="Run only this check (repeatable)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(merge_negative_values(sys.argv[1:] if argv is None else argv))
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    config = get_config(args.profile)
    logging.basicConfig(level=(args.log_level or config.LOG_LEVEL).upper(), format=config.LOG_FORMAT,
                        stream=sys.stderr)

    try:
        return COMMANDS[args.command](args, config)
    except NoAccumulationError as e:
        logger.error(f"No accumulation: {e}")
        return EXIT_FAILURE
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

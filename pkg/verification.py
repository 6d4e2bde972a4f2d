"""
verification.py
Acceptance suite re-checking every limit, cardinality, dimension and
classification claim under default grids and seed
"""

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from accum import estimate_S
from config import Config
from domains import Ball, Bidisc, DomainFactory, Verdict, sample_boundary
from levi import BoundaryClass, classify_boundary, complex_hessian
from moebius import (
    CPoint2, cayley_to_siegel, detect_translation, disc_mobius, hyperbolic_generator, lambda_map,
    lambda_pair, mu, parabolic_family, power, psi,
)
from orbits import FamilySpec, iterate_orbit, uniformity_check
from performance_monitor import PerformanceMonitor
from scenarios import SCENARIOS, default_run_config, scenario_generator

logger = logging.getLogger(__name__)


@dataclass
class CheckRow:
    name: str
    expected: str
    observed: Any
    tolerance: float
    passed: bool


@dataclass
class VerifyReport:
    checks: List[CheckRow] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(row.passed for row in self.checks)

    def failures(self) -> List[CheckRow]:
        return [row for row in self.checks if not row.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.checks],
                            columns=["name", "expected", "observed", "tolerance", "passed"])

    def to_table(self) -> str:
        frame = self.to_frame()
        frame["observed"] = frame["observed"].map(_fmt)
        frame["tolerance"] = frame["tolerance"].map(_fmt)
        frame["passed"] = frame["passed"].map(lambda p: "PASS" if p else "FAIL")
        lines = frame.to_string(index=False)
        banner = "=" * 50
        return f"{lines}\n{banner}\nOverall: {'PASS' if self.overall else 'FAIL'}\n{banner}"

    def to_dict(self) -> Dict[str, Any]:
        return {"checks": [{**asdict(row), "observed": _plain(row.observed)} for row in self.checks],
                "overall": self.overall}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _plain(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        return float(f"{float(value):.12g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


# Expected values; overridable by name from the command line
EXPECTATIONS: Dict[str, float] = {
    "ex11_cluster_count": 2,
    "ex12_cluster_count": 1,
    "ex21_dimension": 0.0,
    "ex22_dimension": 1.0,
    "ex23_dimension": 2.0,
    "ex24_dimension": 3.0,
    "siegel_translation_t": 1.0,
    "hyperbolic_multiplier": 2.0 / 3.0,
}


def _below(name: str, observed: float, bound: float) -> CheckRow:
    return CheckRow(name, f"< {bound:g}", float(observed), bound, bool(observed < bound))


def _near(name: str, observed: float, expected: float, tol: float) -> CheckRow:
    return CheckRow(name, f"{expected:g} +/- {tol:g}", float(observed), tol,
                    bool(abs(observed - expected) <= tol))


def _equal(name: str, observed: int, expected: int) -> CheckRow:
    return CheckRow(name, f"{int(expected)}", int(observed), 0.0, int(observed) == int(expected))


class AcceptanceSuite:
    """Runs the named acceptance checks; a failing check never stops the suite"""

    def __init__(self, config=Config, expectations: Optional[Dict[str, float]] = None,
                 monitor: Optional[PerformanceMonitor] = None):
        self.config = config
        self.expect = dict(EXPECTATIONS, **(expectations or {}))
        self.monitor = monitor or PerformanceMonitor()
        self.rng_seed = config.SEED
        self._estimates: Dict[str, Any] = {}

    @property
    def checks(self) -> Dict[str, Callable[[], List[CheckRow]]]:
        return {
            "group_law": self.check_group_law,
            "hyperbolic_limits": self.check_hyperbolic_limits,
            "parabolic_limit": self.check_parabolic_limit,
            "siegel_translation": self.check_siegel_translation,
            "cardinality": self.check_cardinality,
            "dimensions": self.check_dimensions,
            "automorphy": self.check_automorphy,
            "levi": self.check_levi,
            "membership_invariance": self.check_membership_invariance,
            "cartan": self.check_cartan,
        }

    def run(self, only: Optional[Sequence[str]] = None) -> VerifyReport:
        report = VerifyReport()
        selected = list(only) if only else list(self.checks)
        for name in selected:
            check = self.checks.get(name)
            if check is None:
                report.checks.append(CheckRow(name, "known check", "unknown", 0.0, False))
                continue
            start_time = time.perf_counter()
            try:
                rows = check()
                self.monitor.record(name, start_time, failed=not all(r.passed for r in rows))
                report.checks.extend(rows)
            except Exception as e:
                logger.error(f"Check {name} raised: {e}")
                self.monitor.record(name, start_time, failed=True)
                report.checks.append(CheckRow(name, "completes", f"error: {e}", 0.0, False))
        for warning in self.monitor.over_budget(self.config.CHECK_BUDGETS):
            logger.warning(f"Runtime budget exceeded: {warning}")
        logger.info(f"Acceptance suite: {len(report.failures())} failing of {len(report.checks)} rows")
        return report

    # -- samples ---------------------------------------------------------

    def _ball_interior(self, n: int, seed_offset: int = 0) -> np.ndarray:
        rng = np.random.default_rng([self.rng_seed, seed_offset])
        g = rng.standard_normal((n, 4))
        g /= np.linalg.norm(g, axis=1)[:, None]
        g *= rng.uniform(0, 1, n)[:, None] ** 0.25 * 0.999
        return g[:, 0::2] + 1j * g[:, 1::2]

    def _sphere(self, n: int, seed_offset: int = 1) -> np.ndarray:
        rng = np.random.default_rng([self.rng_seed, seed_offset])
        g = rng.standard_normal((n, 4))
        g /= np.linalg.norm(g, axis=1)[:, None]
        return g[:, 0::2] + 1j * g[:, 1::2]

    def _bidisc_interior(self, n: int, seed_offset: int = 2) -> np.ndarray:
        rng = np.random.default_rng([self.rng_seed, seed_offset])
        r = 0.999 * np.sqrt(rng.uniform(0, 1, (n, 2)))
        return r * np.exp(2j * np.pi * rng.uniform(0, 1, (n, 2)))

    def _bidisc_boundary(self, n: int, seed_offset: int = 3) -> np.ndarray:
        z = self._bidisc_interior(n, seed_offset)
        rng = np.random.default_rng([self.rng_seed, seed_offset, 1])
        face = rng.integers(0, 2, n)
        rows = np.arange(n)
        z[rows, face] = z[rows, face] / np.abs(z[rows, face])
        return z

    # -- checks ----------------------------------------------------------

    def check_group_law(self) -> List[CheckRow]:
        z = self._ball_interior(10, seed_offset=10)
        worst = 0.0
        for j in range(-20, 21):
            fj = parabolic_family(j)
            for k in range(-20, 21):
                lhs = fj.apply_array(parabolic_family(k).apply_array(z))
                rhs = parabolic_family(j + k).apply_array(z)
                worst = max(worst, float(np.max(np.linalg.norm(lhs - rhs, axis=1))))
        phi = hyperbolic_generator()
        stepwise = phi.identity()
        drift = 0.0
        for j in range(1, 65):
            stepwise = stepwise.compose(phi)
            gap = power(phi, j).apply_array(z) - stepwise.apply_array(z)
            drift = max(drift, float(np.max(np.linalg.norm(gap, axis=1))))
        return [_below("group_law_max_error", worst, 1e-9),
                _below("power_vs_compose_max_error", drift, Config.MATRIX_TOL)]

    def check_hyperbolic_limits(self) -> List[CheckRow]:
        phi = hyperbolic_generator()
        origin = CPoint2(0, 0)
        forward = power(phi, 25)(origin).distance(CPoint2(-1, 0))
        backward = power(phi, -25)(origin).distance(CPoint2(1, 0))
        ball = Ball()
        record = iterate_orbit(phi, origin, 0, 40, ball)
        bd = [e.bdist for e in record.entries]
        ratio = float(np.mean([bd[j + 1] / bd[j] for j in range(30, 40)]))

        p0 = CPoint2(1j, 1j)
        pair = lambda_pair()
        p0_forward = power(pair, 60)(p0).distance(CPoint2(1, 1))
        p0_backward = power(pair, -60)(p0).distance(CPoint2(-1, -1))
        uniform_fwd = uniformity_check(phi, 0.5, 60, limit=CPoint2(-1, 0))
        uniform_bwd = uniformity_check(phi, 0.5, -60, limit=CPoint2(1, 0))
        return [
            _below("hyperbolic_forward_limit_j25", forward, 1e-3),
            _below("hyperbolic_backward_limit_j25", backward, 1e-3),
            _near("hyperbolic_multiplier", ratio, self.expect["hyperbolic_multiplier"], 0.05),
            _below("boundary_orbit_P0_forward", p0_forward, 1e-3),
            _below("boundary_orbit_P0_backward", p0_backward, 1e-3),
            _below("uniform_convergence_forward_j60", uniform_fwd, 1e-4),
            _below("uniform_convergence_backward_j60", uniform_bwd, 1e-4),
        ]

    def check_parabolic_limit(self) -> List[CheckRow]:
        rows = []
        for j in (-1000, -100, 100, 1000):
            gap = parabolic_family(j)(CPoint2(0, 0)).distance(CPoint2(-1, 0))
            rows.append(_near(f"parabolic_scaled_distance_j{j}", gap * abs(j), 2.0, 0.1))
        return rows

    def check_siegel_translation(self) -> List[CheckRow]:
        fit = detect_translation(parabolic_family, range(-10, 11))
        hyper = detect_translation(lambda j: power(hyperbolic_generator(), j), range(-10, 11))
        w = cayley_to_siegel(parabolic_family(2)(CPoint2(0, 0)))
        return [
            _near("siegel_translation_t", fit.t, self.expect["siegel_translation_t"], Config.TRANSLATION_TOL),
            _below("siegel_translation_deviation", fit.max_deviation, Config.TRANSLATION_TOL),
            _below("siegel_image_of_j2", abs(w.w1 - (2 + 1j)) + abs(w.w2), Config.TRANSLATION_TOL),
            CheckRow("hyperbolic_not_translation", "fit fails", float(hyper.max_deviation),
                     Config.TRANSLATION_TOL, not hyper.success),
        ]

    def _estimate(self, scenario: str, **overrides):
        key = (scenario, tuple(sorted(overrides.items())))
        if key not in self._estimates:
            run = default_run_config(scenario, self.config, **overrides)
            self._estimates[key] = estimate_S(run)
        return self._estimates[key]

    def check_cardinality(self) -> List[CheckRow]:
        rows = []
        c11, _, _ = self._estimate("ex11")
        rows.append(_equal("ex11_cluster_count", len(c11), self.expect["ex11_cluster_count"]))
        targets = np.array([[1, 0, 0, 0], [-1, 0, 0, 0]], dtype=float)
        rows.append(_below("ex11_center_error", _center_error(c11.centers(), targets), 1e-3))

        c12, _, _ = self._estimate("ex12")
        rows.append(_equal("ex12_cluster_count", len(c12), self.expect["ex12_cluster_count"]))
        rows.append(_below("ex12_center_error", _center_error(c12.centers(), targets[1:]), 1e-3))
        return rows

    def check_dimensions(self) -> List[CheckRow]:
        rows = []
        bands = {"ex21": 0.2, "ex22": 0.2, "ex23": 0.3, "ex24": 0.3}
        for scenario, band in bands.items():
            _, dim, _ = self._estimate(scenario)
            expected = self.expect[f"{scenario}_dimension"]
            rows.append(_near(f"{scenario}_dimension", dim.slope, expected, band))
            if expected > 0:
                rows.append(CheckRow(f"{scenario}_fit_r2", ">= 0.95", float(dim.r2), 0.95, bool(dim.r2 >= 0.95)))

        corners = np.array([[1, 0, 1, 0], [-1, 0, -1, 0]], dtype=float)
        c21, _, _ = self._estimate("ex21")
        diag, _, _ = self._estimate("ex21", dent_center=self.config.DIAGONAL_DENT_CENTER)
        rows.append(_below("ex21_center_error", _center_error(c21.centers(), corners), 1e-3))
        rows.append(_below("ex21_diagonal_dent_center_error", _center_error(diag.centers(), corners), 1e-3))
        return rows

    def check_automorphy(self) -> List[CheckRow]:
        n = 1000
        rows = []
        ball_in, sphere = self._ball_interior(n, 20), self._sphere(n, 21)
        ball_maps = {
            "hyperbolic": hyperbolic_generator(),
            "hyperbolic_pow7": power(hyperbolic_generator(), 7),
            "parabolic_j50": parabolic_family(50),
        }
        for name, f in ball_maps.items():
            inside = np.linalg.norm(f.apply_array(ball_in), axis=1)
            on = np.linalg.norm(f.apply_array(sphere), axis=1)
            rows.append(_equal(f"automorphy_{name}_interior_escapes", int(np.sum(inside >= 1)), 0))
            rows.append(_below(f"automorphy_{name}_sphere_error", float(np.max(np.abs(on - 1))), Config.MATRIX_TOL))

        zeta_in = self._bidisc_interior(n, 22)[:, 0]
        zeta_on = np.exp(2j * np.pi * np.random.default_rng([self.rng_seed, 23]).uniform(0, 1, n))
        for name, g in {"lambda": lambda_map(), "rho_0.5": disc_mobius(0.5, 1.0)}.items():
            rows.append(_equal(f"automorphy_{name}_interior_escapes", int(np.sum(np.abs(g(zeta_in)) >= 1)), 0))
            rows.append(_below(f"automorphy_{name}_circle_error",
                               float(np.max(np.abs(np.abs(g(zeta_on)) - 1))), Config.MATRIX_TOL))

        bi_in, bi_on = self._bidisc_interior(n, 24), self._bidisc_boundary(n, 25)
        bidisc_maps = {"psi_3": psi(3, 0.5 + 0.2j), "mu_5": mu(5), "lambda_pair_pow9": power(lambda_pair(), 9)}
        for name, f in bidisc_maps.items():
            rows.extend(self._bidisc_rows(name, f.apply_array(bi_in), f.apply_array(bi_on)))

        batch = next(FamilySpec.full_bidisc(n, seed=self.rng_seed, chunk=n).batches())
        diag = np.arange(n)
        rows.extend(self._bidisc_rows("full_sampler", batch.apply(bi_in)[diag, diag], batch.apply(bi_on)[diag, diag]))
        return rows

    @staticmethod
    def _bidisc_rows(name: str, images_in: np.ndarray, images_on: np.ndarray) -> List[CheckRow]:
        norm_in = np.max(np.abs(images_in), axis=1)
        norm_on = np.max(np.abs(images_on), axis=1)
        return [_equal(f"automorphy_{name}_interior_escapes", int(np.sum(norm_in >= 1)), 0),
                _below(f"automorphy_{name}_boundary_error", float(np.max(np.abs(norm_on - 1))), Config.MATRIX_TOL)]

    def check_levi(self) -> List[CheckRow]:
        ball = Ball()
        points = sample_boundary(ball, 100, self.rng_seed)
        results = [classify_boundary(ball, p) for p in points]
        wrong = sum(r.boundary_class is not BoundaryClass.STRONGLY_PSEUDOCONVEX for r in results)
        worst = max(abs(r.levi_value - 1.0) for r in results)

        p = CPoint2(0.3 + 0.1j, -0.2 + 0.4j)
        hessian_error = max(float(np.max(np.abs(complex_hessian(f, p).h - oracle(p))))
                            for f, oracle in POLYNOMIAL_CORPUS)

        centers = [classify_boundary(ball, CPoint2(s, 0)) for s in (1.0, -1.0)]
        flat = classify_boundary(Bidisc(), CPoint2(1.0, 0.5))
        return [
            _equal("levi_sphere_misclassified", wrong, 0),
            _below("levi_sphere_value_error", worst, 1e-4),
            _below("levi_hessian_corpus_error", hessian_error, 1e-5),
            _equal("levi_ex11_centers_strongly_pseudoconvex",
                   sum(c.boundary_class is BoundaryClass.STRONGLY_PSEUDOCONVEX for c in centers), 2),
            CheckRow("levi_bidisc_face_degenerate", BoundaryClass.LEVI_DEGENERATE.value,
                     flat.boundary_class.value, Config.LEVI_TOL,
                     flat.boundary_class is BoundaryClass.LEVI_DEGENERATE),
        ]

    def check_membership_invariance(self) -> List[CheckRow]:
        domain = DomainFactory.create("ex11", config=self.config)
        phi = hyperbolic_generator()
        samples = [CPoint2(a, b) for a, b in self._ball_interior(100, 30)]
        dent_point = CPoint2(1j * (1 - 2e-9), 0)
        samples += [power(phi, k)(dent_point) for k in (-3, 0, 2)]
        disagreements = 0
        inconclusive = 0
        for p in samples:
            before, after = domain.membership(p), domain.membership(phi(p))
            if Verdict.INCONCLUSIVE in (before, after):
                inconclusive += 1
            elif before is not after:
                disagreements += 1
        return [_equal("membership_disagreements", disagreements, 0),
                _equal("membership_inconclusive", inconclusive, 0),
                CheckRow("membership_dent_point_excluded", "outside", domain.membership(dent_point).value,
                         0.0, domain.membership(dent_point) is Verdict.OUTSIDE)]

    def check_cartan(self) -> List[CheckRow]:
        rows = []
        origin = CPoint2(0, 0)
        for scenario in SCENARIOS:
            generator = scenario_generator(scenario)
            parent = Ball() if scenario in ("ex11", "ex12") else Bidisc()
            forward = iterate_orbit(generator, origin, 0, 40, parent)
            backward = iterate_orbit(generator, origin, -40, 0, parent)
            depth = min(min(e.bdist for e in forward.entries), min(e.bdist for e in backward.entries))
            rows.append(_below(f"cartan_{scenario}_min_bdist_j40", depth, 1e-2))
        return rows


def _center_error(centers: np.ndarray, targets: np.ndarray) -> float:
    """Largest distance from a target to its nearest centre"""
    if len(centers) == 0:
        return math.inf
    return float(max(np.min(np.linalg.norm(centers - t, axis=1)) for t in targets))


def _hessian_oracle(h11, h12, h22):
    def oracle(p: CPoint2) -> np.ndarray:
        off = h12(p)
        return np.array([[h11(p), off], [np.conj(off), h22(p)]], dtype=complex)
    return oracle


POLYNOMIAL_CORPUS = [
    (lambda p: abs(p.z1) ** 2 + abs(p.z2) ** 2 - 1,
     _hessian_oracle(lambda p: 1, lambda p: 0, lambda p: 1)),
    (lambda p: abs(p.z1) ** 2 + 2 * abs(p.z2) ** 2 - 1,
     _hessian_oracle(lambda p: 1, lambda p: 0, lambda p: 2)),
    (lambda p: p.z1.real,
     _hessian_oracle(lambda p: 0, lambda p: 0, lambda p: 0)),
    (lambda p: abs(p.z1) ** 4 + abs(p.z2) ** 2 - 1,
     _hessian_oracle(lambda p: 4 * abs(p.z1) ** 2, lambda p: 0, lambda p: 1)),
    (lambda p: (p.z1 * p.z2.conjugate()).real,
     _hessian_oracle(lambda p: 0, lambda p: 0.5, lambda p: 0)),
    (lambda p: abs(p.z1) ** 2 * abs(p.z2) ** 2,
     _hessian_oracle(lambda p: abs(p.z2) ** 2, lambda p: p.z1.conjugate() * p.z2, lambda p: abs(p.z1) ** 2)),
]


def run_verification(config=Config, expectations: Optional[Dict[str, float]] = None,
                     only: Optional[Sequence[str]] = None) -> VerifyReport:
    suite = AcceptanceSuite(config, expectations)
    report = suite.run(only)
    logger.info(f"Performance: {suite.monitor.get_performance_summary()}")
    return report

"""
scenarios.py
Run configurations and the named scenarios ex11..ex24: their domains,
automorphism families, base points and default grids
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Tuple, Union

import numpy as np

from config import Config
from domains import DomainFactory, ModelDomain, psi_grid
from moebius import (
    BallMap, DomainParameterError, Map, hyperbolic_generator, lambda_pair, mu, parabolic_family,
    psi,
)
from orbits import FamilySpec

logger = logging.getLogger(__name__)

SCENARIOS = ("ex11", "ex12", "ex21", "ex22", "ex23", "ex24")


@dataclass
class RunConfig:
    """Everything one accumulation experiment needs; defaults come from the scenario"""
    scenario: str
    j_values: Tuple[int, ...]
    threshold: float
    scales: Tuple[float, ...]
    seed: int
    cluster_radius: float
    cluster_max_points: int
    workers: int
    psi_args: int = 0
    psi_moduli: Tuple[float, ...] = ()
    base_grid: int = 0
    samples: int = 0
    chunk: int = Config.FULL_CHUNK
    dent_center: Tuple[complex, complex] = Config.DENT_CENTER
    output_format: str = "csv"
    config: type = field(default=Config, repr=False)

    def validate(self) -> List[str]:
        errors = []
        if self.scenario not in SCENARIOS:
            errors.append(f"Unknown scenario '{self.scenario}'")
        if not 0 < self.threshold < 1:
            errors.append(f"Threshold must lie in (0, 1), got {self.threshold}")
        if len(self.scales) < 2 or any(eps <= 0 for eps in self.scales):
            errors.append("Need at least two positive scales")
        if self.output_format not in ("csv", "json"):
            errors.append(f"Unknown output format '{self.output_format}'")
        if self.cluster_radius <= 0:
            errors.append("Cluster radius must be positive")
        return errors


def _j_range(bounds: Tuple[int, int]) -> Tuple[int, ...]:
    return tuple(range(bounds[0], bounds[1] + 1))


def default_run_config(scenario: str, config=Config, **overrides) -> RunConfig:
    """Scenario defaults under a configuration profile, with keyword overrides"""
    key = scenario.lower()
    if key not in SCENARIOS:
        raise DomainParameterError(f"Unknown scenario '{scenario}', expected one of {SCENARIOS}")
    common = dict(
        scenario=key,
        threshold=config.BDIST_THRESHOLD,
        seed=config.SEED,
        cluster_radius=config.CLUSTER_RADIUS,
        cluster_max_points=config.CLUSTER_MAX_POINTS,
        workers=config.WORKERS,
        config=config,
    )
    if key in ("ex11", "ex21"):
        run = RunConfig(j_values=_j_range(config.CYCLIC_J_RANGE), scales=config.DEFAULT_SCALES, **common)
    elif key == "ex12":
        run = RunConfig(j_values=_j_range(config.PARABOLIC_J_RANGE), scales=config.DEFAULT_SCALES, **common)
    elif key == "ex22":
        run = RunConfig(j_values=config.SAMPLED_J_VALUES, scales=config.DEFAULT_SCALES,
                        psi_args=config.PSI_FAMILY_ARGS, psi_moduli=config.PSI_MODULI, **common)
    elif key == "ex23":
        run = RunConfig(j_values=config.SAMPLED_J_VALUES, scales=config.MU_SCALES,
                        base_grid=config.MU_BASE_GRID, **common)
    else:
        run = RunConfig(j_values=(), scales=config.FULL_SCALES, samples=config.FULL_SAMPLES,
                        chunk=config.FULL_CHUNK, **common)
    return replace(run, **{k: v for k, v in overrides.items() if v is not None})


def scenario_generator(scenario: str) -> Union[Map, Callable[[int], Map]]:
    """Map (or exact family) whose orbits drive each scenario"""
    key = scenario.lower()
    if key == "ex11":
        return hyperbolic_generator()
    if key == "ex12":
        return parabolic_family
    if key in ("ex21", "ex24"):
        return lambda_pair()
    if key == "ex22":
        return lambda j: psi(j, 0.5)
    if key == "ex23":
        return mu
    raise DomainParameterError(f"Unknown scenario '{scenario}'")


MAPS: Dict[str, Callable[[], Tuple[Union[Map, Callable[[int], Map]], str]]] = {
    "identity": lambda: (BallMap.identity(), "ball"),
    "hyperbolic": lambda: (hyperbolic_generator(), "ex11"),
    "parabolic": lambda: (parabolic_family, "ex12"),
    "lambda_pair": lambda: (lambda_pair(), "ex21"),
    "mu": lambda: (mu, "ex23"),
}


def mu_base_points(n: int) -> np.ndarray:
    """(0, z2) with z2 on an n x n cell-centred lattice strictly inside the disc"""
    axis = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    z2 = (xx + 1j * yy).reshape(-1)
    z2 = z2[np.abs(z2) < 1.0]
    return np.stack([np.zeros_like(z2), z2], axis=1)


def build_family(run: RunConfig) -> FamilySpec:
    key = run.scenario
    if key == "ex11":
        return FamilySpec.cyclic(hyperbolic_generator(), run.j_values)
    if key == "ex12":
        return FamilySpec.cyclic(parabolic_family(1), run.j_values)
    if key == "ex21":
        return FamilySpec.cyclic(lambda_pair(), run.j_values)
    if key == "ex22":
        return FamilySpec.psi(run.j_values, psi_grid(run.psi_args, run.psi_moduli))
    if key == "ex23":
        return FamilySpec.mu(run.j_values)
    return FamilySpec.full_bidisc(run.samples, seed=run.seed, chunk=run.chunk,
                                  delta_range=run.config.FULL_DELTA_RANGE,
                                  inner_radius=run.config.FULL_INNER_RADIUS)


def build_base_points(run: RunConfig) -> np.ndarray:
    if run.scenario == "ex23":
        return mu_base_points(run.base_grid)
    return np.zeros((1, 2), dtype=complex)


def build_domain(run: RunConfig) -> ModelDomain:
    return DomainFactory.create(run.scenario, dent_center=run.dent_center, config=run.config)


def build_inputs(run: RunConfig) -> Tuple[FamilySpec, np.ndarray, ModelDomain]:
    errors = run.validate()
    if errors:
        raise DomainParameterError("; ".join(errors))
    family = build_family(run)
    base = build_base_points(run)
    domain = build_domain(run)
    logger.info(f"{run.scenario}: {family.member_count()} members x {len(base)} base points on {domain.name}")
    return family, base, domain

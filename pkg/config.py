"""
config.py
Configuration settings for the orbit accumulation toolkit
"""

from typing import Dict, Any, Tuple


def _octaves(first: int, last: int) -> Tuple[float, ...]:
    return tuple(2.0 ** -k for k in range(first, last + 1))


class Config:
    """Configuration class for orbit experiments and acceptance checks"""

    # Reproducibility
    SEED: int = 20240101

    # Matrix and map tolerances
    MATRIX_TOL: float = 1e-10          # automorphy / group-law tolerance
    TRANSLATION_TOL: float = 1e-9      # Siegel translation fit
    PARABOLIC_TRACE_TOL: float = 1e-9  # tr^2/det == 4 test for parabolic drivers

    # Dent geometry
    DENT_CENTER: Tuple[complex, complex] = (1j, 0j)
    DIAGONAL_DENT_CENTER: Tuple[complex, complex] = (1j, 1j)
    DENT_RADIUS: float = 0.1           # bump support radius
    J_MAX: int = 200                   # membership cap for hyperbolic generators
    PARABOLIC_J_MAX: int = 4096        # membership cap for the parabolic generator
    BISECTION_TOL: float = 1e-12       # ray bisection for boundary distance
    BOUNDARY_TOL: float = 1e-8         # |defining value| for boundary samples

    # Orbit thresholds
    BDIST_THRESHOLD: float = 1e-3      # near-boundary harvesting depth
    CONVERGENCE_TOL: float = 1e-6      # library convergence verdict
    CONVERGENCE_TAIL: int = 10
    CLI_CONVERGENCE_TOL: float = 1e-3  # orbit subcommand verdict
    LIMIT_TOL: float = 1e-2            # --expect-limit distance
    FAR_POWER: int = 200               # power giving the default uniformity limit

    # Family grids
    CYCLIC_J_RANGE: Tuple[int, int] = (-60, 60)
    PARABOLIC_J_RANGE: Tuple[int, int] = (-1000, 1000)
    SAMPLED_J_VALUES: Tuple[int, ...] = (-60, -30, 30, 60)
    PSI_MODULI: Tuple[float, ...] = (0.3, 0.5, 0.7, 0.9)
    PSI_DOMAIN_ARGS: int = 32          # a-grid used for dented-domain membership
    PSI_FAMILY_ARGS: int = 4096        # a-grid used for accumulation harvesting
    MU_BASE_GRID: int = 256            # cell-centred lattice per axis for ex23
    FULL_SAMPLES: int = 1_500_000
    FULL_CHUNK: int = 250_000
    FULL_DELTA_RANGE: Tuple[float, float] = (1e-6, 1e-4)
    FULL_INNER_RADIUS: float = 1.0 - 1e-6

    # Clustering and box counting
    CLUSTER_RADIUS: float = 0.1
    CLUSTER_MAX_POINTS: int = 20000
    MIN_BOX_POINTS: int = 100
    DEFAULT_SCALES: Tuple[float, ...] = _octaves(3, 7)
    MU_SCALES: Tuple[float, ...] = _octaves(3, 6)
    FULL_SCALES: Tuple[float, ...] = tuple(2.0 ** (-3 - k / 4) for k in range(5))

    # Levi classification
    HESSIAN_STEP: float = 1e-4
    LEVI_TOL: float = 1e-3

    # Execution
    WORKERS: int = 4
    LOG_LEVEL: str = "WARNING"
    LOG_FORMAT: str = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    # Runtime budgets per acceptance check, seconds (reported, never gating)
    CHECK_BUDGETS: Dict[str, float] = {
        "group_law": 1.0,
        "hyperbolic_limits": 1.0,
        "parabolic_limit": 1.0,
        "siegel_translation": 1.0,
        "cardinality": 10.0,
        "dimensions": 120.0,
        "automorphy": 5.0,
        "levi": 5.0,
        "membership_invariance": 5.0,
        "cartan": 5.0,
    }

    @classmethod
    def validate_config(cls) -> Dict[str, Any]:
        """Validate configuration settings and return validation results"""
        validation_results = {
            "valid": True,
            "warnings": [],
            "errors": []
        }

        try:
            if not (0 < cls.CONVERGENCE_TOL <= cls.CLI_CONVERGENCE_TOL <= cls.LIMIT_TOL):
                validation_results["errors"].append(
                    f"Tolerances out of order: CONVERGENCE({cls.CONVERGENCE_TOL}) <= "
                    f"CLI({cls.CLI_CONVERGENCE_TOL}) <= LIMIT({cls.LIMIT_TOL})"
                )
                validation_results["valid"] = False

            if cls.BDIST_THRESHOLD <= 0 or cls.BDIST_THRESHOLD >= 1:
                validation_results["errors"].append(
                    f"BDIST_THRESHOLD must lie in (0, 1), got {cls.BDIST_THRESHOLD}"
                )
                validation_results["valid"] = False

            for name in ("DEFAULT_SCALES", "MU_SCALES", "FULL_SCALES"):
                scales = getattr(cls, name)
                if len(scales) < 2 or any(eps <= 0 for eps in scales):
                    validation_results["errors"].append(f"{name} needs >= 2 positive scales")
                    validation_results["valid"] = False

            if any(not 0 < r < 1 for r in cls.PSI_MODULI):
                validation_results["errors"].append("PSI_MODULI must lie in (0, 1)")
                validation_results["valid"] = False

            lo, hi = cls.FULL_DELTA_RANGE
            if not 0 < lo < hi < cls.BDIST_THRESHOLD:
                validation_results["errors"].append(
                    f"FULL_DELTA_RANGE ({lo}, {hi}) must sit below BDIST_THRESHOLD"
                )
                validation_results["valid"] = False

            if cls.J_MAX < 1 or cls.PARABOLIC_J_MAX < 1:
                validation_results["errors"].append("J_MAX caps must be >= 1")
                validation_results["valid"] = False

            if cls.CONVERGENCE_TAIL < 2:
                validation_results["warnings"].append("CONVERGENCE_TAIL < 2 makes every orbit look Cauchy")

            if cls.CLUSTER_MAX_POINTS < cls.MIN_BOX_POINTS:
                validation_results["warnings"].append(
                    "CLUSTER_MAX_POINTS < MIN_BOX_POINTS may hide clusters"
                )

            if cls.FULL_SAMPLES < cls.FULL_CHUNK:
                validation_results["warnings"].append("FULL_SAMPLES smaller than one chunk")

        except Exception as e:
            validation_results["errors"].append(f"Configuration validation failed: {e}")
            validation_results["valid"] = False

        return validation_results

    @classmethod
    def get_summary(cls) -> Dict[str, Any]:
        """Get a summary of current configuration"""
        return {
            "profile": cls.__name__,
            "seed": cls.SEED,
            "bdist_threshold": cls.BDIST_THRESHOLD,
            "cluster_radius": cls.CLUSTER_RADIUS,
            "psi_family_args": cls.PSI_FAMILY_ARGS,
            "mu_base_grid": cls.MU_BASE_GRID,
            "full_samples": cls.FULL_SAMPLES,
            "workers": cls.WORKERS,
        }


# Profile-specific configurations
class QuickConfig(Config):
    """Reduced grids for smoke runs"""
    PSI_FAMILY_ARGS = 1024
    MU_BASE_GRID = 128
    FULL_SAMPLES = 300_000
    FULL_CHUNK = 100_000
    PARABOLIC_J_RANGE = (-400, 400)


class TestingConfig(Config):
    """Small grids for unit tests"""
    PSI_FAMILY_ARGS = 2048             # finest default scale still resolved
    MU_BASE_GRID = 128                 # lattice step equals the finest mu scale
    FULL_SAMPLES = 20_000
    FULL_CHUNK = 5_000
    CLUSTER_MAX_POINTS = 4000
    WORKERS = 2


# Default configuration
DEFAULT_CONFIG = Config


def get_config(profile: str = "default") -> type:
    """Get configuration class for specified profile"""
    configs = {
        "default": Config,
        "quick": QuickConfig,
        "testing": TestingConfig
    }

    return configs.get(profile.lower(), Config)


def validate_profile_config(profile: str = "default") -> Dict[str, Any]:
    """Validate configuration for specified profile"""
    config_class = get_config(profile)
    return config_class.validate_config()

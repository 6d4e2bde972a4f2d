"""
domains.py
Defining-function models of the ball, the bidisc, the single dent and the
dented domains obtained by propagating the dent along an automorphism family
"""

import logging
import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from moebius import (
    BallMap, CPoint2, DiscMap, DomainParameterError, InvariantViolationError, Map,
    as_point_array, boundary_fixed_points, hyperbolic_generator, lambda_map,
    lambda_pair, parabolic_family, power, stacked_disc_mobius, stacked_power,
)

logger = logging.getLogger(__name__)


class PointOutsideDomainError(ValueError):
    """Raised when a query needs a point of the domain"""
    pass


class InconclusiveMembershipError(RuntimeError):
    """Raised when membership needs iterates beyond the J_max cap"""
    pass


class DomainKind(Enum):
    BALL = "ball"
    BIDISC = "bidisc"
    OMEGA_PRIME = "omega_prime"
    DENTED_BALL = "dented_ball"
    DENTED_BIDISC = "dented_bidisc"


class FamilyTag(Enum):
    CYCLIC = "cyclic"
    PSI = "psi"
    MU = "mu"
    FULL = "full"


class Verdict(Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# Bump and single dent

ALPHA_LEVEL = 1.0 / 100.0


def alpha(w1, w2):
    """
    (1/100 - |w1|^2)^2 (1/100 - |w2|^2)^2 when |(w1, w2)| <= 1/10, else 0.

    Piecewise exactly as written, so it jumps on the sphere of radius 1/10.
    """
    r1 = np.abs(w1) ** 2
    r2 = np.abs(w2) ** 2
    value = np.where(r1 + r2 <= ALPHA_LEVEL, (ALPHA_LEVEL - r1) ** 2 * (ALPHA_LEVEL - r2) ** 2, 0.0)
    return float(value) if np.ndim(value) == 0 else value


def ball_values(z: np.ndarray) -> np.ndarray:
    return np.abs(z[:, 0]) ** 2 + np.abs(z[:, 1]) ** 2 - 1.0


def bidisc_values(z: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(z[:, 0]) ** 2, np.abs(z[:, 1]) ** 2) - 1.0


def omega_prime_value(p: CPoint2, dent_center: Tuple[complex, complex] = Config.DENT_CENTER) -> float:
    """(|z1|^2 + |z2|^2 - 1) + alpha(z1 - c1, z2 - c2)"""
    c1, c2 = dent_center
    return float(abs(p.z1) ** 2 + abs(p.z2) ** 2 - 1.0 + alpha(p.z1 - c1, p.z2 - c2))


# ---------------------------------------------------------------------------
# Model domains


class ModelDomain(ABC):
    """Domain {value < 0} given by a defining function on C^2"""

    kind: DomainKind
    name: str = ""

    @abstractmethod
    def values(self, z: np.ndarray) -> np.ndarray:
        """Defining values of an (N, 2) array; NaN where membership is inconclusive"""
        pass

    @abstractmethod
    def boundary_distances(self, z: np.ndarray) -> np.ndarray:
        """Distances to the boundary for an (N, 2) array, clamped at 0"""
        pass

    @property
    def parent(self) -> "ModelDomain":
        return self

    def defining_value(self, p: CPoint2) -> float:
        value = float(self.values(as_point_array(p))[0])
        if math.isnan(value):
            raise InconclusiveMembershipError(f"Membership of {p} in {self.name} is inconclusive")
        return value

    def __call__(self, p: CPoint2) -> float:
        return self.defining_value(p)

    def membership(self, p: CPoint2) -> Verdict:
        value = float(self.values(as_point_array(p))[0])
        if math.isnan(value):
            return Verdict.INCONCLUSIVE
        return Verdict.INSIDE if value < 0 else Verdict.OUTSIDE

    def contains(self, p: CPoint2) -> bool:
        return self.defining_value(p) < 0

    def contains_array(self, z: np.ndarray) -> np.ndarray:
        values = self.values(z)
        if np.any(np.isnan(values)):
            raise InconclusiveMembershipError(f"{int(np.isnan(values).sum())} inconclusive points in {self.name}")
        return values < 0

    def boundary_distance(self, p: CPoint2) -> float:
        if not self.contains(p):
            raise PointOutsideDomainError(f"{p} is not inside {self.name}")
        return float(self.boundary_distances(as_point_array(p))[0])

    def parent_distances(self, z: np.ndarray) -> np.ndarray:
        return self.parent.boundary_distances(z)

    def project_to_boundary(self, z: np.ndarray, threshold: float) -> np.ndarray:
        return self.parent.project_to_boundary(z, threshold)

    def is_smooth_at(self, p: CPoint2) -> bool:
        return True

    def ray_exit(self, directions: np.ndarray) -> np.ndarray:
        """Parameter t where t * direction leaves the parent model domain"""
        return self.parent.ray_exit(directions)


class Ball(ModelDomain):
    kind = DomainKind.BALL
    name = "ball"

    def values(self, z: np.ndarray) -> np.ndarray:
        return ball_values(z)

    def boundary_distances(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(1.0 - np.sqrt(np.abs(z[:, 0]) ** 2 + np.abs(z[:, 1]) ** 2), 0.0)

    def project_to_boundary(self, z: np.ndarray, threshold: float) -> np.ndarray:
        norms = np.sqrt(np.abs(z[:, 0]) ** 2 + np.abs(z[:, 1]) ** 2)
        return z / norms[:, None]

    def ray_exit(self, directions: np.ndarray) -> np.ndarray:
        return 1.0 / np.sqrt(np.abs(directions[:, 0]) ** 2 + np.abs(directions[:, 1]) ** 2)


class Bidisc(ModelDomain):
    kind = DomainKind.BIDISC
    name = "bidisc"

    def values(self, z: np.ndarray) -> np.ndarray:
        return bidisc_values(z)

    def boundary_distances(self, z: np.ndarray) -> np.ndarray:
        return np.maximum(1.0 - np.maximum(np.abs(z[:, 0]), np.abs(z[:, 1])), 0.0)

    def project_to_boundary(self, z: np.ndarray, threshold: float) -> np.ndarray:
        moduli = np.abs(z)
        pushed = np.where(moduli > 1.0 - threshold, z / np.where(moduli > 0, moduli, 1.0), z)
        return pushed

    def ray_exit(self, directions: np.ndarray) -> np.ndarray:
        return 1.0 / np.maximum(np.abs(directions[:, 0]), np.abs(directions[:, 1]))

    def is_smooth_at(self, p: CPoint2) -> bool:
        tol = Config.BOUNDARY_TOL
        return not (abs(abs(p.z1) - 1.0) < tol and abs(abs(p.z2) - 1.0) < tol)


class _DentedBase(ModelDomain):
    """Shared ray bisection toward dent centres"""

    def __init__(self, parent: ModelDomain, dent_center: Tuple[complex, complex]):
        self._parent = parent
        self.dent_center = np.array(dent_center, dtype=complex)

    @property
    def parent(self) -> ModelDomain:
        return self._parent

    def dent_values(self, z: np.ndarray) -> np.ndarray:
        """Single-dent defining value on the parent model"""
        shifted = z - self.dent_center
        return self._parent.values(z) + alpha(shifted[:, 0], shifted[:, 1])

    @abstractmethod
    def nearest_dent_centers(self, z: np.ndarray) -> np.ndarray:
        """Closest relevant dent centre per point; NaN rows when no dent can be met"""
        pass

    def boundary_distances(self, z: np.ndarray) -> np.ndarray:
        distances = self._parent.boundary_distances(z)
        targets = self.nearest_dent_centers(z)
        rows = np.flatnonzero(np.all(np.isfinite(targets), axis=1))
        if rows.size == 0:
            return distances

        start = z[rows]
        span = targets[rows] - start
        length = np.sqrt(np.abs(span[:, 0]) ** 2 + np.abs(span[:, 1]) ** 2)
        usable = length > 0
        inside = self.values(start) < 0
        far_end = self.values(targets[rows])
        usable &= inside & (far_end >= 0)
        rows, start, span, length = rows[usable], start[usable], span[usable], length[usable]
        if rows.size == 0:
            return distances

        direction = span / length[:, None]
        lo = np.zeros_like(length)
        hi = length.copy()
        while np.max(hi - lo) > Config.BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            values = self.values(start + mid[:, None] * direction)
            outside = ~(values < 0)
            hi = np.where(outside, mid, hi)
            lo = np.where(outside, lo, mid)
        distances[rows] = np.minimum(distances[rows], lo)
        return distances


class OmegaPrime(_DentedBase):
    """Model domain with one dent at a boundary point"""
    kind = DomainKind.OMEGA_PRIME

    def __init__(self, parent: Optional[ModelDomain] = None,
                 dent_center: Tuple[complex, complex] = Config.DENT_CENTER):
        super().__init__(parent or Ball(), dent_center)
        self.name = f"omega_prime({self._parent.name})"

    def values(self, z: np.ndarray) -> np.ndarray:
        return self.dent_values(z)

    def nearest_dent_centers(self, z: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.dent_center, z.shape).copy()


# ---------------------------------------------------------------------------
# Drift charts


@dataclass(frozen=True)
class DriftChart:
    """
    Real coordinate s on the disc with s(g(z)) = s(z) + step for a
    non-elliptic disc automorphism g.

    Hyperbolic g: s = -log|(z - p_att)/(z - p_rep)|. Parabolic g: rotate the
    fixed point to -1 and take Re of the half-plane coordinate.
    """
    kind: str
    step: float
    attracting: complex
    repelling: complex = 0j

    @classmethod
    def from_driver(cls, g: DiscMap) -> "DriftChart":
        (a, b), (c, d) = g.m
        det = a * d - b * c
        ratio = (a + d) ** 2 / det
        if abs(ratio - 4) < Config.PARABOLIC_TRACE_TOL:
            q = -(d - a) / (2 * c)
            q = q / abs(q)
            chart = cls(kind="parabolic", step=0.0, attracting=complex(q))
            step = float(chart.progress(np.array([g(0j)]))[0] - chart.progress(np.array([0j]))[0])
            if abs(step) < Config.MATRIX_TOL:
                raise InvariantViolationError("Parabolic driver without drift")
            return cls(kind="parabolic", step=step, attracting=complex(q))
        if ratio.real > 4 and abs(ratio.imag) < 1e-6 * abs(ratio):
            fixed = boundary_fixed_points(g)
            if len(fixed) != 2:
                raise InvariantViolationError(f"Hyperbolic driver with fixed points {fixed}")
            slopes = [abs(g.derivative(p)) for p in fixed]
            att, rep = (fixed[0], fixed[1]) if slopes[0] < slopes[1] else (fixed[1], fixed[0])
            return cls(kind="hyperbolic", step=-math.log(min(slopes)), attracting=att, repelling=rep)
        raise DomainParameterError("Elliptic or trivial driver: the dent cannot be propagated")

    def progress(self, zeta: np.ndarray) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "hyperbolic":
                u = (zeta - self.attracting) / (zeta - self.repelling)
                return -np.log(np.abs(u))
            rotated = -zeta * np.conj(self.attracting)
            w = 1j * (1 - rotated) / (1 + rotated)
            return w.real

    def window(self, s: np.ndarray, s_lo: float, s_hi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Integer k with s + k*step in [s_lo, s_hi]; returns (k_lo, k_hi, finite)"""
        finite = np.isfinite(s)
        safe = np.where(finite, s, 0.0)
        a = (s_lo - safe) / self.step
        b = (s_hi - safe) / self.step
        lo = np.ceil(np.minimum(a, b))
        hi = np.floor(np.maximum(a, b))
        return lo.astype(np.int64), hi.astype(np.int64), finite


# ---------------------------------------------------------------------------
# Propagation families


class Propagation(ABC):
    """Automorphism family along which a dent is propagated"""

    def __init__(self, tag: FamilyTag, driver: DiscMap, description: str):
        self.tag = tag
        self.driver = driver
        self.description = description
        self._cache: Dict[int, List[np.ndarray]] = {}
        self._lock = threading.Lock()

    @abstractmethod
    def members(self, k: int):
        """Callables mapping (N, 2) arrays, one per family member with index k"""
        pass

    def member_images(self, k: int, z: np.ndarray) -> List[np.ndarray]:
        return [member(z) for member in self._members_cached(k)]

    def _members_cached(self, k: int):
        with self._lock:
            cached = self._cache.get(k)
        if cached is None:
            cached = self.members(k)
            with self._lock:
                self._cache[k] = cached
        return cached


class CyclicPropagation(Propagation):
    def __init__(self, generator: Map):
        super().__init__(FamilyTag.CYCLIC, generator.z1_driver(), "cyclic")
        self.generator = generator

    def members(self, k: int):
        return [power(self.generator, k).apply_array]


class PsiPropagation(Propagation):
    def __init__(self, a_grid: Sequence[complex]):
        super().__init__(FamilyTag.PSI, lambda_map(), f"psi({len(a_grid)} parameters)")
        self.a_grid = np.asarray(a_grid, dtype=complex)
        self._rho = stacked_disc_mobius(self.a_grid, np.zeros(self.a_grid.shape))

    def members(self, k: int):
        first = power(lambda_map(), k)
        second = stacked_power(self._rho, k)

        def apply(z: np.ndarray, first=first, second=second) -> np.ndarray:
            # all a at once: (n_a * N, 2), grouped by a
            w1 = np.tile(first(z[:, 0]), second.shape[0])
            zeta = z[:, 1][None, :]
            w2 = (second[:, 0, 0, None] * zeta + second[:, 0, 1, None]) / \
                 (second[:, 1, 0, None] * zeta + second[:, 1, 1, None])
            return np.stack([w1, w2.reshape(-1)], axis=1)
        return [apply]

    def member_images(self, k: int, z: np.ndarray) -> List[np.ndarray]:
        images = self._members_cached(k)[0](z)
        return [images[i * len(z):(i + 1) * len(z)] for i in range(len(self.a_grid))]


class MuPropagation(Propagation):
    def __init__(self):
        super().__init__(FamilyTag.MU, lambda_map(), "mu")

    def members(self, k: int):
        first = power(lambda_map(), k)

        def apply(z: np.ndarray, first=first) -> np.ndarray:
            return np.stack([first(z[:, 0]), z[:, 1]], axis=1)
        return [apply]


def psi_grid(n_args: int, moduli: Sequence[float] = Config.PSI_MODULI) -> np.ndarray:
    """a = r e^{2 pi i k / n_args} ordered by modulus then argument"""
    args = np.exp(2j * np.pi * np.arange(n_args) / n_args)
    return np.concatenate([r * args for r in moduli])


class DentedDomain(_DentedBase):
    """
    Intersection of the images of a dented model domain under a family.

    p is inside iff every family image g^k(p) avoids the dent. The drift chart
    of the z1-driver confines the k that can reach the dent to a short window;
    a window that needs |k| > j_max makes the point inconclusive.
    """

    def __init__(self, parent: ModelDomain, propagation: Propagation,
                 dent_center: Tuple[complex, complex] = Config.DENT_CENTER,
                 j_max: int = Config.J_MAX, name: str = ""):
        super().__init__(parent, dent_center)
        if j_max < 1:
            raise DomainParameterError(f"j_max must be >= 1, got {j_max}")
        self.propagation = propagation
        self.j_max = j_max
        self.kind = DomainKind.DENTED_BALL if isinstance(parent, Ball) else DomainKind.DENTED_BIDISC
        self.family_tag = propagation.tag
        self.name = name or f"{self.kind.value}({propagation.description})"
        self.chart = DriftChart.from_driver(propagation.driver)
        self.s_lo, self.s_hi = self._dent_progress_range()
        logger.info(f"Built {self.name}: {self.chart.kind} drift step {self.chart.step:.4f}, "
                    f"dent window s in [{self.s_lo:.4f}, {self.s_hi:.4f}]")

    def _dent_progress_range(self) -> Tuple[float, float]:
        """Range of s over the z1-shadow of the dent support, widened by one step"""
        c1 = complex(self.dent_center[0])
        radius = Config.DENT_RADIUS
        theta = np.linspace(0.0, 2 * np.pi, 2049)
        rim = c1 + radius * np.exp(1j * theta)
        rim = rim[np.abs(rim) <= 1.0]
        arc = np.exp(1j * np.linspace(0.0, 2 * np.pi, 16385))
        arc = arc[np.abs(arc - c1) <= radius]
        samples = np.concatenate([rim, arc, [c1 if abs(c1) <= 1 else c1 / abs(c1)]])
        s = self.chart.progress(samples)
        s = s[np.isfinite(s)]
        if s.size == 0:
            raise InvariantViolationError("Dent shadow collapses onto a fixed point of the driver")
        margin = abs(self.chart.step)
        return float(s.min() - margin), float(s.max() + margin)

    def windows(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(k_lo, k_hi, inconclusive) per point"""
        s = self.chart.progress(z[:, 0])
        k_lo, k_hi, finite = self.chart.window(s, self.s_lo, self.s_hi)
        nonempty = k_lo <= k_hi
        too_far = nonempty & ((np.abs(k_lo) > self.j_max) | (np.abs(k_hi) > self.j_max))
        inconclusive = ~finite | too_far
        return k_lo, k_hi, inconclusive

    def values(self, z: np.ndarray) -> np.ndarray:
        z = as_point_array(z)
        out = self._parent.values(z).astype(float)
        inside_parent = out < 0
        k_lo, k_hi, inconclusive = self.windows(z)
        active = inside_parent & ~inconclusive & (k_lo <= k_hi)
        for k in _window_union(k_lo[active], k_hi[active]):
            rows = np.flatnonzero(active & (k_lo <= k) & (k <= k_hi))
            if rows.size == 0:
                continue
            for images in self.propagation.member_images(int(k), z[rows]):
                out[rows] = np.maximum(out[rows], self.dent_values(images))
        out[inside_parent & inconclusive] = np.nan
        return out

    def nearest_dent_centers(self, z: np.ndarray) -> np.ndarray:
        targets = np.full(z.shape, np.nan, dtype=complex)
        best = np.full(len(z), np.inf)
        k_lo, k_hi, inconclusive = self.windows(z)
        active = ~inconclusive & (k_lo <= k_hi)
        center = self.dent_center[None, :]
        for k in _window_union(k_lo[active], k_hi[active]):
            rows = np.flatnonzero(active & (k_lo <= k) & (k <= k_hi))
            if rows.size == 0:
                continue
            # the dent seen by g^k sits at g^{-k}(c)
            for images in self.propagation.member_images(-int(k), center):
                q = images[0]
                gap = np.sqrt(np.abs(z[rows, 0] - q[0]) ** 2 + np.abs(z[rows, 1] - q[1]) ** 2)
                closer = gap < best[rows]
                best[rows[closer]] = gap[closer]
                targets[rows[closer]] = q
        return targets


def _window_union(k_lo: np.ndarray, k_hi: np.ndarray) -> np.ndarray:
    if k_lo.size == 0:
        return np.empty(0, dtype=np.int64)
    spans = [np.arange(lo, hi + 1) for lo, hi in set(zip(k_lo.tolist(), k_hi.tolist()))]
    return np.unique(np.concatenate(spans))


# ---------------------------------------------------------------------------
# Queries


def omega_contains(p: CPoint2, generator: Optional[BallMap] = None, j_max: int = Config.J_MAX,
                   dent_center: Tuple[complex, complex] = Config.DENT_CENTER) -> bool:
    """
    Decide p in the intersection of g^j(Omega') over all integers j.

    Raises InconclusiveMembershipError when the decision needs |j| > j_max.
    """
    domain = DentedDomain(Ball(), CyclicPropagation(generator or hyperbolic_generator()),
                          dent_center=dent_center, j_max=j_max)
    verdict = domain.membership(p)
    if verdict is Verdict.INCONCLUSIVE:
        raise InconclusiveMembershipError(f"Membership of {p} needs |j| > {j_max}")
    return verdict is Verdict.INSIDE


def boundary_distance(domain: ModelDomain, p: CPoint2) -> float:
    return domain.boundary_distance(p)


def sample_boundary(domain: ModelDomain, n: int, seed: int = Config.SEED) -> List[CPoint2]:
    """
    n boundary points with |defining value| < BOUNDARY_TOL by radial bisection
    from the origin along seeded Gaussian directions.
    """
    if n < 1:
        raise DomainParameterError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    found: List[np.ndarray] = []
    total = 0
    rounds = 0
    while total < n:
        rounds += 1
        if rounds > 50:
            raise InvariantViolationError(f"Could not sample {n} boundary points of {domain.name}")
        raw = rng.standard_normal((n, 4))
        directions = raw[:, 0::2] + 1j * raw[:, 1::2]
        directions /= np.sqrt(np.sum(np.abs(directions) ** 2, axis=1))[:, None]
        lo = np.zeros(n)
        hi = domain.ray_exit(directions) * (1.0 + 1e-9)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            values = domain.values(mid[:, None] * directions)
            outside = ~(values < 0)
            hi = np.where(outside, mid, hi)
            lo = np.where(outside, lo, mid)
            if np.max(hi - lo) < Config.BISECTION_TOL:
                break
        points = lo[:, None] * directions
        values = domain.values(points)
        good = np.isfinite(values) & (np.abs(values) < Config.BOUNDARY_TOL)
        found.append(points[good])
        total += int(good.sum())
    result = np.concatenate(found)[:n]
    logger.info(f"Sampled {n} boundary points of {domain.name} (seed={seed})")
    return [CPoint2(a, b) for a, b in result]


# ---------------------------------------------------------------------------
# Factory


class DomainFactory:
    """Build model domains by name"""

    NAMES = ("ball", "bidisc", "omega_prime", "ex11", "ex12", "ex21", "ex22", "ex23", "ex24")

    @staticmethod
    def create(name: str, dent_center: Optional[Tuple[complex, complex]] = None,
               config=Config) -> ModelDomain:
        key = name.lower()
        center = dent_center or config.DENT_CENTER
        if key == "ball":
            return Ball()
        if key in ("bidisc", "ex24"):
            return Bidisc()
        if key == "omega_prime":
            return OmegaPrime(Ball(), center)
        if key == "ex11":
            return DentedDomain(Ball(), CyclicPropagation(hyperbolic_generator()), center,
                                config.J_MAX, name="ex11")
        if key == "ex12":
            return DentedDomain(Ball(), CyclicPropagation(parabolic_family(1)), center,
                                config.PARABOLIC_J_MAX, name="ex12")
        if key == "ex21":
            return DentedDomain(Bidisc(), CyclicPropagation(lambda_pair()), center,
                                config.J_MAX, name="ex21")
        if key == "ex22":
            grid = psi_grid(config.PSI_DOMAIN_ARGS, config.PSI_MODULI)
            return DentedDomain(Bidisc(), PsiPropagation(grid), center, config.J_MAX, name="ex22")
        if key == "ex23":
            return DentedDomain(Bidisc(), MuPropagation(), center, config.J_MAX, name="ex23")
        raise DomainParameterError(f"Unknown domain '{name}', expected one of {DomainFactory.NAMES}")

"""
orbits.py
Orbit iteration, boundary-limit extraction, uniform convergence checks and
near-boundary harvesting over automorphism families
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from accum import PointCloud
from config import Config
from domains import ModelDomain, PointOutsideDomainError
from moebius import (
    BallMap, BidiscMap, CPoint2, DomainParameterError, Map, apply_stacked_disc, as_point_array,
    lambda_map, power, stacked_disc_mobius, stacked_power,
)

logger = logging.getLogger(__name__)

Family = Callable[[int], Map]


@dataclass
class OrbitEntry:
    j: int
    point: CPoint2
    bdist: float


@dataclass
class OrbitRecord:
    """Orbit points indexed by strictly increasing j"""
    entries: List[OrbitEntry] = field(default_factory=list)
    limit: Optional[CPoint2] = None
    converged: bool = False
    backward_limit: Optional[CPoint2] = None

    def points(self) -> np.ndarray:
        return np.array([[e.point.z1, e.point.z2] for e in self.entries], dtype=complex)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"j": e.j, "re1": e.point.z1.real, "im1": e.point.z1.imag,
              "re2": e.point.z2.real, "im2": e.point.z2.imag, "bdist": e.bdist}
             for e in self.entries],
            columns=["j", "re1", "im1", "re2", "im2", "bdist"],
        )

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, float_format="%.12g")

    def to_dict(self) -> dict:
        def point(p: Optional[CPoint2]):
            return None if p is None else [round(x, 12) for x in p.as_reals()]
        return {
            "entries": [{"j": e.j, "point": point(e.point), "bdist": float(f"{e.bdist:.12g}")}
                        for e in self.entries],
            "limit": point(self.limit),
            "backward_limit": point(self.backward_limit),
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _member(map_or_family: Union[Map, Family], j: int) -> Map:
    if isinstance(map_or_family, (BallMap, BidiscMap)):
        return power(map_or_family, j)
    return map_or_family(j)


def iterate_orbit(map_or_family: Union[Map, Family], X: CPoint2, j_min: int, j_max: int,
                  domain: ModelDomain, tail: int = Config.CONVERGENCE_TAIL,
                  tol: float = Config.CONVERGENCE_TOL) -> OrbitRecord:
    """
    Orbit of X for every j in [j_min, j_max], each point computed from the
    j-th power (or family member) rather than by stepping.
    """
    if j_min > j_max:
        raise DomainParameterError(f"Empty j range [{j_min}, {j_max}]")
    if not domain.contains(X):
        raise PointOutsideDomainError(f"Orbit start {X} is not inside {domain.name}")

    js = list(range(j_min, j_max + 1))
    z = np.array([_member(map_or_family, j)(X).as_array() for j in js])
    bdist = domain.boundary_distances(z)
    record = OrbitRecord(entries=[OrbitEntry(j, CPoint2(a, b), float(d))
                                  for j, (a, b), d in zip(js, z, bdist)])
    if len(js) >= tail:
        record.limit = orbit_limit(record, tail, tol, direction=1)
        record.backward_limit = orbit_limit(record, tail, tol, direction=-1)
    record.converged = record.limit is not None
    logger.info(f"Orbit of {X} over j in [{j_min}, {j_max}] on {domain.name}: "
                f"final bdist {record.entries[-1].bdist:.3e}, converged={record.converged}")
    return record


def orbit_limit(record: OrbitRecord, tail: int = Config.CONVERGENCE_TAIL,
                tol: float = Config.CONVERGENCE_TOL, direction: int = 1) -> Optional[CPoint2]:
    """
    Mean of the last (direction=1) or first (direction=-1) tail points when
    their diameter and boundary distances are below tol.
    """
    if len(record.entries) < tail:
        raise DomainParameterError(f"Need {tail} entries, record has {len(record.entries)}")
    chosen = record.entries[-tail:] if direction > 0 else record.entries[:tail]
    pts = np.array([[e.point.z1, e.point.z2] for e in chosen])
    gaps = pts[:, None, :] - pts[None, :, :]
    diameter = float(np.sqrt(np.max(np.sum(np.abs(gaps) ** 2, axis=2))))
    depth = max(e.bdist for e in chosen)
    if diameter < tol and depth < tol:
        return CPoint2.from_array(pts.mean(axis=0))
    return None


def uniformity_check(family: Union[Map, Family], r: float, j: int,
                     limit: Optional[CPoint2] = None, seed: int = Config.SEED) -> float:
    """
    max |f^j(z) - limit| over a deterministic grid of the compact ball |z| <= r.

    The default limit is the image of the origin under a far power in the
    direction of j.
    """
    if not 0 < r < 1:
        raise DomainParameterError(f"Radius must lie in (0, 1), got {r}")
    if limit is None:
        far = Config.FAR_POWER if j >= 0 else -Config.FAR_POWER
        limit = _member(family, far)(CPoint2(0, 0))

    axis = np.linspace(-r, r, 9)
    mesh = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
    mesh = mesh[np.linalg.norm(mesh, axis=1) <= r]
    rng = np.random.default_rng(seed)
    shell = rng.standard_normal((256, 4))
    shell = r * shell / np.linalg.norm(shell, axis=1)[:, None]
    grid = np.vstack([mesh, shell])
    z = grid[:, 0::2] + 1j * grid[:, 1::2]

    images = _member(family, j).apply_array(z)
    gaps = np.sqrt(np.sum(np.abs(images - limit.as_array()) ** 2, axis=1))
    return float(gaps.max())


# ---------------------------------------------------------------------------
# Families


class FamilyKind(Enum):
    CYCLIC = "cyclic"
    PSI = "psi"
    MU = "mu"
    FULL_BIDISC = "full_bidisc"


@dataclass
class MemberBatch:
    """Stacked family members: ball matrices, or per-factor disc matrices with swap flags"""
    start: int
    ball: Optional[np.ndarray] = None
    first: Optional[np.ndarray] = None
    second: Optional[np.ndarray] = None
    swap: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.ball) if self.ball is not None else len(self.first)

    def apply(self, base: np.ndarray) -> np.ndarray:
        """Images of every base point under every member, shape (members, bases, 2)"""
        if self.ball is not None:
            homogeneous = np.concatenate([base, np.ones((len(base), 1))], axis=1)
            h = np.einsum("nij,mj->nmi", self.ball, homogeneous)
            return h[..., :2] / h[..., 2:3]
        swap = self.swap[:, None] if self.swap is not None else np.zeros((len(self), 1), dtype=bool)
        x1 = np.where(swap, base[None, :, 1], base[None, :, 0])
        x2 = np.where(swap, base[None, :, 0], base[None, :, 1])
        return np.stack([apply_stacked_disc(self.first, x1), apply_stacked_disc(self.second, x2)], axis=-1)


@dataclass
class FamilySpec:
    """Finite declared sample of an automorphism family"""
    kind: FamilyKind
    generator: Optional[Map] = None
    j_values: Tuple[int, ...] = ()
    a_grid: Optional[np.ndarray] = None
    sample_count: int = 0
    seed: int = Config.SEED
    chunk: int = Config.FULL_CHUNK
    delta_range: Tuple[float, float] = Config.FULL_DELTA_RANGE
    inner_radius: float = Config.FULL_INNER_RADIUS

    @classmethod
    def cyclic(cls, generator: Map, j_values: Sequence[int]) -> "FamilySpec":
        return cls(FamilyKind.CYCLIC, generator=generator, j_values=tuple(int(j) for j in j_values))

    @classmethod
    def psi(cls, j_values: Sequence[int], a_grid: Sequence[complex]) -> "FamilySpec":
        grid = np.asarray(a_grid, dtype=complex)
        if np.any(grid == 0):
            raise DomainParameterError("psi needs a != 0 for every grid parameter")
        return cls(FamilyKind.PSI, j_values=tuple(int(j) for j in j_values), a_grid=grid)

    @classmethod
    def mu(cls, j_values: Sequence[int]) -> "FamilySpec":
        return cls(FamilyKind.MU, j_values=tuple(int(j) for j in j_values))

    @classmethod
    def full_bidisc(cls, sample_count: int, seed: int = Config.SEED, chunk: int = Config.FULL_CHUNK,
                    **kwargs) -> "FamilySpec":
        return cls(FamilyKind.FULL_BIDISC, sample_count=int(sample_count), seed=seed, chunk=chunk, **kwargs)

    def member_count(self) -> int:
        if self.kind is FamilyKind.PSI:
            return len(self.j_values) * len(self.a_grid)
        if self.kind is FamilyKind.FULL_BIDISC:
            return self.sample_count
        return len(self.j_values)

    def batches(self) -> Iterator[MemberBatch]:
        if self.kind is FamilyKind.CYCLIC:
            yield self._cyclic_batch()
        elif self.kind is FamilyKind.PSI:
            rho = stacked_disc_mobius(self.a_grid, np.zeros(self.a_grid.shape))
            start = 0
            for j in self.j_values:
                lam = np.broadcast_to(power(lambda_map(), j).m, rho.shape).copy()
                yield MemberBatch(start, first=lam, second=stacked_power(rho, j))
                start += len(rho)
        elif self.kind is FamilyKind.MU:
            first = np.array([power(lambda_map(), j).m for j in self.j_values])
            second = np.broadcast_to(np.eye(2, dtype=complex), first.shape).copy()
            yield MemberBatch(0, first=first, second=second)
        else:
            for start in range(0, self.sample_count, self.chunk):
                yield self._full_batch(start, min(self.chunk, self.sample_count - start))

    def _cyclic_batch(self) -> MemberBatch:
        members = [power(self.generator, j) for j in self.j_values]
        if isinstance(self.generator, BallMap):
            return MemberBatch(0, ball=np.array([m.m for m in members]))
        return MemberBatch(0, first=np.array([m.first.m for m in members]),
                           second=np.array([m.second.m for m in members]),
                           swap=np.array([m.swap for m in members]))

    def _full_batch(self, start: int, size: int) -> MemberBatch:
        """
        Bidisc automorphisms pushing the origin within delta of one boundary
        face: one factor has |a| = 1 - delta (delta log-uniform), the other an
        area-uniform a; factor order and swap are coin flips.
        """
        rng = np.random.default_rng([self.seed, start])
        lo, hi = self.delta_range
        delta = np.exp(rng.uniform(np.log(lo), np.log(hi), size))
        escape = (1.0 - delta) * np.exp(1j * rng.uniform(0, 2 * np.pi, size))
        inner = self.inner_radius * np.sqrt(rng.uniform(0, 1, size)) * np.exp(1j * rng.uniform(0, 2 * np.pi, size))
        slot = rng.integers(0, 2, size).astype(bool)
        swap = rng.integers(0, 2, size).astype(bool)
        theta = rng.uniform(0, 2 * np.pi, (2, size))
        a1 = np.where(slot, escape, inner)
        a2 = np.where(slot, inner, escape)
        return MemberBatch(start, first=stacked_disc_mobius(a1, theta[0]),
                           second=stacked_disc_mobius(a2, theta[1]), swap=swap)


def accumulation_samples(family: FamilySpec, base_points: Sequence[CPoint2], domain: ModelDomain,
                         bdist_threshold: float = Config.BDIST_THRESHOLD,
                         workers: int = Config.WORKERS) -> PointCloud:
    """
    Apply every family member to every base point and keep the boundary
    projections of images closer than bdist_threshold to the boundary.

    Screening uses the parent model distance; dents shift the boundary by far
    less than the threshold. Output order follows (member, base point) index.
    """
    if bdist_threshold <= 0:
        raise DomainParameterError(f"Threshold must be positive, got {bdist_threshold}")
    base = as_point_array(base_points)
    inside = domain.contains_array(base)
    if not np.all(inside):
        raise PointOutsideDomainError(f"{int((~inside).sum())} base points lie outside {domain.name}")

    def harvest(batch: MemberBatch) -> np.ndarray:
        images = batch.apply(base).reshape(-1, 2)
        near = domain.parent_distances(images) < bdist_threshold
        return domain.project_to_boundary(images[near], bdist_threshold)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(harvest, family.batches()))

    provenance = {"family": family.kind.value, "domain": domain.name,
                  "members": family.member_count(), "base_points": len(base),
                  "threshold": bdist_threshold}
    kept = np.concatenate(parts) if parts else np.empty((0, 2), dtype=complex)
    if len(kept) == 0:
        logger.warning(f"No images within {bdist_threshold} of the boundary of {domain.name}")
        return PointCloud.empty(provenance)
    logger.info(f"Harvested {len(kept)} of {family.member_count() * len(base)} images on {domain.name}")
    return PointCloud.from_complex(kept, provenance)

"""
accum.py
Turns near-boundary orbit samples into an estimate of the accumulation set:
leader clustering for cardinality and box counting for dimension
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import Config
from moebius import InvariantViolationError

logger = logging.getLogger(__name__)

POINT_COLUMNS = ["re1", "im1", "re2", "im2"]
NO_ACCUMULATION = "no accumulation at this depth"


class NoAccumulationError(RuntimeError):
    """Raised when a harvest kept no near-boundary points"""
    pass


@dataclass
class PointCloud:
    """Boundary points as rows (Re z1, Im z1, Re z2, Im z2)"""
    points: np.ndarray
    provenance: Dict[str, Any] = field(default_factory=dict)
    status: str = "ok"

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 4)
        if not np.all(np.isfinite(self.points)):
            raise InvariantViolationError("PointCloud coordinates must be finite")

    @classmethod
    def from_complex(cls, z: np.ndarray, provenance: Optional[Dict[str, Any]] = None) -> "PointCloud":
        z = np.asarray(z, dtype=complex).reshape(-1, 2)
        reals = np.stack([z[:, 0].real, z[:, 0].imag, z[:, 1].real, z[:, 1].imag], axis=1)
        return cls(reals, provenance or {})

    @classmethod
    def empty(cls, provenance: Optional[Dict[str, Any]] = None) -> "PointCloud":
        return cls(np.empty((0, 4)), provenance or {}, status=NO_ACCUMULATION)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0

    def __len__(self) -> int:
        return len(self.points)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.points, columns=POINT_COLUMNS)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, float_format="%.12g")

    def to_json(self) -> str:
        return json.dumps([[round(float(x), 12) for x in row] for row in self.points])

    @classmethod
    def from_csv(cls, path: str) -> "PointCloud":
        frame = pd.read_csv(path)
        missing = [c for c in POINT_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Point cloud CSV is missing columns {missing}")
        return cls(frame[POINT_COLUMNS].to_numpy(dtype=float), {"source": path})


@dataclass
class Cluster:
    center: np.ndarray
    count: int
    radius: float


@dataclass
class ClusterSet:
    clusters: List[Cluster] = field(default_factory=list)
    unassigned: int = 0

    def __len__(self) -> int:
        return len(self.clusters)

    def centers(self) -> np.ndarray:
        if not self.clusters:
            return np.empty((0, 4))
        return np.array([c.center for c in self.clusters])

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"cluster": i, **dict(zip(POINT_COLUMNS, c.center.tolist())), "count": c.count, "radius": c.radius}
            for i, c in enumerate(self.clusters)
        ]
        return pd.DataFrame(rows, columns=["cluster"] + POINT_COLUMNS + ["count", "radius"])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "clusters": [
                {"center": [round(float(x), 12) for x in c.center], "count": c.count,
                 "radius": round(float(c.radius), 12)}
                for c in self.clusters
            ],
            "unassigned": self.unassigned,
        }


@dataclass
class DimensionEstimate:
    slope: float
    r2: float
    scales: List[Tuple[float, int]]
    degenerate: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "slope": round(float(self.slope), 12),
            "r2": round(float(self.r2), 12),
            "degenerate": self.degenerate,
            "scales": [{"eps": float(eps), "count": int(count)} for eps, count in self.scales],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# Clustering


def cluster(cloud: PointCloud, radius: float = Config.CLUSTER_RADIUS) -> ClusterSet:
    """
    Greedy leader clustering in input order.

    Each point joins the first centre within radius (centres are running means)
    or starts a new one. Centres within radius of each other are then merged,
    and points left farther than radius from their final centre are counted as
    unassigned.
    """
    if radius <= 0:
        raise ValueError(f"Cluster radius must be positive, got {radius}")
    points = cloud.points
    if len(points) == 0:
        return ClusterSet()

    centers = np.empty_like(points)
    sums = np.empty_like(points)
    counts = np.zeros(len(points), dtype=np.int64)
    labels = np.empty(len(points), dtype=np.int64)
    n = 0
    for i, x in enumerate(points):
        if n:
            hits = np.flatnonzero(np.linalg.norm(centers[:n] - x, axis=1) <= radius)
            if hits.size:
                k = int(hits[0])
                sums[k] += x
                counts[k] += 1
                centers[k] = sums[k] / counts[k]
                labels[i] = k
                continue
        centers[n] = sums[n] = x
        counts[n] = 1
        labels[i] = n
        n += 1

    # running means can drift within radius of each other
    alias = np.arange(n)
    live = np.ones(n, dtype=bool)
    merged = True
    while merged:
        merged = False
        for a in range(n):
            while live[a]:
                later = np.flatnonzero(live & (np.arange(n) > a))
                if later.size == 0:
                    break
                close = later[np.linalg.norm(centers[later] - centers[a], axis=1) <= radius]
                if close.size == 0:
                    break
                b = int(close[0])
                sums[a] += sums[b]
                counts[a] += counts[b]
                centers[a] = sums[a] / counts[a]
                live[b] = False
                alias[alias == b] = a
                merged = True

    final = alias[labels]
    order = np.argsort(final, kind="stable")
    bounds = np.flatnonzero(np.diff(final[order])) + 1
    clusters = []
    unassigned = 0
    for group in np.split(order, bounds):
        members = points[group]
        center = members.mean(axis=0)
        gaps = np.linalg.norm(members - center, axis=1)
        kept = gaps <= radius
        unassigned += int((~kept).sum())
        if kept.any():
            clusters.append(Cluster(center=center, count=int(kept.sum()), radius=float(gaps[kept].max())))
    logger.info(f"Clustered {len(points)} points into {len(clusters)} clusters "
                f"(radius={radius}, unassigned={unassigned})")
    return ClusterSet(clusters=clusters, unassigned=unassigned)


# ---------------------------------------------------------------------------
# Box counting


def count_boxes(points: np.ndarray, eps: float) -> int:
    """Occupied half-open boxes [k eps, (k+1) eps)^4"""
    if len(points) == 0:
        return 0
    cells = np.floor(points / eps).astype(np.int64)
    cells -= cells.min(axis=0)
    extents = cells.max(axis=0) + 1
    if float(np.prod(extents.astype(float))) < 2.0 ** 62:
        keys = np.zeros(len(cells), dtype=np.int64)
        for axis in range(cells.shape[1]):
            keys = keys * extents[axis] + cells[:, axis]
        return int(np.unique(keys).size)
    return int(np.unique(cells, axis=0).shape[0])


def box_counting_dimension(cloud: PointCloud, eps_list: Sequence[float] = Config.DEFAULT_SCALES,
                           workers: int = 1) -> DimensionEstimate:
    """Least-squares slope of log N(eps) against log(1/eps)"""
    scales = sorted(float(e) for e in eps_list)
    if len(scales) < 2 or any(e <= 0 for e in scales):
        raise ValueError(f"Need at least two positive scales, got {eps_list}")
    if len(cloud) < Config.MIN_BOX_POINTS:
        logger.warning(f"Only {len(cloud)} points for box counting; fit may be meaningless")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda e: count_boxes(cloud.points, e), scales))
    else:
        counts = [count_boxes(cloud.points, e) for e in scales]

    # scales ascend, so counts must not increase
    for (e_small, n_small), (e_big, n_big) in zip(zip(scales, counts), zip(scales[1:], counts[1:])):
        if n_big > n_small:
            raise InvariantViolationError(
                f"Box counts increase with eps: N({e_small:g})={n_small} < N({e_big:g})={n_big}"
            )

    table = list(zip(scales, counts))
    if len(set(counts)) == 1:
        logger.warning(f"Degenerate box-count fit: N(eps)={counts[0]} at every scale")
        return DimensionEstimate(slope=0.0, r2=0.0, scales=table, degenerate=True)

    x = np.log(1.0 / np.array(scales))
    y = np.log(np.array(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual ** 2)) / ss_tot if ss_tot > 0 else 0.0
    logger.info(f"Box-counting slope {slope:.4f} (r2={r2:.4f}) over {len(scales)} scales")
    return DimensionEstimate(slope=max(float(slope), 0.0), r2=r2, scales=table)


# ---------------------------------------------------------------------------
# Pipeline


def cluster_sample(cloud: PointCloud, limit: int) -> PointCloud:
    """Deterministic stride subsample of at most limit points"""
    if len(cloud) <= limit:
        return cloud
    stride = int(np.ceil(len(cloud) / limit))
    logger.warning(f"Clustering a stride-{stride} subsample of {len(cloud)} points")
    return PointCloud(cloud.points[::stride], dict(cloud.provenance, stride=stride))


def estimate_S(run_config) -> Tuple[ClusterSet, DimensionEstimate, PointCloud]:
    """
    Harvest the accumulation cloud of a scenario, then cluster it and fit
    its box-counting dimension.

    Raises NoAccumulationError when the harvest is empty.
    """
    from orbits import accumulation_samples
    from scenarios import build_inputs

    family, base_points, domain = build_inputs(run_config)
    cloud = accumulation_samples(family, base_points, domain, run_config.threshold,
                                 workers=run_config.workers)
    if cloud.is_empty:
        raise NoAccumulationError(f"{run_config.scenario}: {NO_ACCUMULATION}")

    clusters = cluster(cluster_sample(cloud, run_config.cluster_max_points), run_config.cluster_radius)
    dimension = box_counting_dimension(cloud, run_config.scales, workers=run_config.workers)
    logger.info(f"{run_config.scenario}: {len(cloud)} points, {len(clusters)} clusters, "
                f"dimension {dimension.slope:.3f}")
    return clusters, dimension, cloud

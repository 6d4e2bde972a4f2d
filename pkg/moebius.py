"""
moebius.py
Projective matrix representations of disc, ball and bidisc automorphisms,
the Cayley transform to the Siegel half-space and translation detection
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import Config

logger = logging.getLogger(__name__)


class DomainParameterError(ValueError):
    """Raised when a map or point parameter lies outside its admissible range"""
    pass


class InvariantViolationError(RuntimeError):
    """Raised when an internal numerical invariant breaks"""
    pass


@dataclass(frozen=True)
class CPoint2:
    """Point (z1, z2) of C^2"""
    z1: complex
    z2: complex

    def __post_init__(self):
        z1, z2 = complex(self.z1), complex(self.z2)
        if not (cmath.isfinite(z1) and cmath.isfinite(z2)):
            raise DomainParameterError(f"Non-finite coordinates: ({z1}, {z2})")
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "z2", z2)

    @classmethod
    def from_array(cls, values: Sequence[complex]) -> "CPoint2":
        return cls(values[0], values[1])

    @classmethod
    def from_reals(cls, values: Sequence[float]) -> "CPoint2":
        """Build from (re1, im1, re2, im2); two values mean real z1, z2"""
        if len(values) == 2:
            return cls(complex(values[0]), complex(values[1]))
        if len(values) == 4:
            return cls(complex(values[0], values[1]), complex(values[2], values[3]))
        raise DomainParameterError(f"Expected 2 or 4 coordinates, got {len(values)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.z1, self.z2], dtype=complex)

    def as_reals(self) -> Tuple[float, float, float, float]:
        return (self.z1.real, self.z1.imag, self.z2.real, self.z2.imag)

    def norm(self) -> float:
        return math.hypot(abs(self.z1), abs(self.z2))

    def distance(self, other: "CPoint2") -> float:
        return math.hypot(abs(self.z1 - other.z1), abs(self.z2 - other.z2))


def as_point_array(points) -> np.ndarray:
    """Coerce a CPoint2, a sequence of them or an (N, 2) array to an (N, 2) complex array"""
    if isinstance(points, CPoint2):
        return points.as_array()[None, :]
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=complex)
    else:
        items = list(points)
        if items and isinstance(items[0], CPoint2):
            arr = np.array([[p.z1, p.z2] for p in items], dtype=complex)
        else:
            arr = np.asarray(items, dtype=complex)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainParameterError(f"Expected points of shape (N, 2), got {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# Projective normalization


# Products are renormalized by their peak only past this size
_PEAK_LIMIT = 1e100


def _canonical(m: np.ndarray, unit_det: bool = False) -> np.ndarray:
    """
    Scale a projective matrix to |det| = 1 with a real positive corner entry.

    Matrices built from outside are scaled through their determinant, which
    must not vanish. Products and inverses of automorphisms inherit |det| = 1
    from their factors (unit_det=True) and are only divided by their peak
    entry once it leaves (1/_PEAK_LIMIT, _PEAK_LIMIT); high powers are
    numerically rank one, so their determinant carries no usable scale.
    """
    n = m.shape[0]
    if not np.all(np.isfinite(m)):
        raise InvariantViolationError("Non-finite matrix entries")
    peak = np.max(np.abs(m))
    if peak == 0.0:
        raise InvariantViolationError("Zero matrix has no projective action")

    if unit_det:
        if not 1.0 / _PEAK_LIMIT < peak < _PEAK_LIMIT:
            logger.debug(f"Renormalizing product with peak entry {peak:.3g}")
            m = m / peak
    else:
        m = m / peak
        sign, logdet = np.linalg.slogdet(m)
        if sign == 0 or not np.isfinite(logdet):
            raise InvariantViolationError("Singular matrix has no projective action")
        scaled = m * math.exp(-logdet / n)
        if np.all(np.isfinite(scaled)):
            m = scaled
        else:
            logger.debug("Unit-determinant scaling overflowed; keeping peak normalization")

    corner = m[-1, -1]
    if abs(corner) > 0.0:
        m = m * (abs(corner) / corner)
    return m


def _from_product(cls, m: np.ndarray):
    """Wrap a product or inverse of automorphism matrices without rescaling by its determinant"""
    obj = object.__new__(cls)
    object.__setattr__(obj, "m", _frozen(_canonical(np.asarray(m, dtype=complex), unit_det=True)))
    return obj


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


# ---------------------------------------------------------------------------
# Map types


@dataclass(frozen=True, eq=False)
class DiscMap:
    """Automorphism of the unit disc as a 2x2 matrix on [zeta, 1]"""
    m: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.m, dtype=complex)
        if matrix.shape != (2, 2):
            raise DomainParameterError(f"DiscMap needs a 2x2 matrix, got {matrix.shape}")
        object.__setattr__(self, "m", _frozen(_canonical(matrix)))

    @classmethod
    def identity(cls) -> "DiscMap":
        return cls(np.eye(2))

    def __call__(self, zeta):
        (a, b), (c, d) = self.m
        return (a * zeta + b) / (c * zeta + d)

    def derivative(self, zeta):
        (a, b), (c, d) = self.m
        return (a * d - b * c) / (c * zeta + d) ** 2

    def compose(self, other: "DiscMap") -> "DiscMap":
        return _from_product(DiscMap, self.m @ other.m)

    def inverse(self) -> "DiscMap":
        (a, b), (c, d) = self.m
        return _from_product(DiscMap, np.array([[d, -b], [-c, a]]))


@dataclass(frozen=True, eq=False)
class BallMap:
    """Automorphism of the unit ball acting projectively on [z1, z2, 1]"""
    m: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.m, dtype=complex)
        if matrix.shape != (3, 3):
            raise DomainParameterError(f"BallMap needs a 3x3 matrix, got {matrix.shape}")
        object.__setattr__(self, "m", _frozen(_canonical(matrix)))

    @classmethod
    def identity(cls) -> "BallMap":
        return cls(np.eye(3))

    def __call__(self, p: CPoint2) -> CPoint2:
        return CPoint2.from_array(self.apply_array(p.as_array()[None, :])[0])

    def apply_array(self, z: np.ndarray) -> np.ndarray:
        homogeneous = z @ self.m[:, :2].T + self.m[:, 2]
        return homogeneous[:, :2] / homogeneous[:, 2:3]

    def compose(self, other: "BallMap") -> "BallMap":
        return _from_product(BallMap, self.m @ other.m)

    def inverse(self) -> "BallMap":
        return _from_product(BallMap, np.linalg.inv(self.m))

    def z1_driver(self) -> DiscMap:
        """Disc map followed by z1 when the first coordinate evolves on its own"""
        if abs(self.m[0, 1]) > Config.MATRIX_TOL or abs(self.m[2, 1]) > Config.MATRIX_TOL:
            raise DomainParameterError("z1 is coupled to z2 under this map")
        return DiscMap(self.m[np.ix_([0, 2], [0, 2])])


@dataclass(frozen=True, eq=False)
class BidiscMap:
    """Automorphism of the bidisc: optional coordinate swap, then one disc map per factor"""
    first: DiscMap
    second: DiscMap
    swap: bool = False

    @classmethod
    def identity(cls) -> "BidiscMap":
        return cls(DiscMap.identity(), DiscMap.identity(), False)

    def __call__(self, p: CPoint2) -> CPoint2:
        return CPoint2.from_array(self.apply_array(p.as_array()[None, :])[0])

    def apply_array(self, z: np.ndarray) -> np.ndarray:
        if self.swap:
            z = z[:, ::-1]
        return np.stack([self.first(z[:, 0]), self.second(z[:, 1])], axis=1)

    def compose(self, other: "BidiscMap") -> "BidiscMap":
        if self.swap:
            first, second = self.first.compose(other.second), self.second.compose(other.first)
        else:
            first, second = self.first.compose(other.first), self.second.compose(other.second)
        return BidiscMap(first, second, self.swap != other.swap)

    def inverse(self) -> "BidiscMap":
        if self.swap:
            return BidiscMap(self.second.inverse(), self.first.inverse(), True)
        return BidiscMap(self.first.inverse(), self.second.inverse(), False)

    def z1_driver(self) -> DiscMap:
        if self.swap:
            raise DomainParameterError("z1 is exchanged with z2 under this map")
        return self.first


Map = Union[DiscMap, BallMap, BidiscMap]


def compose(f: Map, g: Map) -> Map:
    """f after g"""
    if type(f) is not type(g):
        raise DomainParameterError(f"Cannot compose {type(f).__name__} with {type(g).__name__}")
    return f.compose(g)


def inverse(f: Map) -> Map:
    return f.inverse()


def power(f: Map, j: int) -> Map:
    """j-fold composition by exponentiation by squaring; negative j uses the inverse"""
    j = int(j)
    result = f.identity()
    if j == 0:
        return result
    base = f if j > 0 else f.inverse()
    n = abs(j)
    while True:
        if n & 1:
            result = result.compose(base)
        n >>= 1
        if not n:
            break
        base = base.compose(base)
    return result


# ---------------------------------------------------------------------------
# Named maps


def disc_mobius(a: complex, theta: float = 0.0) -> DiscMap:
    """zeta -> e^{i theta} (zeta - a) / (1 - conj(a) zeta)"""
    a = complex(a)
    if not abs(a) < 1:
        raise DomainParameterError(f"Disc Mobius parameter must satisfy |a| < 1, got {a}")
    rot = cmath.exp(1j * theta)
    return DiscMap(np.array([[rot, -rot * a], [-a.conjugate(), 1.0]]))


LAMBDA_SHIFT = -0.2


def lambda_map() -> DiscMap:
    """zeta -> (zeta + 1/5) / (1 + zeta/5)"""
    return disc_mobius(LAMBDA_SHIFT, 0.0)


def hyperbolic_generator() -> BallMap:
    """
    Hyperbolic ball automorphism
    (z1, z2) -> ((z1 - 1/5)/(1 - z1/5), sqrt(24)/5 * z2/(1 - z1/5)).

    Attracting boundary fixed point (-1, 0), repelling (1, 0), multiplier 2/3.
    """
    s = math.sqrt(24.0) / 5.0
    return BallMap(np.array([[1.0, 0.0, -0.2],
                             [0.0, s, 0.0],
                             [-0.2, 0.0, 1.0]]))


def hyperbolic_closed_form(p: CPoint2) -> CPoint2:
    """Pointwise formula of hyperbolic_generator, kept as an oracle"""
    denom = 1 - p.z1 / 5
    return CPoint2((p.z1 - 0.2) / denom, math.sqrt(1 - 0.04) * p.z2 / denom)


def parabolic_family(j: int) -> BallMap:
    """
    j-th member of the parabolic cyclic family with boundary fixed point (-1, 0):
    z1 -> ((2i - j) z1 - j) / (j z1 + j + 2i),  z2 -> 2i z2 / (j z1 + j + 2i).

    The matrix is 2i*I + j*N with N nilpotent, so the group law is exact.
    """
    n = int(j)
    return BallMap(np.array([[2j - n, 0.0, -n],
                             [0.0, 2j, 0.0],
                             [n, 0.0, n + 2j]]))


def parabolic_closed_form(j: int, p: CPoint2) -> CPoint2:
    """Factored pointwise formula of parabolic_family, kept as an oracle"""
    n = int(j)
    if n == 0:
        return p
    denom = 1 + p.z1 * n / (n + 2j)
    z1 = (2j - n) / (2j + n) * (p.z1 + n / (n - 2j)) / denom
    z2 = (2j * p.z2 / (n + 2j)) / denom
    return CPoint2(z1, z2)


def psi(j: int, a: complex) -> BidiscMap:
    """(lambda^j(z1), rho_a^j(z2)) with rho_a = disc_mobius(a, 0), a != 0"""
    if a == 0:
        raise DomainParameterError("psi needs a nontrivial disc automorphism (a != 0)")
    return BidiscMap(power(lambda_map(), j), power(disc_mobius(a, 0.0), j))


def mu(j: int) -> BidiscMap:
    """(lambda^j(z1), z2)"""
    return BidiscMap(power(lambda_map(), j), DiscMap.identity())


def lambda_pair() -> BidiscMap:
    """(lambda(z1), lambda(z2))"""
    lam = lambda_map()
    return BidiscMap(lam, lam)


def boundary_fixed_points(f: DiscMap) -> List[complex]:
    """Fixed points of a disc automorphism, roots of c z^2 + (d - a) z - b = 0"""
    (a, b), (c, d) = f.m
    if abs(c) < Config.MATRIX_TOL:
        if abs(d - a) < Config.MATRIX_TOL:
            return []
        return [b / (d - a)]
    roots = np.roots([c, d - a, -b])
    return [complex(r) for r in roots]


# ---------------------------------------------------------------------------
# Cayley transform


@dataclass(frozen=True)
class SiegelPoint:
    """Point (w1, w2) of C^2; inside the Siegel half-space when Im w1 > |w2|^2"""
    w1: complex
    w2: complex

    def in_siegel(self) -> bool:
        return self.w1.imag - abs(self.w2) ** 2 > 0


def cayley_to_siegel(p: CPoint2) -> SiegelPoint:
    """w1 = i(1 - z1)/(1 + z1), w2 = z2/(1 + z1); sends (-1, 0) to infinity"""
    denom = 1 + p.z1
    if abs(denom) < Config.MATRIX_TOL:
        raise DomainParameterError(f"Cayley transform pole at z1 = -1 ({p})")
    return SiegelPoint(1j * (1 - p.z1) / denom, p.z2 / denom)


def siegel_to_ball(w: SiegelPoint) -> CPoint2:
    """Inverse Cayley transform: z1 = (i - w1)/(i + w1), z2 = 2i w2/(i + w1)"""
    denom = 1j + w.w1
    if abs(denom) < Config.MATRIX_TOL:
        raise DomainParameterError(f"Inverse Cayley transform pole at w1 = -i ({w})")
    return CPoint2((1j - w.w1) / denom, 2j * w.w2 / denom)


def default_probe_grid() -> List[SiegelPoint]:
    """25 points of the Siegel half-space spread over Re w1 and height"""
    probes = []
    idx = 0
    for x in (-1.0, -0.5, 0.0, 0.5, 1.0):
        for h in (0.25, 0.5, 1.0, 2.0, 4.0):
            w2 = 0.25 * cmath.exp(1j * idx) * (idx % 2)
            probes.append(SiegelPoint(complex(x, h + abs(w2) ** 2), w2))
            idx += 1
    return probes


@dataclass
class TranslationFit:
    """Outcome of fitting (w1, w2) -> (w1 + t j, w2) to a conjugated family"""
    success: bool
    t: float
    max_deviation: float
    tolerance: float


def detect_translation(
    family: Callable[[int], BallMap],
    j_values: Iterable[int] = range(-10, 11),
    probes: Optional[Sequence[SiegelPoint]] = None,
    tol: float = Config.TRANSLATION_TOL
) -> TranslationFit:
    """
    Fit the Siegel conjugate of family(j) to a real translation in w1.

    Returns a failed fit, with the largest deviation, when no translation
    reproduces the conjugated maps within tol.
    """
    probes = list(probes) if probes is not None else default_probe_grid()
    js = [int(j) for j in j_values]
    shifts = []
    for j in js:
        f = family(j)
        for w in probes:
            image = cayley_to_siegel(f(siegel_to_ball(w)))
            shifts.append((j, image.w1 - w.w1, image.w2 - w.w2))

    denom = sum(j * j for j, _, _ in shifts)
    t = sum(j * d1.real for j, d1, _ in shifts) / denom if denom else 0.0
    deviation = max(max(abs(d1 - t * j), abs(d2)) for j, d1, d2 in shifts)
    success = deviation < tol
    if success:
        logger.info(f"Siegel translation detected: t={t:.12g}, deviation={deviation:.3e}")
    else:
        logger.info(f"No Siegel translation fits (deviation={deviation:.3e} > {tol:.1e})")
    return TranslationFit(success=success, t=t, max_deviation=float(deviation), tolerance=tol)


# ---------------------------------------------------------------------------
# Stacked disc matrices, used for vectorized family sweeps


def stacked_disc_mobius(a: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """(n, 2, 2) matrices of disc_mobius(a_k, theta_k)"""
    a = np.asarray(a, dtype=complex)
    if np.any(np.abs(a) >= 1):
        raise DomainParameterError("All disc Mobius parameters must satisfy |a| < 1")
    rot = np.exp(1j * np.asarray(theta, dtype=float))
    mats = np.empty(a.shape + (2, 2), dtype=complex)
    mats[..., 0, 0] = rot
    mats[..., 0, 1] = -rot * a
    mats[..., 1, 0] = -np.conj(a)
    mats[..., 1, 1] = 1.0
    return mats


def _renormalize_stack(mats: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(mats), axis=(-2, -1), keepdims=True)
    return mats / peak


def stacked_power(mats: np.ndarray, j: int) -> np.ndarray:
    """Integer powers of stacked square matrices with renormalization after each multiply"""
    n = mats.shape[-1]
    result = np.broadcast_to(np.eye(n, dtype=complex), mats.shape).copy()
    if j == 0:
        return result
    base = _renormalize_stack(mats if j > 0 else np.linalg.inv(mats))
    k = abs(int(j))
    while True:
        if k & 1:
            result = _renormalize_stack(result @ base)
        k >>= 1
        if not k:
            break
        base = _renormalize_stack(base @ base)
    return result


def apply_stacked_disc(mats: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Apply (n, 2, 2) matrices to zeta broadcast against (n, ...)"""
    extra = (None,) * (np.ndim(zeta) - 1)
    a = mats[(Ellipsis, 0, 0)][(slice(None),) + extra]
    b = mats[(Ellipsis, 0, 1)][(slice(None),) + extra]
    c = mats[(Ellipsis, 1, 0)][(slice(None),) + extra]
    d = mats[(Ellipsis, 1, 1)][(slice(None),) + extra]
    return (a * zeta + b) / (c * zeta + d)

"""
levi.py
Finite-difference complex Hessians, complex tangents and Levi-form
classification of boundary points
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Union

import numpy as np

from config import Config
from domains import ModelDomain
from moebius import CPoint2, DomainParameterError

logger = logging.getLogger(__name__)

DefiningFunction = Union[Callable[[CPoint2], float], ModelDomain]


class DegenerateDefiningFunctionError(ValueError):
    """Raised when the defining function has vanishing gradient at a point"""
    pass


class NonFiniteSampleError(ArithmeticError):
    """Raised when a stencil evaluation is not finite"""
    pass


class BoundaryClass(Enum):
    STRONGLY_PSEUDOCONVEX = "strongly_pseudoconvex"
    LEVI_DEGENERATE = "levi_degenerate"
    NOT_PSEUDOCONVEX = "not_pseudoconvex"
    NON_SMOOTH = "non_smooth"


@dataclass
class HermitianForm:
    h: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.h)

    def is_hermitian(self, tol: float = Config.MATRIX_TOL) -> bool:
        return bool(np.max(np.abs(self.h - self.h.conj().T)) <= tol)


@dataclass
class BoundaryClassification:
    boundary_class: BoundaryClass
    levi_value: float

    def to_dict(self, p: CPoint2) -> dict:
        return {
            "point": [round(x, 12) for x in p.as_reals()],
            "class": self.boundary_class.value,
            "levi_value": None if np.isnan(self.levi_value) else round(float(self.levi_value), 9),
        }


def _sampler(f: DefiningFunction, p: CPoint2) -> Callable[[np.ndarray], float]:
    """f as a function of the real offset (dx1, dy1, dx2, dy2) from p"""
    def sample(offset: np.ndarray) -> float:
        q = CPoint2(complex(p.z1.real + offset[0], p.z1.imag + offset[1]),
                    complex(p.z2.real + offset[2], p.z2.imag + offset[3]))
        value = float(f(q))
        if not np.isfinite(value):
            raise NonFiniteSampleError(f"Non-finite defining value at stencil point {q}")
        return value
    return sample


def real_hessian(f: DefiningFunction, p: CPoint2, h: float = Config.HESSIAN_STEP) -> np.ndarray:
    """4x4 central-difference Hessian in (x1, y1, x2, y2)"""
    sample = _sampler(f, p)
    eye = np.eye(4) * h
    f0 = sample(np.zeros(4))
    hess = np.empty((4, 4))
    for a in range(4):
        hess[a, a] = (sample(eye[a]) - 2.0 * f0 + sample(-eye[a])) / h ** 2
        for b in range(a + 1, 4):
            value = (sample(eye[a] + eye[b]) - sample(eye[a] - eye[b])
                     - sample(-eye[a] + eye[b]) + sample(-eye[a] - eye[b])) / (4.0 * h ** 2)
            hess[a, b] = hess[b, a] = value
    return hess


def complex_hessian(f: DefiningFunction, p: CPoint2, h: float = Config.HESSIAN_STEP) -> HermitianForm:
    """d^2 f / dz_j dzbar_k from the real Hessian, symmetrized"""
    r = real_hessian(f, p, h)
    x, y = [0, 2], [1, 3]
    hc = np.empty((2, 2), dtype=complex)
    for j in range(2):
        for k in range(2):
            hc[j, k] = 0.25 * (r[x[j], x[k]] + r[y[j], y[k]] + 1j * (r[x[j], y[k]] - r[y[j], x[k]]))
    return HermitianForm(0.5 * (hc + hc.conj().T))


def complex_gradient(f: DefiningFunction, p: CPoint2, h: float = Config.HESSIAN_STEP) -> np.ndarray:
    """(df/dz1, df/dz2) with df/dz = (f_x - i f_y) / 2"""
    sample = _sampler(f, p)
    eye = np.eye(4) * h
    d = [(sample(eye[a]) - sample(-eye[a])) / (2.0 * h) for a in range(4)]
    return 0.5 * np.array([d[0] - 1j * d[1], d[2] - 1j * d[3]])


def complex_tangent(f: DefiningFunction, p: CPoint2, h: float = Config.HESSIAN_STEP) -> np.ndarray:
    """Unit v with df/dz1 v1 + df/dz2 v2 = 0"""
    grad = complex_gradient(f, p, h)
    size = np.linalg.norm(grad)
    if size < Config.MATRIX_TOL:
        raise DegenerateDefiningFunctionError(f"Gradient vanishes at {p}")
    v = np.array([-grad[1], grad[0]])
    return v / np.linalg.norm(v)


def classify_boundary(f: DefiningFunction, p: CPoint2, tau: float = Config.LEVI_TOL,
                      h: float = Config.HESSIAN_STEP) -> BoundaryClassification:
    """Sign of the Levi form v^T H conj(v) on the complex tangent, up to tau"""
    if isinstance(f, ModelDomain) and not f.is_smooth_at(p):
        return BoundaryClassification(BoundaryClass.NON_SMOOTH, float("nan"))
    value = float(f(p))
    if abs(value) >= 1e-6:
        raise DomainParameterError(f"{p} is not on the boundary (f = {value:.3e})")

    hess = complex_hessian(f, p, h)
    v = complex_tangent(f, p, h)
    levi_value = float(np.real(v @ hess.h @ v.conj()))
    if levi_value > tau:
        cls = BoundaryClass.STRONGLY_PSEUDOCONVEX
    elif levi_value < -tau:
        cls = BoundaryClass.NOT_PSEUDOCONVEX
    else:
        cls = BoundaryClass.LEVI_DEGENERATE
    logger.debug(f"Levi value {levi_value:.6f} at {p}: {cls.value}")
    return BoundaryClassification(cls, levi_value)


def classify_many(f: DefiningFunction, points: List[CPoint2], tau: float = Config.LEVI_TOL) -> List[BoundaryClassification]:
    results = [classify_boundary(f, p, tau) for p in points]
    tally = {}
    for r in results:
        tally[r.boundary_class.value] = tally.get(r.boundary_class.value, 0) + 1
    logger.info(f"Classified {len(points)} boundary points: {tally}")
    return results

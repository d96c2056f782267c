"""Array aperture geometry: SAAF, special arrays, diameter and classification.

The squared array aperture function (SAAF) G(theta) is the effective squared
aperture an array presents to a plane wave from incident angle theta (body
frame); it fully determines the array's direction information. Uniformly
oriented arrays (UOA) have constant G; circular UOAs (UCOA) additionally
maximize the orientation-averaged SAAF at fixed diameter.
"""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .model import AntennaArray


class ArrayClass(enum.Enum):
    NOT_UOA = "not-UOA"
    UOA = "UOA"
    UCOA = "UCOA"


def ula(n_antennas: int, diameter: float) -> AntennaArray:
    """Uniform linear array: n equispaced elements spanning ``diameter``."""
    if n_antennas < 2:
        raise ValueError("a ULA needs at least 2 elements")
    k = np.arange(1, n_antennas + 1)
    offsets = diameter / (n_antennas - 1) * (k - (n_antennas + 1) / 2.0)
    radii = tuple(abs(float(o)) for o in offsets)
    angles = tuple(0.0 if o >= 0 else math.pi for o in offsets)
    return AntennaArray(radii, angles)


def uca(n_antennas: int, diameter: float) -> AntennaArray:
    """Uniform circular array: a regular n-gon of circumdiameter ``diameter``."""
    if n_antennas < 3:
        raise ValueError("a UCA needs at least 3 elements")
    radii = tuple(diameter / 2.0 for _ in range(n_antennas))
    angles = tuple(2.0 * math.pi * k / n_antennas for k in range(n_antennas))
    return AntennaArray(radii, angles)


@dataclass(frozen=True)
class ArraySpec:
    """An array plus the construction it came from ('ula', 'uca' or 'custom')."""

    kind: str
    realized: AntennaArray

    @classmethod
    def make_ula(cls, n_antennas: int, diameter: float) -> "ArraySpec":
        return cls("ula", ula(n_antennas, diameter))

    @classmethod
    def make_uca(cls, n_antennas: int, diameter: float) -> "ArraySpec":
        return cls("uca", uca(n_antennas, diameter))

    @classmethod
    def custom(cls, array: AntennaArray) -> "ArraySpec":
        return cls("custom", array)


def _centered_moments(array: AntennaArray) -> Tuple[float, float, float]:
    """Centered second moments (var_x, var_y, cov_xy) of element coordinates."""
    pts = array.body_offsets()
    centered = pts - pts.mean(axis=0)
    n = len(pts)
    var_x = float(np.dot(centered[:, 0], centered[:, 0])) / n
    var_y = float(np.dot(centered[:, 1], centered[:, 1])) / n
    cov = float(np.dot(centered[:, 0], centered[:, 1])) / n
    return var_x, var_y, cov


def saaf(array: AntennaArray, theta) -> np.ndarray | float:
    """SAAF via the centered-moment form; accepts scalar or vector theta.

    Equals the pairwise definition
    (1/N^2) * sum_{k<l} (d_k sin(theta - psi_k) - d_l sin(theta - psi_l))^2
    because the pair sum is the variance of d_k sin(theta - psi_k), which the
    second moments express directly. Independent of the reference point.
    """
    var_x, var_y, cov = _centered_moments(array)
    th = np.asarray(theta, dtype=float)
    out = var_x * np.sin(th) ** 2 + var_y * np.cos(th) ** 2 - cov * np.sin(2.0 * th)
    return out if out.ndim else float(out)


def saaf_pair_sum(array: AntennaArray, theta: float) -> float:
    """Brute-force pairwise SAAF evaluation; reference implementation for tests."""
    d = np.asarray(array.radii)
    psi = np.asarray(array.angles)
    a = d * np.sin(theta - psi)
    n = len(a)
    total = 0.0
    for k in range(n):
        for l in range(k + 1, n):
            total += (a[k] - a[l]) ** 2
    return total / n**2


def saaf_ula(n_antennas: int, diameter: float, theta) -> np.ndarray | float:
    """Closed-form ULA SAAF: (N+1)/(12(N-1)) * D^2 * sin^2(theta)."""
    if n_antennas < 2:
        raise ValueError("the ULA closed form needs at least 2 elements")
    coeff = (n_antennas + 1) / (12.0 * (n_antennas - 1)) * diameter**2
    out = coeff * np.sin(np.asarray(theta, dtype=float)) ** 2
    return out if out.ndim else float(out)


def saaf_uca(diameter: float) -> float:
    """Closed-form UCA SAAF D^2/8, independent of the incident angle."""
    if diameter < 0:
        raise ValueError("diameter must be >= 0")
    return diameter**2 / 8.0


def average_saaf(array: AntennaArray) -> float:
    """Orientation average of the SAAF: (var_x + var_y)/2.

    Never exceeds diameter^2/8, with equality for UCOAs (and the 2-element
    line, whose enclosing circle passes through both elements).
    """
    var_x, var_y, _ = _centered_moments(array)
    return 0.5 * (var_x + var_y)


def classify_uoa(array: AntennaArray, rel_tol: float = 1e-12) -> ArrayClass:
    """Classify by the balance of centered second moments.

    UOA requires cov_xy == 0 and var_x == var_y (within ``rel_tol`` of the
    largest moment); UCOA additionally requires every element equidistant
    from the coordinate centroid.
    """
    if array.n_antennas < 2:
        return ArrayClass.NOT_UOA
    var_x, var_y, cov = _centered_moments(array)
    scale = max(var_x, var_y)
    if scale == 0.0:
        return ArrayClass.NOT_UOA
    tol = rel_tol * scale
    if abs(cov) > tol or abs(var_x - var_y) > tol:
        return ArrayClass.NOT_UOA
    pts = array.body_offsets()
    dist = np.linalg.norm(pts - pts.mean(axis=0), axis=1)
    if dist.max() - dist.min() <= 1e-9 * dist.max():
        return ArrayClass.UCOA
    return ArrayClass.UOA


def is_uoa(array: AntennaArray) -> bool:
    """True for UOAs, including the circular special case."""
    return classify_uoa(array) in (ArrayClass.UOA, ArrayClass.UCOA)


def diameter(array: AntennaArray) -> float:
    """Diameter of the minimum enclosing circle of the element positions.

    Pose-independent; computed with Welzl's incremental method rather than a
    centroid-circle approximation, since the definition minimizes over the
    circle center.
    """
    pts = array.body_offsets()
    _, _, r = minimum_enclosing_circle(pts)
    return 2.0 * r


# ---------------------------------------------------------------------------
# Minimum enclosing circle (Welzl-style incremental construction)
# ---------------------------------------------------------------------------


def minimum_enclosing_circle(points: Iterable[Sequence[float]]) -> Tuple[float, float, float]:
    """Smallest circle (cx, cy, r) covering the points; expected linear time."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if not pts:
        raise ValueError("need at least one point")
    rng = random.Random(0x5EED)
    shuffled = pts[:]
    rng.shuffle(shuffled)

    circle: Optional[Tuple[float, float, float]] = None
    for i, p in enumerate(shuffled):
        if circle is None or not _in_circle(circle, p):
            circle = _circle_with_one_boundary(shuffled[: i + 1], p)
    assert circle is not None
    return circle


def _circle_with_one_boundary(points, p) -> Tuple[float, float, float]:
    circle = (p[0], p[1], 0.0)
    for i, q in enumerate(points):
        if not _in_circle(circle, q):
            if circle[2] == 0.0:
                circle = _circle_from_two(p, q)
            else:
                circle = _circle_with_two_boundary(points[: i + 1], p, q)
    return circle


def _circle_with_two_boundary(points, p, q) -> Tuple[float, float, float]:
    circ = _circle_from_two(p, q)
    left: Optional[Tuple[float, float, float]] = None
    right: Optional[Tuple[float, float, float]] = None
    px, py = p
    qx, qy = q
    for r in points:
        if _in_circle(circ, r):
            continue
        cross = _cross(px, py, qx, qy, r[0], r[1])
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        d = _cross(px, py, qx, qy, c[0], c[1])
        if cross > 0.0 and (left is None or d > _cross(px, py, qx, qy, left[0], left[1])):
            left = c
        elif cross < 0.0 and (right is None or d < _cross(px, py, qx, qy, right[0], right[1])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right  # type: ignore[return-value]
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_from_two(a, b) -> Tuple[float, float, float]:
    cx = (a[0] + b[0]) / 2.0
    cy = (a[1] + b[1]) / 2.0
    r = max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1]))
    return (cx, cy, r)


def _circumcircle(a, b, c) -> Optional[Tuple[float, float, float]]:
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2.0
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2.0
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0
    if d == 0.0:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    r = max(math.hypot(x - a[0], y - a[1]), math.hypot(x - b[0], y - b[1]), math.hypot(x - c[0], y - c[1]))
    return (x, y, r)


def _in_circle(circle, p) -> bool:
    return math.hypot(p[0] - circle[0], p[1] - circle[1]) <= circle[2] * (1.0 + 1e-14) + 1e-300


def _cross(px, py, qx, qy, rx, ry) -> float:
    return (qx - px) * (ry - py) - (qy - py) * (rx - px)

"""Domain types for anchors, antenna arrays, agent pose/motion and scenarios.

All geometry is 2-D. Angles are stored in radians; bearings follow the
atan2(y - y_j, x - x_j) convention, i.e. the direction pointing from an
anchor toward the agent. Every type is immutable after construction, so
instances can be shared freely across threads and reused between grid
evaluations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - import cycle guard for annotations only
    from .signal import ComplexSampleSeries, SignalSummary

SPEED_OF_LIGHT = 299_792_458.0  # m/s, default propagation speed

TWO_PI = 2.0 * math.pi


class DegenerateGeometryError(ValueError):
    """Raised when a geometric quantity is undefined (e.g. coincident points)."""


def wrap_angle(angle: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    return float(angle) % TWO_PI


@dataclass(frozen=True)
class Position2D:
    """A point in the plane, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position components must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class AntennaArray:
    """Rigid antenna array given as polar offsets about a reference point.

    ``radii[k]`` is the distance d_k (m) of element k from the reference
    point and ``angles[k]`` the element direction psi_k (rad) measured in
    the body frame (i.e. relative to the array orientation).
    """

    radii: Tuple[float, ...]
    angles: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.radii) != len(self.angles):
            raise ValueError("radii and angles must have the same length")
        if len(self.radii) < 1:
            raise ValueError("an array needs at least one element")
        for d in self.radii:
            if not math.isfinite(d) or d < 0.0:
                raise ValueError(f"element radius must be finite and >= 0, got {d}")

    @classmethod
    def from_elements(cls, elements: Sequence[Tuple[float, float]]) -> "AntennaArray":
        """Build from an iterable of (d_k, psi_k) pairs."""
        radii = tuple(float(d) for d, _ in elements)
        angles = tuple(float(a) for _, a in elements)
        return cls(radii, angles)

    @property
    def n_antennas(self) -> int:
        return len(self.radii)

    def body_offsets(self) -> np.ndarray:
        """Element coordinates in the body frame, shape (N_a, 2)."""
        d = np.asarray(self.radii, dtype=float)
        a = np.asarray(self.angles, dtype=float)
        return np.column_stack((d * np.cos(a), d * np.sin(a)))


@dataclass(frozen=True)
class ArrayPose:
    """Reference-point position plus array orientation (rad, wrapped to [0, 2*pi))."""

    reference: Position2D
    orientation: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "orientation", wrap_angle(self.orientation))


@dataclass(frozen=True)
class AgentMotion:
    """Constant-velocity agent motion.

    ``reference_time`` is the instant at which the pose reference point is
    taken; positions at other times follow by linear extrapolation.
    """

    speed: float
    direction: float
    reference_time: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.speed) or self.speed < 0.0:
            raise ValueError(f"speed must be finite and >= 0, got {self.speed}")

    def velocity(self) -> np.ndarray:
        return self.speed * np.array([math.cos(self.direction), math.sin(self.direction)])


@dataclass(frozen=True)
class PathComponent:
    """One multipath component: gain, extra travel distance and arrival-angle bias."""

    amplitude: float
    range_bias: float = 0.0
    angle_bias: float = 0.0

    def __post_init__(self) -> None:
        if self.range_bias < 0.0:
            raise ValueError(f"range bias must be >= 0, got {self.range_bias}")
        if not -math.pi <= self.angle_bias <= math.pi:
            raise ValueError(f"angle bias must lie in [-pi, pi], got {self.angle_bias}")


def _default_paths() -> Tuple[PathComponent, ...]:
    return (PathComponent(amplitude=1.0),)


@dataclass(frozen=True)
class AnchorNode:
    """A transmit anchor with known position and first-path channel quality.

    ``snr_first_path`` is a linear power ratio. ``poc`` is the path-overlap
    coefficient in [0, 1]: the fraction of first-path ranging information
    destroyed by overlapping multipath (an input here; see the numerical
    oracle for an operational surrogate). ``paths`` describes the full
    multipath profile and is consumed only by the waveform-level oracle;
    the leading path of a line-of-sight anchor must have zero biases.
    """

    position: Position2D
    snr_first_path: float
    poc: float = 0.0
    los: bool = True
    paths: Tuple[PathComponent, ...] = field(default_factory=_default_paths)

    def __post_init__(self) -> None:
        if not self.snr_first_path > 0.0:
            raise ValueError(f"snr must be > 0, got {self.snr_first_path}")
        if not 0.0 <= self.poc <= 1.0:
            raise ValueError(f"poc must lie in [0, 1], got {self.poc}")
        if len(self.paths) < 1:
            raise ValueError("an anchor needs at least one path")
        first = self.paths[0]
        if self.los and (first.range_bias != 0.0 or first.angle_bias != 0.0):
            raise ValueError("the first path of a LOS anchor must have zero biases")


@dataclass(frozen=True)
class KnowledgeFlags:
    """Which pose/motion parameters the agent knows a priori.

    The carrier phase flag selects between the full-knowledge bound and the
    unknown-phase bounds; direction/speed flags are ignored for static
    scenarios.
    """

    phase_known: bool = False
    orientation_known: bool = True
    direction_known: bool = True
    speed_known: bool = True


@dataclass(frozen=True)
class Scenario:
    """Complete input for a bound computation.

    The propagation speed ``c`` defaults to the vacuum speed of light and is
    overridable so scaled-unit test scenarios stay numerically tractable;
    every bound formula is dimensionally covariant in c. ``waveform`` is the
    sampled baseband signal; it is required by the numerical oracle and by
    the exact-coefficient dynamic bound, while the closed forms only need
    the ``signal`` summary.
    """

    anchors: Tuple[AnchorNode, ...]
    array: AntennaArray
    pose: ArrayPose
    signal: "SignalSummary"
    knowledge: KnowledgeFlags = KnowledgeFlags()
    motion: Optional[AgentMotion] = None
    waveform: Optional["ComplexSampleSeries"] = None
    c: float = SPEED_OF_LIGHT

    def __post_init__(self) -> None:
        if len(self.anchors) < 1:
            raise ValueError("a scenario needs at least one anchor")
        if not self.c > 0.0:
            raise ValueError(f"propagation speed must be > 0, got {self.c}")
        if self.motion is not None and not self.motion.speed < self.c:
            raise ValueError("agent speed must be below the propagation speed")

    @property
    def is_dynamic(self) -> bool:
        return self.motion is not None and self.motion.speed > 0.0

    def los_anchors(self) -> Tuple[AnchorNode, ...]:
        return tuple(a for a in self.anchors if a.los)

    def relative_speed(self) -> float:
        if self.motion is None:
            return 0.0
        return self.motion.speed / self.c


def antenna_position(array: AntennaArray, pose: ArrayPose, k: int) -> Position2D:
    """World position of element ``k`` (0-based): p + d_k*(cos, sin)(psi + psi_k)."""
    if not 0 <= k < array.n_antennas:
        raise IndexError(f"antenna index {k} out of range for {array.n_antennas} elements")
    ang = pose.orientation + array.angles[k]
    d = array.radii[k]
    return Position2D(
        pose.reference.x + d * math.cos(ang),
        pose.reference.y + d * math.sin(ang),
    )


def antenna_positions(array: AntennaArray, pose: ArrayPose) -> np.ndarray:
    """World positions of all elements, shape (N_a, 2)."""
    d = np.asarray(array.radii, dtype=float)
    a = np.asarray(array.angles, dtype=float) + pose.orientation
    return pose.reference.as_array() + np.column_stack((d * np.cos(a), d * np.sin(a)))


def antenna_position_dynamic(
    array: AntennaArray,
    pose: ArrayPose,
    motion: AgentMotion,
    k: int,
    t: float,
) -> Position2D:
    """Element position at time ``t`` under constant-velocity motion."""
    if motion is None:
        raise ValueError("antenna_position_dynamic requires motion")
    static = antenna_position(array, pose, k)
    shift = (t - motion.reference_time) * motion.velocity()
    return Position2D(static.x + shift[0], static.y + shift[1])


def anchor_range_bearing(anchor: Position2D, agent: Position2D) -> Tuple[float, float]:
    """Distance and bearing from an anchor to the agent.

    Returns (D, phi) with D = ||p_anchor - p_agent|| and
    phi = atan2(y - y_anchor, x - x_anchor), the direction pointing from the
    anchor toward the agent. Raises for coincident points.
    """
    dx = agent.x - anchor.x
    dy = agent.y - anchor.y
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        raise DegenerateGeometryError("anchor and agent positions coincide")
    return dist, math.atan2(dy, dx)


def anchor_geometry(scenario: Scenario) -> Tuple[np.ndarray, np.ndarray]:
    """Per-anchor (distances, bearings) arrays relative to the pose reference."""
    agent = scenario.pose.reference
    dist = np.empty(len(scenario.anchors))
    phi = np.empty(len(scenario.anchors))
    for i, anchor in enumerate(scenario.anchors):
        dist[i], phi[i] = anchor_range_bearing(anchor.position, agent)
    return dist, phi


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: a named quantity plus a pass/fail verdict."""

    name: str
    value: float
    ok: bool
    message: str


def validate_scenario(scenario: Scenario) -> list[Diagnostic]:
    """Sanity diagnostics for a scenario; informational, never raises.

    Checks the far-field ratio (array size over anchor distance), the number
    of LOS anchors, the fractional bandwidth and the ambiguity-free element
    spacing (spacing below one carrier wavelength).
    """
    out: list[Diagnostic] = []
    dist, _ = anchor_geometry(scenario)
    max_radius = max(scenario.array.radii)
    far_ratio = max_radius / float(dist.min())
    out.append(
        Diagnostic(
            "far_field_ratio",
            far_ratio,
            far_ratio < 0.05,
            f"max element offset / min anchor distance = {far_ratio:.3g}",
        )
    )

    n_los = len(scenario.los_anchors())
    out.append(
        Diagnostic(
            "los_count",
            float(n_los),
            n_los > 0,
            "no LOS anchors: EFIM will be zero" if n_los == 0 else f"{n_los} LOS anchors",
        )
    )

    fc = scenario.signal.carrier
    band = scenario.signal.band_limit
    nb_ratio = band / fc if fc > 0 else math.inf
    out.append(
        Diagnostic(
            "narrowband_ratio",
            nb_ratio,
            (not scenario.is_dynamic) or nb_ratio < 0.1,
            f"band limit / carrier = {nb_ratio:.3g}",
        )
    )

    if fc > 0:
        wavelength = scenario.c / fc
        spacing = _max_nearest_neighbor_spacing(scenario.array)
        out.append(
            Diagnostic(
                "phase_ambiguity_spacing",
                spacing,
                spacing < wavelength,
                f"largest nearest-neighbor spacing {spacing:.3g} m vs wavelength {wavelength:.3g} m",
            )
        )
    return out


def _max_nearest_neighbor_spacing(array: AntennaArray) -> float:
    pts = array.body_offsets()
    n = len(pts)
    if n < 2:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min(axis=1).max()))

"""Closed-form equivalent Fisher information matrices and position error bounds.

Each bound maps a Scenario to a symmetric PSD information matrix whose
inverse trace over the position entries is the squared position error bound
(SPEB). Static scenarios come in three knowledge levels (phase+orientation
known, orientation known, both unknown); dynamic scenarios add Doppler
information and three more levels. Formulas with unknown carrier phase are
evaluated after an internal spectral recentring so the baseband-carrier
correlation can be taken as zero with an effective carrier.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .arrays import saaf
from .model import (
    AnchorNode,
    AntennaArray,
    AgentMotion,
    ArrayPose,
    Position2D,
    Scenario,
    anchor_range_bearing,
    antenna_positions,
)
from .signal import SignalSummary, balanced_phase_residual, recentre

TWO_PI = 2.0 * math.pi

STATIC_ORIENT_KNOWN_MODES = ("per-antenna", "far-field", "centered")
DYNAMIC_KNOWN_MODES = ("narrowband", "exact")

POSITION_LABELS = ("x", "y")


class SingularNuisanceError(np.linalg.LinAlgError):
    """Raised when a Schur complement would invert a singular nuisance block."""


@dataclass(frozen=True)
class EfimResult:
    """A labeled symmetric PSD information matrix for a parameter subset."""

    matrix: np.ndarray
    labels: Tuple[str, ...]
    scenario_tag: str

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(self.labels):
            raise ValueError("matrix shape must match the label count")
        scale = float(np.abs(m).max())
        if scale > 0 and float(np.abs(m - m.T).max()) > 1e-12 * scale:
            raise ValueError("information matrix must be symmetric")
        m = 0.5 * (m + m.T)
        eigmin = float(np.linalg.eigvalsh(m).min()) if scale > 0 else 0.0
        if eigmin < -1e-9 * max(scale, 1.0):
            raise ValueError(f"information matrix has negative eigenvalue {eigmin}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpebValue:
    """Squared position error bound; infinite when the EFIM is rank deficient."""

    value: float
    rank_deficient: bool = False

    @property
    def root(self) -> float:
        return math.sqrt(self.value) if math.isfinite(self.value) else math.inf


@dataclass(frozen=True)
class IntensityProfile:
    """Per-anchor ranging intensities with the Doppler factor kept separate.

    ``lambdas`` are the static intensities (zero for NLOS anchors) and
    ``doppler_factors`` the motion-induced gains 1/(1 - v_r cos(phi - psi_d)),
    all ones for static scenarios.
    """

    lambdas: np.ndarray
    doppler_factors: np.ndarray

    def folded(self) -> np.ndarray:
        return self.lambdas * self.doppler_factors


def rdm(phi: float) -> np.ndarray:
    """Ranging direction matrix: the rank-one projector onto direction phi."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c * c, c * s], [c * s, s * s]])


def _outer(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v)


def visual_angle(d_k: float, psi_k: float, pose: ArrayPose, anchor: Position2D) -> float:
    """Angle subtended at the anchor between the reference point and element k."""
    dist, phi = anchor_range_bearing(anchor, pose.reference)
    return d_k * math.sin(phi - pose.orientation - psi_k) / dist


def visual_angles(array: AntennaArray, phi: float, dist: float, orientation: float) -> np.ndarray:
    """Vector of visual angles of all elements for one anchor."""
    d = np.asarray(array.radii)
    psi_k = np.asarray(array.angles)
    return d * np.sin(phi - orientation - psi_k) / dist


def intensity(
    anchor: AnchorNode,
    c: float,
    motion: Optional[AgentMotion] = None,
    agent: Optional[Position2D] = None,
) -> float:
    """Ranging information intensity of one anchor, Doppler-folded if moving.

    8*pi^2 * SNR * (1 - poc) / c^2 for LOS anchors, zero otherwise; motion
    multiplies by 1/(1 - v_r cos(phi - psi_d)), which needs the agent
    position to resolve the anchor bearing.
    """
    if not c > 0.0:
        raise ValueError("propagation speed must be positive")
    if not anchor.los:
        return 0.0
    lam = 8.0 * math.pi**2 * anchor.snr_first_path * (1.0 - anchor.poc) / c**2
    if motion is not None and motion.speed > 0.0:
        if agent is None:
            raise ValueError("the Doppler intensity factor needs the agent position")
        _, phi = anchor_range_bearing(anchor.position, agent)
        delta = (motion.speed / c) * math.cos(phi - motion.direction)
        lam /= 1.0 - delta
    return lam


def intensity_profile(scenario: Scenario) -> IntensityProfile:
    lambdas = np.array([intensity(a, scenario.c) for a in scenario.anchors])
    factors = np.ones(len(scenario.anchors))
    if scenario.is_dynamic:
        motion = scenario.motion
        vr = scenario.relative_speed()
        for i, anchor in enumerate(scenario.anchors):
            _, phi = anchor_range_bearing(anchor.position, scenario.pose.reference)
            factors[i] = 1.0 / (1.0 - vr * math.cos(phi - motion.direction))
    return IntensityProfile(lambdas, factors)


@dataclass(frozen=True)
class _Geometry:
    """Cached per-LOS-anchor quantities shared by the bound formulas."""

    dist: np.ndarray
    phi: np.ndarray
    lambdas: np.ndarray
    doppler: np.ndarray
    theta_v: np.ndarray  # (n_los, n_antennas) visual angles
    g_saaf: np.ndarray  # SAAF at phi_j - psi


def _los_geometry(scenario: Scenario) -> _Geometry:
    agent = scenario.pose.reference
    orientation = scenario.pose.orientation
    los = scenario.los_anchors()
    if not los:
        warnings.warn("no LOS anchors: the localization information is zero")
    dist = np.empty(len(los))
    phi = np.empty(len(los))
    lambdas = np.empty(len(los))
    doppler = np.ones(len(los))
    vr = scenario.relative_speed()
    for i, anchor in enumerate(los):
        dist[i], phi[i] = anchor_range_bearing(anchor.position, agent)
        lambdas[i] = intensity(anchor, scenario.c)
        if scenario.is_dynamic:
            doppler[i] = 1.0 / (1.0 - vr * math.cos(phi[i] - scenario.motion.direction))
    theta_v = np.stack(
        [visual_angles(scenario.array, phi[i], dist[i], orientation) for i in range(len(los))]
    ) if los else np.zeros((0, scenario.array.n_antennas))
    g = np.asarray(saaf(scenario.array, phi - orientation), dtype=float).reshape(len(los))
    return _Geometry(dist, phi, lambdas, doppler, theta_v, g)


def _zero_result(labels: Tuple[str, ...], tag: str) -> EfimResult:
    return EfimResult(np.zeros((len(labels), len(labels))), labels, tag)


def efim_static_full(scenario: Scenario) -> EfimResult:
    """Position EFIM with both carrier phase and orientation known.

    Weighted sum of rank-one direction matrices over every anchor-antenna
    pair; the full signal bandwidth (baseband plus carrier, including the
    BCC cross term) contributes, so this uses the raw signal summary.
    """
    geo = _los_geometry(scenario)
    sig = scenario.signal
    coeff = sig.beta**2 + sig.carrier**2 + 2.0 * sig.bcc * sig.beta * sig.carrier
    out = np.zeros((2, 2))
    for j in range(len(geo.phi)):
        ang = geo.phi[j] + geo.theta_v[j]
        c, s = np.cos(ang), np.sin(ang)
        block = np.array([[np.sum(c * c), np.sum(c * s)], [np.sum(c * s), np.sum(s * s)]])
        out += geo.lambdas[j] * coeff * block
    return EfimResult(out, POSITION_LABELS, "static/full-knowledge")


def _centered_view(scenario: Scenario) -> Scenario:
    """Move the pose reference to the array centroid, keeping elements fixed."""
    pts = antenna_positions(scenario.array, scenario.pose)
    centroid = pts.mean(axis=0)
    body = scenario.array.body_offsets()
    body = body - body.mean(axis=0)
    radii = tuple(float(v) for v in np.hypot(body[:, 0], body[:, 1]))
    angles = tuple(float(v) for v in np.arctan2(body[:, 1], body[:, 0]))
    return dataclasses.replace(
        scenario,
        array=AntennaArray(radii, angles),
        pose=ArrayPose(Position2D(float(centroid[0]), float(centroid[1])), scenario.pose.orientation),
    )


def efim_static_orient_known(scenario: Scenario, mode: str = "per-antenna") -> EfimResult:
    """Position EFIM with known orientation but unknown carrier phase.

    Modes:
      * ``per-antenna``: distance term keeps the per-antenna visual angles.
      * ``far-field``: visual angles dropped in the distance term; the result
        no longer depends on which point of the array is the reference.
      * ``centered``: reference moved to the array centroid and the direction
        term expressed through per-antenna squared visual angles.
    """
    if mode not in STATIC_ORIENT_KNOWN_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {STATIC_ORIENT_KNOWN_MODES}")
    if mode == "centered":
        scenario = _centered_view(scenario)
    geo = _los_geometry(scenario)
    beta_eff, fc_eff = scenario.signal.effective()
    n_a = scenario.array.n_antennas
    out = np.zeros((2, 2))
    for j in range(len(geo.phi)):
        lam = geo.lambdas[j]
        tangent = rdm(geo.phi[j] + math.pi / 2.0)
        if mode == "per-antenna":
            ang = geo.phi[j] + geo.theta_v[j]
            c, s = np.cos(ang), np.sin(ang)
            dist_term = np.array([[np.sum(c * c), np.sum(c * s)], [np.sum(c * s), np.sum(s * s)]])
            dir_term = n_a * fc_eff**2 * geo.g_saaf[j] / geo.dist[j] ** 2 * tangent
        elif mode == "far-field":
            dist_term = n_a * rdm(geo.phi[j])
            dir_term = n_a * fc_eff**2 * geo.g_saaf[j] / geo.dist[j] ** 2 * tangent
        else:  # centered
            dist_term = n_a * rdm(geo.phi[j])
            dir_term = fc_eff**2 * float(np.sum(geo.theta_v[j] ** 2)) * tangent
        out += lam * (beta_eff**2 * dist_term + dir_term)
    return EfimResult(out, POSITION_LABELS, f"static/orientation-known/{mode}")


def efim_static_orient_unknown(scenario: Scenario) -> Tuple[EfimResult, EfimResult]:
    """EFIMs with neither phase nor orientation known.

    Returns the 3x3 information matrix over (x, y, psi) and the far-field
    2x2 position EFIM obtained by eliminating the orientation, expressed in
    the reference-point-free subtractive form.
    """
    geo = _los_geometry(scenario)
    beta_eff, fc_eff = scenario.signal.effective()
    n_a = scenario.array.n_antennas

    j3 = np.zeros((3, 3))
    for j in range(len(geo.phi)):
        lam = geo.lambdas[j]
        dist = geo.dist[j]
        phi = geo.phi[j]
        for theta in geo.theta_v[j]:
            vec = np.array([math.cos(phi + theta), math.sin(phi + theta), -dist * theta])
            j3 += lam * beta_eff**2 * _outer(vec)
        vec_dir = np.array([-math.sin(phi), math.cos(phi), -dist])
        j3 += lam * n_a * fc_eff**2 * geo.g_saaf[j] / dist**2 * _outer(vec_dir)

    base = efim_static_orient_known(scenario, mode="far-field").matrix
    weights = geo.lambdas * geo.g_saaf
    total = float(np.sum(weights))
    correction = np.zeros((2, 2))
    if total > 0.0:
        coupling = np.zeros(2)
        for j in range(len(geo.phi)):
            coupling += weights[j] / geo.dist[j] * np.array([-math.sin(geo.phi[j]), math.cos(geo.phi[j])])
        correction = n_a * fc_eff**2 / total * _outer(coupling)
    if len(geo.phi) < 2:
        warnings.warn("fewer than 2 LOS anchors: position block is singular with unknown orientation")
    return (
        EfimResult(j3, ("x", "y", "psi"), "static/orientation-unknown/3x3"),
        EfimResult(base - correction, POSITION_LABELS, "static/orientation-unknown/position"),
    )


def _angular_speeds(scenario: Scenario, geo: _Geometry) -> np.ndarray:
    """Visual-angle angular speeds omega_j = v sin(psi_d - phi_j) / D_j."""
    motion = scenario.motion
    return motion.speed * np.sin(motion.direction - geo.phi) / geo.dist


def _check_dynamic_assumptions(scenario: Scenario) -> None:
    sig = scenario.signal
    if sig.carrier <= 0 or sig.band_limit / sig.carrier > 0.1:
        warnings.warn(
            "narrowband assumption questionable: band limit is not small against the carrier"
        )
    if scenario.waveform is not None:
        # the bounds are evaluated on the recentred signal, so the balanced
        # phase property must hold there (recentring removes the linear
        # phase a frequency offset otherwise contributes)
        centered, _ = recentre(scenario.waveform)
        resid = balanced_phase_residual(centered)
        if abs(resid) * sig.beta > 1e-3:
            warnings.warn(f"balanced-phase residual {resid:.3g} is not negligible")


def efim_dynamic_known(scenario: Scenario, mode: str = "narrowband") -> EfimResult:
    """Position EFIM for a moving agent with orientation and velocity known.

    ``narrowband`` evaluates the closed form in which motion contributes a
    synthetic-aperture direction term with intensity (omega_j * t_rms)^2;
    ``exact`` computes the per-anchor coefficients from signal integrals of
    the sampled waveform without the narrowband/balanced-phase reductions.
    """
    if mode not in DYNAMIC_KNOWN_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {DYNAMIC_KNOWN_MODES}")
    if scenario.motion is None:
        raise ValueError("efim_dynamic_known requires motion")
    geo = _los_geometry(scenario)
    n_a = scenario.array.n_antennas
    omegas = _angular_speeds(scenario, geo)

    if mode == "narrowband":
        _check_dynamic_assumptions(scenario)
        beta_eff, fc_eff = scenario.signal.effective()
        t_rms = scenario.signal.trms
        out = np.zeros((2, 2))
        for j in range(len(geo.phi)):
            gain = geo.lambdas[j] * geo.doppler[j] * n_a
            direction = geo.g_saaf[j] / geo.dist[j] ** 2 + omegas[j] ** 2 * t_rms**2
            out += gain * (
                beta_eff**2 * rdm(geo.phi[j]) + fc_eff**2 * direction * rdm(geo.phi[j] + math.pi / 2.0)
            )
        return EfimResult(out, POSITION_LABELS, "dynamic/full-knowledge/narrowband")

    coeffs = _exact_coefficients(scenario, geo, omegas)
    out = np.zeros((2, 2))
    for j, (a1, a2, a3) in enumerate(coeffs):
        q1 = np.array([math.cos(geo.phi[j]), math.sin(geo.phi[j])])
        q2 = np.array([-math.sin(geo.phi[j]), math.cos(geo.phi[j])])
        out += a1 * _outer(q1) + a2 * _outer(q2) + a3 * (np.outer(q1, q2) + np.outer(q2, q1))
    return EfimResult(out, POSITION_LABELS, "dynamic/full-knowledge/exact")


def _exact_coefficients(
    scenario: Scenario, geo: _Geometry, omegas: np.ndarray
) -> list[Tuple[float, float, float]]:
    """Exact per-anchor (radial, tangent, cross) information coefficients.

    Works on the recentred waveform with the effective carrier. Time weights
    are taken relative to the motion reference time, which fixes the exact
    (reference-time dependent) synthetic aperture.
    """
    if scenario.waveform is None:
        raise ValueError("the exact dynamic mode needs the sampled waveform")
    base, shift = recentre(scenario.waveform)
    fc_eff = scenario.signal.carrier + shift

    dt = base.sample_period
    t = base.times()
    u = t - scenario.motion.reference_time
    s0 = base.samples
    spec_freqs = np.fft.fftfreq(base.n_samples, dt)
    s0_deriv = np.fft.ifft(1j * TWO_PI * spec_freqs * np.fft.fft(s0))

    mod_deriv_sq = np.abs(s0_deriv + 1j * TWO_PI * fc_eff * s0) ** 2
    cross_im = np.imag(np.conj(s0) * s0_deriv) + TWO_PI * fc_eff * np.abs(s0) ** 2

    energy = float(dt * np.sum(np.abs(s0) ** 2))
    p0 = float(dt * np.sum(mod_deriv_sq))
    p1 = float(dt * np.sum(u * mod_deriv_sq))
    p2 = float(dt * np.sum(u**2 * mod_deriv_sq))
    r0 = float(dt * np.sum(cross_im))
    r1 = float(dt * np.sum(u * cross_im))

    n_a = scenario.array.n_antennas
    los = scenario.los_anchors()
    out = []
    for j in range(len(geo.phi)):
        snr_term = los[j].snr_first_path * (1.0 - los[j].poc)
        pref = 2.0 * snr_term * geo.doppler[j] / (scenario.c**2 * energy)
        theta = geo.theta_v[j]
        sum_theta = float(np.sum(theta))
        sum_theta2 = float(np.sum(theta**2))
        w = omegas[j]
        quad = p0 * sum_theta2 - 2.0 * w * p1 * sum_theta + n_a * w**2 * p2
        lin = r0 * sum_theta - n_a * w * r1
        a1 = pref * n_a * (p0 - r0**2 / energy)
        a2 = pref * (quad - lin**2 / (n_a * energy))
        a3 = pref * (p0 * sum_theta - n_a * w * p1 - r0 / energy * lin)
        out.append((a1, a2, a3))
    return out


def _subtractive_direction_term(
    weights: np.ndarray, phi: np.ndarray, dist: np.ndarray
) -> np.ndarray:
    """sum_j w_j v_j v_j^T - g(sum_j w_j v_j)/sum_j w_j with v_j the scaled tangents.

    Equals the pairwise difference form; zero when the weights vanish.
    """
    total = float(np.sum(weights))
    out = np.zeros((2, 2))
    if total <= 0.0:
        return out
    accum = np.zeros(2)
    for j in range(len(phi)):
        v = np.array([-math.sin(phi[j]), math.cos(phi[j])]) / dist[j]
        out += weights[j] * _outer(v)
        accum += weights[j] * v
    out -= _outer(accum) / total
    return out


def efim_dynamic_orient_dir_unknown(scenario: Scenario) -> Tuple[EfimResult, EfimResult]:
    """EFIMs for known speed but unknown orientation and moving direction.

    Returns the 4x4 matrix over (x, y, psi, psi_d) and the 2x2 position EFIM
    with both nuisance angles eliminated; array aperture and synthetic
    (Doppler) aperture enter through separately weighted difference terms.
    """
    if scenario.motion is None:
        raise ValueError("efim_dynamic_orient_dir_unknown requires motion")
    _check_dynamic_assumptions(scenario)
    geo = _los_geometry(scenario)
    beta_eff, fc_eff = scenario.signal.effective()
    t_rms = scenario.signal.trms
    n_a = scenario.array.n_antennas
    omegas = _angular_speeds(scenario, geo)
    lam = geo.lambdas * geo.doppler

    j4 = np.zeros((4, 4))
    for j in range(len(geo.phi)):
        phi = geo.phi[j]
        dist = geo.dist[j]
        c, s = math.cos(phi), math.sin(phi)
        j4 += n_a * lam[j] * beta_eff**2 * _outer(np.array([c, s, 0.0, 0.0]))
        j4 += (
            n_a
            * lam[j]
            * fc_eff**2
            * geo.g_saaf[j]
            / dist**2
            * _outer(np.array([-s, c, -dist, 0.0]))
        )
        j4 += (
            n_a
            * lam[j]
            * fc_eff**2
            * omegas[j] ** 2
            * t_rms**2
            * _outer(np.array([-s, c, 0.0, -dist]))
        )

    toa = np.zeros((2, 2))
    for j in range(len(geo.phi)):
        toa += lam[j] * beta_eff**2 * rdm(geo.phi[j])
    motion = scenario.motion
    doppler_weights = lam * np.sin(geo.phi - motion.direction) ** 2
    j2 = n_a * (
        toa
        + fc_eff**2 * _subtractive_direction_term(lam * geo.g_saaf, geo.phi, geo.dist)
        + fc_eff**2
        * motion.speed**2
        * t_rms**2
        * _subtractive_direction_term(doppler_weights, geo.phi, geo.dist)
    )
    return (
        EfimResult(j4, ("x", "y", "psi", "psi_d"), "dynamic/pose-unknown/4x4"),
        EfimResult(j2, POSITION_LABELS, "dynamic/pose-unknown/position"),
    )


def efim_dynamic_all_unknown(scenario: Scenario) -> EfimResult:
    """5x5 EFIM over (x, y, psi, psi_d, v) with nothing about pose or velocity known.

    The speed column is stored premultiplied by omega_j so the radial-motion
    limit omega_j -> 0 stays finite (the singularity is removable).
    """
    if scenario.motion is None:
        raise ValueError("efim_dynamic_all_unknown requires motion")
    _check_dynamic_assumptions(scenario)
    geo = _los_geometry(scenario)
    beta_eff, fc_eff = scenario.signal.effective()
    t_rms = scenario.signal.trms
    n_a = scenario.array.n_antennas
    omegas = _angular_speeds(scenario, geo)
    lam = geo.lambdas * geo.doppler
    motion = scenario.motion

    j5 = np.zeros((5, 5))
    for j in range(len(geo.phi)):
        phi = geo.phi[j]
        dist = geo.dist[j]
        c, s = math.cos(phi), math.sin(phi)
        j5 += n_a * lam[j] * beta_eff**2 * _outer(np.array([c, s, 0.0, 0.0, 0.0]))
        j5 += (
            n_a
            * lam[j]
            * fc_eff**2
            * geo.g_saaf[j]
            / dist**2
            * _outer(np.array([-s, c, -dist, 0.0, 0.0]))
        )
        w = omegas[j]
        doppler_vec = np.array([-w * s, w * c, 0.0, -w * dist, math.cos(phi - motion.direction)])
        j5 += n_a * lam[j] * fc_eff**2 * t_rms**2 * _outer(doppler_vec)
    return EfimResult(j5, ("x", "y", "psi", "psi_d", "v"), "dynamic/all-unknown/5x5")


def schur_complement(
    matrix: np.ndarray, keep: int, allow_pseudoinverse: bool = False
) -> np.ndarray:
    """Eliminate the trailing block: A - B C^{-1} B^T for the leading ``keep`` rows.

    Satisfies [(A - B C^{-1} B^T)^{-1}] = [J^{-1}]_{:keep,:keep} when J is
    invertible. A singular trailing block raises unless the pseudo-inverse
    fallback is permitted.
    """
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    if not 0 < keep <= n:
        raise ValueError(f"keep must be in (0, {n}], got {keep}")
    if keep == n:
        return m.copy()
    a = m[:keep, :keep]
    b = m[:keep, keep:]
    c = m[keep:, keep:]
    eigvals = np.linalg.eigvalsh(c)
    if eigvals.min() <= 1e-12 * max(eigvals.max(), 0.0) or eigvals.max() == 0.0:
        if not allow_pseudoinverse:
            raise SingularNuisanceError("nuisance block is singular; pass allow_pseudoinverse=True")
        out = a - b @ np.linalg.pinv(c, hermitian=True) @ b.T
    else:
        out = a - b @ np.linalg.solve(c, b.T)
    # the exact complement of a symmetric matrix is symmetric; drop roundoff skew
    return 0.5 * (out + out.T)


def speb(efim: np.ndarray | EfimResult) -> SpebValue:
    """Trace of the inverse 2x2 position EFIM, +inf when rank deficient."""
    m = efim.matrix if isinstance(efim, EfimResult) else np.asarray(efim, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("speb expects a 2x2 position EFIM; reduce larger matrices first")
    eig = np.linalg.eigvalsh(0.5 * (m + m.T))
    if eig.min() <= 1e-12 * max(eig.max(), 0.0) or eig.max() <= 0.0:
        return SpebValue(math.inf, rank_deficient=True)
    return SpebValue(float(np.sum(1.0 / eig)), rank_deficient=False)


def position_speb(result: EfimResult) -> SpebValue:
    """SPEB of an n x n EFIM whose first two labels are the position."""
    if result.n == 2:
        return speb(result)
    try:
        reduced = schur_complement(result.matrix, 2)
    except SingularNuisanceError:
        reduced = schur_complement(result.matrix, 2, allow_pseudoinverse=True)
    return speb(reduced)


def speb_uoa_closed(
    anchors: Sequence[AnchorNode],
    signal: SignalSummary,
    g_uoa: float,
    agent: Position2D,
    c: float,
    n_antennas: int = 1,
) -> SpebValue:
    """Closed-form SPEB for a uniformly oriented array with known orientation.

    With r_i, s_i the per-anchor radial/tangent intensities and
    u_i = r_i - s_i, the bound is
    2*sum(r+s) / sum_{i,i'} (u_i u_i' sin^2(phi_i - phi_i') + s_i r_i' + r_i s_i').
    """
    beta_eff, fc_eff = signal.effective()
    r_list, s_list, phi_list = [], [], []
    for anchor in anchors:
        if not anchor.los:
            continue
        dist, phi = anchor_range_bearing(anchor.position, agent)
        lam = intensity(anchor, c) * n_antennas
        r_list.append(lam * beta_eff**2)
        s_list.append(lam * fc_eff**2 * g_uoa / dist**2)
        phi_list.append(phi)
    r = np.array(r_list)
    s = np.array(s_list)
    phi = np.array(phi_list)
    u = r - s
    dphi = phi[:, None] - phi[None, :]
    denom = float(
        np.sum(np.outer(u, u) * np.sin(dphi) ** 2) + 2.0 * float(np.sum(s)) * float(np.sum(r))
    )
    numer = 2.0 * float(np.sum(r + s))
    if denom <= 0.0:
        return SpebValue(math.inf, rank_deficient=True)
    return SpebValue(numer / denom, rank_deficient=False)


def efim_position(scenario: Scenario, mode: Optional[str] = None) -> EfimResult:
    """Dispatch to the bound matching the scenario's knowledge flags.

    Returns the 2x2 position EFIM (after eliminating whatever pose/velocity
    parameters are unknown). ``mode`` selects the variant within the static
    orientation-known family or the dynamic full-knowledge family.
    """
    k = scenario.knowledge
    if not scenario.is_dynamic:
        if k.phase_known and k.orientation_known:
            return efim_static_full(scenario)
        if k.orientation_known:
            return efim_static_orient_known(scenario, mode=mode or "per-antenna")
        return efim_static_orient_unknown(scenario)[1]
    if k.orientation_known and k.direction_known and k.speed_known:
        return efim_dynamic_known(scenario, mode=mode or "narrowband")
    if k.speed_known and not k.orientation_known and not k.direction_known:
        return efim_dynamic_orient_dir_unknown(scenario)[1]
    if not (k.orientation_known or k.direction_known or k.speed_known):
        full = efim_dynamic_all_unknown(scenario)
        reduced = schur_complement(full.matrix, 2, allow_pseudoinverse=True)
        return EfimResult(reduced, POSITION_LABELS, "dynamic/all-unknown/position")
    raise ValueError(
        "no closed form for this knowledge combination; "
        "supported: static (3 cases), dynamic all-known, dynamic speed-only-known, dynamic all-unknown"
    )

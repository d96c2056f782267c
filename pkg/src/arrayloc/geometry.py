"""Anchor-geometry quality measures, optimal placement and rank requirements.

Two phasor-sum factors grade an anchor constellation: the first-type factor
(zero exactly at orientation-known-optimal geometries, and the quantity the
SPEB strictly increases in) and the second-type factor (additionally zero at
orientation-unknown optima). GDOP connects the first factor to the classical
equal-error dilution-of-precision measure. The module also provides the
orientation-averaged/worst-case SPEB used to compare array shapes, and the
minimal anchor/antenna counts that keep the position information full rank.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .arrays import uca, ula
from .efim import (
    EfimResult,
    efim_dynamic_known,
    efim_dynamic_orient_dir_unknown,
    efim_static_orient_known,
    efim_static_orient_unknown,
    intensity,
    speb,
)
from .model import (
    AgentMotion,
    AnchorNode,
    AntennaArray,
    ArrayPose,
    KnowledgeFlags,
    Position2D,
    Scenario,
    anchor_range_bearing,
)
from .signal import SignalSummary


@dataclass(frozen=True)
class GeometricFactors:
    """Anchor-geometry factors with their normalizations and per-anchor weights."""

    gf1: float
    gf2: float
    gf1_norm: float
    gf2_norm: float
    weights: np.ndarray


def direction_weights(
    lambdas: np.ndarray, distances: np.ndarray, signal: SignalSummary, g_uoa: float
) -> np.ndarray:
    """Per-anchor weights u_i = lambda_i (beta^2 - f_c^2 G / D_i^2).

    Positive where distance information dominates direction information and
    zero when the two exactly offset (isotropic anchors).
    """
    beta_eff, fc_eff = signal.effective()
    return lambdas * (beta_eff**2 - fc_eff**2 * g_uoa / distances**2)


def gf1_from_weights(weights: np.ndarray, phis: np.ndarray) -> float:
    """|sum_i u_i exp(2j phi_i)|."""
    return float(abs(np.sum(weights * np.exp(2j * phis))))


def gf2_from_weights(lambdas: np.ndarray, distances: np.ndarray, phis: np.ndarray) -> float:
    """|sum_i (lambda_i / D_i) exp(j phi_i)|."""
    return float(abs(np.sum(lambdas / distances * np.exp(1j * phis))))


def _los_arrays(
    anchors: Sequence[AnchorNode], agent: Position2D, c: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    lambdas, dists, phis = [], [], []
    for anchor in anchors:
        if not anchor.los:
            continue
        d, phi = anchor_range_bearing(anchor.position, agent)
        lambdas.append(intensity(anchor, c))
        dists.append(d)
        phis.append(phi)
    return np.array(lambdas), np.array(dists), np.array(phis)


def geometric_factors(
    anchors: Sequence[AnchorNode],
    signal: SignalSummary,
    g_uoa: float,
    agent: Position2D,
    c: float,
) -> GeometricFactors:
    """Both anchor-geometry factors, normalized into [0, 1].

    The first factor is normalized by sum |u_i| and the second by
    sum lambda_i / D_i, so 1 means fully aligned phasors.
    """
    lambdas, dists, phis = _los_arrays(anchors, agent, c)
    u = direction_weights(lambdas, dists, signal, g_uoa)
    g1 = gf1_from_weights(u, phis)
    g2 = gf2_from_weights(lambdas, dists, phis)
    scale1 = float(np.sum(np.abs(u)))
    scale2 = float(np.sum(lambdas / dists))
    return GeometricFactors(
        gf1=g1,
        gf2=g2,
        gf1_norm=g1 / scale1 if scale1 > 0 else 0.0,
        gf2_norm=g2 / scale2 if scale2 > 0 else 0.0,
        weights=u,
    )


def gf1(
    anchors: Sequence[AnchorNode],
    signal: SignalSummary,
    g_uoa: float,
    agent: Position2D,
    c: float,
) -> float:
    return geometric_factors(anchors, signal, g_uoa, agent, c).gf1


def gf2(anchors: Sequence[AnchorNode], agent: Position2D, c: float) -> float:
    lambdas, dists, phis = _los_arrays(anchors, agent, c)
    return gf2_from_weights(lambdas, dists, phis)


def anchor_optimality_residual(
    anchors: Sequence[AnchorNode],
    signal: SignalSummary,
    g_uoa: float,
    agent: Position2D,
    c: float,
) -> Tuple[float, float]:
    """(gf1, gf2): zero first entry characterizes orientation-known optimality,
    both zero the orientation-unknown optimum."""
    factors = geometric_factors(anchors, signal, g_uoa, agent, c)
    return factors.gf1, factors.gf2


# ---------------------------------------------------------------------------
# GDOP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GdopModel:
    """Visibility matrix, metric covariance and the resulting GDOP."""

    h: np.ndarray
    c: np.ndarray
    gdop: float


def gdop_model(
    anchors: Sequence[AnchorNode],
    agent: Position2D,
    signal: Optional[SignalSummary] = None,
    g_uoa: float = 0.0,
    n_antennas: int = 1,
    propagation_speed: float = 299_792_458.0,
) -> GdopModel:
    """Visibility/covariance pair whose weighted normal matrix is the EFIM.

    Rows 2j-1, 2j of H are the range and bearing gradients of anchor j; the
    block-diagonal covariance holds the per-anchor range/bearing error
    powers implied by the signal. GDOP itself assumes equal errors and uses
    H alone.
    """
    rows = []
    blocks = []
    beta_eff, fc_eff = signal.effective() if signal is not None else (1.0, 1.0)
    for anchor in anchors:
        if not anchor.los:
            continue
        dist, phi = anchor_range_bearing(anchor.position, agent)
        c_, s_ = math.cos(phi), math.sin(phi)
        rows.append([c_, s_])
        rows.append([-s_ / dist, c_ / dist])
        lam = intensity(anchor, propagation_speed) * n_antennas
        if lam > 0 and fc_eff > 0 and g_uoa > 0:
            blocks.append(np.diag([1.0 / (lam * beta_eff**2), 1.0 / (lam * fc_eff**2 * g_uoa)]))
        else:
            blocks.append(np.eye(2))
    h = np.array(rows)
    cov = np.zeros((len(blocks) * 2, len(blocks) * 2))
    for i, b in enumerate(blocks):
        cov[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = b
    normal = h.T @ h
    eig = np.linalg.eigvalsh(normal)
    value = math.inf if eig.min() <= 1e-12 * eig.max() else math.sqrt(float(np.sum(1.0 / eig)))
    return GdopModel(h=h, c=cov, gdop=value)


def gdop(
    anchors: Sequence[AnchorNode],
    agent: Position2D,
    include_direction_rows: bool = True,
) -> float:
    """Equal-error geometric dilution of precision sqrt(tr{(H^T H)^-1}).

    With ``include_direction_rows`` False only the range gradients enter,
    which reproduces the classical ranging GDOP (infinite for collinear
    geometry seen edge-on).
    """
    if len([a for a in anchors if a.los]) < 2:
        raise ValueError("gdop needs at least 2 LOS anchors")
    rows = []
    for anchor in anchors:
        if not anchor.los:
            continue
        dist, phi = anchor_range_bearing(anchor.position, agent)
        c_, s_ = math.cos(phi), math.sin(phi)
        rows.append([c_, s_])
        if include_direction_rows:
            rows.append([-s_ / dist, c_ / dist])
    h = np.array(rows)
    normal = h.T @ h
    eig = np.linalg.eigvalsh(normal)
    if eig.min() <= 1e-12 * eig.max():
        return math.inf
    return math.sqrt(float(np.sum(1.0 / eig)))


# ---------------------------------------------------------------------------
# Anchor-angle optimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AnchorPlacement:
    """Optimized anchor directions plus the geometry residuals at the optimum."""

    angles: np.ndarray
    speb: float
    gf1_norm: float
    gf2_norm: float
    isotropic: bool


def _closed_form_speb(
    r: np.ndarray, s: np.ndarray, angles: np.ndarray
) -> float:
    u = r - s
    z = np.sum(u * np.exp(2j * angles))
    denom = 0.5 * (float(np.sum(u)) ** 2 - float(abs(z)) ** 2) + 2.0 * float(np.sum(s)) * float(
        np.sum(r)
    )
    if denom <= 0.0:
        return math.inf
    return 2.0 * float(np.sum(r + s)) / denom


def _closed_form_grad(r: np.ndarray, s: np.ndarray, angles: np.ndarray) -> np.ndarray:
    u = r - s
    z = np.sum(u * np.exp(2j * angles))
    denom = 0.5 * (float(np.sum(u)) ** 2 - float(abs(z)) ** 2) + 2.0 * float(np.sum(s)) * float(
        np.sum(r)
    )
    numer = 2.0 * float(np.sum(r + s))
    # d denom / d phi_k = 2 u_k Im{conj(z) e^{2j phi_k}}
    ddenom = 2.0 * u * np.imag(np.conj(z) * np.exp(2j * angles))
    return -numer / denom**2 * ddenom


def _unknown_orientation_speb(
    lambdas: np.ndarray,
    dists: np.ndarray,
    signal: SignalSummary,
    g_uoa: float,
    n_antennas: int,
    angles: np.ndarray,
) -> float:
    beta_eff, fc_eff = signal.effective()
    toa = np.zeros((2, 2))
    for lam, phi in zip(lambdas, angles):
        c_, s_ = math.cos(phi), math.sin(phi)
        toa += lam * beta_eff**2 * np.array([[c_ * c_, c_ * s_], [c_ * s_, s_ * s_]])
    weights = lambdas * g_uoa
    total = float(np.sum(weights))
    direction = np.zeros((2, 2))
    if total > 0:
        accum = np.zeros(2)
        for w, phi, d in zip(weights, angles, dists):
            v = np.array([-math.sin(phi), math.cos(phi)]) / d
            direction += w * np.outer(v, v)
            accum += w * v
        direction -= np.outer(accum, accum) / total
    j = n_antennas * (toa + fc_eff**2 * direction)
    return speb(j).value


def optimize_anchor_angles(
    lambdas: np.ndarray,
    distances: np.ndarray,
    signal: SignalSummary,
    g_uoa: float,
    objective: str = "known",
    n_antennas: int = 1,
    restarts: int = 32,
    seed: int = 0,
    max_iter: int = 400,
) -> AnchorPlacement:
    """Best anchor directions at fixed intensities and ranges.

    Multi-start projected gradient descent on the closed-form SPEB
    (orientation-known objective, analytic gradient) or on the
    orientation-eliminated SPEB (unknown objective, finite-difference
    gradient), with step-halving line search. All-zero direction weights
    make every assignment optimal; that degenerate case is flagged.
    """
    if objective not in ("known", "unknown"):
        raise ValueError("objective must be 'known' or 'unknown'")
    lambdas = np.asarray(lambdas, dtype=float)
    distances = np.asarray(distances, dtype=float)
    n = len(lambdas)
    if n < 2:
        raise ValueError("need at least 2 anchors to optimize geometry")
    beta_eff, fc_eff = signal.effective()
    r = n_antennas * lambdas * beta_eff**2
    s = n_antennas * lambdas * fc_eff**2 * g_uoa / distances**2
    u = r - s

    if objective == "known":
        fun: Callable[[np.ndarray], float] = lambda ang: _closed_form_speb(r, s, ang)
        grad = lambda ang: _closed_form_grad(r, s, ang)
    else:
        fun = lambda ang: _unknown_orientation_speb(
            lambdas, distances, signal, g_uoa, n_antennas, ang
        )

        def grad(ang: np.ndarray, h: float = 1e-7) -> np.ndarray:
            g = np.empty_like(ang)
            for i in range(len(ang)):
                up = ang.copy()
                dn = ang.copy()
                up[i] += h
                dn[i] -= h
                g[i] = (fun(up) - fun(dn)) / (2 * h)
            return g

    u_scale = n_antennas * lambdas * (beta_eff**2 + fc_eff**2 * g_uoa / distances**2)
    if np.all(np.abs(u) <= 1e-12 * u_scale):
        angles = np.zeros(n)
        return AnchorPlacement(angles, fun(angles), 0.0, _norm_gf2(lambdas, distances, angles), True)

    rng = np.random.default_rng(seed)
    best_angles = None
    best_val = math.inf
    for _ in range(max(1, restarts)):
        ang = rng.uniform(0.0, 2.0 * math.pi, n)
        val = fun(ang)
        for _ in range(max_iter):
            g = grad(ang)
            gnorm = float(np.linalg.norm(g))
            if gnorm < 1e-10:
                break
            step = 1.0 / max(gnorm, 1e-12)
            while step > 1e-18:
                cand = (ang - step * g) % (2.0 * math.pi)
                cand_val = fun(cand)
                if cand_val < val - 1e-18 * abs(val):
                    ang, val = cand, cand_val
                    break
                step *= 0.5
            else:
                break
        if val < best_val:
            best_val, best_angles = val, ang
    scale1 = float(np.sum(np.abs(u)))
    g1 = gf1_from_weights(u, best_angles) / scale1 if scale1 > 0 else 0.0
    return AnchorPlacement(
        angles=best_angles,
        speb=best_val,
        gf1_norm=g1,
        gf2_norm=_norm_gf2(lambdas, distances, best_angles),
        isotropic=False,
    )


def _norm_gf2(lambdas: np.ndarray, distances: np.ndarray, angles: np.ndarray) -> float:
    scale = float(np.sum(lambdas / distances))
    if scale <= 0:
        return 0.0
    return gf2_from_weights(lambdas, distances, angles) / scale


# ---------------------------------------------------------------------------
# Orientation sweeps and the trace-inverse order
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrientationSweep:
    """Average and worst-case SPEB over array orientation."""

    mean: float
    worst: float
    worst_orientation: float
    any_singular: bool


def orientation_avg_speb(
    scenario: Scenario,
    quadrature_points: int = 256,
    mode: str = "far-field",
    refine: bool = True,
) -> OrientationSweep:
    """Orientation-averaged and worst-case SPEB for a static known-orientation scenario.

    The average uses the n-point periodic trapezoid rule (spectrally accurate
    for the smooth periodic integrand); the maximum is located by a dense
    scan with optional local parabolic refinement.
    """
    if quadrature_points < 8:
        raise ValueError("need at least 8 quadrature points")
    psis = np.linspace(0.0, 2.0 * math.pi, quadrature_points, endpoint=False)

    def value(psi: float) -> float:
        rotated = dataclasses.replace(
            scenario, pose=ArrayPose(scenario.pose.reference, float(psi))
        )
        return speb(efim_static_orient_known(rotated, mode=mode)).value

    vals = np.array([value(p) for p in psis])
    any_singular = bool(np.any(np.isinf(vals)))
    mean = math.inf if any_singular else float(np.mean(vals))
    worst_idx = int(np.argmax(vals))
    worst_psi = float(psis[worst_idx])
    worst = float(vals[worst_idx])
    if refine and not math.isinf(worst):
        from scipy.optimize import minimize_scalar

        span = 2.0 * math.pi / quadrature_points
        res = minimize_scalar(
            lambda p: -value(p),
            bounds=(worst_psi - span, worst_psi + span),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > worst:
            worst, worst_psi = -float(res.fun), float(res.x) % (2.0 * math.pi)
    return OrientationSweep(mean, worst, worst_psi, any_singular)


def trace_inverse_monotone_check(a: np.ndarray, b: np.ndarray) -> bool:
    """True when tr{A^-1} <= tr{B^-1} for SPD A >= B (Loewner order)."""
    ta = float(np.trace(np.linalg.inv(a)))
    tb = float(np.trace(np.linalg.inv(b)))
    return ta <= tb * (1.0 + 1e-12)


# ---------------------------------------------------------------------------
# Minimal anchor/antenna count requirements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RankCase:
    """One probed configuration and its verdict."""

    n_anchors: int
    n_antennas: int
    expect_full_rank: bool
    full_rank: bool

    @property
    def ok(self) -> bool:
        return self.full_rank == self.expect_full_rank


RANK_TABLE_CELLS = (
    "static/no-carrier/known",
    "static/no-baseband/known",
    "static/both/known",
    "dynamic/no-baseband/known",
    "dynamic/both/known",
    "static/no-carrier/unknown",
    "static/no-baseband/unknown",
    "static/both/unknown",
    "dynamic/no-baseband/unknown",
    "dynamic/both/unknown",
)

# (minimum anchors, minimum antennas, anchors-OR-antennas alternative rule)
_RANK_REQUIREMENTS = {
    "static/no-carrier/known": (2, 1, False),
    "static/no-baseband/known": (2, 2, False),
    "static/both/known": (2, 2, True),
    "dynamic/no-baseband/known": (2, 1, False),
    "dynamic/both/known": (1, 1, False),
    "static/no-carrier/unknown": (2, 1, False),
    "static/no-baseband/unknown": (3, 2, False),
    "static/both/unknown": (2, 1, False),
    "dynamic/no-baseband/unknown": (3, 1, False),
    "dynamic/both/unknown": (2, 1, False),
}


def _rank_scenario(
    cell: str, n_anchors: int, n_antennas: int, rng: np.random.Generator
) -> EfimResult:
    motion_kind, signal_kind, knowledge_kind = cell.split("/")
    beta = 0.0 if signal_kind == "no-baseband" else 2.0
    carrier = 0.0 if signal_kind == "no-carrier" else 60.0
    signal = SignalSummary(
        beta=beta, bcc=0.0, carrier=carrier, band_limit=max(beta, 1e-9), trms=0.2, t_ob=1.0
    )
    if n_antennas == 1:
        array = AntennaArray((0.0,), (0.0,))
    elif n_antennas == 2:
        array = ula(2, 0.4)
    else:
        array = uca(n_antennas, 0.4)
    angles = rng.uniform(0.0, 2.0 * math.pi, n_anchors)
    dists = rng.uniform(8.0, 14.0, n_anchors)
    anchors = tuple(
        AnchorNode(
            Position2D(d * math.cos(a), d * math.sin(a)), snr_first_path=1000.0
        )
        for d, a in zip(dists, angles)
    )
    pose = ArrayPose(Position2D(0.0, 0.0), rng.uniform(0.0, 2.0 * math.pi))
    motion = None
    if motion_kind == "dynamic":
        motion = AgentMotion(speed=0.5, direction=rng.uniform(0.0, 2.0 * math.pi), reference_time=0.5)
    known = knowledge_kind == "known"
    knowledge = KnowledgeFlags(
        phase_known=False,
        orientation_known=known,
        direction_known=known,
        speed_known=True,
    )
    scenario = Scenario(anchors, array, pose, signal, knowledge, motion=motion, c=300.0)
    if motion is None:
        if known:
            return efim_static_orient_known(scenario, mode="far-field")
        return efim_static_orient_unknown(scenario)[1]
    if known:
        return efim_dynamic_known(scenario, mode="narrowband")
    return efim_dynamic_orient_dir_unknown(scenario)[1]


def efim_rank_requirements(cell: str, seed: int = 20260810) -> Tuple[RankCase, ...]:
    """Probe one requirement cell at, and one unit below, its minimum counts.

    Generic random geometry (fixed seed) avoids measure-zero degeneracies.
    Returns the probed cases with both the expected and observed verdicts.
    """
    if cell not in _RANK_REQUIREMENTS:
        raise KeyError(f"unknown cell {cell!r}; valid cells: {RANK_TABLE_CELLS}")
    min_anchors, min_antennas, either = _RANK_REQUIREMENTS[cell]
    rng = np.random.default_rng(seed)
    cases = []

    def probe(n_b: int, n_a: int, expect: bool) -> RankCase:
        result = _rank_scenario(cell, n_b, n_a, rng)
        eig = np.linalg.eigvalsh(result.matrix)
        full = bool(eig.min() > 1e-9 * max(eig.max(), 1e-300))
        return RankCase(n_b, n_a, expect, full)

    if either:
        # satisfying either bound suffices; failing both is singular
        cases.append(probe(min_anchors, 1, True))
        cases.append(probe(1, min_antennas, True))
        cases.append(probe(1, 1, False))
    else:
        cases.append(probe(min_anchors, min_antennas, True))
        if min_anchors > 1:
            cases.append(probe(min_anchors - 1, min_antennas, False))
        if min_antennas > 1:
            cases.append(probe(min_anchors, min_antennas - 1, False))
        if min_anchors == 1 and min_antennas == 1:
            cases.append(probe(1, 1, True))
    return tuple(cases)

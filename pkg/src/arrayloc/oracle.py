"""Independent numerical Fisher information from the discretized waveform model.

This module never uses the closed-form bounds: it rebuilds the noiseless
mean waveform of every anchor-antenna pair from raw geometry and channel
parameters, differentiates it by central finite differences, and integrates
the Gaussian FIM identity on a dense time grid. Schur complements of that
matrix provide ground truth against which every closed form is validated.

Scaled units (small carrier frequencies, order-one distances, c of a few
hundred) keep the dense grids tiny; all validated formulas are
dimensionally covariant, so agreement transfers to physical units.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .efim import EfimResult, SingularNuisanceError, schur_complement
from .model import KnowledgeFlags, Position2D, Scenario, anchor_range_bearing
from .signal import ComplexSampleSeries, estimate_band_limit

TWO_PI = 2.0 * math.pi

MAX_GRID_SAMPLES = 2_000_000


class GridResourceError(ValueError):
    """Raised when a requested oracle grid would exceed the sample budget."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform observation grid [t_start, t_end) with n_samples points."""

    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.n_samples < 64:
            raise ValueError("the oracle grid needs at least 64 samples")
        if not self.t_end > self.t_start:
            raise ValueError("empty time grid")
        if self.n_samples > MAX_GRID_SAMPLES:
            raise GridResourceError(
                f"grid of {self.n_samples} samples exceeds the {MAX_GRID_SAMPLES} budget"
            )

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_samples

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_samples)

    @classmethod
    def for_scenario(cls, scenario: Scenario, oversample: float = 16.0) -> "TimeGrid":
        """Grid resolving the passband: sample rate >= oversample * (f_c + B)."""
        sig = scenario.signal
        t_ob = sig.t_ob if sig.t_ob > 0 else scenario.waveform.duration()
        rate = oversample * (sig.carrier + sig.band_limit)
        n = max(64, int(math.ceil(rate * t_ob)))
        return cls(0.0, t_ob, n)


@dataclass(frozen=True)
class ParamEntry:
    """One scalar model parameter with its prior-knowledge mask."""

    name: str
    value: float
    kind: str
    known: bool
    anchor: Optional[int] = None
    path: Optional[int] = None


class ParameterVector:
    """Ordered model parameters for a scenario: pose, motion, phases, paths.

    The ordering matches the estimation problem: position first, then
    orientation, motion parameters, and per-anchor nuisances (initial phase
    and multipath descriptors, with the leading LOS biases pinned to zero and
    therefore absent).
    """

    def __init__(self, entries: Sequence[ParamEntry]):
        self.entries: Tuple[ParamEntry, ...] = tuple(entries)
        self._index: Dict[str, int] = {e.name: i for i, e in enumerate(self.entries)}
        if len(self._index) != len(self.entries):
            raise ValueError("duplicate parameter names")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "ParameterVector":
        k: KnowledgeFlags = scenario.knowledge
        agent = scenario.pose.reference
        entries: List[ParamEntry] = [
            ParamEntry("x", agent.x, "position", known=False),
            ParamEntry("y", agent.y, "position", known=False),
            ParamEntry("psi", scenario.pose.orientation, "angle", known=k.orientation_known),
        ]
        if scenario.is_dynamic:
            entries.append(
                ParamEntry("psi_d", scenario.motion.direction, "angle", known=k.direction_known)
            )
            entries.append(ParamEntry("v", scenario.motion.speed, "speed", known=k.speed_known))
        zero_aperture = max(scenario.array.radii) == 0.0
        for j, anchor in enumerate(scenario.anchors):
            entries.append(ParamEntry(f"xi[{j}]", 0.0, "angle", known=k.phase_known, anchor=j))
            for l, path in enumerate(anchor.paths):
                first_los = anchor.los and l == 0
                if not first_los:
                    if not zero_aperture:
                        entries.append(
                            ParamEntry(
                                f"gamma[{j}][{l}]", path.angle_bias, "angle",
                                known=False, anchor=j, path=l,
                            )
                        )
                    entries.append(
                        ParamEntry(
                            f"b[{j}][{l}]", path.range_bias, "length",
                            known=False, anchor=j, path=l,
                        )
                    )
                entries.append(
                    ParamEntry(
                        f"alpha[{j}][{l}]", path.amplitude, "gain",
                        known=False, anchor=j, path=l,
                    )
                )
        return cls(entries)

    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    def unknown_names(self) -> Tuple[str, ...]:
        return tuple(e.name for e in self.entries if not e.known)

    def index(self, name: str) -> int:
        return self._index[name]

    def step_size(self, name: str, rel_step: float) -> float:
        entry = self.entries[self.index(name)]
        return rel_step * max(abs(entry.value), 1.0)


class _WaveformEvaluator:
    """Band-limited (trigonometric) interpolation of the sampled baseband signal.

    Evaluates the series' periodic Fourier model at arbitrary times; exact
    for signals whose support stays inside the sample window under all
    applied delays.
    """

    def __init__(self, series: ComplexSampleSeries, chunk: int = 1 << 22):
        self._coeffs = np.fft.fft(series.samples) / series.n_samples
        self._freqs = np.fft.fftfreq(series.n_samples, series.sample_period)
        self._t0 = series.t0
        self._window = series.n_samples * series.sample_period
        self._chunk = max(1, chunk // series.n_samples)
        self._padded: dict[int, np.ndarray] = {}
        support = np.abs(series.samples) > 1e-9 * np.abs(series.samples).max()
        times = series.times()[support]
        self.support = (float(times.min()), float(times.max()))

    def __call__(self, times: np.ndarray) -> np.ndarray:
        flat = np.ravel(times) - self._t0
        out = np.empty(flat.size, dtype=complex)
        for start in range(0, flat.size, self._chunk):
            block = flat[start : start + self._chunk]
            out[start : start + self._chunk] = (
                np.exp(1j * TWO_PI * np.outer(block, self._freqs)) @ self._coeffs
            )
        return out.reshape(np.shape(times))

    def _padded_layout(self, n_grid: int) -> Tuple[np.ndarray, np.ndarray]:
        """Zero-padded spectrum and its bin frequencies for an n_grid-point grid."""
        if n_grid not in self._padded:
            n_s = self._coeffs.size
            spec = np.zeros(n_grid, dtype=complex)
            half = n_s // 2
            spec[:half] = self._coeffs[:half]
            spec[n_grid - (n_s - half):] = self._coeffs[half:]
            self._padded[n_grid] = spec
        spec = self._padded[n_grid]
        return spec, np.fft.fftfreq(n_grid, self._window / n_grid)

    def delayed_on_grid(self, grid: "TimeGrid", delays: np.ndarray) -> Optional[np.ndarray]:
        """s0(t_n - delay_k) for constant per-antenna delays, via spectral phase ramps.

        Exact (equal to the direct evaluation) when the grid window length
        matches the signal window; returns None otherwise so callers fall
        back to direct evaluation.
        """
        if grid.n_samples < self._coeffs.size:
            return None
        if not math.isclose(grid.n_samples * grid.dt, self._window, rel_tol=1e-9):
            return None
        spec, freqs = self._padded_layout(grid.n_samples)
        shift = grid.t_start - self._t0 - np.asarray(delays)[:, None]
        ramped = spec[None, :] * np.exp(1j * TWO_PI * freqs[None, :] * shift)
        return np.fft.ifft(ramped, axis=1) * grid.n_samples

    def affine_on_grid(self, grid: "TimeGrid", offsets: np.ndarray, scale: float) -> np.ndarray:
        """s0(scale * t_n + offset_k) on the uniform grid via a chirp-z transform.

        Handles the Doppler-compressed time axis: the evaluation times stay
        uniformly spaced but with a step incommensurate with the signal
        grid. Identical to direct evaluation of the trigonometric
        interpolant, at FFT-like cost.
        """
        from scipy.signal import czt

        n_s = self._coeffs.size
        half = n_s // 2
        # fftshift order: spectral index s maps to signed harmonic s - half
        shifted_coeffs = np.fft.fftshift(self._coeffs)
        harmonics = np.arange(n_s) - half
        base = np.exp(
            1j
            * TWO_PI
            * (scale * grid.t_start + np.asarray(offsets)[:, None] - self._t0)
            * harmonics[None, :]
            / self._window
        )
        w = np.exp(1j * TWO_PI * scale * grid.dt / self._window)
        out = czt(shifted_coeffs[None, :] * base, m=grid.n_samples, w=w, a=1.0 + 0.0j, axis=1)
        correction = np.exp(-1j * TWO_PI * half * scale * grid.dt / self._window * np.arange(grid.n_samples))
        return out * correction[None, :]


def _unpack(params: ParameterVector, values: np.ndarray) -> Dict[str, float]:
    return {e.name: float(values[i]) for i, e in enumerate(params.entries)}


def mean_waveform(
    scenario: Scenario,
    params: ParameterVector,
    grid: TimeGrid,
    values: Optional[np.ndarray] = None,
    evaluator: Optional[_WaveformEvaluator] = None,
    amplitude_scale: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Noiseless complex mean of every (anchor, antenna) pair on the grid.

    Static delays are constant per pair; motion makes them affine in time
    (Doppler compression). Fractional delays evaluate the band-limited
    interpolant of the sampled baseband signal; the carrier factor is
    applied analytically from the same delays.
    """
    if scenario.waveform is None:
        raise ValueError("the oracle needs a sampled baseband waveform")
    if values is None:
        values = params.values()
    if evaluator is None:
        evaluator = _WaveformEvaluator(scenario.waveform)
    if amplitude_scale is None:
        amplitude_scale = np.ones(len(scenario.anchors))
    p = _unpack(params, values)

    c = scenario.c
    fc = scenario.signal.carrier
    t = grid.times()
    d = np.asarray(scenario.array.radii)
    psi_k = np.asarray(scenario.array.angles)
    n_a = scenario.array.n_antennas
    dyn = scenario.is_dynamic
    vr = (p.get("v", 0.0) / c) if dyn else 0.0

    out = np.zeros((len(scenario.anchors), n_a, grid.n_samples), dtype=complex)
    max_delay = 0.0
    for j, anchor in enumerate(scenario.anchors):
        dist, phi = anchor_range_bearing(anchor.position, Position2D(p["x"], p["y"]))
        tau_j = dist / c
        for l, _path in enumerate(anchor.paths):
            first_los = anchor.los and l == 0
            gamma = 0.0 if first_los else p.get(f"gamma[{j}][{l}]", 0.0)
            bias = 0.0 if first_los else p[f"b[{j}][{l}]"]
            alpha = p[f"alpha[{j}][{l}]"] * amplitude_scale[j]
            geo = c * tau_j - d * np.cos(phi + gamma - p["psi"] - psi_k) + bias  # (n_a,)
            baseband = None
            if dyn:
                delta = vr * math.cos(phi + gamma - p["psi_d"])
                ref_t = scenario.motion.reference_time
                delay = geo[:, None] / (c * (1.0 - delta)) - (t[None, :] - ref_t) * (
                    delta / (1.0 - delta)
                )
                scale = 1.0 / (1.0 - delta)
                offsets = -(geo / c + ref_t * delta) / (1.0 - delta)
                baseband = evaluator.affine_on_grid(grid, offsets, scale)
            else:
                delay = np.broadcast_to(geo[:, None] / c, (n_a, grid.n_samples))
                baseband = evaluator.delayed_on_grid(grid, geo / c)
            max_delay = max(max_delay, float(delay.max()))
            shifted = t[None, :] - delay
            if baseband is None:
                baseband = evaluator(shifted)
            out[j] += alpha * baseband * np.exp(1j * (TWO_PI * fc * shifted + p[f"xi[{j}]"]))
    if evaluator.support[1] + max_delay > grid.t_end + 1e-12:
        warnings.warn(
            "delayed signal support leaves the observation grid; results are truncated"
        )
    return out


def _anchor_amplitude_scales(scenario: Scenario) -> Tuple[np.ndarray, float]:
    """Per-anchor gains making first-path SNRs consistent with unit noise PSD.

    The oracle fixes N0 = 1 and rescales each anchor's path amplitudes by a
    common factor so |alpha_1|^2 E / N0 matches the anchor's stated SNR; the
    relative multipath structure is preserved.
    """
    n0 = 1.0
    energy = scenario.waveform.energy()
    scales = np.empty(len(scenario.anchors))
    for j, anchor in enumerate(scenario.anchors):
        a1 = abs(anchor.paths[0].amplitude)
        scales[j] = math.sqrt(anchor.snr_first_path * n0 / energy) / a1
    return scales, n0


@dataclass(frozen=True)
class FimResult:
    """A full FIM over the unknown parameters, with their names."""

    matrix: np.ndarray
    labels: Tuple[str, ...]


def numerical_fim(
    scenario: Scenario,
    grid: Optional[TimeGrid] = None,
    params: Optional[ParameterVector] = None,
    rel_step: float = 1e-6,
    real_passband: bool = False,
) -> FimResult:
    """Full FIM over the unknown parameters by central differences of the mean.

    For the complex observation model the Gaussian identity gives
    J_il = (2/N0) * sum_{j,k} Int Re{(dmu/dth_i)* (dmu/dth_l)} dt; sensitivities
    are central differences with a relative step scaled per parameter (with an
    absolute fallback for zero-magnitude parameters), and time integration is
    trapezoidal. With ``real_passband`` the same construction runs on the
    real model sqrt(2)*Re{mu} with per-dimension noise N0/2.
    """
    if grid is None:
        grid = TimeGrid.for_scenario(scenario)
    if params is None:
        params = ParameterVector.from_scenario(scenario)
    scales, n0 = _anchor_amplitude_scales(scenario)
    evaluator = _WaveformEvaluator(scenario.waveform)

    if real_passband:
        band = estimate_band_limit(scenario.waveform)
        if band >= scenario.signal.carrier:
            warnings.warn(
                "baseband is not band limited by the carrier; real and complex "
                "models need not generate the same FIM"
            )

    unknown = params.unknown_names()
    base_values = params.values()
    weights = np.full(grid.n_samples, grid.dt)  # trapezoid: half weight at the ends
    weights[0] *= 0.5
    weights[-1] *= 0.5
    n_series = len(scenario.anchors) * scenario.array.n_antennas
    w_flat = np.tile(weights, n_series)

    diffs = np.empty((len(unknown), n_series * grid.n_samples), dtype=complex)
    for i, name in enumerate(unknown):
        h = params.step_size(name, rel_step)
        idx = params.index(name)
        plus = base_values.copy()
        plus[idx] += h
        minus = base_values.copy()
        minus[idx] -= h
        mu_plus = mean_waveform(scenario, params, grid, plus, evaluator, scales)
        mu_minus = mean_waveform(scenario, params, grid, minus, evaluator, scales)
        diff = (mu_plus - mu_minus) / (2.0 * h)
        if real_passband:
            diff = math.sqrt(2.0) * diff.real.astype(complex)
        diffs[i] = diff.reshape(-1)

    raw = np.real(np.conj(diffs) @ (diffs * w_flat).T)
    return FimResult((2.0 / n0) * 0.5 * (raw + raw.T), unknown)


def oracle_efim(
    scenario: Scenario,
    keep: Sequence[str] = ("x", "y"),
    grid: Optional[TimeGrid] = None,
    fim: Optional[FimResult] = None,
    extra_nuisance: Sequence[str] = (),
    drop: Sequence[str] = (),
) -> EfimResult:
    """Schur-complement the numerical FIM onto ``keep``.

    ``drop`` removes parameters from the FIM entirely (treat as known);
    everything else that is not kept is eliminated as nuisance. Used as the
    ground truth for every closed-form bound.
    """
    if fim is None:
        fim = numerical_fim(scenario, grid=grid)
    labels = list(fim.labels)
    for name in list(keep) + list(drop):
        if name not in labels:
            raise KeyError(f"parameter {name!r} not in the FIM ({labels})")
    kept = [labels.index(n) for n in keep]
    nuisance = [
        i
        for i, n in enumerate(labels)
        if n not in keep and n not in drop
    ]
    order = kept + nuisance
    sub = fim.matrix[np.ix_(order, order)]
    try:
        reduced = schur_complement(sub, len(kept))
    except SingularNuisanceError:
        reduced = schur_complement(sub, len(kept), allow_pseudoinverse=True)
    return EfimResult(reduced, tuple(keep), "oracle")


def real_passband_fim(
    scenario: Scenario,
    grid: Optional[TimeGrid] = None,
    params: Optional[ParameterVector] = None,
) -> FimResult:
    """FIM of the real passband model sqrt(2)Re{mu} with noise N0/2 per dimension.

    Must match the complex-model FIM whenever the baseband signal is band
    limited by the carrier; a violated band limit is reported as a warning,
    not an error, so the mismatch itself can be observed.
    """
    return numerical_fim(scenario, grid=grid, params=params, real_passband=True)


def effective_poc(scenario: Scenario, grid: Optional[TimeGrid] = None) -> np.ndarray:
    """Operational path-overlap surrogate per anchor, in [0, 1].

    For each LOS anchor, compares the ranging information (the projection of
    the position EFIM on the line-of-sight direction, with carrier phase and
    orientation known and all multipath descriptors as nuisance parameters)
    against the same quantity for the anchor's first path alone. NLOS
    anchors yield NaN. Angle biases are identifiable only through the array
    aperture and are dropped automatically for zero-aperture arrays.
    """
    out = np.full(len(scenario.anchors), np.nan)
    knowledge = KnowledgeFlags(phase_known=True, orientation_known=True)
    for j, anchor in enumerate(scenario.anchors):
        if not anchor.los:
            continue
        base = dataclasses.replace(
            scenario, anchors=(anchor,), motion=None, knowledge=knowledge
        )
        single = dataclasses.replace(
            base, anchors=(dataclasses.replace(anchor, paths=anchor.paths[:1]),)
        )
        info_multi = _ranging_information(base, grid)
        info_single = _ranging_information(single, grid)
        if info_single <= 0.0:
            out[j] = 1.0
        else:
            out[j] = float(np.clip(1.0 - info_multi / info_single, 0.0, 1.0))
    return out


def _ranging_information(scenario: Scenario, grid: Optional[TimeGrid]) -> float:
    _, phi = anchor_range_bearing(scenario.anchors[0].position, scenario.pose.reference)
    efim = oracle_efim(scenario, keep=("x", "y"), grid=grid)
    q1 = np.array([math.cos(phi), math.sin(phi)])
    return float(q1 @ efim.matrix @ q1)

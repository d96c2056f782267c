"""Spectral and temporal summaries of the sampled baseband signal.

The quantities computed here feed every bound formula: the effective
baseband bandwidth, the baseband-carrier correlation (BCC), the rms time
duration and the signal energy. Moments are evaluated on the discrete
Fourier spectrum of the sample series without zero padding; for signals
that are either periodic-on-grid (tones) or compactly supported inside
the sample window (pulses), the resulting rectangle sums reproduce the
continuous-time integrals to machine precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi


class UndefinedBccError(ValueError):
    """Raised when the baseband-carrier correlation is requested for beta == 0."""


@dataclass(frozen=True)
class ComplexSampleSeries:
    """Uniformly sampled complex baseband signal.

    ``samples`` holds the complex values, ``sample_period`` the spacing in
    seconds and ``t0`` the absolute time of the first sample.
    """

    samples: np.ndarray
    sample_period: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("need a 1-D series with at least 2 samples")
        if not self.sample_period > 0.0:
            raise ValueError(f"sample_period must be > 0, got {self.sample_period}")
        if not np.all(np.isfinite(samples.view(float))):
            raise ValueError("samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.energy() <= 0.0:
            raise ValueError("signal energy must be positive")

    @property
    def n_samples(self) -> int:
        return self.samples.size

    def times(self) -> np.ndarray:
        return self.t0 + self.sample_period * np.arange(self.n_samples)

    def duration(self) -> float:
        return self.n_samples * self.sample_period

    def energy(self) -> float:
        """Signal energy, rectangle rule (exact under the band-limited model)."""
        return float(self.sample_period * np.sum(np.abs(self.samples) ** 2))

    def spectrum(self) -> Tuple[np.ndarray, np.ndarray]:
        """Frequency bins and continuous-time spectrum values on them.

        The absolute time origin enters as a linear phase so that phase
        sensitive quantities see the true time axis.
        """
        n = self.n_samples
        freqs = np.fft.fftfreq(n, self.sample_period)
        spec = self.sample_period * np.fft.fft(self.samples)
        spec *= np.exp(-1j * TWO_PI * freqs * self.t0)
        return freqs, spec


def _spectral_moments(sig: ComplexSampleSeries) -> Tuple[float, float, float]:
    """(m0, m1, m2): integrals of f^k |S(f)|^2 over the discrete spectrum."""
    freqs, spec = sig.spectrum()
    df = 1.0 / (sig.n_samples * sig.sample_period)
    power = np.abs(spec) ** 2
    m0 = float(np.sum(power) * df)
    m1 = float(np.sum(freqs * power) * df)
    m2 = float(np.sum(freqs**2 * power) * df)
    return m0, m1, m2


def effective_bandwidth(sig: ComplexSampleSeries) -> float:
    """Root normalized second spectral moment of the baseband signal, in Hz."""
    m0, _, m2 = _spectral_moments(sig)
    return math.sqrt(m2 / m0)


def bcc(sig: ComplexSampleSeries) -> float:
    """Baseband-carrier correlation: normalized first spectral moment, in [-1, 1].

    Equals +/-1 exactly for a single tone (all energy at one frequency) and 0
    for spectra symmetric about zero. Undefined when the effective bandwidth
    vanishes.
    """
    m0, m1, m2 = _spectral_moments(sig)
    if m2 <= 0.0:
        raise UndefinedBccError("bcc is undefined for a zero-bandwidth signal")
    return float(np.clip(m1 / math.sqrt(m0 * m2), -1.0, 1.0))


def recentre(sig: ComplexSampleSeries) -> Tuple[ComplexSampleSeries, float]:
    """Shift the spectrum so the recentred signal has zero BCC.

    Returns the modulated series and the applied frequency shift. Callers
    must pair the result with the effective carrier ``f_c + shift``.
    """
    m0, m1, m2 = _spectral_moments(sig)
    if m2 <= 0.0:
        raise UndefinedBccError("cannot recentre a zero-bandwidth signal")
    shift = m1 / m0  # equals bcc * beta
    if shift == 0.0:
        return sig, 0.0
    samples = sig.samples * np.exp(-1j * TWO_PI * shift * sig.times())
    return ComplexSampleSeries(samples, sig.sample_period, sig.t0), float(shift)


def trms(sig: ComplexSampleSeries) -> float:
    """Energy-weighted standard deviation of time, in seconds.

    Identical to the pairwise form sqrt(sum_{t1<t2} (t2-t1)^2 w1 w2 / E^2)
    via 2*(m2*m0 - m1^2) = sum over ordered pairs; invariant under time
    shifts and amplitude scaling.
    """
    w = np.abs(sig.samples) ** 2
    t = sig.times()
    total = float(np.sum(w))
    mean = float(np.sum(w * t)) / total
    var = float(np.sum(w * (t - mean) ** 2)) / total
    return math.sqrt(max(var, 0.0))


def balanced_phase_residual(sig: ComplexSampleSeries) -> float:
    """Weighted group-delay asymmetry of the spectrum, normalized by E*beta.

    Zero for real symmetric pulses and, in expectation, for constant-envelope
    random-phase signals; nonzero for chirps. Uses the identity
    |S|^2 phi'(f) = Im{S*(f) S'(f)} to avoid phase unwrapping.
    """
    freqs, spec = sig.spectrum()
    df = 1.0 / (sig.n_samples * sig.sample_period)
    # d/df of the spectrum == transform of -j*2*pi*t * s(t)
    deriv_series = -1j * TWO_PI * sig.times() * sig.samples
    dspec = sig.sample_period * np.fft.fft(deriv_series)
    dspec *= np.exp(-1j * TWO_PI * freqs * sig.t0)
    integrand = freqs * np.imag(np.conj(spec) * dspec)
    raw = float(np.sum(integrand) * df)
    energy = sig.energy()
    beta = effective_bandwidth(sig)
    if beta == 0.0:
        return 0.0
    return raw / (energy * beta)


def snr_from_db(snr_db: float) -> float:
    """Decibel power ratio to linear."""
    return 10.0 ** (snr_db / 10.0)


def first_path_snr(alpha: float, n0: float, sig: ComplexSampleSeries) -> float:
    """Received linear SNR |alpha|^2 * E / N0 of one path."""
    if not n0 > 0.0:
        raise ValueError(f"noise spectral density must be > 0, got {n0}")
    return abs(alpha) ** 2 * sig.energy() / n0


@dataclass(frozen=True)
class SignalSummary:
    """Scalar signal descriptors consumed by the closed-form bounds.

    ``band_limit`` is the (one-sided) support bound B of the baseband
    spectrum, ``t_ob`` the observation window length.
    """

    beta: float
    bcc: float
    carrier: float
    band_limit: float
    trms: float = 0.0
    energy: float = 1.0
    t_ob: float = 0.0

    def __post_init__(self) -> None:
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")
        if abs(self.bcc) > 1.0 + 1e-12:
            raise ValueError(f"bcc must lie in [-1, 1], got {self.bcc}")
        if self.carrier < 0.0:
            raise ValueError("carrier frequency must be >= 0")
        if self.beta > self.band_limit * (1.0 + 1e-9):
            raise ValueError("beta cannot exceed the band limit")

    def effective(self) -> Tuple[float, float]:
        """(beta, carrier) after internal recentring to zero BCC.

        The recentred bandwidth is beta*sqrt(1-bcc^2) and the effective
        carrier f_c + bcc*beta; the unknown-phase bounds are evaluated in
        this normalized form.
        """
        g = float(np.clip(self.bcc, -1.0, 1.0))
        return self.beta * math.sqrt(max(0.0, 1.0 - g * g)), self.carrier + g * self.beta


def estimate_band_limit(sig: ComplexSampleSeries, threshold: float = 1e-6) -> float:
    """Largest |f| whose spectral amplitude exceeds ``threshold`` times the peak."""
    freqs, spec = sig.spectrum()
    mag = np.abs(spec)
    keep = mag > threshold * mag.max()
    return float(np.abs(freqs[keep]).max()) if np.any(keep) else 0.0


def summarize(
    sig: ComplexSampleSeries,
    carrier: float,
    band_limit: Optional[float] = None,
    t_ob: Optional[float] = None,
) -> SignalSummary:
    """Build a SignalSummary from a sampled waveform."""
    beta = effective_bandwidth(sig)
    try:
        gamma = bcc(sig)
    except UndefinedBccError:
        gamma = 0.0
    band = estimate_band_limit(sig) if band_limit is None else float(band_limit)
    return SignalSummary(
        beta=beta,
        bcc=gamma,
        carrier=float(carrier),
        band_limit=max(band, beta),
        trms=trms(sig),
        energy=sig.energy(),
        t_ob=sig.duration() if t_ob is None else float(t_ob),
    )


# ---------------------------------------------------------------------------
# Signal construction and file I/O
# ---------------------------------------------------------------------------


def tone(freq: float, n: int, sample_period: float, amplitude: float = 1.0, t0: float = 0.0) -> ComplexSampleSeries:
    """Complex exponential at ``freq``; exact when freq lies on a DFT bin."""
    t = t0 + sample_period * np.arange(n)
    return ComplexSampleSeries(amplitude * np.exp(1j * TWO_PI * freq * t), sample_period, t0)


def multi_tone(
    freqs: Tuple[float, ...],
    amplitudes: Tuple[float, ...],
    n: int,
    sample_period: float,
    t0: float = 0.0,
) -> ComplexSampleSeries:
    t = t0 + sample_period * np.arange(n)
    samples = np.zeros(n, dtype=complex)
    for f, a in zip(freqs, amplitudes):
        samples += a * np.exp(1j * TWO_PI * f * t)
    return ComplexSampleSeries(samples, sample_period, t0)


def gaussian_pulse(
    n: int,
    sample_period: float,
    t_center: float,
    sigma_t: float,
    freq_offset: float = 0.0,
    t0: float = 0.0,
) -> ComplexSampleSeries:
    """Gaussian envelope, optionally modulated to a nonzero center frequency.

    The envelope should decay well inside the window so that the series is
    effectively compactly supported and band limited.
    """
    t = t0 + sample_period * np.arange(n)
    env = np.exp(-0.5 * ((t - t_center) / sigma_t) ** 2)
    samples = env * np.exp(1j * TWO_PI * freq_offset * t)
    return ComplexSampleSeries(samples, sample_period, t0)


def rect_pulse(
    n: int,
    sample_period: float,
    t_start: float,
    duration: float,
    t0: float = 0.0,
) -> ComplexSampleSeries:
    t = t0 + sample_period * np.arange(n)
    samples = ((t >= t_start) & (t < t_start + duration)).astype(complex)
    return ComplexSampleSeries(samples, sample_period, t0)


def linear_chirp(
    n: int,
    sample_period: float,
    rate: float,
    t0: float = 0.0,
) -> ComplexSampleSeries:
    """Constant-envelope chirp exp(j*pi*rate*t^2); violates the balanced-phase property."""
    t = t0 + sample_period * np.arange(n)
    return ComplexSampleSeries(np.exp(1j * math.pi * rate * t**2), sample_period, t0)


def write_signal_file(sig: ComplexSampleSeries, path: str) -> None:
    """Write the plain-text sampled-signal format.

    First line ``sample_rate_hz=<value> t0_s=<value>``, then one ``re,im``
    pair per line with '.' as the decimal separator.
    """
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"sample_rate_hz={float(1.0 / sig.sample_period)!r} t0_s={float(sig.t0)!r}\n")
        for v in sig.samples:
            fh.write(f"{float(v.real)!r},{float(v.imag)!r}\n")


def read_signal_file(path: str) -> ComplexSampleSeries:
    """Read the plain-text sampled-signal format written by write_signal_file."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        fields = dict(item.split("=", 1) for item in header.split())
        try:
            rate = float(fields["sample_rate_hz"])
            t0 = float(fields["t0_s"])
        except KeyError as exc:
            raise ValueError(f"malformed signal file header: {header!r}") from exc
        if not rate > 0.0:
            raise ValueError(f"sample rate must be > 0, got {rate}")
        values = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"line {line_no}: expected 're,im', got {line!r}")
            values.append(complex(float(parts[0]), float(parts[1])))
    return ComplexSampleSeries(np.array(values, dtype=complex), 1.0 / rate, t0)

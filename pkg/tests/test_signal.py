import math

import numpy as np
import pytest

from arrayloc import (
    ComplexSampleSeries,
    balanced_phase_residual,
    bcc,
    effective_bandwidth,
    first_path_snr,
    read_signal_file,
    recentre,
    snr_from_db,
    summarize,
    trms,
    write_signal_file,
)
from arrayloc.signal import (
    UndefinedBccError,
    estimate_band_limit,
    gaussian_pulse,
    linear_chirp,
    multi_tone,
    rect_pulse,
    tone,
)

N = 1024
DT = 1.0 / N  # one-second window, 1 Hz bins


class TestEffectiveBandwidth:
    def test_single_tone(self):
        sig = tone(5.0, N, DT)
        assert effective_bandwidth(sig) == pytest.approx(5.0, rel=1e-12)

    def test_two_symmetric_tones(self):
        sig = multi_tone((7.0, -7.0), (1.0, 1.0), N, DT)
        assert effective_bandwidth(sig) == pytest.approx(7.0, rel=1e-12)

    def test_dc_only(self):
        sig = ComplexSampleSeries(np.ones(N, dtype=complex), DT)
        assert effective_bandwidth(sig) == 0.0

    def test_zero_energy_rejected(self):
        with pytest.raises(ValueError):
            ComplexSampleSeries(np.zeros(N, dtype=complex), DT)


class TestBcc:
    def test_single_positive_tone_is_plus_one(self):
        assert bcc(tone(5.0, N, DT)) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_spectrum_is_zero(self):
        sig = multi_tone((4.0, -4.0), (1.0, 1.0), N, DT)
        assert bcc(sig) == pytest.approx(0.0, abs=1e-12)

    def test_two_equal_opposite_tones_cancel_first_moment(self):
        sig = multi_tone((9.0, -9.0), (0.7, 0.7), N, DT)
        assert bcc(sig) == pytest.approx(0.0, abs=1e-12)

    def test_undefined_for_dc(self):
        sig = ComplexSampleSeries(np.ones(N, dtype=complex), DT)
        with pytest.raises(UndefinedBccError):
            bcc(sig)


class TestRecentre:
    def test_zero_bcc_input_unchanged(self):
        sig = multi_tone((4.0, -4.0), (1.0, 1.0), N, DT)
        out, shift = recentre(sig)
        assert shift == 0.0
        np.testing.assert_array_equal(out.samples, sig.samples)

    def test_single_tone_moves_to_dc(self):
        sig = tone(5.0, N, DT)
        out, shift = recentre(sig)
        assert shift == pytest.approx(5.0, rel=1e-12)
        assert effective_bandwidth(out) == pytest.approx(0.0, abs=1e-9)

    def test_asymmetric_two_tone(self):
        # mean frequency (1*3 + 1*9)/2 = 6 Hz; recentred spectrum is +-3 Hz
        sig = multi_tone((3.0, 9.0), (1.0, 1.0), N, DT)
        out, shift = recentre(sig)
        assert shift == pytest.approx(6.0, rel=1e-12)
        assert abs(bcc(out)) < 1e-9

    def test_second_central_moment_identity(self):
        # after recentring, beta' = beta * sqrt(1 - bcc^2)
        sig = gaussian_pulse(N, DT, t_center=0.5, sigma_t=0.05, freq_offset=3.0)
        beta = effective_bandwidth(sig)
        gamma = bcc(sig)
        out, _ = recentre(sig)
        assert abs(bcc(out)) < 1e-9
        expected = beta * math.sqrt(1.0 - gamma**2)
        assert effective_bandwidth(out) == pytest.approx(expected, rel=1e-9)


class TestTrms:
    def test_rectangular_envelope(self):
        sig = rect_pulse(8192, 1.0 / 8192, t_start=0.25, duration=0.5)
        assert trms(sig) == pytest.approx(0.5 / math.sqrt(12.0), rel=1e-6)

    def test_single_sample_spike(self):
        samples = np.zeros(N, dtype=complex)
        samples[100] = 1.0
        # a second infinitesimal sample keeps the energy finite without
        # widening the spread beyond numerical zero
        samples[101] = 1e-200
        sig = ComplexSampleSeries(samples, DT)
        assert trms(sig) == pytest.approx(0.0, abs=1e-12)

    def test_time_shift_invariance(self):
        a = gaussian_pulse(N, DT, t_center=0.3, sigma_t=0.04)
        b = gaussian_pulse(N, DT, t_center=0.6, sigma_t=0.04)
        assert trms(a) == pytest.approx(trms(b), rel=1e-9)

    def test_matches_pairwise_double_sum(self, rng):
        # brute-force oracle: the normalized pairwise square spread
        samples = rng.normal(size=256) + 1j * rng.normal(size=256)
        sig = ComplexSampleSeries(samples, 1.0 / 256)
        w = np.abs(sig.samples) ** 2
        t = sig.times()
        total = 0.0
        for i in range(len(t)):
            for j in range(i + 1, len(t)):
                total += (t[j] - t[i]) ** 2 * w[i] * w[j]
        expected = math.sqrt(total / np.sum(w) ** 2)
        assert trms(sig) == pytest.approx(expected, rel=1e-9)


class TestBalancedPhase:
    def test_real_symmetric_pulse(self):
        sig = gaussian_pulse(N, DT, t_center=0.5, sigma_t=0.05)
        assert abs(balanced_phase_residual(sig)) < 1e-10

    def test_constant_envelope_random_phase(self, rng):
        # random-phase constant-envelope: residual small in expectation,
        # an order of magnitude below a chirp of comparable bandwidth
        values = []
        for _ in range(5):
            phases = rng.uniform(0, 2 * math.pi, N)
            sig = ComplexSampleSeries(np.exp(1j * phases), DT)
            values.append(abs(balanced_phase_residual(sig)))
        assert np.mean(values) < 0.3

    def test_chirp_is_unbalanced(self):
        sig = linear_chirp(N, DT, rate=40.0)
        assert abs(balanced_phase_residual(sig)) > 0.5


class TestSnr:
    def test_db_conversion(self):
        assert snr_from_db(30.0) == pytest.approx(1000.0, rel=1e-12)

    def test_first_path_snr(self):
        sig = rect_pulse(N, DT, t_start=0.0, duration=1.0)  # energy 1
        assert sig.energy() == pytest.approx(1.0)
        assert first_path_snr(1.0, 0.001, sig) == pytest.approx(1000.0)

    def test_quadratic_in_amplitude(self):
        sig = rect_pulse(N, DT, t_start=0.0, duration=1.0)
        assert first_path_snr(2.0, 1.0, sig) == pytest.approx(4.0 * first_path_snr(1.0, 1.0, sig))

    def test_nonpositive_noise_rejected(self):
        sig = rect_pulse(N, DT, t_start=0.0, duration=1.0)
        with pytest.raises(ValueError):
            first_path_snr(1.0, 0.0, sig)


class TestInvariants:
    def test_parseval(self):
        sig = gaussian_pulse(N, DT, t_center=0.4, sigma_t=0.06, freq_offset=2.0)
        freqs, spec = sig.spectrum()
        df = 1.0 / (sig.n_samples * sig.sample_period)
        spectral_energy = float(np.sum(np.abs(spec) ** 2) * df)
        assert spectral_energy == pytest.approx(sig.energy(), rel=1e-9)

    def test_amplitude_scaling_invariance(self):
        base = gaussian_pulse(N, DT, t_center=0.5, sigma_t=0.05, freq_offset=1.0)
        scaled = ComplexSampleSeries(base.samples * 7.3, base.sample_period, base.t0)
        assert effective_bandwidth(scaled) == pytest.approx(effective_bandwidth(base), rel=1e-12)
        assert bcc(scaled) == pytest.approx(bcc(base), rel=1e-12)
        assert trms(scaled) == pytest.approx(trms(base), rel=1e-12)

    def test_summary_fields(self):
        sig = gaussian_pulse(N, DT, t_center=0.5, sigma_t=0.05)
        summary = summarize(sig, carrier=40.0)
        assert summary.carrier == 40.0
        assert summary.beta <= summary.band_limit
        assert summary.trms == pytest.approx(trms(sig), rel=1e-12)
        assert summary.energy == pytest.approx(sig.energy(), rel=1e-12)

    def test_band_limit_estimate_brackets_tone(self):
        sig = multi_tone((3.0, 11.0), (1.0, 0.5), N, DT)
        assert estimate_band_limit(sig) == pytest.approx(11.0)


class TestSignalFile:
    def test_round_trip(self, rng, tmp_path):
        samples = rng.normal(size=64) + 1j * rng.normal(size=64)
        sig = ComplexSampleSeries(samples, 1.0 / 640.0, t0=0.125)
        path = tmp_path / "sig.txt"
        write_signal_file(sig, str(path))
        back = read_signal_file(str(path))
        assert back.sample_period == pytest.approx(sig.sample_period, rel=1e-15)
        assert back.t0 == sig.t0
        np.testing.assert_array_equal(back.samples, sig.samples)

    def test_header_format(self, tmp_path):
        sig = tone(2.0, 16, 0.0625)
        path = tmp_path / "sig.txt"
        write_signal_file(sig, str(path))
        first, second = path.read_text().splitlines()[:2]
        assert first.startswith("sample_rate_hz=16.0 t0_s=0")
        assert len(second.split(",")) == 2

    def test_malformed_header_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("rate=16\n1,0\n")
        with pytest.raises(ValueError):
            read_signal_file(str(path))

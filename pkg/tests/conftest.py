"""Shared builders for the test suite.

All scenario-level tests run in scaled units (c = 300, carriers of tens of
Hz) so oracle grids stay small; closed forms are dimensionally covariant.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from arrayloc import (
    AgentMotion,
    AnchorNode,
    AntennaArray,
    ArrayPose,
    KnowledgeFlags,
    Position2D,
    Scenario,
    SignalSummary,
    summarize,
    uca,
    ula,
)
from arrayloc.signal import gaussian_pulse

SCALED_C = 300.0


def make_pulse(fc=40.0, n=512, sigma_t=1 / 18, t_center=0.45, offset=0.0):
    wave = gaussian_pulse(
        n=n, sample_period=1.0 / n, t_center=t_center, sigma_t=sigma_t, freq_offset=offset
    )
    return wave, summarize(wave, carrier=fc)


def simple_summary(beta=2.0, fc=60.0, gamma=0.0, trms=0.1, band=None):
    return SignalSummary(
        beta=beta,
        bcc=gamma,
        carrier=fc,
        band_limit=band if band is not None else max(4.0 * beta, 1e-9),
        trms=trms,
        t_ob=1.0,
    )


def anchor_at(x, y, snr=1000.0, **kw):
    return AnchorNode(Position2D(x, y), snr_first_path=snr, **kw)


def static_scenario(
    anchors=None,
    array=None,
    orientation=0.6,
    signal=None,
    knowledge=None,
    waveform=None,
    agent=(0.0, 0.0),
    c=SCALED_C,
):
    return Scenario(
        anchors=tuple(anchors or (anchor_at(12.0, 3.0), anchor_at(-4.0, 9.0, snr=400.0))),
        array=array or ula(3, 0.4),
        pose=ArrayPose(Position2D(*agent), orientation),
        signal=signal or simple_summary(),
        knowledge=knowledge or KnowledgeFlags(phase_known=False, orientation_known=True),
        waveform=waveform,
        c=c,
    )


def dynamic_scenario(
    speed=0.5,
    direction=0.3,
    anchors=None,
    array=None,
    signal=None,
    knowledge=None,
    waveform=None,
    reference_time=0.5,
):
    return Scenario(
        anchors=tuple(
            anchors
            or (
                anchor_at(11.0, 4.0, snr=800.0),
                anchor_at(-6.0, 8.0, snr=500.0),
                anchor_at(2.0, -12.0, snr=300.0),
            )
        ),
        array=array or uca(3, 0.3),
        pose=ArrayPose(Position2D(0.0, 0.0), 0.9),
        signal=signal or simple_summary(beta=1.1, fc=100.0, trms=0.07, band=8.0),
        knowledge=knowledge
        or KnowledgeFlags(
            phase_known=False, orientation_known=True, direction_known=True, speed_known=True
        ),
        motion=AgentMotion(speed=speed, direction=direction, reference_time=reference_time),
        waveform=waveform,
        c=SCALED_C,
    )


def random_array(rng: np.random.Generator, n_max=8, scale=1.0) -> AntennaArray:
    n = int(rng.integers(2, n_max + 1))
    radii = tuple(float(v) for v in rng.uniform(0.0, scale, n))
    angles = tuple(float(v) for v in rng.uniform(0.0, 2 * math.pi, n))
    return AntennaArray(radii, angles)


def loewner_geq(a: np.ndarray, b: np.ndarray, tol_scale: float = 1e-9) -> bool:
    """a >= b in the Loewner order, up to a spectral-norm-scaled floor."""
    diff = a - b
    floor = tol_scale * max(np.linalg.norm(a, 2), np.linalg.norm(b, 2), 1e-300)
    return float(np.linalg.eigvalsh(0.5 * (diff + diff.T)).min()) >= -floor


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

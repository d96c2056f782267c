"""Bundled scaled-unit scenarios that validate every closed form against the oracle.

The suite runs entirely in scaled units (c = 300, carriers of tens to
hundreds of Hz, distances of order ten) so the dense waveform grids stay
small; all validated formulas are dimensionally covariant. Each check
compares a closed-form information matrix against a Schur complement of the
numerical FIM in relative spectral norm.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import efim as efim_mod
from .arrays import uca, ula
from .model import (
    AgentMotion,
    AnchorNode,
    AntennaArray,
    ArrayPose,
    KnowledgeFlags,
    PathComponent,
    Position2D,
    Scenario,
)
from .oracle import TimeGrid, effective_poc, numerical_fim, oracle_efim, real_passband_fim
from .signal import gaussian_pulse, summarize

SCALED_C = 300.0

ALL_UNKNOWN = KnowledgeFlags(
    phase_known=False, orientation_known=False, direction_known=False, speed_known=False
)


@dataclass(frozen=True)
class OracleCheck:
    """One validation outcome: a named comparison with its tolerance."""

    name: str
    rel_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.tolerance


def _rel_spectral(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.linalg.norm(b, 2)
    if scale == 0.0:
        return float(np.linalg.norm(a - b, 2))
    return float(np.linalg.norm(a - b, 2) / scale)


def _pulse(fc: float, sigma_t: float = 1 / 18, t_center: float = 0.45, n: int = 512, offset: float = 0.0):
    wave = gaussian_pulse(n=n, sample_period=1.0 / n, t_center=t_center, sigma_t=sigma_t, freq_offset=offset)
    return wave, summarize(wave, carrier=fc)


def static_scenarios() -> List[Scenario]:
    """Five static scenarios: 1-3 LOS anchors, 1-4 antennas, with/without multipath."""
    scenarios: List[Scenario] = []

    wave, sig = _pulse(fc=40.0)
    scenarios.append(
        Scenario(
            anchors=(AnchorNode(Position2D(11.0, 2.0), 1000.0),),
            array=AntennaArray((0.0,), (0.0,)),
            pose=ArrayPose(Position2D(0.0, 0.0), 0.0),
            signal=sig,
            knowledge=ALL_UNKNOWN,
            waveform=wave,
            c=SCALED_C,
        )
    )

    scenarios.append(
        Scenario(
            anchors=(
                AnchorNode(Position2D(12.0, 3.0), 1000.0),
                AnchorNode(Position2D(-4.0, 9.0), 400.0),
            ),
            array=ula(3, 0.4),
            pose=ArrayPose(Position2D(0.0, 0.0), 0.6),
            signal=sig,
            knowledge=ALL_UNKNOWN,
            waveform=wave,
            c=SCALED_C,
        )
    )

    # nonzero baseband-carrier correlation: frequency-offset pulse
    wave3, sig3 = _pulse(fc=50.0, offset=1.5)
    scenarios.append(
        Scenario(
            anchors=(
                AnchorNode(Position2D(10.0, -2.0), 900.0),
                AnchorNode(Position2D(-3.0, 12.0), 600.0),
                AnchorNode(Position2D(-8.0, -7.0), 300.0),
            ),
            array=uca(4, 0.35),
            pose=ArrayPose(Position2D(0.0, 0.0), 1.1),
            signal=sig3,
            knowledge=ALL_UNKNOWN,
            waveform=wave3,
            c=SCALED_C,
        )
    )

    # second path forming its own separated cluster: its descriptors are
    # estimated alongside everything else but destroy no position information
    wave4, sig4 = _pulse(fc=40.0, sigma_t=0.025, t_center=0.3, n=1024)
    multipath = AnchorNode(
        Position2D(12.0, 3.0),
        1000.0,
        paths=(
            PathComponent(amplitude=1.0),
            PathComponent(amplitude=0.02, range_bias=45.0, angle_bias=0.25),
        ),
    )
    scenarios.append(
        Scenario(
            anchors=(multipath, AnchorNode(Position2D(-5.0, 10.0), 500.0)),
            array=ula(2, 0.3),
            pose=ArrayPose(Position2D(0.0, 0.0), 0.4),
            signal=sig4,
            knowledge=ALL_UNKNOWN,
            waveform=wave4,
            c=SCALED_C,
        )
    )

    # one NLOS anchor among three
    wave5, sig5 = _pulse(fc=60.0)
    nlos = AnchorNode(
        Position2D(6.0, -9.0),
        700.0,
        los=False,
        paths=(PathComponent(amplitude=0.8, range_bias=4.0, angle_bias=0.5),),
    )
    scenarios.append(
        Scenario(
            anchors=(
                AnchorNode(Position2D(13.0, 1.0), 800.0),
                nlos,
                AnchorNode(Position2D(-7.0, 8.0), 600.0),
            ),
            array=uca(3, 0.4),
            pose=ArrayPose(Position2D(0.0, 0.0), 2.0),
            signal=sig5,
            knowledge=ALL_UNKNOWN,
            waveform=wave5,
            c=SCALED_C,
        )
    )
    return scenarios


def dynamic_scenario(fc: float = 600.0, speed: float = 1.5) -> Scenario:
    """Narrowband moving-agent scenario with B/f_c below 0.02."""
    n = 1024
    wave = gaussian_pulse(n=n, sample_period=1.0 / n, t_center=0.48, sigma_t=0.07)
    sig = summarize(wave, carrier=fc)
    return Scenario(
        anchors=(
            AnchorNode(Position2D(11.0, 4.0), 800.0),
            AnchorNode(Position2D(-6.0, 8.0), 500.0),
            AnchorNode(Position2D(2.0, -12.0), 300.0),
        ),
        array=uca(3, 0.3),
        pose=ArrayPose(Position2D(0.0, 0.0), 0.9),
        signal=sig,
        knowledge=ALL_UNKNOWN,
        motion=AgentMotion(speed=speed, direction=0.3, reference_time=0.48),
        waveform=wave,
        c=SCALED_C,
    )


def _with_effective_poc(scenario: Scenario) -> Scenario:
    """Fill in the path-overlap coefficients measured by the oracle surrogate."""
    if all(len(a.paths) == 1 for a in scenario.anchors):
        return scenario
    chis = effective_poc(scenario)
    anchors = tuple(
        dataclasses.replace(a, poc=float(chis[j])) if (a.los and len(a.paths) > 1) else a
        for j, a in enumerate(scenario.anchors)
    )
    return dataclasses.replace(scenario, anchors=anchors)


def run_static_checks(scenarios: Optional[Sequence[Scenario]] = None) -> List[OracleCheck]:
    """Validate the three static bounds on every bundled static scenario."""
    checks: List[OracleCheck] = []
    for idx, base in enumerate(scenarios or static_scenarios()):
        tag = f"s{idx + 1}"
        scenario = _with_effective_poc(base)
        fim = numerical_fim(scenario)
        xi = [f"xi[{j}]" for j in range(len(scenario.anchors))]

        oracle_full = oracle_efim(scenario, keep=("x", "y"), fim=fim, drop=["psi"] + xi)
        closed_full = efim_mod.efim_static_full(scenario)
        checks.append(
            OracleCheck(f"{tag}/static-full-knowledge", _rel_spectral(closed_full.matrix, oracle_full.matrix), 1e-3)
        )

        oracle_known = oracle_efim(scenario, keep=("x", "y"), fim=fim, drop=["psi"])
        closed_known = efim_mod.efim_static_orient_known(scenario, mode="per-antenna")
        checks.append(
            OracleCheck(
                f"{tag}/static-orientation-known", _rel_spectral(closed_known.matrix, oracle_known.matrix), 1e-3
            )
        )

        oracle_3 = oracle_efim(scenario, keep=("x", "y", "psi"), fim=fim)
        closed_3, closed_2 = efim_mod.efim_static_orient_unknown(scenario)
        checks.append(
            OracleCheck(
                f"{tag}/static-orientation-unknown-3x3", _rel_spectral(closed_3.matrix, oracle_3.matrix), 1e-3
            )
        )
        oracle_2 = oracle_efim(scenario, keep=("x", "y"), fim=fim)
        checks.append(
            OracleCheck(
                f"{tag}/static-orientation-unknown-position",
                _rel_spectral(closed_2.matrix, oracle_2.matrix),
                1e-3,
            )
        )
    return checks


def run_dynamic_checks(scenario: Optional[Scenario] = None) -> List[OracleCheck]:
    """Validate the three moving-agent bounds against one superset FIM."""
    s = scenario or dynamic_scenario()
    sig = s.signal
    band_ratio = sig.band_limit / sig.carrier
    approx_band = (1.0 + 3.17 * band_ratio) ** 2 - 1.0 + 1e-3

    fim = numerical_fim(s)
    checks: List[OracleCheck] = []

    oracle4 = oracle_efim(s, keep=("x", "y"), fim=fim, drop=["psi", "psi_d", "v"])
    narrow = efim_mod.efim_dynamic_known(s, mode="narrowband")
    exact = efim_mod.efim_dynamic_known(s, mode="exact")
    checks.append(
        OracleCheck("d1/dynamic-full-knowledge-narrowband", _rel_spectral(narrow.matrix, oracle4.matrix), approx_band)
    )
    checks.append(OracleCheck("d1/dynamic-full-knowledge-exact", _rel_spectral(exact.matrix, oracle4.matrix), 1e-3))

    oracle5 = oracle_efim(s, keep=("x", "y", "psi", "psi_d"), fim=fim, drop=["v"])
    closed4, closed2 = efim_mod.efim_dynamic_orient_dir_unknown(s)
    checks.append(OracleCheck("d1/dynamic-pose-unknown-4x4", _rel_spectral(closed4.matrix, oracle5.matrix), 1e-2))
    oracle5b = oracle_efim(s, keep=("x", "y"), fim=fim, drop=["v"])
    checks.append(
        OracleCheck("d1/dynamic-pose-unknown-position", _rel_spectral(closed2.matrix, oracle5b.matrix), 1e-2)
    )

    oracle6 = oracle_efim(s, keep=("x", "y", "psi", "psi_d", "v"), fim=fim)
    closed5 = efim_mod.efim_dynamic_all_unknown(s)
    checks.append(OracleCheck("d1/dynamic-all-unknown-5x5", _rel_spectral(closed5.matrix, oracle6.matrix), 1e-2))
    return checks


def run_equivalence_checks() -> List[OracleCheck]:
    """Real vs complex passband model: identical FIMs for band-limited signals."""
    checks: List[OracleCheck] = []
    static = static_scenarios()[1]
    for tag, scenario in (("s2", static), ("d1", dynamic_scenario())):
        grid = TimeGrid.for_scenario(scenario)
        complex_fim = numerical_fim(scenario, grid=grid)
        real_fim = real_passband_fim(scenario, grid=grid)
        checks.append(
            OracleCheck(
                f"{tag}/real-complex-equivalence",
                _rel_spectral(real_fim.matrix, complex_fim.matrix),
                1e-4,
            )
        )
    return checks


def run_all_checks() -> List[OracleCheck]:
    """The full bundled validation: static, dynamic and model-equivalence."""
    return run_static_checks() + run_dynamic_checks() + run_equivalence_checks()

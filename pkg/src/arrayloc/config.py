"""Strict plain-text experiment configuration.

The format is sectioned ``key = value`` text where every physical quantity
carries an explicit unit suffix (``f_c = 100 MHz``, ``snr = 30 dB``).
Unknown sections or keys and missing units are hard errors: experiment
provenance must be auditable, so nothing physical gets a silent default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .arrays import ArraySpec
from .model import (
    AgentMotion,
    AnchorNode,
    AntennaArray,
    ArrayPose,
    KnowledgeFlags,
    Position2D,
    Scenario,
    SPEED_OF_LIGHT,
)
from .signal import SignalSummary, read_signal_file, summarize

SCHEMA_VERSION = 1

EXPERIMENT_TYPES = (
    "point",
    "grid",
    "orientation-sweep",
    "geometry-mc",
    "array-compare",
    "oracle-check",
    "optimize-anchors",
    "rank-table",
)

# variant tokens within a bound family; the knowledge flags pick the family
EFIM_MODES = (
    "auto",
    "per-antenna",
    "far-field",
    "centered",
    "narrowband",
    "exact",
)


class ConfigError(ValueError):
    """A malformed, incomplete or contradictory configuration."""


_UNITS: Dict[str, Dict[str, float]] = {
    "length": {"m": 1.0, "km": 1e3, "cm": 1e-2, "mm": 1e-3},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9},
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "speed": {"m/s": 1.0, "km/s": 1e3},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
}


def parse_quantity(text: str, kind: str, *, where: str = "") -> float:
    """Parse '<number> <unit>' enforcing a unit of the right dimension."""
    parts = text.split()
    if len(parts) != 2:
        raise ConfigError(f"{where}: expected '<value> <unit>' for a {kind}, got {text!r}")
    try:
        value = float(parts[0])
    except ValueError as exc:
        raise ConfigError(f"{where}: bad number {parts[0]!r}") from exc
    table = _UNITS[kind]
    key = parts[1] if kind == "speed" else parts[1].lower()
    if key not in table:
        raise ConfigError(
            f"{where}: unknown {kind} unit {parts[1]!r}; expected one of {sorted(table)}"
        )
    return value * table[key]


def parse_ratio(text: str, *, where: str = "") -> float:
    """Linear power ratio; a 'dB' suffix converts, a bare number is linear."""
    parts = text.split()
    if len(parts) == 1:
        try:
            return float(parts[0])
        except ValueError as exc:
            raise ConfigError(f"{where}: bad ratio {text!r}") from exc
    if len(parts) == 2 and parts[1].lower() == "db":
        try:
            return 10.0 ** (float(parts[0]) / 10.0)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad dB value {text!r}") from exc
    raise ConfigError(f"{where}: expected a bare ratio or '<value> dB', got {text!r}")


def parse_bool(text: str, *, where: str = "") -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {text!r}")


def parse_int(text: str, *, where: str = "") -> int:
    try:
        return int(text.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}: expected an integer, got {text!r}") from exc


_SECTION_KEYS: Dict[str, Tuple[Tuple[str, bool], ...]] = {
    # (key, repeatable)
    "signal": tuple(
        (k, False)
        for k in ("beta", "bcc", "f_c", "band_limit", "t_rms", "t_ob", "c", "waveform_file")
    ),
    "array": (("kind", False), ("n_antennas", False), ("diameter", False), ("element", True)),
    "pose": (("x", False), ("y", False), ("orientation", False)),
    "motion": (("speed", False), ("direction", False), ("reference_time", False)),
    "knowledge": tuple(
        (k, False)
        for k in ("phase_known", "orientation_known", "direction_known", "speed_known")
    ),
    "anchors": (("anchor", True),),
    "experiment": tuple(
        (k, False)
        for k in (
            "type",
            "mode",
            "x_min",
            "x_max",
            "y_min",
            "y_max",
            "resolution",
            "psi_start",
            "psi_stop",
            "psi_steps",
            "beta_list",
            "trials",
            "seed",
            "antenna_counts",
            "objective",
            "restarts",
        )
    ),
}


@dataclass
class _RawConfig:
    version: int
    sections: Dict[str, List[Tuple[str, str, int]]] = field(default_factory=dict)

    def get(self, section: str, key: str) -> Optional[str]:
        for k, v, _ in self.sections.get(section, []):
            if k == key:
                return v
        return None

    def get_all(self, section: str, key: str) -> List[str]:
        return [v for k, v, _ in self.sections.get(section, []) if k == key]

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ConfigError(f"[{section}] is missing required key {key!r}")
        return value


def _parse_raw(text: str, origin: str) -> _RawConfig:
    sections: Dict[str, List[Tuple[str, str, int]]] = {}
    current: Optional[str] = None
    version: Optional[int] = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{origin}:{line_no}"
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTION_KEYS:
                raise ConfigError(f"{where}: unknown section [{current}]")
            if current in sections:
                raise ConfigError(f"{where}: duplicate section [{current}]")
            sections[current] = []
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            if key == "schema_version":
                version = parse_int(value, where=where)
                continue
            raise ConfigError(f"{where}: key {key!r} outside any section")
        allowed = dict(_SECTION_KEYS[current])
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r} in section [{current}]")
        if not allowed[key] and any(k == key for k, _, _ in sections[current]):
            raise ConfigError(f"{where}: duplicate key {key!r} in section [{current}]")
        sections[current].append((key, value, line_no))
    if version is None:
        raise ConfigError(f"{origin}: missing schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{origin}: schema_version {version} not supported (expected {SCHEMA_VERSION})")
    return _RawConfig(version, sections)


def _parse_anchor(value: str, where: str) -> AnchorNode:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) < 3:
        raise ConfigError(f"{where}: anchor needs 'x, y, snr[, poc[, los]]', got {value!r}")
    x = parse_quantity(parts[0], "length", where=where)
    y = parse_quantity(parts[1], "length", where=where)
    snr = parse_ratio(parts[2], where=where)
    poc = float(parts[3]) if len(parts) > 3 else 0.0
    los = parse_bool(parts[4], where=where) if len(parts) > 4 else True
    return AnchorNode(Position2D(x, y), snr_first_path=snr, poc=poc, los=los)


def _parse_array(raw: _RawConfig) -> ArraySpec:
    kind = raw.require("array", "kind").strip().lower()
    if kind in ("ula", "uca"):
        n = parse_int(raw.require("array", "n_antennas"), where="[array] n_antennas")
        d = parse_quantity(raw.require("array", "diameter"), "length", where="[array] diameter")
        return ArraySpec.make_ula(n, d) if kind == "ula" else ArraySpec.make_uca(n, d)
    if kind == "custom":
        elements = []
        for item in raw.get_all("array", "element"):
            parts = [p.strip() for p in item.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"[array] element needs 'distance, angle', got {item!r}")
            elements.append(
                (
                    parse_quantity(parts[0], "length", where="[array] element"),
                    parse_quantity(parts[1], "angle", where="[array] element"),
                )
            )
        if not elements:
            raise ConfigError("[array] kind = custom needs at least one element")
        return ArraySpec.custom(AntennaArray.from_elements(elements))
    raise ConfigError(f"[array] unknown kind {kind!r}; expected ula, uca or custom")


def _parse_signal(raw: _RawConfig, base_dir: Path) -> Tuple[SignalSummary, Optional[object], float]:
    c_text = raw.get("signal", "c")
    c = parse_quantity(c_text, "speed", where="[signal] c") if c_text else SPEED_OF_LIGHT
    carrier = parse_quantity(raw.require("signal", "f_c"), "frequency", where="[signal] f_c")
    wf_file = raw.get("signal", "waveform_file")
    waveform = None
    if wf_file is not None:
        path = (base_dir / wf_file).resolve()
        if not path.exists():
            raise ConfigError(f"[signal] waveform_file {wf_file!r} not found")
        waveform = read_signal_file(str(path))
        band_text = raw.get("signal", "band_limit")
        band = (
            parse_quantity(band_text, "frequency", where="[signal] band_limit")
            if band_text
            else None
        )
        summary = summarize(waveform, carrier=carrier, band_limit=band)
        return summary, waveform, c
    beta = parse_quantity(raw.require("signal", "beta"), "frequency", where="[signal] beta")
    bcc_text = raw.get("signal", "bcc")
    gamma = float(bcc_text) if bcc_text is not None else 0.0
    band_text = raw.get("signal", "band_limit")
    band = (
        parse_quantity(band_text, "frequency", where="[signal] band_limit")
        if band_text
        else max(beta, 1e-300)
    )
    trms_text = raw.get("signal", "t_rms")
    t_rms = parse_quantity(trms_text, "time", where="[signal] t_rms") if trms_text else 0.0
    tob_text = raw.get("signal", "t_ob")
    t_ob = parse_quantity(tob_text, "time", where="[signal] t_ob") if tob_text else 0.0
    summary = SignalSummary(
        beta=beta, bcc=gamma, carrier=carrier, band_limit=band, trms=t_rms, t_ob=t_ob
    )
    return summary, None, c


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: float

    def axes(self) -> Tuple[List[float], List[float]]:
        def axis(lo: float, hi: float) -> List[float]:
            n = int(round((hi - lo) / self.resolution)) + 1
            return [lo + i * self.resolution for i in range(n)]

        return axis(self.x_min, self.x_max), axis(self.y_min, self.y_max)


@dataclass(frozen=True)
class SweepSpec:
    psi_start: float
    psi_stop: float
    psi_steps: int
    betas: Tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated scenario plus the experiment selection and its options."""

    scenario: Scenario
    experiment: str
    mode: str = "auto"
    grid: Optional[GridSpec] = None
    sweep: Optional[SweepSpec] = None
    trials: int = 10_000
    seed: Optional[int] = None
    antenna_counts: Tuple[int, ...] = (3, 6, 12)
    psi_steps: int = 64
    objective: str = "known"
    restarts: int = 32


def load_scenario(path: str | Path) -> ExperimentConfig:
    """Read, validate and unit-convert one experiment configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    raw = _parse_raw(text, str(path))

    for required in ("signal", "array", "pose", "anchors", "experiment"):
        if required not in raw.sections:
            raise ConfigError(f"{path}: missing required section [{required}]")

    summary, waveform, c = _parse_signal(raw, path.parent)
    spec = _parse_array(raw)
    pose = ArrayPose(
        Position2D(
            parse_quantity(raw.require("pose", "x"), "length", where="[pose] x"),
            parse_quantity(raw.require("pose", "y"), "length", where="[pose] y"),
        ),
        parse_quantity(raw.require("pose", "orientation"), "angle", where="[pose] orientation"),
    )
    anchors = tuple(
        _parse_anchor(v, where="[anchors]") for v in raw.get_all("anchors", "anchor")
    )
    if not anchors:
        raise ConfigError("[anchors] needs at least one anchor")

    motion = None
    if "motion" in raw.sections:
        motion = AgentMotion(
            speed=parse_quantity(raw.require("motion", "speed"), "speed", where="[motion] speed"),
            direction=parse_quantity(
                raw.require("motion", "direction"), "angle", where="[motion] direction"
            ),
            reference_time=parse_quantity(
                raw.get("motion", "reference_time") or "0 s", "time", where="[motion] reference_time"
            ),
        )
        if summary.band_limit >= summary.carrier:
            raise ConfigError(
                "dynamic scenario violates the narrowband requirement: "
                f"band limit {summary.band_limit:g} Hz is not below the carrier {summary.carrier:g} Hz"
            )

    knowledge = KnowledgeFlags(
        phase_known=parse_bool(raw.get("knowledge", "phase_known") or "false", where="[knowledge]"),
        orientation_known=parse_bool(
            raw.get("knowledge", "orientation_known") or "true", where="[knowledge]"
        ),
        direction_known=parse_bool(
            raw.get("knowledge", "direction_known") or "true", where="[knowledge]"
        ),
        speed_known=parse_bool(raw.get("knowledge", "speed_known") or "true", where="[knowledge]"),
    )

    scenario = Scenario(
        anchors=anchors,
        array=spec.realized,
        pose=pose,
        signal=summary,
        knowledge=knowledge,
        motion=motion,
        waveform=waveform,
        c=c,
    )

    exp_type = raw.require("experiment", "type").strip().lower()
    if exp_type not in EXPERIMENT_TYPES:
        raise ConfigError(f"unknown experiment type {exp_type!r}; expected one of {EXPERIMENT_TYPES}")
    mode = (raw.get("experiment", "mode") or "auto").strip().lower()
    if mode not in EFIM_MODES:
        raise ConfigError(f"unknown efim mode {mode!r}; expected one of {EFIM_MODES}")

    grid = None
    if exp_type == "grid":
        grid = GridSpec(
            x_min=parse_quantity(raw.require("experiment", "x_min"), "length", where="[experiment] x_min"),
            x_max=parse_quantity(raw.require("experiment", "x_max"), "length", where="[experiment] x_max"),
            y_min=parse_quantity(raw.require("experiment", "y_min"), "length", where="[experiment] y_min"),
            y_max=parse_quantity(raw.require("experiment", "y_max"), "length", where="[experiment] y_max"),
            resolution=parse_quantity(
                raw.require("experiment", "resolution"), "length", where="[experiment] resolution"
            ),
        )
        if grid.x_max <= grid.x_min or grid.y_max <= grid.y_min or grid.resolution <= 0:
            raise ConfigError("[experiment] grid bounds/resolution are inconsistent")

    sweep = None
    if exp_type == "orientation-sweep":
        steps = parse_int(raw.get("experiment", "psi_steps") or "64", where="[experiment] psi_steps")
        if steps < 2:
            raise ConfigError("[experiment] psi_steps must be >= 2")
        beta_items = raw.get("experiment", "beta_list")
        betas = (
            tuple(
                parse_quantity(b.strip(), "frequency", where="[experiment] beta_list")
                for b in beta_items.split(",")
            )
            if beta_items
            else (summary.beta,)
        )
        sweep = SweepSpec(
            psi_start=parse_quantity(
                raw.get("experiment", "psi_start") or "0 rad", "angle", where="[experiment] psi_start"
            ),
            psi_stop=parse_quantity(
                raw.get("experiment", "psi_stop") or "1.5707963267948966 rad",
                "angle",
                where="[experiment] psi_stop",
            ),
            psi_steps=steps,
            betas=betas,
        )

    seed_text = raw.get("experiment", "seed")
    seed = parse_int(seed_text, where="[experiment] seed") if seed_text else None
    if exp_type == "geometry-mc" and seed is None:
        raise ConfigError("[experiment] geometry-mc requires an explicit seed")

    trials = parse_int(raw.get("experiment", "trials") or "10000", where="[experiment] trials")
    counts_text = raw.get("experiment", "antenna_counts")
    counts = (
        tuple(parse_int(x, where="[experiment] antenna_counts") for x in counts_text.split(","))
        if counts_text
        else (3, 6, 12)
    )
    psi_steps = parse_int(raw.get("experiment", "psi_steps") or "64", where="[experiment] psi_steps")
    if psi_steps < 2:
        raise ConfigError("[experiment] psi_steps must be >= 2")

    return ExperimentConfig(
        scenario=scenario,
        experiment=exp_type,
        mode=mode,
        grid=grid,
        sweep=sweep,
        trials=trials,
        seed=seed,
        antenna_counts=counts,
        psi_steps=psi_steps,
        objective=(raw.get("experiment", "objective") or "known").strip().lower(),
        restarts=parse_int(raw.get("experiment", "restarts") or "32", where="[experiment] restarts"),
    )

"""Experiment drivers: point/grid evaluation, sweeps, Monte Carlo and CSV output.

Every driver returns a ResultTable whose rows are a pure function of the
configuration (and seed, for Monte Carlo), in a deterministic order, so
re-running an experiment reproduces the output byte for byte. Parallel
evaluation only partitions index ranges and reassembles in index order.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .arrays import average_saaf, is_uoa, uca, ula
from .config import ExperimentConfig
from .efim import (
    efim_dynamic_all_unknown,
    efim_position,
    efim_static_orient_known,
    efim_static_orient_unknown,
    position_speb,
    speb,
)
from .geometry import (
    RANK_TABLE_CELLS,
    efim_rank_requirements,
    geometric_factors,
    optimize_anchor_angles,
)
from .model import (
    ArrayPose,
    DegenerateGeometryError,
    Position2D,
    Scenario,
    anchor_range_bearing,
)
from .oracle_suite import run_all_checks

Cell = float | int | str


@dataclass(frozen=True)
class ResultTable:
    """Column names (with unit suffixes) plus rows of plain values."""

    columns: Tuple[str, ...]
    rows: Tuple[Tuple[Cell, ...], ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row width does not match the column count")

    def column(self, name: str) -> List[Cell]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


def _format_cell(value: Cell) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    v = float(value)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return format(v, ".12e")


def emit_csv(table: ResultTable, path: str) -> None:
    """Comma-separated output: unit-suffixed header, scientific notation,
    'inf' for unbounded entries, trailing newline; byte-stable across runs."""
    lines = [",".join(table.columns)]
    lines.extend(",".join(_format_cell(v) for v in row) for row in table.rows)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _scenario_at(scenario: Scenario, x: float, y: float) -> Scenario:
    return dataclasses.replace(
        scenario, pose=ArrayPose(Position2D(x, y), scenario.pose.orientation)
    )


def _root_speb_at(scenario: Scenario, mode: Optional[str], x: float, y: float) -> float:
    try:
        result = efim_position(_scenario_at(scenario, x, y), mode=mode)
    except DegenerateGeometryError:
        # evaluation point coincides with an anchor
        return math.inf
    return speb(result).root


def run_point(config: ExperimentConfig) -> ResultTable:
    """Evaluate the selected bound at the configured pose."""
    mode = None if config.mode == "auto" else config.mode
    scenario = config.scenario
    value = _root_speb_at(scenario, mode, scenario.pose.reference.x, scenario.pose.reference.y)
    return ResultTable(
        ("x_m", "y_m", "root_speb_m"),
        ((scenario.pose.reference.x, scenario.pose.reference.y, value),),
    )


def _grid_worker(args) -> List[Tuple[int, float]]:
    scenario, mode, points, offset = args
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i, (x, y) in enumerate(points):
            out.append((offset + i, _root_speb_at(scenario, mode, x, y)))
    return out


def run_grid(config: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Root SPEB on a rectangular grid; singular points emit 'inf'.

    Row order is x-major then y (both ascending), independent of the worker
    partitioning.
    """
    if config.grid is None:
        raise ValueError("grid experiment needs grid bounds")
    xs, ys = config.grid.axes()
    points = [(x, y) for x in xs for y in ys]
    mode = None if config.mode == "auto" else config.mode
    values = [math.nan] * len(points)
    if threads <= 1:
        for (i, v) in _grid_worker((config.scenario, mode, points, 0)):
            values[i] = v
    else:
        chunk = max(1, len(points) // (threads * 8))
        tasks = [
            (config.scenario, mode, points[i : i + chunk], i)
            for i in range(0, len(points), chunk)
        ]
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_grid_worker, tasks):
                for i, v in part:
                    values[i] = v
    rows = tuple((x, y, values[i]) for i, (x, y) in enumerate(points))
    return ResultTable(("x_m", "y_m", "root_speb_m"), rows)


def sweep_orientation(config: ExperimentConfig) -> ResultTable:
    """Root SPEB vs orientation for each requested baseband bandwidth.

    Emits one row per (orientation, bandwidth) with both the known- and
    unknown-orientation bounds.
    """
    if config.sweep is None:
        raise ValueError("orientation-sweep experiment needs sweep parameters")
    sweep = config.sweep
    psis = np.linspace(sweep.psi_start, sweep.psi_stop, sweep.psi_steps)
    rows = []
    base = config.scenario
    for beta in sweep.betas:
        signal = dataclasses.replace(
            base.signal, beta=beta, band_limit=max(base.signal.band_limit, beta)
        )
        for psi in psis:
            scenario = dataclasses.replace(
                base,
                signal=signal,
                pose=ArrayPose(base.pose.reference, float(psi)),
            )
            known = speb(efim_static_orient_known(scenario, mode="far-field")).root
            unknown = speb(efim_static_orient_unknown(scenario)[1]).root
            rows.append((float(psi), float(beta), known, unknown))
    return ResultTable(
        ("psi_rad", "beta_hz", "root_speb_known_m", "root_speb_unknown_m"), tuple(rows)
    )


def _mc_trial(scenario: Scenario, g_uoa: float, seed: int, trial: int) -> Tuple[float, float, float, float]:
    """One Monte Carlo draw: anchor directions uniform on [0, pi) at fixed ranges."""
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, trial], dtype=np.uint64)))
    agent = scenario.pose.reference
    anchors = []
    for anchor in scenario.anchors:
        dist, _ = anchor_range_bearing(anchor.position, agent)
        direction = rng.uniform(0.0, math.pi)
        anchors.append(
            dataclasses.replace(
                anchor,
                position=Position2D(
                    agent.x + dist * math.cos(direction), agent.y + dist * math.sin(direction)
                ),
            )
        )
    drawn = dataclasses.replace(scenario, anchors=tuple(anchors))
    factors = geometric_factors(drawn.anchors, drawn.signal, g_uoa, agent, drawn.c)
    known = speb(efim_static_orient_known(drawn, mode="far-field")).root
    unknown = speb(efim_static_orient_unknown(drawn)[1]).root
    return factors.gf1_norm, factors.gf2_norm, known, unknown


def _mc_worker(args) -> List[Tuple[int, Tuple[float, float, float, float]]]:
    scenario, g_uoa, seed, trial_indices = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [(t, _mc_trial(scenario, g_uoa, seed, t)) for t in trial_indices]


def monte_carlo_geometry(config: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Anchor-direction Monte Carlo: geometry factors vs both SPEBs.

    Anchor ranges and intensities stay at their configured values; only the
    directions are redrawn per trial with a counter-based generator keyed by
    (seed, trial), so parallel and serial runs produce identical tables.
    """
    if config.seed is None:
        raise ValueError("geometry-mc requires a seed")
    scenario = config.scenario
    if not is_uoa(scenario.array):
        raise ValueError("geometry-mc expects a uniformly oriented array")
    g_uoa = average_saaf(scenario.array)
    trials = list(range(config.trials))
    results: List[Optional[Tuple[float, float, float, float]]] = [None] * len(trials)
    if threads <= 1:
        for t, value in _mc_worker((scenario, g_uoa, config.seed, trials)):
            results[t] = value
    else:
        chunk = max(1, len(trials) // (threads * 8))
        tasks = [
            (scenario, g_uoa, config.seed, trials[i : i + chunk])
            for i in range(0, len(trials), chunk)
        ]
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_mc_worker, tasks):
                for t, value in part:
                    results[t] = value
    rows = tuple(
        (t, *results[t]) for t in trials
    )
    return ResultTable(
        ("trial", "gf1_norm", "gf2_norm", "root_speb_known_m", "root_speb_unknown_m"), rows
    )


def compare_arrays(config: ExperimentConfig) -> ResultTable:
    """Linear vs circular arrays across orientations and element counts.

    Uses the all-unknown moving-agent bound (orientation, moving direction
    and speed all estimated) reduced to the position block.
    """
    if config.scenario.motion is None:
        raise ValueError("array-compare expects a dynamic scenario")
    from .arrays import diameter as array_diameter

    d = array_diameter(config.scenario.array)
    psis = np.linspace(0.0, 2.0 * math.pi, config.psi_steps, endpoint=False)
    rows = []
    for n_a in config.antenna_counts:
        for psi in psis:
            values = {}
            for kind, builder in (("ula", ula), ("uca", uca)):
                scenario = dataclasses.replace(
                    config.scenario,
                    array=builder(n_a, d),
                    pose=ArrayPose(config.scenario.pose.reference, float(psi)),
                )
                result = efim_dynamic_all_unknown(scenario)
                values[kind] = position_speb(result).value
            rows.append((float(psi), n_a, values["ula"], values["uca"]))
    return ResultTable(("psi_rad", "n_antennas", "speb_ula_m2", "speb_uca_m2"), tuple(rows))


def run_optimize_anchors(config: ExperimentConfig) -> ResultTable:
    """Optimize anchor directions at the configured ranges and intensities."""
    from .efim import intensity

    scenario = config.scenario
    agent = scenario.pose.reference
    if not is_uoa(scenario.array):
        raise ValueError("optimize-anchors expects a uniformly oriented array")
    g_uoa = average_saaf(scenario.array)
    lambdas, dists = [], []
    for anchor in scenario.anchors:
        if not anchor.los:
            continue
        dist, _ = anchor_range_bearing(anchor.position, agent)
        lambdas.append(intensity(anchor, scenario.c))
        dists.append(dist)
    placement = optimize_anchor_angles(
        np.array(lambdas),
        np.array(dists),
        scenario.signal,
        g_uoa,
        objective=config.objective,
        n_antennas=scenario.array.n_antennas,
        restarts=config.restarts,
        seed=config.seed if config.seed is not None else 0,
    )
    rows = tuple(
        (i, float(angle), placement.speb, placement.gf1_norm, placement.gf2_norm)
        for i, angle in enumerate(placement.angles)
    )
    return ResultTable(("anchor", "phi_rad", "speb_m2", "gf1_norm", "gf2_norm"), rows)


def run_rank_table(config: Optional[ExperimentConfig] = None, seed: int = 20260810) -> ResultTable:
    """Probe all minimal anchor/antenna count requirements."""
    if config is not None and config.seed is not None:
        seed = config.seed
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for cell in RANK_TABLE_CELLS:
            for case in efim_rank_requirements(cell, seed=seed):
                rows.append(
                    (
                        cell,
                        case.n_anchors,
                        case.n_antennas,
                        "full-rank" if case.expect_full_rank else "singular",
                        "full-rank" if case.full_rank else "singular",
                        "pass" if case.ok else "fail",
                    )
                )
    return ResultTable(
        ("cell", "n_anchors", "n_antennas", "expected", "observed", "verdict"), tuple(rows)
    )


def run_oracle_check(config: Optional[ExperimentConfig] = None) -> ResultTable:
    """Run the bundled closed-form-vs-oracle validation suite."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        checks = run_all_checks()
    rows = tuple(
        (c.name, c.rel_error, c.tolerance, "pass" if c.passed else "fail") for c in checks
    )
    return ResultTable(("check", "rel_error", "tolerance", "verdict"), rows)

import math

import numpy as np
import pytest

from arrayloc import (
    AgentMotion,
    AntennaArray,
    ArrayPose,
    DegenerateGeometryError,
    Position2D,
    anchor_range_bearing,
    antenna_position,
    antenna_position_dynamic,
    antenna_positions,
    validate_scenario,
)
from conftest import anchor_at, simple_summary, static_scenario


class TestAntennaPosition:
    def test_zero_offset_returns_reference(self):
        array = AntennaArray((0.0,), (1.3,))
        pose = ArrayPose(Position2D(2.0, -1.0), 0.7)
        p = antenna_position(array, pose, 0)
        assert (p.x, p.y) == (2.0, -1.0)

    def test_identity_rotation(self):
        array = AntennaArray((1.0,), (0.0,))
        pose = ArrayPose(Position2D(0.0, 0.0), 0.0)
        p = antenna_position(array, pose, 0)
        assert p.x == pytest.approx(1.0, abs=1e-15)
        assert p.y == pytest.approx(0.0, abs=1e-15)

    def test_quarter_turn(self):
        # rotation matrix applied by hand: (1,0) -> (0,1)
        array = AntennaArray((1.0,), (0.0,))
        pose = ArrayPose(Position2D(0.0, 0.0), math.pi / 2)
        p = antenna_position(array, pose, 0)
        assert p.x == pytest.approx(0.0, abs=1e-15)
        assert p.y == pytest.approx(1.0, abs=1e-15)

    def test_index_out_of_range(self):
        array = AntennaArray((1.0,), (0.0,))
        pose = ArrayPose(Position2D(0.0, 0.0), 0.0)
        with pytest.raises(IndexError):
            antenna_position(array, pose, 1)

    def test_orientation_is_isometry(self, rng):
        # pairwise element distances never depend on the orientation
        for _ in range(50):
            n = int(rng.integers(2, 7))
            array = AntennaArray(
                tuple(rng.uniform(0, 2, n)), tuple(rng.uniform(0, 2 * math.pi, n))
            )
            ref = Position2D(*rng.uniform(-5, 5, 2))
            psi1, psi2 = rng.uniform(0, 2 * math.pi, 2)
            p1 = antenna_positions(array, ArrayPose(ref, psi1))
            p2 = antenna_positions(array, ArrayPose(ref, psi2))
            d1 = np.linalg.norm(p1[:, None] - p1[None, :], axis=-1)
            d2 = np.linalg.norm(p2[:, None] - p2[None, :], axis=-1)
            np.testing.assert_allclose(d1, d2, atol=1e-12)


class TestRangeBearing:
    def test_anchor_on_x_axis(self):
        d, phi = anchor_range_bearing(Position2D(50.0, 0.0), Position2D(0.0, 0.0))
        assert d == pytest.approx(50.0)
        assert phi == pytest.approx(math.pi)

    def test_anchor_on_y_axis(self):
        d, phi = anchor_range_bearing(Position2D(0.0, 20.0), Position2D(0.0, 0.0))
        assert d == pytest.approx(20.0)
        assert phi == pytest.approx(-math.pi / 2)

    def test_coincident_points_raise(self):
        with pytest.raises(DegenerateGeometryError):
            anchor_range_bearing(Position2D(1.0, 1.0), Position2D(1.0, 1.0))

    def test_round_trip_reconstruction(self, rng):
        # anchor + D*(cos phi, sin phi) recovers the agent to 1e-12 relative
        for _ in range(200):
            anchor = Position2D(*rng.uniform(-100, 100, 2))
            agent = Position2D(*rng.uniform(-100, 100, 2))
            if (anchor.x, anchor.y) == (agent.x, agent.y):
                continue
            d, phi = anchor_range_bearing(anchor, agent)
            assert d > 0
            rx = anchor.x + d * math.cos(phi)
            ry = anchor.y + d * math.sin(phi)
            scale = max(abs(agent.x), abs(agent.y), 1.0)
            assert abs(rx - agent.x) <= 1e-12 * scale
            assert abs(ry - agent.y) <= 1e-12 * scale


class TestDynamicPosition:
    def test_zero_speed_matches_static(self):
        array = AntennaArray((0.5, 1.0), (0.0, 2.0))
        pose = ArrayPose(Position2D(1.0, 2.0), 0.3)
        motion = AgentMotion(speed=0.0, direction=1.0, reference_time=0.0)
        for t in (-1.0, 0.0, 2.5):
            p_dyn = antenna_position_dynamic(array, pose, motion, 1, t)
            p_static = antenna_position(array, pose, 1)
            assert (p_dyn.x, p_dyn.y) == (p_static.x, p_static.y)

    def test_reference_time_matches_static(self):
        array = AntennaArray((0.5,), (0.4,))
        pose = ArrayPose(Position2D(1.0, 2.0), 0.3)
        motion = AgentMotion(speed=30.0, direction=0.9, reference_time=1.5)
        p_dyn = antenna_position_dynamic(array, pose, motion, 0, 1.5)
        p_static = antenna_position(array, pose, 0)
        assert p_dyn.x == pytest.approx(p_static.x)
        assert p_dyn.y == pytest.approx(p_static.y)

    def test_linear_kinematics(self):
        array = AntennaArray((0.25,), (0.0,))
        pose = ArrayPose(Position2D(0.0, 0.0), 0.0)
        motion = AgentMotion(speed=30.0, direction=0.0, reference_time=0.0)
        p = antenna_position_dynamic(array, pose, motion, 0, 0.1)
        assert p.x == pytest.approx(0.25 + 3.0)
        assert p.y == pytest.approx(0.0, abs=1e-15)

    def test_rigid_translation_same_for_all_elements(self, rng):
        array = AntennaArray(tuple(rng.uniform(0, 1, 5)), tuple(rng.uniform(0, 6.28, 5)))
        pose = ArrayPose(Position2D(0.0, 0.0), 1.1)
        motion = AgentMotion(speed=12.0, direction=2.2, reference_time=0.0)
        t = 0.37
        shifts = []
        for k in range(5):
            stat = antenna_position(array, pose, k)
            dyn = antenna_position_dynamic(array, pose, motion, k, t)
            shifts.append((dyn.x - stat.x, dyn.y - stat.y))
        for s in shifts[1:]:
            assert s == pytest.approx(shifts[0])


class TestValidateScenario:
    def test_far_field_ratio(self):
        # 0.5 m-diameter array seen from 50 m: ratio 0.25/50 = 0.005
        from arrayloc import ula

        s = static_scenario(
            anchors=(anchor_at(50.0, 0.0),), array=ula(3, 0.5), signal=simple_summary()
        )
        diags = {d.name: d for d in validate_scenario(s)}
        assert diags["far_field_ratio"].value == pytest.approx(0.25 / 50.0)
        assert diags["far_field_ratio"].ok

    def test_all_nlos_flags_zero_information(self):
        from arrayloc import PathComponent

        nlos = anchor_at(
            10.0, 0.0, los=False, paths=(PathComponent(1.0, range_bias=2.0, angle_bias=0.1),)
        )
        s = static_scenario(anchors=(nlos,))
        diags = {d.name: d for d in validate_scenario(s)}
        assert not diags["los_count"].ok
        assert "zero" in diags["los_count"].message

    def test_element_spacing_vs_wavelength(self):
        # 2 m spacing vs a ~3 m wavelength passes the ambiguity check
        array = AntennaArray((1.0, 1.0), (0.0, math.pi))
        s = static_scenario(
            anchors=(anchor_at(5000.0, 0.0),),
            array=array,
            signal=simple_summary(beta=1e6, fc=100e6, band=4e6),
            c=299_792_458.0,
        )
        diags = {d.name: d for d in validate_scenario(s)}
        assert diags["phase_ambiguity_spacing"].value == pytest.approx(2.0)
        assert diags["phase_ambiguity_spacing"].ok

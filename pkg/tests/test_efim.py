import dataclasses
import math

import numpy as np
import pytest

from arrayloc import (
    AgentMotion,
    AntennaArray,
    ArrayPose,
    KnowledgeFlags,
    Position2D,
    Scenario,
    SignalSummary,
    SingularNuisanceError,
    efim_dynamic_all_unknown,
    efim_dynamic_known,
    efim_dynamic_orient_dir_unknown,
    efim_position,
    efim_static_full,
    efim_static_orient_known,
    efim_static_orient_unknown,
    intensity,
    rdm,
    schur_complement,
    speb,
    speb_uoa_closed,
    uca,
    ula,
    visual_angle,
)
from conftest import (
    SCALED_C,
    anchor_at,
    dynamic_scenario,
    loewner_geq,
    simple_summary,
    static_scenario,
)

C_PHYS = 299_792_458.0


class TestRdm:
    @pytest.mark.parametrize(
        "phi,expected",
        [
            (0.0, [[1, 0], [0, 0]]),
            (math.pi / 2, [[0, 0], [0, 1]]),
            (math.pi / 4, [[0.5, 0.5], [0.5, 0.5]]),
        ],
    )
    def test_values(self, phi, expected):
        np.testing.assert_allclose(rdm(phi), expected, atol=1e-15)

    def test_rank_one_projector(self, rng):
        for phi in rng.uniform(0, 2 * math.pi, 20):
            m = rdm(float(phi))
            assert np.trace(m) == pytest.approx(1.0)
            eig = np.linalg.eigvalsh(m)
            np.testing.assert_allclose(sorted(eig), [0.0, 1.0], atol=1e-14)


class TestVisualAngle:
    def test_zero_offset(self):
        pose = ArrayPose(Position2D(0.0, 0.0), 0.3)
        assert visual_angle(0.0, 1.0, pose, Position2D(50.0, 0.0)) == 0.0

    def test_small_angle_value_and_exactness(self):
        # element broadside to the line of sight: 0.25/50 = 0.005 rad,
        # within O(theta^3) of the exact subtended angle
        pose = ArrayPose(Position2D(0.0, 0.0), 0.0)
        anchor = Position2D(50.0, 0.0)
        theta = visual_angle(0.25, math.pi / 2, pose, anchor)
        assert theta == pytest.approx(0.005, rel=1e-12)
        # exact angle between anchor->reference and anchor->element rays
        element = np.array([0.25 * math.cos(math.pi / 2), 0.25 * math.sin(math.pi / 2)])
        v1 = np.array([0.0, 0.0]) - np.array([50.0, 0.0])
        v2 = element - np.array([50.0, 0.0])
        cross = v1[0] * v2[1] - v1[1] * v2[0]
        exact = math.atan2(cross, float(np.dot(v1, v2)))
        assert abs(theta - abs(exact)) < abs(exact) ** 3

    def test_collinear_element(self):
        pose = ArrayPose(Position2D(0.0, 0.0), 0.0)
        anchor = Position2D(50.0, 0.0)
        # element along the line of sight: phi - psi - psi_k = 0
        assert visual_angle(0.3, math.pi, pose, anchor) == pytest.approx(0.0, abs=1e-16)


class TestIntensity:
    def test_reference_value(self):
        # independent desk evaluation of 8 pi^2 * 1000 / c^2
        anchor = anchor_at(50.0, 0.0, snr=1000.0)
        lam = intensity(anchor, C_PHYS)
        assert lam == pytest.approx(8.7851e-13, rel=1e-4)

    def test_full_overlap_kills_information(self):
        anchor = anchor_at(50.0, 0.0, snr=1000.0, poc=1.0)
        assert intensity(anchor, C_PHYS) == 0.0

    def test_nlos_is_zero(self):
        from arrayloc import PathComponent

        anchor = anchor_at(
            50.0, 0.0, los=False, paths=(PathComponent(1.0, range_bias=1.0),)
        )
        assert intensity(anchor, C_PHYS) == 0.0

    def test_static_motion_factor_is_one(self):
        anchor = anchor_at(50.0, 0.0)
        motion = AgentMotion(speed=0.0, direction=0.0)
        lam0 = intensity(anchor, SCALED_C)
        lam1 = intensity(anchor, SCALED_C, motion=motion, agent=Position2D(0.0, 0.0))
        assert lam1 == pytest.approx(lam0, rel=1e-15)


class TestStaticFull:
    def test_single_anchor_is_rank_one(self):
        # all elements at the reference point: one exact ranging direction
        s = static_scenario(
            anchors=(anchor_at(12.0, 0.0),),
            array=AntennaArray((0.0, 0.0), (0.0, 0.0)),
            knowledge=KnowledgeFlags(phase_known=True, orientation_known=True),
        )
        result = efim_static_full(s)
        eig = np.linalg.eigvalsh(result.matrix)
        assert eig[0] <= 1e-9 * eig[1]
        # with a real aperture the matrix is only rank-one to within the
        # squared visual angle
        s2 = static_scenario(
            anchors=(anchor_at(12.0, 0.0),),
            knowledge=KnowledgeFlags(phase_known=True, orientation_known=True),
        )
        eig2 = np.linalg.eigvalsh(efim_static_full(s2).matrix)
        assert eig2[0] <= 1e-3 * eig2[1]

    def test_orthogonal_anchors_give_isotropic_matrix(self):
        # two anchors on orthogonal bearings, all elements at the reference
        array = AntennaArray((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
        sig = simple_summary(beta=2.0, fc=60.0, gamma=0.0)
        s = static_scenario(
            anchors=(anchor_at(10.0, 0.0), anchor_at(0.0, 10.0)),
            array=array,
            knowledge=KnowledgeFlags(phase_known=True, orientation_known=True),
            signal=sig,
        )
        lam = intensity(s.anchors[0], SCALED_C)
        expected = 3 * lam * (sig.beta**2 + sig.carrier**2) * np.eye(2)
        np.testing.assert_allclose(
            efim_static_full(s).matrix, expected, rtol=1e-12, atol=1e-9 * expected[0, 0]
        )


class TestStaticOrientKnown:
    def test_modes_agree_in_far_field(self):
        s = static_scenario()
        ref = efim_static_orient_known(s, mode="per-antenna").matrix
        for mode in ("far-field", "centered"):
            other = efim_static_orient_known(s, mode=mode).matrix
            assert np.linalg.norm(other - ref, 2) <= 2e-3 * np.linalg.norm(ref, 2)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            efim_static_orient_known(static_scenario(), mode="bogus")

    def test_carrier_free_reduces_to_ranging_sum(self):
        # f_c = 0, bcc = 0: only the baseband ranging term survives
        sig = SignalSummary(beta=2.0, bcc=0.0, carrier=0.0, band_limit=8.0, t_ob=1.0)
        s = static_scenario(signal=sig)
        result = efim_static_orient_known(s, mode="far-field").matrix
        expected = np.zeros((2, 2))
        from arrayloc.model import anchor_range_bearing

        for anchor in s.anchors:
            _, phi = anchor_range_bearing(anchor.position, s.pose.reference)
            expected += intensity(anchor, SCALED_C) * 3 * sig.beta**2 * rdm(phi)
        np.testing.assert_allclose(result, expected, rtol=1e-12)

    def test_hand_checked_broadside_pair(self):
        # anchor 50 m east, 2-element half-meter line array at broadside:
        # eigenvalues N_a*lam*beta^2 and N_a*lam*f_c^2*G/D^2, SPEB 2.845 m^2
        sig = SignalSummary(beta=1e6, bcc=0.0, carrier=1e8, band_limit=4e6, t_ob=1.0)
        s = Scenario(
            anchors=(anchor_at(50.0, 0.0, snr=1000.0),),
            array=ula(2, 0.5),
            pose=ArrayPose(Position2D(0.0, 0.0), math.pi / 2),
            signal=sig,
            knowledge=KnowledgeFlags(phase_known=False, orientation_known=True),
            c=C_PHYS,
        )
        result = efim_static_orient_known(s, mode="far-field")
        eig = np.sort(np.linalg.eigvalsh(result.matrix))
        assert eig[1] == pytest.approx(1.757, rel=1e-3)
        assert eig[0] == pytest.approx(0.4393, rel=1e-3)
        assert speb(result).value == pytest.approx(2.845, rel=1e-3)

    def test_far_field_form_is_reference_point_invariant(self):
        # with anchors far enough, moving the reference within the array
        # changes nothing to 1e-10 relative
        sig = simple_summary(beta=2.0, fc=60.0)
        base_elements = [(0.0, 0.0), (0.4, 0.0), (0.4, math.pi / 2)]
        anchors = (anchor_at(1e10, 2e9, snr=1000.0), anchor_at(-3e9, 1e10, snr=500.0))

        def build(reference_xy, elements):
            return Scenario(
                anchors=anchors,
                array=AntennaArray.from_elements(elements),
                pose=ArrayPose(Position2D(*reference_xy), 0.7),
                signal=sig,
                knowledge=KnowledgeFlags(phase_known=False, orientation_known=True),
                c=SCALED_C,
            )

        ref = build((0.0, 0.0), base_elements)
        # move the reference to the first element's position: recompute the
        # polar offsets of the same physical elements about the new origin
        from arrayloc import antenna_positions

        world = antenna_positions(ref.array, ref.pose)
        new_ref = world[1]
        rel = world - new_ref
        # undo the orientation to get body coordinates
        rot = np.array(
            [
                [math.cos(-ref.pose.orientation), -math.sin(-ref.pose.orientation)],
                [math.sin(-ref.pose.orientation), math.cos(-ref.pose.orientation)],
            ]
        )
        body = rel @ rot.T
        elements = [
            (float(np.hypot(b[0], b[1])), float(math.atan2(b[1], b[0]))) for b in body
        ]
        moved = build(tuple(new_ref), elements)

        for builder in (
            lambda s: efim_static_orient_known(s, mode="far-field").matrix,
            lambda s: efim_static_orient_unknown(s)[1].matrix,
        ):
            a = builder(ref)
            b = builder(moved)
            assert np.linalg.norm(a - b, 2) <= 1e-10 * np.linalg.norm(a, 2)


class TestStaticOrientUnknown:
    def test_single_anchor_leaves_ranging_only(self):
        s = static_scenario(
            anchors=(anchor_at(12.0, 5.0),),
            knowledge=KnowledgeFlags(phase_known=False, orientation_known=False),
        )
        with pytest.warns(UserWarning):
            _, j2 = efim_static_orient_unknown(s)
        eig = np.linalg.eigvalsh(j2.matrix)
        assert eig[0] <= 1e-9 * eig[1]

    def test_unknown_orientation_never_helps(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 5))
            anchors = tuple(
                anchor_at(
                    float(rng.uniform(8, 15) * math.cos(a)),
                    float(rng.uniform(8, 15) * math.sin(a)),
                    snr=float(rng.uniform(100, 1000)),
                )
                for a in rng.uniform(0, 2 * math.pi, n)
            )
            s = static_scenario(anchors=anchors, array=uca(4, 0.4))
            known = efim_static_orient_known(s, mode="far-field").matrix
            unknown = efim_static_orient_unknown(s)[1].matrix
            assert loewner_geq(known, unknown)

    def test_pairwise_identity(self, rng):
        # the subtractive form equals the explicit pairwise double sum
        s = static_scenario(
            anchors=(
                anchor_at(12.0, 3.0),
                anchor_at(-4.0, 9.0, snr=400.0),
                anchor_at(2.0, -11.0, snr=700.0),
            ),
            array=uca(4, 0.4),
        )
        from arrayloc.model import anchor_range_bearing
        from arrayloc.arrays import saaf

        _, j2 = efim_static_orient_unknown(s)
        beta_eff, fc_eff = s.signal.effective()
        n_a = s.array.n_antennas
        toa = np.zeros((2, 2))
        lam, phi, dist, g = [], [], [], []
        for anchor in s.anchors:
            d, p = anchor_range_bearing(anchor.position, s.pose.reference)
            lam.append(intensity(anchor, SCALED_C))
            phi.append(p)
            dist.append(d)
            g.append(float(saaf(s.array, p - s.pose.orientation)))
            toa += n_a * lam[-1] * beta_eff**2 * rdm(p)
        pairwise = np.zeros((2, 2))
        denom = sum(l * gg for l, gg in zip(lam, g))
        for i in range(len(lam)):
            for j in range(len(lam)):
                vi = np.array([-math.sin(phi[i]), math.cos(phi[i])]) / dist[i]
                vj = np.array([-math.sin(phi[j]), math.cos(phi[j])]) / dist[j]
                w = lam[i] * g[i] * lam[j] * g[j] / (2.0 * denom)
                pairwise += n_a * fc_eff**2 * w * np.outer(vi - vj, vi - vj)
        np.testing.assert_allclose(j2.matrix, toa + pairwise, rtol=1e-10, atol=1e-18)


class TestDynamic:
    def test_zero_speed_equals_static(self):
        s = dynamic_scenario(speed=0.0)
        dyn = efim_dynamic_known(s, mode="narrowband").matrix
        static = efim_static_orient_known(s, mode="far-field").matrix
        np.testing.assert_allclose(dyn, static, rtol=1e-12)

    def test_angular_speed_value_and_finite_difference(self):
        # v=30, D=50, motion perpendicular to the line of sight: 0.6 rad/s
        from arrayloc.efim import _angular_speeds, _los_geometry

        s = Scenario(
            anchors=(anchor_at(50.0, 0.0, snr=1000.0),),
            array=ula(2, 0.5),
            pose=ArrayPose(Position2D(0.0, 0.0), 0.0),
            signal=simple_summary(beta=1e6, fc=1e8, band=4e6, trms=0.01),
            knowledge=KnowledgeFlags(False, True, True, True),
            motion=AgentMotion(speed=30.0, direction=math.pi / 2 + math.pi, reference_time=0.0),
            c=C_PHYS,
        )
        geo = _los_geometry(s)
        omega = _angular_speeds(s, geo)[0]
        # psi_d - phi_j = (3pi/2) - pi = pi/2 -> omega = v/D
        assert omega == pytest.approx(0.6, rel=1e-12)
        # finite-difference d(phi_j)/dt under the kinematics
        dt = 1e-6
        shift = 30.0 * dt * np.array([math.cos(s.motion.direction), math.sin(s.motion.direction)])
        from arrayloc.model import anchor_range_bearing

        _, phi0 = anchor_range_bearing(s.anchors[0].position, Position2D(0.0, 0.0))
        _, phi1 = anchor_range_bearing(s.anchors[0].position, Position2D(*shift))
        dphi = (phi1 - phi0 + math.pi) % (2 * math.pi) - math.pi
        assert dphi / dt == pytest.approx(omega, rel=1e-5)

    def test_exact_mode_needs_waveform(self):
        s = dynamic_scenario()
        with pytest.raises(ValueError):
            efim_dynamic_known(s, mode="exact")

    def test_doppler_only_adds_direction_information(self):
        # the dynamic bound minus its zero-speed value is PSD at physical speeds
        sig = SignalSummary(beta=1e6, bcc=0.0, carrier=1e8, band_limit=4e6, trms=0.01, t_ob=1.0)
        anchors = tuple(anchor_at(50.0 * math.cos(a), 50.0 * math.sin(a)) for a in (0.2, 1.9, 3.7))
        s = Scenario(
            anchors=anchors,
            array=ula(6, 0.5),
            pose=ArrayPose(Position2D(0.0, 0.0), 0.4),
            signal=sig,
            knowledge=KnowledgeFlags(False, True, True, True),
            motion=AgentMotion(speed=30.0, direction=1.0),
            c=C_PHYS,
        )
        dyn = efim_dynamic_known(s, mode="narrowband").matrix
        static = efim_dynamic_known(dataclasses.replace(s, motion=AgentMotion(0.0, 1.0)), mode="narrowband").matrix
        assert loewner_geq(dyn, static)

    def test_pose_unknown_zero_speed_limit_matches_static(self):
        s = dynamic_scenario(speed=0.0, knowledge=KnowledgeFlags(False, False, False, True))
        _, j2_dyn = efim_dynamic_orient_dir_unknown(s)
        _, j2_static = efim_static_orient_unknown(s)
        np.testing.assert_allclose(j2_dyn.matrix, j2_static.matrix, rtol=1e-12)

    def test_pose_unknown_single_anchor_is_ranging_only(self):
        s = dynamic_scenario(anchors=(anchor_at(11.0, 4.0),))
        with pytest.warns(UserWarning):
            _, j2 = efim_static_orient_unknown(s)
        _, j2_dyn = efim_dynamic_orient_dir_unknown(s)
        eig = np.linalg.eigvalsh(j2_dyn.matrix)
        assert eig[0] <= 1e-9 * eig[1]

    def test_orientation_and_direction_decouple(self):
        j4, _ = efim_dynamic_orient_dir_unknown(dynamic_scenario())
        assert j4.matrix[2, 3] == pytest.approx(0.0, abs=1e-12 * np.abs(j4.matrix).max())

    def test_all_unknown_never_beats_speed_known(self, rng):
        for _ in range(10):
            s = dynamic_scenario(
                speed=float(rng.uniform(0.1, 1.0)), direction=float(rng.uniform(0, 2 * math.pi))
            )
            _, j2_speed_known = efim_dynamic_orient_dir_unknown(s)
            j5 = efim_dynamic_all_unknown(s)
            reduced = schur_complement(j5.matrix, 2, allow_pseudoinverse=True)
            assert loewner_geq(j2_speed_known.matrix, reduced)

    def test_unknown_speed_only_contaminates_the_doppler_term(self):
        s = dynamic_scenario()
        j4, _ = efim_dynamic_orient_dir_unknown(s)
        j5 = efim_dynamic_all_unknown(s)
        np.testing.assert_allclose(j5.matrix[:2, :2], j4.matrix[:2, :2], rtol=1e-12)
        np.testing.assert_allclose(j5.matrix[:4, :4][2:, :2], j4.matrix[2:, :2], rtol=1e-12)

    def test_radial_motion_stays_finite(self):
        # anchor dead ahead: omega = 0, the speed column's removable
        # singularity must not produce nan/inf
        s = dynamic_scenario(
            anchors=(anchor_at(10.0, 0.0),), direction=math.pi, speed=0.5
        )
        j5 = efim_dynamic_all_unknown(s)
        assert np.all(np.isfinite(j5.matrix))
        # speed stays observable through the radial Doppler of the envelope?
        # no: the retained term is f_c^2 t^2 cos^2(phi - psi_d) on the (v, v)
        # entry, which is positive for radial motion
        assert j5.matrix[4, 4] > 0


class TestMonotoneChain:
    def test_information_never_grows_with_ignorance(self, rng):
        for _ in range(10):
            s = dynamic_scenario(
                speed=float(rng.uniform(0.2, 1.0)),
                direction=float(rng.uniform(0, 2 * math.pi)),
            )
            j_known = efim_dynamic_known(s, mode="narrowband").matrix
            _, j_pose_unknown = efim_dynamic_orient_dir_unknown(s)
            j5 = efim_dynamic_all_unknown(s)
            j_all = schur_complement(j5.matrix, 2, allow_pseudoinverse=True)
            assert loewner_geq(j_known, j_pose_unknown.matrix)
            assert loewner_geq(j_pose_unknown.matrix, j_all)

    def test_static_chain(self, rng):
        for _ in range(10):
            anchors = tuple(
                anchor_at(
                    float(12 * math.cos(a)), float(12 * math.sin(a)), snr=float(rng.uniform(200, 900))
                )
                for a in rng.uniform(0, 2 * math.pi, 3)
            )
            s = static_scenario(anchors=anchors, array=uca(4, 0.4))
            full = efim_static_full(
                dataclasses.replace(s, knowledge=KnowledgeFlags(True, True))
            ).matrix
            known = efim_static_orient_known(s, mode="far-field").matrix
            unknown = efim_static_orient_unknown(s)[1].matrix
            assert loewner_geq(full, known)
            assert loewner_geq(known, unknown)


class TestDecomposition:
    def test_bandwidth_identity(self, rng):
        for _ in range(50):
            beta, fc = rng.uniform(0.1, 5.0), rng.uniform(1.0, 100.0)
            gamma = rng.uniform(-1.0, 1.0)
            lhs = beta**2 + fc**2 + 2 * gamma * beta * fc
            rhs = (1 - gamma**2) * beta**2 + (gamma * beta + fc) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestSchur:
    def test_block_diagonal_returns_leading_block(self):
        j = np.diag([3.0, 2.0, 5.0, 7.0])
        np.testing.assert_allclose(schur_complement(j, 2), np.diag([3.0, 2.0]))

    def test_inverse_consistency(self, rng):
        for _ in range(20):
            m = rng.normal(size=(5, 5))
            j = m @ m.T + 5.0 * np.eye(5)
            reduced = schur_complement(j, 2)
            direct = np.linalg.inv(j)[:2, :2]
            np.testing.assert_allclose(np.linalg.inv(reduced), direct, rtol=1e-10)

    def test_singular_nuisance_raises_without_permission(self):
        j = np.diag([1.0, 1.0, 0.0])
        with pytest.raises(SingularNuisanceError):
            schur_complement(j, 2)

    def test_consistent_rank_deficient_system_via_pseudoinverse(self):
        # trailing block singular but the coupling lies in its range
        j = np.array(
            [
                [1.0, 0.0, 1.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [1.0, 0.0, 2.0, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ]
        )
        out = schur_complement(j, 2, allow_pseudoinverse=True)
        np.testing.assert_allclose(out, np.diag([0.5, 1.0]), atol=1e-12)


class TestSpeb:
    def test_identity(self):
        assert speb(np.eye(2)).value == pytest.approx(2.0)

    def test_diagonal(self):
        assert speb(np.diag([4.0, 0.25])).value == pytest.approx(4.25)

    def test_rank_deficient_is_infinite(self):
        result = speb(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert math.isinf(result.value)
        assert result.rank_deficient

    def test_collinear_degeneracy(self):
        # agent on the anchor line with a parallel line array: no aperture
        # seen from any anchor and all bearings on one axis
        anchors = tuple(anchor_at(x, 20.0) for x in (-20.0, -10.0, 0.0, 10.0, 20.0))
        s = Scenario(
            anchors=anchors,
            array=ula(6, 0.5),
            pose=ArrayPose(Position2D(30.0, 20.0), 0.0),
            signal=SignalSummary(beta=1e6, bcc=0.0, carrier=1e8, band_limit=4e6, t_ob=1.0),
            knowledge=KnowledgeFlags(False, True),
            c=C_PHYS,
        )
        result = efim_static_orient_known(s, mode="far-field")
        assert abs(np.linalg.det(result.matrix)) <= 1e-9 * np.linalg.norm(result.matrix, 2) ** 2
        assert math.isinf(speb(result).value)


class TestSpebUoaClosed:
    def _ucoa_scenario(self, rng, n_anchors=3):
        anchors = tuple(
            anchor_at(
                float(rng.uniform(9, 14) * math.cos(a)),
                float(rng.uniform(9, 14) * math.sin(a)),
                snr=float(rng.uniform(200, 1200)),
            )
            for a in rng.uniform(0, 2 * math.pi, n_anchors)
        )
        return static_scenario(anchors=anchors, array=uca(5, 0.5))

    def test_matches_matrix_route_for_circular_arrays(self, rng):
        from arrayloc import average_saaf

        for _ in range(20):
            s = self._ucoa_scenario(rng)
            g = average_saaf(s.array)
            closed = speb_uoa_closed(
                s.anchors, s.signal, g, s.pose.reference, SCALED_C, n_antennas=s.array.n_antennas
            )
            matrix_route = speb(efim_static_orient_known(s, mode="far-field"))
            assert closed.value == pytest.approx(matrix_route.value, rel=1e-10)

    def test_common_bearing_leaves_cross_terms(self):
        # all anchors on one bearing: the angle-diversity term vanishes and
        # only the mixed radial-tangent products hold the bound together
        from arrayloc import average_saaf

        anchors = (anchor_at(10.0, 0.0), anchor_at(14.0, 0.0, snr=500.0))
        s = static_scenario(anchors=anchors, array=uca(4, 0.5))
        g = average_saaf(s.array)
        beta_eff, fc_eff = s.signal.effective()
        n_a = s.array.n_antennas
        r, ss = [], []
        for anchor in anchors:
            lam = intensity(anchor, SCALED_C) * n_a
            d, _ = (
                math.hypot(anchor.position.x, anchor.position.y),
                None,
            )
            r.append(lam * beta_eff**2)
            ss.append(lam * fc_eff**2 * g / d**2)
        expected = (
            2.0 * (sum(r) + sum(ss)) / (2.0 * sum(ss) * sum(r))
        )
        closed = speb_uoa_closed(
            anchors, s.signal, g, s.pose.reference, SCALED_C, n_antennas=n_a
        )
        assert closed.value == pytest.approx(expected, rel=1e-12)

    def test_isotropic_weights_make_angles_irrelevant(self, rng):
        # arrange beta*D = f_c*sqrt(G): u_i = 0 for every anchor
        from arrayloc import average_saaf

        array = uca(4, 0.5)
        g = average_saaf(array)
        fc = 60.0
        dist = 10.0
        beta = fc * math.sqrt(g) / dist
        sig = SignalSummary(beta=beta, bcc=0.0, carrier=fc, band_limit=4 * beta, t_ob=1.0)
        values = []
        for _ in range(10):
            angles = rng.uniform(0, 2 * math.pi, 3)
            anchors = tuple(
                anchor_at(dist * math.cos(a), dist * math.sin(a), snr=500.0) for a in angles
            )
            values.append(
                speb_uoa_closed(anchors, sig, g, Position2D(0.0, 0.0), SCALED_C, 4).value
            )
        assert max(values) - min(values) <= 1e-10 * values[0]


class TestDispatcher:
    def test_static_routes(self):
        s = static_scenario(knowledge=KnowledgeFlags(True, True))
        assert efim_position(s).scenario_tag == "static/full-knowledge"
        s = static_scenario(knowledge=KnowledgeFlags(False, True))
        assert "orientation-known" in efim_position(s).scenario_tag
        s = static_scenario(
            anchors=(anchor_at(12.0, 3.0), anchor_at(-4.0, 9.0)),
            knowledge=KnowledgeFlags(False, False),
        )
        assert "orientation-unknown" in efim_position(s).scenario_tag

    def test_dynamic_routes(self):
        s = dynamic_scenario()
        assert "dynamic/full-knowledge" in efim_position(s).scenario_tag
        s = dynamic_scenario(knowledge=KnowledgeFlags(False, False, False, True))
        assert "pose-unknown" in efim_position(s).scenario_tag
        s = dynamic_scenario(knowledge=KnowledgeFlags(False, False, False, False))
        assert "all-unknown" in efim_position(s).scenario_tag

    def test_unsupported_combination_rejected(self):
        s = dynamic_scenario(knowledge=KnowledgeFlags(False, True, False, True))
        with pytest.raises(ValueError):
            efim_position(s)


class TestDynamicModes:
    def test_approximate_within_multiplicative_band_of_exact(self):
        from arrayloc.oracle_suite import dynamic_scenario

        s = dynamic_scenario()
        band = (1.0 + 3.17 * s.signal.band_limit / s.signal.carrier) ** 2 - 1.0
        approx = efim_dynamic_known(s, mode="narrowband").matrix
        exact = efim_dynamic_known(s, mode="exact").matrix
        rel = np.linalg.norm(approx - exact, 2) / np.linalg.norm(exact, 2)
        assert rel <= band

    def test_wideband_dynamic_scenario_warns(self):
        sig = simple_summary(beta=20.0, fc=100.0, band=80.0, trms=0.05)
        scenario = dynamic_scenario(signal=sig)
        with pytest.warns(UserWarning, match="narrowband"):
            efim_dynamic_known(scenario, mode="narrowband")


class TestIntensityProfile:
    def test_doppler_factor_kept_separate(self):
        from arrayloc import intensity_profile

        s = dynamic_scenario(speed=0.9, direction=0.0)
        profile = intensity_profile(s)
        assert np.all(profile.lambdas[np.array([a.los for a in s.anchors])] > 0)
        assert np.any(profile.doppler_factors != 1.0)
        np.testing.assert_allclose(
            profile.folded(), profile.lambdas * profile.doppler_factors, rtol=1e-15
        )

    def test_static_factors_are_unity(self):
        from arrayloc import intensity_profile

        profile = intensity_profile(static_scenario())
        np.testing.assert_array_equal(profile.doppler_factors, np.ones(2))


class TestCenteredMode:
    def test_off_center_description_matches_far_field(self):
        # array described about an end element: the centered mode moves the
        # reference to the centroid first
        elements = [(0.0, 0.0), (0.3, 0.1), (0.55, -0.05)]
        s = static_scenario(array=AntennaArray.from_elements(elements))
        far = efim_static_orient_known(s, mode="far-field").matrix
        centered = efim_static_orient_known(s, mode="centered").matrix
        # the two modes use different reference points, so they agree only
        # to the visual-angle scale at these ranges
        assert np.linalg.norm(centered - far, 2) <= 5e-2 * np.linalg.norm(far, 2)
        # and the direction information is identical: the centered
        # per-antenna squared visual angles rebuild the same aperture term
        s_far = static_scenario(
            array=AntennaArray.from_elements(elements),
            anchors=(anchor_at(1e9, 2e8), anchor_at(-3e8, 1e9, snr=400.0)),
        )
        far2 = efim_static_orient_known(s_far, mode="far-field").matrix
        centered2 = efim_static_orient_known(s_far, mode="centered").matrix
        assert np.linalg.norm(centered2 - far2, 2) <= 1e-9 * np.linalg.norm(far2, 2)


class TestBalancedPhaseGate:
    def test_chirp_waveform_warns_in_narrowband_mode(self):
        from arrayloc import summarize
        from arrayloc.signal import linear_chirp

        wave = linear_chirp(1024, 1.0 / 1024, rate=30.0)
        sig = summarize(wave, carrier=2000.0)
        s = dynamic_scenario(signal=sig, waveform=wave)
        with pytest.warns(UserWarning) as records:
            efim_dynamic_known(s, mode="narrowband")
        assert any("balanced-phase" in str(r.message) for r in records)

"""Tests for block system construction and pencil regularity analysis."""

import numpy as np
import pytest

from dhdae import (
    BlockDhdae,
    RawPencil,
    ShapeError,
    StructureError,
    UsageError,
    check_coercive,
    check_dissipative,
    common_kernel,
    epsilon_shift_test,
    extend_x3,
    hamiltonian,
    is_regular_sampled,
    jr_split,
    jr_stacked_bound,
    kernel_tests,
    no_common_kernel_singular_pencil,
    stacked_bound,
    strip_x3,
)
from helpers import (
    random_complex,
    random_conforming,
    random_dissipative,
    random_hpd,
    random_singular_conforming,
    random_state,
)


def small_system():
    return BlockDhdae(
        n1=1, n2=1, E1=[[1.0]], Q1=[[1.0]], Q2=[[1.0]], A=[[0.0, -1.0], [1.0, -1.0]]
    )


class TestChecks:
    def test_dissipative_accepts_skew(self):
        assert check_dissipative([[0.0, -1.0], [1.0, 0.0]])

    def test_dissipative_accepts_zero(self):
        assert check_dissipative(np.zeros((3, 3)))

    def test_dissipative_rejects_accretive(self):
        assert not check_dissipative([[1.0, 0.0], [0.0, -5.0]])

    def test_dissipative_relative_scale(self):
        # a tiny but genuinely positive matrix is rejected: tolerance is relative
        assert not check_dissipative([[1e-15]])
        assert check_dissipative([[-1e-15]])

    def test_dissipative_random(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            assert check_dissipative(random_dissipative(rng, n))

    def test_coercive_accepts_hpd_product(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            n = int(rng.integers(1, 8))
            e1 = random_complex(rng, n, n) + 2.0 * n * np.eye(n)
            m = random_hpd(rng, n)
            q1 = np.linalg.inv(e1.conj().T) @ m
            assert check_coercive(e1, q1)

    def test_coercive_rejects_indefinite(self):
        assert not check_coercive(np.eye(2), [[0.0, 1.0], [1.0, 0.0]])

    def test_coercive_rejects_negative(self):
        assert not check_coercive([[1.0]], [[-1.0]])

    def test_coercive_rejects_nonhermitian_product(self):
        assert not check_coercive(np.eye(2), [[1.0, 1.0], [0.0, 1.0]])


class TestBlockDhdae:
    def test_requires_dynamic_block(self):
        with pytest.raises(StructureError):
            BlockDhdae(
                n1=0,
                n2=1,
                E1=np.zeros((0, 0)),
                Q1=np.zeros((0, 0)),
                Q2=[[1.0]],
                A=[[-1.0]],
            )

    def test_allows_empty_algebraic_block(self):
        sys = BlockDhdae(
            n1=2,
            n2=0,
            E1=np.eye(2),
            Q1=np.eye(2),
            Q2=np.zeros((0, 0)),
            A=[[0.0, -1.0], [1.0, -1.0]],
        )
        assert sys.n == 2
        assert kernel_tests(sys) == (True, True)
        assert is_regular_sampled(sys).regular

    def test_rejects_singular_e1(self):
        with pytest.raises(StructureError, match="E1"):
            BlockDhdae(
                n1=2,
                n2=0,
                E1=[[1.0, 0.0], [0.0, 0.0]],
                Q1=np.eye(2),
                Q2=np.zeros((0, 0)),
                A=-np.eye(2),
            )

    def test_rejects_noncoercive_metric(self):
        with pytest.raises(StructureError, match="coercivity"):
            BlockDhdae(
                n1=1, n2=0, E1=[[1.0]], Q1=[[-1.0]], Q2=np.zeros((0, 0)), A=[[-1.0]]
            )

    def test_rejects_accretive_a(self):
        with pytest.raises(StructureError, match="dissipative"):
            BlockDhdae(
                n1=1, n2=0, E1=[[1.0]], Q1=[[1.0]], Q2=np.zeros((0, 0)), A=[[1.0]]
            )

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ShapeError):
            BlockDhdae(n1=2, n2=0, E1=np.eye(2), Q1=np.eye(3), Q2=np.zeros((0, 0)),
                       A=-np.eye(2))

    def test_block_views(self):
        rng = np.random.default_rng(3)
        sys = random_conforming(rng, 3, 2)
        assert np.array_equal(sys.A11, sys.A[:3, :3])
        assert np.array_equal(sys.A22, sys.A[3:, 3:])
        assert np.array_equal(sys.E[:3, :3], sys.E1)
        assert np.allclose(sys.E[3:, :], 0.0)
        assert np.array_equal(sys.Q[3:, 3:], sys.Q2)


class TestHamiltonian:
    def test_reduces_to_dynamic_block(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n1 = int(rng.integers(1, 6))
            n2 = int(rng.integers(0, 5))
            sys = random_conforming(rng, n1, n2)
            x = random_state(rng, n1 + n2)
            x1 = x.copy()
            x1[n1:] = 0.0
            full = hamiltonian(sys, x)
            dyn = hamiltonian(sys, x1)
            assert full == pytest.approx(dyn, rel=0.0, abs=1e-12 * max(1.0, abs(full)))

    def test_positive_on_nonzero_dynamic_states(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            sys = random_conforming(rng, 4, 2)
            x = random_state(rng, 6)
            assert hamiltonian(sys, x) > 0.0 or np.allclose(x[:4], 0.0)

    def test_rejects_wrong_length(self):
        with pytest.raises(ShapeError):
            hamiltonian(small_system(), [1.0, 2.0, 3.0])


class TestRegularity:
    def test_stacked_bound_pinned_example(self):
        # sigma_min of [[1,0],[0,0],[0,-1],[1,-1]]: Gram spectrum {1, 3}
        assert stacked_bound(small_system()) == pytest.approx(1.0, abs=1e-12)

    def test_report_fields_on_regular_system(self):
        rep = is_regular_sampled(small_system())
        assert rep.regular
        assert len(rep.sampled_points) == 3
        assert all(np.isfinite(c) for _, c in rep.sampled_points)
        assert rep.injective_x2 and rep.surjective_x2
        assert rep.common_kernel_dim == 0

    def test_empty_sample_list_rejected(self):
        with pytest.raises(UsageError):
            is_regular_sampled(small_system(), [])

    def test_random_conforming_systems_are_regular(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            n1 = int(rng.integers(1, 7))
            n2 = int(rng.integers(0, 6))
            sys = random_conforming(rng, n1, n2)
            rep = is_regular_sampled(sys)
            assert rep.regular
            assert rep.stacked_sigma_min > 1e-8
            assert rep.injective_x2 and rep.surjective_x2
            assert rep.common_kernel_dim == 0
            assert jr_stacked_bound(sys) > 1e-8

    def test_singular_systems_fail_every_route(self):
        rng = np.random.default_rng(43)
        for _ in range(15):
            n1 = int(rng.integers(1, 6))
            n2 = int(rng.integers(1, 5))
            sys = random_singular_conforming(rng, n1, n2)
            rep = is_regular_sampled(sys)
            assert not rep.regular
            assert rep.stacked_sigma_min < 1e-10
            assert not rep.injective_x2
            assert not rep.surjective_x2

    def test_regular_implies_kernel_tests(self):
        # one-point invertibility settles the sampled verdict and forces both
        # kernel tests for conforming systems
        rng = np.random.default_rng(47)
        for _ in range(20):
            sys = random_conforming(rng, int(rng.integers(1, 6)), int(rng.integers(0, 5)))
            rep = is_regular_sampled(sys, [1.0 + 0.5j])
            if rep.regular:
                assert rep.injective_x2 and rep.surjective_x2

    def test_normalized_pencil_has_same_verdict(self):
        # replacing E1, Q1, Q2 by identities while keeping A preserves regularity
        rng = np.random.default_rng(53)
        for _ in range(20):
            n1 = int(rng.integers(1, 6))
            n2 = int(rng.integers(1, 5))
            sys = random_conforming(rng, n1, n2)
            normalized = BlockDhdae(
                n1=n1, n2=n2, E1=np.eye(n1), Q1=np.eye(n1), Q2=np.eye(n2), A=sys.A
            )
            assert (
                is_regular_sampled(sys).regular
                == is_regular_sampled(normalized).regular
            )
        for _ in range(10):
            n1 = int(rng.integers(1, 6))
            n2 = int(rng.integers(1, 5))
            sys = random_singular_conforming(rng, n1, n2)
            normalized = BlockDhdae(
                n1=n1, n2=n2, E1=np.eye(n1), Q1=np.eye(n1), Q2=np.eye(n2), A=sys.A
            )
            assert not is_regular_sampled(normalized).regular


class TestSingularFixture:
    def test_singular_at_every_sample_without_common_kernel(self):
        pencil = no_common_kernel_singular_pencil()
        rep = is_regular_sampled(pencil, [1.0, 1.0 + 1.0j, 10.0])
        assert not rep.regular
        assert all(not np.isfinite(c) for _, c in rep.sampled_points)
        assert rep.common_kernel_dim == 0
        assert rep.injective_x2 is None and rep.surjective_x2 is None

    def test_singular_on_a_dense_sweep(self):
        pencil = no_common_kernel_singular_pencil()
        rng = np.random.default_rng(5)
        samples = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        rep = is_regular_sampled(pencil, samples.tolist())
        assert not rep.regular
        assert all(not np.isfinite(c) for _, c in rep.sampled_points)

    def test_individual_kernels_are_trivial_only_jointly(self):
        pencil = no_common_kernel_singular_pencil()
        ker_e = common_kernel([pencil.E])
        ker_m = common_kernel([pencil.M])
        assert ker_e.shape[1] == 1
        assert ker_m.shape[1] == 1
        assert common_kernel([pencil.E, pencil.M]).shape[1] == 0


class TestCommonKernel:
    def test_zero_matrix_gives_full_space(self):
        basis = common_kernel([np.zeros((2, 3))])
        assert basis.shape == (3, 3)

    def test_identity_gives_trivial_kernel(self):
        assert common_kernel([np.eye(4)]).shape == (4, 0)

    def test_requires_matching_columns(self):
        with pytest.raises(ShapeError):
            common_kernel([np.eye(2), np.eye(3)])

    def test_requires_nonempty_list(self):
        with pytest.raises(UsageError):
            common_kernel([])

    def test_intersection_of_random_projections(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            n = int(rng.integers(3, 9))
            a = random_complex(rng, int(rng.integers(1, n)), n)
            b = random_complex(rng, int(rng.integers(1, n)), n)
            basis = common_kernel([a, b])
            if basis.shape[1]:
                assert np.linalg.norm(a @ basis) < 1e-10
                assert np.linalg.norm(b @ basis) < 1e-10
            target = n - min(a.shape[0] + b.shape[0], n)
            assert basis.shape[1] == target


class TestJrSplit:
    def test_pinned_example(self):
        j, r = jr_split([[0.0, -1.0], [1.0, -2.0]])
        assert np.allclose(j, [[0.0, -1.0], [1.0, 0.0]], atol=1e-14)
        assert np.allclose(r, [[0.0, 0.0], [0.0, 2.0]], atol=1e-14)

    def test_split_reconstructs_and_is_structured(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(1, 8))
            a = random_dissipative(rng, n)
            j, r = jr_split(a)
            assert np.allclose(j + j.conj().T, 0.0, atol=1e-12)
            assert np.min(np.linalg.eigvalsh(0.5 * (r + r.conj().T))) > -1e-10
            assert np.allclose(a, j - r, atol=1e-13)

    def test_rejects_non_dissipative(self):
        with pytest.raises(StructureError, match="not dissipative"):
            jr_split([[1.0]])


class TestEpsilonShift:
    def test_pinned_example(self):
        sys = BlockDhdae(
            n1=1, n2=1, E1=[[1.0]], Q1=[[1.0]], Q2=[[1.0]],
            A=[[-1.0, 1.0], [-1.0, -1.0]],
        )
        assert epsilon_shift_test(sys, 0.5)
        # and the certificate is honest: the pencil really is regular
        assert is_regular_sampled(sys).regular

    def test_shift_is_sufficient_only(self):
        # regular system whose dissipation is too weak for any useful shift
        sys = BlockDhdae(
            n1=1, n2=1, E1=[[1.0]], Q1=[[1.0]], Q2=[[1.0]],
            A=[[0.0, -1.0], [1.0, 0.0]],
        )
        assert is_regular_sampled(sys).regular
        assert not epsilon_shift_test(sys, 0.5)

    def test_certificate_implies_regularity(self):
        rng = np.random.default_rng(37)
        hits = 0
        for _ in range(40):
            n1 = int(rng.integers(1, 5))
            n2 = int(rng.integers(1, 4))
            sys = random_conforming(rng, n1, n2)
            if epsilon_shift_test(sys, 1e-3):
                hits += 1
                assert is_regular_sampled(sys).regular
        assert hits > 0

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(UsageError):
            epsilon_shift_test(small_system(), 0.0)


class TestExtension:
    def test_pinned_string_style_extension(self):
        sys = small_system()
        ext = extend_x3(sys, [[1.0]], [[1.0, 0.0, 0.0]])
        assert ext.n3 == 1
        assert is_regular_sampled(ext.pencil()).regular

    def test_zero_row_extension_is_regular(self):
        sys = small_system()
        ext = extend_x3(sys, [[2.0]], [[0.0, 0.0, 0.0]])
        assert is_regular_sampled(ext.pencil()).regular

    def test_energy_is_preserved_exactly(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            n1 = int(rng.integers(1, 5))
            n2 = int(rng.integers(0, 4))
            n3 = int(rng.integers(1, 4))
            sys = random_conforming(rng, n1, n2)
            e3 = random_complex(rng, n3, n3) + 2.0 * n3 * np.eye(n3)
            c = random_complex(rng, n3, n1 + n2)
            a33 = random_dissipative(rng, n3)
            ext = extend_x3(sys, e3, np.hstack([c, a33]))
            x = random_state(rng, n1 + n2 + n3)
            assert hamiltonian(ext, x) == pytest.approx(
                hamiltonian(sys, x[: n1 + n2]), rel=1e-13, abs=1e-13
            )

    def test_extended_operator_is_dissipative(self):
        rng = np.random.default_rng(67)
        for _ in range(20):
            sys = random_conforming(rng, 3, 2)
            c = random_complex(rng, 2, 5)
            a33 = random_dissipative(rng, 2)
            ext = extend_x3(sys, np.eye(2), np.hstack([c, a33]))
            assert check_dissipative(ext.A_ext)

    def test_regularity_matches_base(self):
        rng = np.random.default_rng(71)
        for _ in range(12):
            sys = random_conforming(rng, 3, 2)
            c = random_complex(rng, 2, 5)
            ext = extend_x3(sys, np.eye(2), np.hstack([c, random_dissipative(rng, 2)]))
            assert is_regular_sampled(ext.pencil()).regular
        for _ in range(8):
            sys = random_singular_conforming(rng, 3, 2)
            c = random_complex(rng, 2, 5)
            ext = extend_x3(sys, np.eye(2), np.hstack([c, random_dissipative(rng, 2)]))
            assert not is_regular_sampled(ext.pencil()).regular

    def test_round_trip(self):
        sys = small_system()
        ext = extend_x3(sys, [[1.0]], [[0.5, -0.5, 0.0]])
        back = strip_x3(ext)
        assert back is sys

    def test_rejects_singular_e3(self):
        with pytest.raises(StructureError, match="E3"):
            extend_x3(small_system(), [[0.0]], [[0.0, 0.0, 0.0]])

    def test_rejects_accretive_trailing_block(self):
        with pytest.raises(StructureError, match="not dissipative"):
            extend_x3(small_system(), [[1.0]], [[0.0, 0.0, 1.0]])


class TestRawPencil:
    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            RawPencil(E=np.eye(2), M=np.eye(3))

    def test_stacked_bound_applies(self):
        pencil = no_common_kernel_singular_pencil()
        assert stacked_bound(pencil) > 0.0

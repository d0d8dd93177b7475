"""Gramian condition verification and the Hodge star cone construction."""

import numpy as np
import pytest

from polyrealize import (
    BilinearForm,
    FilledIncidenceMatrix,
    GramianCandidate,
    block_gramian,
    build_maxbiclique_lattice,
    check_filled_incidence,
    compact_svd,
    enumerate_super_cycles_per_vertex,
    gramian_of_cone,
    realize_cone_from_gramian,
    realize_from_matrix,
    verify_gramian_conditions,
    verify_hyperbolic_conditions,
    verify_spherical_conditions,
)
from polyrealize.errors import (
    LightlikeNormalError,
    PatternViolationError,
    SignatureMismatchError,
)
from polyrealize.numkernel import factor_against_form, numeric_rank

from conftest import PYRAMID_MATRIX, octant_relation, pyramid_relation

IDEAL_TRIANGLE_RELATION = lambda: __import__("conftest").ngon(3)


def octant_candidate():
    return GramianCandidate(
        np.eye(3), BilinearForm.euclidean(3), octant_relation(), 2
    )


def pyramid_cone_candidate():
    """Gramian of the cone over the Figure-style pyramid, via its facet-ray matrix."""
    rel = pyramid_relation()
    N = PYRAMID_MATRIX - 1.0
    fim = FilledIncidenceMatrix(N, rel, 0.0)
    cone = realize_from_matrix(fim, 3)
    form = BilinearForm.euclidean(4)
    G = gramian_of_cone(cone.H, form)
    return GramianCandidate(G, form, rel, 3)


class TestCandidateValidation:
    def test_bad_diagonal_rejected(self, octant):
        G = np.eye(3)
        G[0, 0] = 0.5
        with pytest.raises(ValueError):
            GramianCandidate(G, BilinearForm.euclidean(3), octant, 2)

    def test_asymmetric_rejected(self, octant):
        G = np.eye(3)
        G[0, 1] = 0.3
        with pytest.raises(ValueError):
            GramianCandidate(G, BilinearForm.euclidean(3), octant, 2)


class TestVerifyGramianConditions:
    def test_octant_passes(self):
        report = verify_gramian_conditions(octant_candidate())
        assert report.passed
        assert report.check("super-cycle-pairs").passed
        assert "exhaustive" in report.check("super-cycle-pairs").detail

    def test_duplicate_normal_fails_vertex_rank(self, octant):
        G = np.eye(3)
        G[0, 1] = G[1, 0] = 1.0  # facets 1 and 2 share a normal
        cand = GramianCandidate(G, BilinearForm.euclidean(3), octant, 2)
        report = verify_gramian_conditions(cand)
        assert not report.passed
        assert not report.check("vertex-minor-rank").passed
        assert "vertex 3" in report.check("vertex-minor-rank").detail

    def test_signature_mismatch_fails(self, octant):
        cand = GramianCandidate(np.eye(3), BilinearForm.hyperbolic(3), octant, 2)
        report = verify_gramian_conditions(cand)
        assert not report.passed
        assert not report.check("signature").passed
        with pytest.raises(SignatureMismatchError):
            factor_against_form(np.eye(3), BilinearForm.hyperbolic(3))

    def test_pyramid_candidate_passes(self):
        report = verify_gramian_conditions(pyramid_cone_candidate())
        assert report.passed

    def test_sampled_pair_mode_above_cap(self):
        cand = pyramid_cone_candidate()
        report = verify_gramian_conditions(cand, pair_cap=10, sample_size=50, seed=3)
        assert report.passed
        detail = report.check("super-cycle-pairs").detail
        assert detail.startswith("sampled")

    def test_flag_cap_propagates(self):
        from polyrealize.errors import FlagCapExceededError

        with pytest.raises(FlagCapExceededError):
            verify_gramian_conditions(pyramid_cone_candidate(), flag_cap=5)

    @pytest.mark.parametrize("builder,d", [("triangular_prism", 3), ("cube", 3),
                                           ("cross_polytope", 3), ("ngon", 2)])
    def test_realized_cones_round_trip(self, builder, d):
        import conftest
        from polyrealize import polytope_to_cone_matrix, realizability_check

        make = getattr(conftest, builder)
        rel = make(6) if builder == "ngon" else (make(3) if builder != "triangular_prism" else make())
        verdict = realizability_check(rel, d)
        N = polytope_to_cone_matrix(verdict.matrix)
        form = BilinearForm.euclidean(d + 1)
        G = gramian_of_cone(realize_from_matrix(N, d).H, form)
        cand = GramianCandidate(G, form, rel, d)
        assert verify_gramian_conditions(cand).passed
        cone = realize_cone_from_gramian(cand)
        assert np.abs(gramian_of_cone(cone.H, form) - G).max() < 1e-8
        assert verify_spherical_conditions(rel, G, d).passed


class TestRealizeConeFromGramian:
    def test_octant_is_negative_orthant(self):
        cone = realize_cone_from_gramian(octant_candidate())
        np.testing.assert_allclose(cone.N.matrix, -np.eye(3), atol=1e-12)
        assert numeric_rank(cone.N.matrix) == 3

    def test_octant_gramian_round_trip(self):
        cand = octant_candidate()
        cone = realize_cone_from_gramian(cand)
        G = gramian_of_cone(cone.H, cand.form)
        assert np.abs(G - cand.G).max() < 1e-8

    def test_pyramid_round_trip(self):
        cand = pyramid_cone_candidate()
        cone = realize_cone_from_gramian(cand)
        assert check_filled_incidence(
            cone.N.matrix, cand.relation, 0.0, eq_tol=1e-9 * np.abs(cone.N.matrix).max()
        ).ok
        assert numeric_rank(cone.N.matrix) == 4
        G = gramian_of_cone(cone.H, cand.form)
        assert np.abs(G - cand.G).max() < 1e-8

    def test_generator_normal_orthogonality(self):
        cand = pyramid_cone_candidate()
        cone = realize_cone_from_gramian(cand)
        lat = build_maxbiclique_lattice(cand.relation)
        cycles = enumerate_super_cycles_per_vertex(lat)
        for j, sc in cycles.items():
            for i in sc.facet_sequence[:-1]:
                val = cone.H[:, i - 1] @ cand.form.phi @ cone.W[:, j - 1]
                assert abs(val) < 1e-10

    def test_sign_coherence(self):
        cand = pyramid_cone_candidate()
        cone = realize_cone_from_gramian(cand)
        nonzero = cone.N.matrix[np.abs(cone.N.matrix) > 1e-9]
        assert np.all(nonzero < 0)

    def test_orientation_swap_gives_same_cone(self):
        cand = pyramid_cone_candidate()
        n0 = realize_cone_from_gramian(cand, orientation=0).N.matrix
        n1 = realize_cone_from_gramian(cand, orientation=1).N.matrix
        np.testing.assert_allclose(n0, n1, atol=1e-12)

    def test_invalid_candidate_never_silently_realizes(self, octant):
        # breaks the orientation determinant condition while keeping the
        # signature and diagonals plausible
        G = np.array([[1.0, 0.0, 0.9], [0.0, 1.0, -0.9], [0.9, -0.9, 1.0]])
        try:
            cand = GramianCandidate(G, BilinearForm.euclidean(3), octant, 2)
        except ValueError:
            return
        report = verify_gramian_conditions(cand)
        if report.passed:
            cone = realize_cone_from_gramian(cand)
            assert check_filled_incidence(cone.N.matrix, octant, 0.0).ok
        else:
            with pytest.raises((PatternViolationError, SignatureMismatchError)):
                realize_cone_from_gramian(cand)


class TestGramianOfCone:
    def test_identity(self):
        G = gramian_of_cone(np.eye(3), BilinearForm.euclidean(3))
        np.testing.assert_allclose(G, np.eye(3), atol=1e-14)

    def test_duplicate_column(self):
        H = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).T  # h1 = h2
        H = np.column_stack([H[:, 0], H[:, 0], H[:, 1]])
        G = gramian_of_cone(H, BilinearForm.euclidean(3))
        assert G[0, 1] == pytest.approx(1.0)

    def test_negative_norm_diagonal(self):
        form = BilinearForm.hyperbolic(3)
        H = np.array([[0.0], [0.0], [1.0]])
        G = gramian_of_cone(H, form)
        assert G[0, 0] == pytest.approx(-1.0)

    def test_lightlike_rejected(self):
        form = BilinearForm.hyperbolic(3)
        H = np.array([[1.0], [0.0], [1.0]])
        with pytest.raises(LightlikeNormalError):
            gramian_of_cone(H, form)

    def test_rescales_to_unit(self):
        form = BilinearForm.euclidean(3)
        H = 3.7 * np.eye(3)
        np.testing.assert_allclose(gramian_of_cone(H, form), np.eye(3), atol=1e-12)


class TestSpherical:
    def test_octant_sphere_triangle(self, octant):
        report = verify_spherical_conditions(octant, np.eye(3), 2)
        assert report.passed

    def test_rank_failure(self, octant):
        G = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
        report = verify_spherical_conditions(octant, G, 2)
        assert not report.passed
        assert not report.check("rank").passed

    def test_diagonal_failure(self, octant):
        G = np.diag([1.0, 1.0, -1.0])
        report = verify_spherical_conditions(octant, G, 2)
        assert not report.passed
        assert not report.check("diagonal").passed


class TestHyperbolic:
    def ideal_triangle(self):
        rel = IDEAL_TRIANGLE_RELATION()
        G = np.array([[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
        return rel, G

    def test_ideal_triangle_passes(self):
        rel, G = self.ideal_triangle()
        report = verify_hyperbolic_conditions(rel, [1, 2, 3], G, 2)
        assert report.passed
        assert report.check("truncated-cycles").passed

    def test_partially_ideal_triangle(self):
        rel, G = self.ideal_triangle()
        G = G.copy()
        G[0, 1] = G[1, 0] = -0.5
        lat = build_maxbiclique_lattice(rel)
        vertex = next(
            el.vertex_set[0]
            for el in lat.elements
            if el.facet_set == (1, 2) and len(el.vertex_set) == 1
        )
        ideal = [j for j in (1, 2, 3) if j != vertex]
        report = verify_hyperbolic_conditions(rel, ideal, G, 2)
        assert report.passed

    def test_false_ideal_claim_reported(self):
        rel, G = self.ideal_triangle()
        G = G.copy()
        G[0, 1] = G[1, 0] = -0.5
        report = verify_hyperbolic_conditions(rel, [1, 2, 3], G, 2)
        assert not report.passed
        assert not report.check("truncated-cycles").passed
        assert "ideal vertex" in report.check("truncated-cycles").detail

    def test_super_cycle_pairs_negative(self):
        rel, G = self.ideal_triangle()
        report = verify_hyperbolic_conditions(rel, [1, 2, 3], G, 2)
        assert report.check("super-cycle-pairs").passed
        assert report.check("distinct-vertex-pairs").passed

    def test_ideal_vertices_validated(self):
        rel, G = self.ideal_triangle()
        with pytest.raises(ValueError):
            verify_hyperbolic_conditions(rel, [7], G, 2)

    def test_right_angled_pentagon(self):
        # regular compact right-angled pentagon: adjacent normals
        # orthogonal, non-adjacent products -golden ratio; Lorentzian of
        # rank 3 with two zero eigenvalues
        from polyrealize import signature
        from conftest import ngon

        phi = (1 + np.sqrt(5)) / 2
        G = np.eye(5)
        for i in range(5):
            for j in range(5):
                if i != j and abs(i - j) % 5 not in (1, 4):
                    G[i, j] = -phi
        assert signature(G) == (2, 1, 2)
        report = verify_hyperbolic_conditions(ngon(5), [], G, 2)
        assert report.passed

    def test_compact_equilateral_triangle(self):
        # all dihedral angles pi/4; angle sum below pi forces a
        # hyperbolic realization
        from conftest import ngon

        c = -np.cos(np.pi / 4)
        G = np.array([[1.0, c, c], [c, 1.0, c], [c, c, 1.0]])
        report = verify_hyperbolic_conditions(ngon(3), [], G, 2)
        assert report.passed

    def test_spherical_gramian_fails_hyperbolic(self, octant):
        report = verify_hyperbolic_conditions(octant, [], np.eye(3), 2)
        assert not report.passed


class TestBlockGramian:
    def test_identity_blocks(self):
        out = block_gramian(np.eye(2))
        expected = np.block([[np.eye(2), np.eye(2)], [np.eye(2), np.eye(2)]])
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_matches_svd_form_on_pyramid_cone(self):
        N = PYRAMID_MATRIX - 1.0
        out = block_gramian(N)
        svd = compact_svd(N)
        UV = np.vstack([svd.U, svd.V])
        ref = UV @ np.diag(svd.sigma) @ UV.T
        assert np.abs(out - ref).max() < 1e-9

    def test_rank_one(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(4)
        y = rng.standard_normal(3)
        N = np.outer(x, y)
        out = block_gramian(N)
        np.testing.assert_allclose(
            out[:4, :4], np.linalg.norm(y) * np.outer(x, x) / np.linalg.norm(x), atol=1e-10
        )
        np.testing.assert_allclose(
            out[4:, 4:], np.linalg.norm(x) * np.outer(y, y) / np.linalg.norm(y), atol=1e-10
        )
        assert np.abs(out - out.T).max() < 1e-12

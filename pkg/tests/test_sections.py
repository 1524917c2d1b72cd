"""
The section *-algebra: normal forms, convolution, involution, expectation,
grading and fibre evaluation.
"""
import numpy as np
import pytest
from pytest import approx

from services import cprep, cylsets, fdcstar, gallery, kgraph, lsystem, sections
from services.errors import SectionError
from services.fdcstar import CompactMap

SAMPLES = 100


def one(system, v):
    return sections.vertex_section(system, v, system.algebras[v].unit())


def generator(system, eid):
    """ρ_e of the first basis vector of X_e."""
    e = system.graph.edge_path(eid)
    return sections.path_section(system, e, system.X(e).basis_vector(0))


class TestCuntzKrieger:
    def test_isometries(self, b2_system):
        s1, s2 = generator(b2_system, "e1"), generator(b2_system, "e2")
        unit = one(b2_system, "v")
        assert sections.equal(s1.H @ s1, unit, tol=1e-12)
        assert sections.equal(s2.H @ s2, unit, tol=1e-12)
        assert sections.is_zero(s1.H @ s2, tol=1e-12)

    def test_ranges_sum_to_one(self, b2_system):
        s1, s2 = generator(b2_system, "e1"), generator(b2_system, "e2")
        assert sections.equal(s1 @ s1.H + s2 @ s2.H, one(b2_system, "v"), tol=1e-12)


class TestNormalForm:
    def test_refinement_identity(self, b2_system):
        # f^{v,v} = f^{e1,e1} + f^{e2,e2} after refinement
        g = b2_system.graph
        refined = sections.zero(b2_system)
        for eid in ("e1", "e2"):
            e = g.edge_path(eid)
            refined = refined + sections.basic(b2_system, e, e, CompactMap.identity(b2_system.X(e)))
        assert sections.equal(refined, one(b2_system, "v"))

    def test_normalize_merges_and_sorts(self, b2_system):
        a = one(b2_system, "v")
        doubled = sections.normalize(a + a)
        assert len(doubled.terms) == 1
        assert doubled.terms[0].T.matrix[0, 0] == approx(2.0)

    def test_normalize_drops_zero(self, system, rng):
        a = sections.random_section(system, rng)
        assert sections.is_zero(a - a)

    def test_basic_needs_common_source(self, systems):
        s = systems["sse"]
        g = s.graph
        e, f = g.edge_path("e"), g.edge_path("f")
        with pytest.raises(SectionError):
            sections.basic(s, e, f, CompactMap.zero(s.X(f), s.X(e)))

    def test_systems_must_match(self, systems):
        with pytest.raises(SectionError):
            one(systems["trivial-b2"], "v") + one(systems["twisted-o2"], "v")


class TestConvolution:
    def test_basic_pairs(self, system, rng):
        # f_{T1}^{λ,μ} f_{T2}^{μ,τ} = f_{T1 T2}^{λ,τ}
        g = system.graph
        items = cylsets.bisections_upto(g, 1)
        for a in items:
            for b in items:
                if a.mu != b.lam:
                    continue
                T1 = fdcstar.compact_basis(system.X(a.mu), system.X(a.lam))[0]
                T2 = fdcstar.compact_basis(system.X(b.mu), system.X(b.lam))[0]
                lhs = sections.basic(system, a.lam, a.mu, T1) @ sections.basic(system, b.lam, b.mu, T2)
                rhs = sections.basic(system, a.lam, b.mu, T1 @ T2)
                assert sections.equal(lhs, rhs)

    def test_basic_pairs_degree_two(self, b2_system):
        g = b2_system.graph
        items = cylsets.bisections_upto(g, 2)
        for a in items:
            for b in items:
                if a.mu == b.lam:
                    T1 = CompactMap.identity(b2_system.X(a.lam)).scale(2.0)
                    T2 = CompactMap.identity(b2_system.X(b.lam)).scale(3.0)
                    lhs = sections.basic(b2_system, a.lam, a.mu, T1) @ sections.basic(b2_system, b.lam, b.mu, T2)
                    rhs = sections.basic(b2_system, a.lam, b.mu, CompactMap(b2_system.X(b.mu), b2_system.X(a.lam),
                                                                            [[6.0]]))
                    assert sections.equal(lhs, rhs)

    def test_associative(self, system, rng):
        for _ in range(SAMPLES):
            a, b, c = (sections.random_section(system, rng) for _ in range(3))
            assert sections.distance((a @ b) @ c, a @ (b @ c)) < 1e-9

    def test_involution_anti_multiplicative(self, system, rng):
        for _ in range(SAMPLES):
            a, b = sections.random_section(system, rng), sections.random_section(system, rng)
            assert sections.distance((a @ b).H, b.H @ a.H) < 1e-9
            assert sections.distance(a.H.H, a) < 1e-9

    def test_disjoint_supports_multiply_to_zero(self, b2_system):
        g = b2_system.graph
        e1, e2 = g.edge_path("e1"), g.edge_path("e2")
        a = sections.basic(b2_system, e1, e1, CompactMap.identity(b2_system.X(e1)))
        b = sections.basic(b2_system, e2, e2, CompactMap.identity(b2_system.X(e2)))
        assert sections.is_zero(a @ b)


class TestExpectation:
    def test_idempotent(self, system, rng):
        for _ in range(SAMPLES):
            e = sections.expectation(sections.random_section(system, rng))
            assert sections.distance(sections.expectation(e), e) == approx(0.0, abs=1e-12)

    def test_positive_and_faithful(self, system, rng):
        for _ in range(SAMPLES):
            a = sections.random_section(system, rng)
            aa = a.H @ a
            ok, low = sections.core_positive(aa)
            assert ok and low >= -1e-9
            if not sections.is_zero(a):
                assert not sections.is_zero(sections.expectation(aa))

    def test_kills_off_diagonal(self, b2_system):
        s1 = generator(b2_system, "e1")
        assert sections.is_zero(sections.expectation(s1))


class TestGauge:
    def test_scales_generators(self, system):
        g = system.graph
        for z in cprep.torus_points(g.rank):
            for eid in sorted(g.edges):
                s = generator(system, eid)
                factor = complex(np.prod([zi ** ci for zi, ci in zip(z, g.edge_path(eid).degree)]))
                assert sections.distance(sections.gauge(z, s), s.scale(factor)) < 1e-12

    def test_multiplicative(self, system, rng):
        for z in cprep.torus_points(system.graph.rank)[:3]:
            a, b = sections.random_section(system, rng), sections.random_section(system, rng)
            assert sections.distance(sections.gauge(z, a @ b), sections.gauge(z, a) @ sections.gauge(z, b)) < 1e-12

    def test_fixes_expectation(self, system, rng):
        a = sections.expectation(sections.random_section(system, rng, terms=4))
        for z in cprep.torus_points(system.graph.rank):
            assert sections.distance(sections.gauge(z, a), a) < 1e-12

    def test_grade_splits_by_cocycle(self, b2_system):
        s1 = generator(b2_system, "e1")
        parts = sections.grade(s1 + s1.H + one(b2_system, "v"))
        assert sorted(parts) == [(-1,), (0,), (1,)]


class TestCorner:
    def test_sse_corners(self, systems):
        s = systems["sse"]
        g = s.graph
        e = g.edge_path("e")
        x = s.X(e)
        a = sections.path_section(s, e, x.basis_vector(0))
        assert len(sections.corner(a, "w", "v").terms) == 1
        assert sections.is_zero(sections.corner(a, "v", "w"))


class TestFibres:
    def test_eval_at_deeper_witness(self, b2_system):
        g = b2_system.graph
        e1, v = g.edge_path("e1"), g.vertex("v")
        a = sections.basic(b2_system, e1, v, CompactMap(b2_system.X(v), b2_system.X(e1), [[5.0]]))
        value = sections.fibre_eval(a, (e1, v, g.edge_path("e2")))
        assert value.lam == g.parse("e1.e2")
        assert value.mu == g.edge_path("e2")
        assert value.norm() == approx(5.0)

    def test_eval_outside_support(self, b2_system):
        g = b2_system.graph
        e1, e2, v = g.edge_path("e1"), g.edge_path("e2"), g.vertex("v")
        a = sections.basic(b2_system, e1, v, CompactMap(b2_system.X(v), b2_system.X(e1), [[5.0]]))
        value = sections.fibre_eval(a, (e2, v, v))
        assert value.norm() == approx(0.0)

    def test_shallow_witness_raises(self, b2_system):
        g = b2_system.graph
        e1, v = g.edge_path("e1"), g.vertex("v")
        a = sections.basic(b2_system, e1, e1, CompactMap.identity(b2_system.X(e1)))
        with pytest.raises(SectionError):
            sections.fibre_eval(a, (v, v, v))

    def test_witnesses_are_deep_enough(self, system, rng):
        a, b = sections.random_section(system, rng), sections.random_section(system, rng)
        for w in sections.witnesses(a @ b, extra=1):
            lam, mu, nu = w
            value = sections.fibre_eval(a @ b, w)
            assert value.lam == system.graph.compose(lam, nu)

    def test_norm_bounds_exact_on_one_term(self, b2_system):
        a = one(b2_system, "v").scale(3.0)
        assert sections.norm_bounds(a) == (approx(3.0), approx(3.0))

    def test_fibre_element_algebra(self, t1_auto, rng):
        g = t1_auto.graph
        b = g.edge_path("b")
        x = t1_auto.X(b)
        T = CompactMap.left_multiplication(x, x.left.random(rng))
        e = sections.FibreElement(b, b, T)
        assert e.adjoint().multiply(e).norm() == approx(e.norm() ** 2)
        pushed = e.push(t1_auto, b)
        assert pushed.lam == g.parse("b.b")
        assert pushed.norm() == approx(e.norm())

    def test_fibre_elements_must_compose(self, b2_system):
        g = b2_system.graph
        e1, e2 = g.edge_path("e1"), g.edge_path("e2")
        f = sections.FibreElement(e1, e1, CompactMap.identity(b2_system.X(e1)))
        h = sections.FibreElement(e2, e2, CompactMap.identity(b2_system.X(e2)))
        with pytest.raises(SectionError):
            f.multiply(h)

    def test_norm_bounds_of_generator_sum(self, b2_system):
        s = generator(b2_system, "e1") + generator(b2_system, "e2")
        assert sections.norm_bounds(s) == (approx(1.0), approx(2.0))
        # ‖(s1+s2)*(s1+s2)‖ = ‖2·1‖, one term, so the bounds meet
        assert sections.norm_bounds(s.H @ s) == (approx(2.0), approx(2.0))

    def test_zero_bounds(self, b2_system):
        assert sections.norm_bounds(sections.zero(b2_system)) == (0.0, 0.0)

    def test_product_bounded_fibrewise(self, system, rng):
        for _ in range(10):
            a, b = sections.random_section(system, rng), sections.random_section(system, rng)
            bound = sections.norm_bounds(a)[1] * sections.norm_bounds(b)[1]
            for w in sections.witnesses(a @ b, extra=1):
                assert sections.fibre_eval(a @ b, w).norm() <= bound + 1e-9

    def test_fibre_norm_locally_constant(self, system, rng):
        g = system.graph
        a = sections.normalize(sections.random_section(system, rng, terms=4))
        for t in a.terms:
            for depth in (0, 1, 2):
                for nu in g.paths(t.lam.src, kgraph.as_degree(depth, g.rank)):
                    assert sections.fibre_eval(a, (t.lam, t.mu, nu)).norm() == approx(t.T.norm())


class TestStrongShiftCorners:
    """1_v·Γ·1_v and 1_w·Γ·1_w linked by the off-diagonal corner 1_v·Γ·1_w."""

    def _sections(self, systems, rng, count=4):
        s = systems["sse"]
        return s, [sections.random_section(s, rng, terms=6) for _ in range(count)]

    def test_diagonal_corners_closed(self, systems, rng):
        s, items = self._sections(systems, rng)
        for v in s.graph.vertices:
            for a in items:
                for b in items:
                    p = sections.corner(a, v, v) @ sections.corner(b, v, v)
                    assert sections.equal(sections.corner(p, v, v), p)
                    star = sections.corner(a, v, v).H
                    assert sections.equal(sections.corner(star, v, v), star)

    def test_linking_identities(self, systems, rng):
        s, items = self._sections(systems, rng)
        for a in items:
            c = sections.corner(a, "v", "w")
            left, right = c @ c.H, c.H @ c
            assert sections.equal(sections.corner(left, "v", "v"), left)
            assert sections.equal(sections.corner(right, "w", "w"), right)
            ok, low = sections.core_positive(left)
            assert ok and low >= -1e-9

    def test_off_diagonal_corner_is_a_bimodule(self, systems, rng):
        s, items = self._sections(systems, rng, count=3)
        a, b, c = items
        x = sections.corner(a, "v", "w")
        moved = sections.corner(b, "v", "v") @ x @ sections.corner(c, "w", "w")
        assert sections.equal(sections.corner(moved, "v", "w"), moved)

"""
Cuntz–Pimsner representations.

    - the canonical representation by sections satisfies every relation
    - covariance holds on the canonical representation, never on a Fock truncation
    - faulty representations are caught
    - truncated fibres have the expected stage dimensions and are Fell-like
"""
import numpy as np
import pytest

from services import cprep, fdcstar, gallery, kgraph, sections
from services.errors import SectionError
from services.fdcstar import CompactMap


@pytest.fixture(scope="module")
def o2():
    return gallery.system("twisted-o2")


def _canonical(system):
    return cprep.canonical_representation(system)


def _mixed_frame(x, rng):
    """u′_j = Σ_i W_ji u_i for a random unitary W: another Parseval frame."""
    d = x.dim
    w, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return list(w @ np.array(fdcstar.frame(x)))


# -- relations ---------------------------------------------------------------

class TestRelations:
    def test_canonical_passes(self, system):
        report = cprep.check_representation(_canonical(system), depth=1)
        assert report.ok, report.failures()

    def test_fock_toeplitz_below_cut(self, b2_system):
        report = cprep.check_representation(cprep.fock_truncation(b2_system, 2), depth=1)
        assert report.ok, report.failures()

    def test_corrupt_detected(self, system):
        rep = _canonical(system)
        for eid in sorted(system.graph.edges):
            assert not cprep.check_representation(cprep.corrupt(rep, eid), depth=1).ok

    def test_reduced_form_recorded(self, b2_system):
        report = cprep.check_representation(_canonical(b2_system), depth=1)
        assert [c.name for c in report.find("reduced.implies_relations")] == ["reduced.implies_relations"]
        assert {"reduced.multiplicative", "reduced.inner_product"} <= {c.name for c in report.find("reduced.")}

    def test_vertex_algebras_orthogonal(self, systems):
        report = cprep.check_representation(_canonical(systems["sse"]), depth=1)
        [check] = report.find("reduced.vertex_orthogonal")
        assert check.ok and check.residual < 1e-12

    def test_generator_relations_do_not_reach_long_paths(self, b2_system):
        # relations on vertices and edges say nothing about ρ on paths of length 3
        rep = _canonical(b2_system)

        def rho(lam, x):
            value = rep.rho(lam, x)
            return value.scale(0) if kgraph.total(lam.degree) >= 3 else value

        cut = cprep.Representation(b2_system, rep.target, rho=rho, pi=rep.pi, name="cut")
        report = cprep.check_representation(cut, depth=2)
        assert all(c.ok for c in report.find("reduced.") if c.name != "reduced.implies_relations")
        assert [c.name for c in report.failures() if c.name.startswith("reduced.")] == ["reduced.implies_relations"]
        assert not report.find("multiplicative")[0].ok


class TestTwistedCuntz:
    """V_i = ρ_{e_i}(1) in the twisted O_2 system."""

    def _isometries(self, o2):
        rep = _canonical(o2)
        g = o2.graph
        out = {}
        for eid in ("e1", "e2"):
            x = o2.X(g.edge_path(eid))
            out[eid] = rep.rho(g.edge_path(eid), x.right.coords(x.right.unit()))
        return rep, out

    def test_orthogonal_isometries(self, o2):
        rep, v = self._isometries(o2)
        one = rep.pi("v", o2.algebras["v"].unit())
        assert sections.equal(v["e1"].H @ v["e1"], one)
        assert sections.equal(v["e2"].H @ v["e2"], one)
        assert sections.is_zero(v["e1"].H @ v["e2"])

    def test_full_range(self, o2):
        rep, v = self._isometries(o2)
        total = v["e1"] @ v["e1"].H + v["e2"] @ v["e2"].H
        assert sections.equal(total, rep.pi("v", o2.algebras["v"].unit()))

    def test_twisted_commutation(self, o2, rng):
        # π(α_i(a)) V_i = V_i π(a) with α_i = Ad(u_i)
        rep, v = self._isometries(o2)
        a = o2.algebras["v"].random(rng)
        for eid, u in gallery.TWIST_UNITARIES.items():
            lhs = rep.pi("v", u @ a @ u.conj().T) @ v[eid]
            rhs = v[eid] @ rep.pi("v", a)
            assert sections.distance(lhs, rhs) < 1e-9


# -- covariance --------------------------------------------------------------

class TestCovariance:
    @pytest.mark.parametrize("total", [1, 2])
    def test_canonical(self, system, total):
        rep = _canonical(system)
        for n in kgraph.degrees_upto((total,) * system.graph.rank):
            if kgraph.total(n) == total:
                report = cprep.check_covariance(rep, n)
                assert report.ok, report.failures()

    def test_fock_fails_at_vacuum(self, system):
        rep = cprep.fock_truncation(system, 2)
        report = cprep.check_covariance(rep, kgraph.unit(system.graph.rank, 1))
        assert not report.ok
        assert report.max_residual("covariance") >= 0.5

    def test_one_check_per_vertex(self, system):
        report = cprep.check_covariance(_canonical(system), kgraph.unit(system.graph.rank, 1))
        assert [c.name for c in report.checks] == [f"covariance[{v}]" for v in system.graph.vertices]

    def test_frame_independent(self, system, rng):
        rep = _canonical(system)
        n = kgraph.unit(system.graph.rank, 1)
        frames = {lam: _mixed_frame(system.X(lam), rng) for lam in system.graph.all_paths(n)}
        plain, mixed = cprep.check_covariance(rep, n), cprep.check_covariance(rep, n, frames=frames)
        assert mixed.ok, mixed.failures()
        assert mixed.max_residual() == pytest.approx(plain.max_residual(), abs=1e-9)
        for lam, frame in frames.items():
            T = system.left_operator(lam, system.algebras[lam.rng].random(rng))
            assert sections.distance(cprep.rho_compact(rep, lam, T), cprep.rho_compact(rep, lam, T, frame)) < 1e-9


class TestRankOnes:
    def test_two_decompositions_agree(self, system, rng):
        rep = _canonical(system)
        lam = system.graph.all_paths(kgraph.unit(system.graph.rank, 1))[0]
        x = system.X(lam)
        T = cprep._random_compact(rng, x, x)
        by_frame = fdcstar.expand_compact(T, fdcstar.frame(x))
        # θ_{ξ,η} = θ_{ξ/2,η} + θ_{ξ/2,η} on a rotated frame
        halves = [(a / 2, b) for a, b in fdcstar.expand_compact(T, _mixed_frame(x, rng))] * 2
        assert np.allclose(sum(fdcstar.rank_one(a, x, b, x).matrix for a, b in halves), T.matrix)
        one = cprep.rho_rank_ones(rep, lam, by_frame)
        other = cprep.rho_rank_ones(rep, lam, halves)
        assert sections.distance(one, other) < 1e-9
        assert sections.distance(one, cprep.rho_compact(rep, lam, T)) < 1e-9


class TestProductSystem:
    def test_map_multiplicative(self, system):
        one = kgraph.unit(system.graph.rank, 1)
        report = cprep.check_product_system_map(_canonical(system), one, one)
        assert report.ok, report.failures()

    def test_product_covariance(self, system):
        report = cprep.check_product_covariance(_canonical(system), kgraph.unit(system.graph.rank, 1))
        assert report.ok, report.failures()


# -- gauge-invariant uniqueness ----------------------------------------------

class TestUniquenessHypotheses:
    def test_canonical(self, system):
        report = cprep.check_giut_hypotheses(_canonical(system), samples=4)
        assert report.ok, report.failures()

    def test_zero_not_injective(self, system):
        report = cprep.check_giut_hypotheses(cprep.zero_representation(system), samples=2)
        assert any(c.name.startswith("pi_injective") for c in report.failures())

    def test_torus_points_distinct(self):
        points = cprep.torus_points(2, samples=8)
        assert len(points) == 8
        for c in range(2):
            values = [p[c] for p in points]
            assert min(abs(a - b) for i, a in enumerate(values) for b in values[i + 1:]) > 1e-3
        assert all(abs(abs(z) - 1) < 1e-12 for p in points for z in p)


# -- truncated fibres --------------------------------------------------------

class TestFibres:
    def test_trivial_dims(self, b2_system):
        fibre = cprep.fibre_E(b2_system, b2_system.graph.periodic_point(), 3)
        assert fibre.dims() == [1] * 4

    def test_automorphism_dims(self, t1_auto):
        fibre = cprep.fibre_E(t1_auto, t1_auto.graph.periodic_point(), 3)
        assert fibre.dims() == [4] * 4
        assert fibre.corner_dims() == [4] * 4

    def test_stages(self, system):
        fibre = cprep.fibre_E(system, system.graph.periodic_point(), 2)
        report = cprep.check_fibre_stages(fibre)
        assert report.ok, report.failures()

    def test_fell_axioms(self, system, rng):
        fibre = cprep.fibre_E(system, system.graph.periodic_point(), 2)
        report = cprep.check_fell_axioms(fibre, rng, samples=100)
        assert report.ok, report.failures()
        assert [c.name for c in report.find("cocycle_additive")] == ["cocycle_additive"]

    def test_off_diagonal_base(self, b2_system):
        g = b2_system.graph
        tail = g.eventually_periodic(g.vertex("v"), g.edge_path("e1"))
        fibre = cprep.fibre_E(b2_system, (g.edge_path("e1"), g.edge_path("e2"), tail), 2)
        assert fibre.stages[1] == (g.parse("e1.e1"), g.parse("e2.e1"))
        assert cprep.check_fibre_stages(fibre).ok

    def test_bad_base(self, b2_system):
        with pytest.raises(SectionError):
            cprep.fibre_E(b2_system, "x", 2)

    def test_connecting_map_preserves_norm(self, t1_auto, rng):
        fibre = cprep.fibre_E(t1_auto, t1_auto.graph.periodic_point(), 2)
        xl, xm = fibre.modules(0)
        T = cprep._random_compact(rng, xm, xl)
        assert fibre.connect(0, T).norm() == pytest.approx(T.norm())


def test_rho_compact_of_identity_is_range_projection(b2_system):
    rep = _canonical(b2_system)
    e1 = b2_system.graph.edge_path("e1")
    x = b2_system.X(e1)
    p = cprep.rho_compact(rep, e1, CompactMap.identity(x))
    s = rep.rho(e1, np.ones(1))
    assert sections.equal(p, s @ s.H)

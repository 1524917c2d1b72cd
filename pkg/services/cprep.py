"""
Representations of Λ-systems and the Cuntz–Pimsner checkers.

A Representation pairs maps ρ_λ(x), π_v(a) with a target *-algebra. Two
targets exist: the sections algebra (canonical representation) and
explicit matrices on a finite-dimensional inner-product space (the
truncated Fock model and the controls). Checkers return Reports with one
max residual per relation.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np

import config
from services import fdcstar, kgraph, sections
from services.errors import SectionError
from services.fdcstar import CompactMap
from services.reports import Report

log = logging.getLogger(__name__)

_pool = ThreadPoolExecutor(max_workers=config.WORKERS)


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------
class SectionTarget:
    kind = "sections"

    def __init__(self, system):
        self.system = system

    def zero(self):
        return sections.zero(self.system)

    def multiply(self, a, b):
        return sections.convolve(a, b)

    def adjoint(self, a):
        return sections.involute(a)

    def add(self, a, b):
        return a + b

    def scale(self, a, z):
        return a.scale(z)

    def norm(self, a):
        return sections.norm_bounds(a)[1]

    def distance(self, a, b):
        return sections.distance(a, b)

    def compress(self, a, budget):
        return a

    def gauge(self, z, a):
        return sections.gauge(z, a)

    def vectorize(self, elements):
        """Coefficient vectors of normal forms over the union of their supports."""
        forms = [sections.normalize(a) for a in elements]
        keys = sorted({t.key for f in forms for t in f.terms}, key=lambda k: (k[0], k[1]))
        rows = []
        for f in forms:
            found = {t.key: t.T.matrix.ravel() for t in f.terms}
            parts = []
            for lam, mu in keys:
                size = self.system.X(lam).dim * self.system.X(mu).dim
                parts.append(found.get((lam, mu), np.zeros(size, dtype=complex)))
            rows.append(np.concatenate(parts) if parts else np.zeros(0, dtype=complex))
        return np.array(rows)


class MatrixTarget:
    """Operators on ℂ^D with inner product ⟨u, v⟩ = u* G v."""
    kind = "matrices"

    def __init__(self, metric, gauge_unitary=None, levels=None, top=None):
        self.metric = np.asarray(metric, dtype=complex)
        self.dim = self.metric.shape[0]
        w, v = np.linalg.eigh(self.metric)
        self._half = (v * np.sqrt(w)) @ v.conj().T
        self._half_inv = (v / np.sqrt(w)) @ v.conj().T
        self._metric_inv = (v / w) @ v.conj().T
        self.gauge_unitary = gauge_unitary
        self.levels = levels or []
        self.top = top

    def zero(self):
        return np.zeros((self.dim, self.dim), dtype=complex)

    def multiply(self, a, b):
        return a @ b

    def adjoint(self, a):
        return self._metric_inv @ a.conj().T @ self.metric

    def add(self, a, b):
        return a + b

    def scale(self, a, z):
        return z * a

    def norm(self, a):
        return fdcstar.spectral_norm(self._half @ a @ self._half_inv)

    def distance(self, a, b):
        return self.norm(a - b)

    def compress(self, a, budget):
        """Restrict to the levels n with n + budget inside the truncation."""
        if self.top is None:
            return a
        keep = np.zeros(self.dim)
        for n, sl in self.levels:
            if kgraph.le(kgraph.add(n, budget), self.top):
                keep[sl] = 1
        return a @ np.diag(keep)

    def gauge(self, z, a):
        if self.gauge_unitary is None:
            raise SectionError("this target has no gauge action")
        u = self.gauge_unitary(z)
        return u @ a @ np.linalg.inv(u)

    def vectorize(self, elements):
        return np.array([np.asarray(a).ravel() for a in elements])


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------
class Representation:
    def __init__(self, system, target, rho, pi, name=""):
        self.system = system
        self.target = target
        self._rho = rho
        self._pi = pi
        self.name = name

    def __repr__(self):
        return f"Representation({self.name or '?'} into {self.target.kind})"

    def rho(self, lam, x):
        return self._rho(lam, np.asarray(x, dtype=complex))

    def pi(self, v, a):
        return self._pi(v, np.asarray(a, dtype=complex))


def canonical_representation(system):
    """π_v(a) = f_{l_a}^{v,v}, ρ_λ(x) = f_{l_x}^{λ,s(λ)}."""
    return Representation(
        system, SectionTarget(system),
        rho=lambda lam, x: sections.path_section(system, lam, x),
        pi=lambda v, a: sections.vertex_section(system, v, a),
        name="canonical",
    )


class FockSpace:
    """⊕_{n ≤ N} Y_n with creation operators; levels above N are cut off."""

    def __init__(self, system, top):
        self.system = system
        self.top = kgraph.as_degree(top, system.graph.rank)
        self.levels = []
        off = 0
        for n in kgraph.degrees_upto(self.top):
            fibre = system.fibre(n)
            self.levels.append((n, fibre, slice(off, off + fibre.module.dim)))
            off += fibre.module.dim
        self.dim = off
        self.metric = np.zeros((off, off), dtype=complex)
        for _, fibre, sl in self.levels:
            self.metric[sl, sl] = fibre.module.metric

    def vertex(self, v, a):
        big = self.system.embed_vertex(v, a)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for _, fibre, sl in self.levels:
            out[sl, sl] = fibre.module.left_matrix(big)
        return out

    def creation(self, lam, x):
        source = self.system.fibre(lam.degree)
        y = (source, source.iota(lam, x))
        out = np.zeros((self.dim, self.dim), dtype=complex)
        where = {n: sl for n, _, sl in self.levels}
        for n, fibre, sl in self.levels:
            m = kgraph.add(n, lam.degree)
            if m not in where:
                continue
            cols = [self.system.multiply(y, (fibre, fibre.module.basis_vector(j)))[1]
                    for j in range(fibre.module.dim)]
            if cols:
                out[where[m], sl] = np.stack(cols, axis=1)
        return out

    def gauge_unitary(self, z):
        diag = np.zeros(self.dim, dtype=complex)
        for n, _, sl in self.levels:
            diag[sl] = np.prod([complex(zi) ** ni for zi, ni in zip(z, n)])
        return np.diag(diag)


def fock_truncation(system, top):
    """Creation operators on the truncated Fock space; Toeplitz relations hold below the cut."""
    space = FockSpace(system, top)
    target = MatrixTarget(space.metric, gauge_unitary=space.gauge_unitary,
                          levels=[(n, sl) for n, _, sl in space.levels], top=space.top)
    log.info("Fock truncation of %r at %s: dimension %d", system, space.top, space.dim)
    return Representation(system, target, rho=space.creation, pi=space.vertex, name=f"fock{space.top}")


def zero_representation(system):
    target = MatrixTarget(np.eye(1), gauge_unitary=lambda z: np.eye(1, dtype=complex))
    return Representation(system, target,
                          rho=lambda lam, x: np.zeros((1, 1), dtype=complex),
                          pi=lambda v, a: np.zeros((1, 1), dtype=complex),
                          name="zero")


def corrupt(rep, edge):
    """Double ρ_e for one edge; breaks the inner-product relation ρ_e(x)*ρ_e(y) = π(⟨x, y⟩)."""

    def rho(lam, x):
        value = rep.rho(lam, x)
        return rep.target.scale(value, 2) if lam.edges == (edge,) else value

    return Representation(rep.system, rep.target, rho=rho, pi=rep.pi, name=f"{rep.name}-corrupt[{edge}]")


# ---------------------------------------------------------------------------
# Relation checks
# ---------------------------------------------------------------------------
def _all_paths_upto(g, depth):
    return [p for v in g.vertices for p in g.paths_upto(v, depth)]


def _basis(module):
    return [module.basis_vector(i) for i in range(module.dim)]


class _Worst:
    """Max residual per relation name, with the arguments that produced it."""

    def __init__(self):
        self.values = {}

    def note(self, name, value, detail):
        if name not in self.values or value > self.values[name][0]:
            self.values[name] = (float(value), detail)

    def merge(self, other):
        for name, (value, detail) in other.values.items():
            self.note(name, value, detail)


def _pair_relations(rep, alpha, beta):
    system, target = rep.system, rep.target
    g = system.graph
    worst = _Worst()
    budget = kgraph.add(alpha.degree, beta.degree)
    xa, xb = system.X(alpha), system.X(beta)
    tag = f"({alpha},{beta})"
    for i, x in enumerate(_basis(xa)):
        rx = rep.rho(alpha, x)
        for j, y in enumerate(_basis(xb)):
            ry = rep.rho(beta, y)
            prod = target.compress(target.multiply(rx, ry), budget)
            if alpha.src == beta.rng:
                z = system.chi(alpha, beta)(system.pair(alpha, beta).factor(x, y))
                rhs = target.compress(rep.rho(g.compose(alpha, beta), z), budget)
                worst.note("multiplicative", target.distance(prod, rhs), f"{tag} basis ({i},{j})")
            else:
                worst.note("orthogonal", target.norm(prod), f"{tag} basis ({i},{j})")
            if alpha.degree == beta.degree:
                lhs = target.compress(target.multiply(target.adjoint(rx), ry), budget)
                if alpha == beta:
                    rhs = target.compress(rep.pi(alpha.src, xa.inner(x, y)), budget)
                    worst.note("inner_product", target.distance(lhs, rhs), f"{tag} basis ({i},{j})")
                else:
                    worst.note("inner_product.orthogonal", target.norm(lhs), f"{tag} basis ({i},{j})")
    return worst


def _vertex_relations(rep, v):
    system, target = rep.system, rep.target
    alg = system.algebras[v]
    worst = _Worst()
    for k, a in enumerate(alg.basis()):
        worst.note("vertex", target.distance(rep.rho(system.graph.vertex(v), alg.coords(a)), rep.pi(v, a)),
                   f"{v} basis {k}")
        for w in system.graph.vertices:
            if w == v:
                continue
            for b in system.algebras[w].basis():
                worst.note("reduced.vertex_orthogonal", target.norm(target.multiply(rep.pi(v, a), rep.pi(w, b))),
                           f"({v},{w})")
    return worst


def _reduced_relations(rep, alpha, beta):
    """Products and inner products of one generator pair, under the reduced names."""
    worst = _Worst()
    for name, (value, detail) in _pair_relations(rep, alpha, beta).values.items():
        if name in ("multiplicative", "inner_product"):
            worst.note(f"reduced.{name}", value, detail)
    return worst


def _generators(g):
    return [g.vertex(v) for v in g.vertices] + [g.edge_path(e) for e in sorted(g.edges)]


FULL_RELATIONS = ("multiplicative", "orthogonal", "inner_product", "inner_product.orthogonal")
REDUCED_RELATIONS = ("reduced.vertex_orthogonal", "reduced.multiplicative", "reduced.inner_product")


def check_representation(rep, depth=None, tol=None):
    """Relations ρ_v = π_v, multiplicativity/orthogonality and the inner-product relation up to ``depth``.

    The reduced relations (orthogonal vertex algebras, products of composable
    generators, inner products on one generator) are checked separately on
    vertices and edges; "reduced.implies_relations" fails when they hold but
    the full relations up to ``depth`` do not.
    """
    tol = config.TOL if tol is None else tol
    system = rep.system
    g = system.graph
    depth = kgraph.as_degree(config.DEPTH if depth is None else depth, g.rank)
    report = Report(f"check_representation {rep.name} depth {depth}")
    paths = _all_paths_upto(g, depth)
    gens = _generators(g)

    jobs = ([("vertex", v) for v in g.vertices]
            + [("pair", (a, b)) for a in paths for b in paths]
            + [("reduced", (a, b)) for a in gens for b in gens if a == b or a.src == b.rng])
    workers = {"vertex": _vertex_relations, "pair": _pair_relations, "reduced": _reduced_relations}
    results = [None] * len(jobs)
    future_map = {}
    for idx, (kind, arg) in enumerate(jobs):
        args = (arg,) if kind == "vertex" else arg
        future_map[_pool.submit(workers[kind], rep, *args)] = idx
    for future in as_completed(future_map):
        results[future_map[future]] = future.result()
    worst = _Worst()
    for r in results:
        worst.merge(r)

    held = {}
    for name in ("vertex",) + FULL_RELATIONS + REDUCED_RELATIONS:
        if name in worst.values:
            value, detail = worst.values[name]
            report.residual(name, value, tol, detail=detail)
            held[name] = value < tol
    reduced = all(held.get(n, True) for n in REDUCED_RELATIONS)
    relations = all(held.get(n, True) for n in FULL_RELATIONS)
    if not reduced:
        detail = "reduced relations fail"
    else:
        detail = "full relations hold" if relations else "reduced relations hold but full relations fail"
    report.add("reduced.implies_relations", relations or not reduced, detail=detail)
    log.info("%s: %s", report.title, "ok" if report.ok else f"{len(report.failures())} failures")
    return report


# ---------------------------------------------------------------------------
# Covariance
# ---------------------------------------------------------------------------
def rho_compact(rep, lam, T, frame=None):
    """ρ^{(λ)}(T) = Σ_i ρ_λ(T u_i) ρ_λ(u_i)* over a frame of X_λ."""
    frame = fdcstar.frame(rep.system.X(lam)) if frame is None else frame
    return rho_rank_ones(rep, lam, [(T(u), u) for u in frame])


def rho_rank_ones(rep, lam, pairs):
    """Σ ρ_λ(x) ρ_λ(y)* for a rank-one decomposition Σ θ_{x,y}."""
    target = rep.target
    total = target.zero()
    for x, y in pairs:
        total = target.add(total, target.multiply(rep.rho(lam, x), target.adjoint(rep.rho(lam, y))))
    return total


def _covariance_one(rep, v, k, a, n, frames):
    system = rep.system
    g = system.graph
    target = rep.target
    total = target.zero()
    for lam in g.paths(v, n):
        frame = frames.get(lam) if frames else None
        total = target.add(total, rho_compact(rep, lam, system.left_operator(lam, a), frame))
    return target.distance(total, rep.pi(v, a))


def check_covariance(rep, n, tol=None, frames=None):
    """π_v(a) = Σ_{λ∈vΛ^n} ρ^{(λ)}(φ_λ(a)) for every vertex and algebra basis element."""
    tol = config.COVARIANCE_TOL if tol is None else tol
    system = rep.system
    g = system.graph
    n = kgraph.as_degree(n, g.rank)
    report = Report(f"check_covariance {rep.name} n={n}")
    jobs = [(v, k, a) for v in g.vertices for k, a in enumerate(system.algebras[v].basis())]
    residuals = [0.0] * len(jobs)
    future_map = {_pool.submit(_covariance_one, rep, v, k, a, n, frames): idx for idx, (v, k, a) in enumerate(jobs)}
    for future in as_completed(future_map):
        residuals[future_map[future]] = future.result()
    for v in g.vertices:
        values = [(r, k) for (w, k, _), r in zip(jobs, residuals) if w == v]
        worst, k = max(values)
        report.residual(f"covariance[{v}]", worst, tol, detail=f"worst at basis {k}")
    log.info("%s: %s", report.title, "ok" if report.ok else "violated")
    return report


# ---------------------------------------------------------------------------
# Product-system side
# ---------------------------------------------------------------------------
def product_system_map(rep, fibre, y):
    """ψ_n(y) = Σ_λ ρ_λ(y_λ) for y ∈ Y_n."""
    target = rep.target
    total = target.zero()
    for lam in fibre.paths:
        part = fibre.component(y, lam)
        if np.any(part):
            total = target.add(total, rep.rho(lam, part))
    return total


def check_product_system_map(rep, m, n, tol=None):
    """ψ(Θ(y ⊗ z)) = ψ(y)ψ(z) and ψ(ι_λ(x)) = ρ_λ(x) on fibre bases."""
    tol = config.TOL if tol is None else tol
    system, target = rep.system, rep.target
    fm, fn = system.fibre(m), system.fibre(n)
    report = Report(f"product_system_map {rep.name} {fm.n},{fn.n}")
    worst = 0.0
    for lam in fm.paths:
        for x in _basis(system.X(lam)):
            worst = max(worst, target.distance(product_system_map(rep, fm, fm.iota(lam, x)), rep.rho(lam, x)))
    report.residual("inclusions", worst, tol)
    worst = 0.0
    budget = kgraph.add(fm.n, fn.n)
    for y in _basis(fm.module):
        for z in _basis(fn.module):
            out, yz = system.multiply((fm, y), (fn, z))
            lhs = target.compress(product_system_map(rep, out, yz), budget)
            rhs = target.compress(target.multiply(product_system_map(rep, fm, y), product_system_map(rep, fn, z)),
                                  budget)
            worst = max(worst, target.distance(lhs, rhs))
    report.residual("multiplicative", worst, tol)
    return report


def check_product_covariance(rep, n, tol=None):
    """ψ_0(a) = Σ_i ψ_n(φ_n(a)u_i)ψ_n(u_i)* over a frame of Y_n, per vertex basis element."""
    tol = config.COVARIANCE_TOL if tol is None else tol
    system, target = rep.system, rep.target
    fibre = system.fibre(n)
    frame = fdcstar.frame(fibre.module)
    report = Report(f"product_covariance {rep.name} n={fibre.n}")
    for v in system.graph.vertices:
        worst = 0.0
        for a in system.algebras[v].basis():
            phi = fibre.left(system.embed_vertex(v, a))
            total = target.zero()
            for u in frame:
                total = target.add(total, target.multiply(product_system_map(rep, fibre, phi(u)),
                                                          target.adjoint(product_system_map(rep, fibre, u))))
            worst = max(worst, target.distance(total, rep.pi(v, a)))
        report.residual(f"covariance[{v}]", worst, tol)
    return report


# ---------------------------------------------------------------------------
# Gauge-invariant uniqueness hypotheses
# ---------------------------------------------------------------------------
def torus_points(k, samples=8):
    """``samples`` points of 𝕋^k with distinct values in every coordinate."""
    return [tuple(np.exp(2j * np.pi * (j + 1) * (c + 1) / (2 * samples + 1)) for c in range(k))
            for j in range(samples)]


def check_giut_hypotheses(rep, samples=8, tol=None):
    """Gauge equivariance on generators and injectivity of every π_v."""
    tol = config.TOL if tol is None else tol
    system, target = rep.system, rep.target
    g = system.graph
    report = Report(f"giut_hypotheses {rep.name}")
    try:
        worst = 0.0
        for z in torus_points(g.rank, samples):
            for v in g.vertices:
                for a in system.algebras[v].basis():
                    p = rep.pi(v, a)
                    worst = max(worst, target.distance(target.gauge(z, p), p))
            for eid in sorted(g.edges):
                e = g.edge_path(eid)
                factor = complex(np.prod([zi ** ci for zi, ci in zip(z, e.degree)]))
                for x in _basis(system.X(e)):
                    r = rep.rho(e, x)
                    worst = max(worst, target.distance(target.gauge(z, r), target.scale(r, factor)))
        report.residual("gauge_equivariant", worst, tol, detail=f"{samples} torus points")
    except SectionError as e:
        report.violation("gauge_equivariant", str(e))
    for v in g.vertices:
        alg = system.algebras[v]
        r = fdcstar.rank(target.vectorize([rep.pi(v, a) for a in alg.basis()]))
        report.add(f"pi_injective[{v}]", r == alg.dim, detail=f"rank {r}/{alg.dim}")
    return report


# ---------------------------------------------------------------------------
# Truncated fibres and linking algebras
# ---------------------------------------------------------------------------
class TruncatedFibre:
    """Stages 𝒦(X_{μν_t}, X_{λν_t}) along ν_t = x(0, t·1), t = 0..N.

    Each stage sits as the off-corner of the linking algebra 𝒦(X_{λν_t} ⊕ X_{μν_t}).
    """

    def __init__(self, system, lam, mu, tail, top):
        g = system.graph
        if lam.src != mu.src or tail.rng != lam.src:
            raise SectionError(f"incompatible fibre base ({lam}, {mu}) with tail at {tail.rng!r}")
        self.system = system
        self.lam, self.mu, self.tail = lam, mu, tail
        self.top = int(top)
        ones = (1,) * g.rank
        self.steps = [g.segment(tail, tuple(t * c for c in ones), tuple((t + 1) * c for c in ones))
                      for t in range(self.top)]
        self.stages = [(lam, mu)]
        for step in self.steps:
            a, b = self.stages[-1]
            self.stages.append((g.compose(a, step), g.compose(b, step)))

    def modules(self, t):
        a, b = self.stages[t]
        return self.system.X(a), self.system.X(b)

    def dims(self):
        """dim 𝒦(X_μν, X_λν) per stage."""
        return [fdcstar.compact_dim(xm, xl) for xl, xm in (self.modules(t) for t in range(len(self.stages)))]

    def corner_dims(self):
        return [fdcstar.compact_dim(xl, xl) for xl, _ in (self.modules(t) for t in range(len(self.stages)))]

    def connect(self, t, T):
        """Carry an off-corner element from stage t to stage t+1."""
        a, b = self.stages[t]
        return self.system.extend(a, b, self.steps[t], T)

    def link(self, t, blocks):
        """Connecting map on a linking-algebra element given as a 2×2 grid of CompactMaps."""
        a, b = self.stages[t]
        paths = (a, b)
        return [[self.system.extend(paths[i], paths[j], self.steps[t], blocks[i][j]) for j in range(2)]
                for i in range(2)]

    def projections(self, t):
        xl, xm = self.modules(t)
        p_lam = [[CompactMap.identity(xl), CompactMap.zero(xm, xl)],
                 [CompactMap.zero(xl, xm), CompactMap.zero(xm, xm)]]
        p_mu = [[CompactMap.zero(xl, xl), CompactMap.zero(xm, xl)],
                [CompactMap.zero(xl, xm), CompactMap.identity(xm)]]
        return p_lam, p_mu

    def corner_residual(self, t):
        """‖i(P_λ) − P_λν‖ + ‖i(P_μ) − P_μν‖ for the step t → t+1."""
        before, after = self.projections(t), self.projections(t + 1)
        total = 0.0
        for p, q in zip(before, after):
            image = self.link(t, p)
            total += sum((image[i][j] - q[i][j]).norm() for i in range(2) for j in range(2))
        return total

    def saturation(self, t):
        """(rank span{e*f}, dim 𝒦(X_μν)), (rank span{ef*}, dim 𝒦(X_λν)) over the off-corner."""
        xl, xm = self.modules(t)
        basis = fdcstar.compact_basis(xm, xl)
        lower = [(e.adjoint() @ f).matrix.ravel() for e in basis for f in basis]
        upper = [(e @ f.adjoint()).matrix.ravel() for e in basis for f in basis]
        return ((fdcstar.rank(lower), fdcstar.compact_dim(xm, xm)),
                (fdcstar.rank(upper), fdcstar.compact_dim(xl, xl)))


def fibre_E(system, base, top):
    """A truncated fibre over a diagonal point x or an off-diagonal base (λ, μ, x)."""
    g = system.graph
    if isinstance(base, kgraph.InfinitePathEP):
        v = g.vertex(base.rng)
        return TruncatedFibre(system, v, v, base, top)
    try:
        lam, mu, tail = base
    except (TypeError, ValueError):
        raise SectionError(f"fibre base must be an infinite path or (λ, μ, x), got {base!r}") from None
    return TruncatedFibre(system, lam, mu, tail, top)


def check_fibre_stages(fibre, tol=None):
    tol = config.TOL if tol is None else tol
    report = Report(f"fibre ({fibre.lam},{fibre.mu})")
    for t in range(len(fibre.steps)):
        report.residual(f"stage[{t}].corners", fibre.corner_residual(t), tol)
    for t in range(len(fibre.stages)):
        (lo, lo_dim), (hi, hi_dim) = fibre.saturation(t)
        report.add(f"stage[{t}].saturated", lo == lo_dim and hi == hi_dim,
                   detail=f"span ranks {lo}/{lo_dim}, {hi}/{hi_dim}")
    return report


def _random_compact(rng, domain, codomain):
    basis = fdcstar.compact_basis(domain, codomain)
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    total = CompactMap.zero(domain, codomain)
    for ci, m in zip(c, basis):
        total = total + m.scale(ci)
    return total


def _in_product_stage(system, a, b, ab):
    """ab sits over (λ_a, μ_b) with cocycle c(a) + c(b) and acts X_μb → X_λa."""
    if (ab.lam, ab.mu) != (a.lam, b.mu):
        return False
    if ab.cocycle != tuple(x + y for x, y in zip(a.cocycle, b.cocycle)):
        return False
    return ab.T.matrix.shape == (system.X(ab.lam).dim, system.X(ab.mu).dim)


def check_fell_axioms(fibre, rng, samples=100, tol=None):
    """Fibrewise C*-identities on random elements of each stage of a truncated fibre.

    e ranges over the fibre at (λν, μν), f over the corner at (μν, μν) and g
    over the reverse fibre at (μν, λν).
    """
    tol = config.TOL if tol is None else tol
    system = fibre.system
    report = Report(f"fell_axioms ({fibre.lam},{fibre.mu})")
    worst = {"associative": 0.0, "submultiplicative": 0.0, "involution": 0.0,
             "involutive": 0.0, "cstar_identity": 0.0, "positive": 0.0, "linking": 0.0}
    graded, products = 0, 0
    for t, (lam, mu) in enumerate(fibre.stages):
        xl, xm = fibre.modules(t)
        for _ in range(samples):
            e = sections.FibreElement(lam, mu, _random_compact(rng, xm, xl))
            f = sections.FibreElement(mu, mu, _random_compact(rng, xm, xm))
            g = sections.FibreElement(mu, lam, _random_compact(rng, xl, xm))
            for a, b in ((e, f), (f, g), (e, g), (g, e)):
                products += 1
                graded += _in_product_stage(system, a, b, a.multiply(b))
            scale = max(1.0, e.norm() * f.norm() * g.norm())
            worst["associative"] = max(worst["associative"],
                                       e.multiply(f).multiply(g).T.distance(e.multiply(f.multiply(g)).T) / scale)
            ef = e.multiply(f)
            worst["submultiplicative"] = max(worst["submultiplicative"],
                                             max(0.0, ef.norm() - e.norm() * f.norm()) / scale)
            worst["involution"] = max(worst["involution"],
                                      ef.adjoint().T.distance(f.adjoint().multiply(e.adjoint()).T) / scale)
            worst["involutive"] = max(worst["involutive"], e.adjoint().adjoint().T.distance(e.T))
            ee = e.adjoint().multiply(e)
            norm2 = e.norm() ** 2
            worst["cstar_identity"] = max(worst["cstar_identity"], abs(ee.norm() - norm2) / max(1.0, norm2))
            _, low = fdcstar.positivity(ee.T, tol=tol)
            worst["positive"] = max(worst["positive"], max(0.0, -low) / max(1.0, norm2))
            if t < len(fibre.steps):
                step = fibre.steps[t]
                pushed = ef.push(system, step)
                product = e.push(system, step).multiply(f.push(system, step))
                worst["linking"] = max(worst["linking"], pushed.T.distance(product.T) / scale)
    report.add("cocycle_additive", graded == products, detail=f"{graded}/{products} products in the sum fibre")
    for name, value in worst.items():
        report.residual(name, value, tol)
    return report

"""
Λ-systems of finite-dimensional C*-correspondences.

A presentation gives A_v per vertex, X_e per edge and, per factorisation
square fg = g′f′, an isomorphism X_f ⊗ X_g → X_g′ ⊗ X_f′. The system builds
X_λ for a normal-form path as the left-nested tensor ((X_e1 ⊗ X_e2) ⊗ …),
and χ_{α,β} : X_α ⊗ X_β → X_αβ as re-bracketing followed by the square
moves that sort the concatenated word back into normal form.

Modules are cached under keys:
  ("A", v)        the identity correspondence on A_v
  ("X", word)     X of a composable edge word
  ("T", k1, k2)   the tensor product of two keyed modules
"""
import itertools
import logging
import threading
from dataclasses import dataclass, field

import numpy as np

import config
from services import fdcstar, kgraph
from services.errors import GraphError, LambdaSystemError
from services.fdcstar import CompactMap
from services.reports import Report

log = logging.getLogger(__name__)


@dataclass
class LambdaSystemPresentation:
    graph: kgraph.KGraph
    algebras: dict
    modules: dict
    squares: dict = field(default_factory=dict)
    name: str = ""


def path_key(lam):
    return ("A", lam.rng) if lam.is_vertex else ("X", lam.edges)


class LambdaSystem:
    def __init__(self, presentation):
        self.presentation = presentation
        self.graph = presentation.graph
        self.name = presentation.name or self.graph.name
        self.algebras = dict(presentation.algebras)
        self.normalised = []  # squares replaced by their unitary part at ingestion
        self._cache = {}
        self._lock = threading.RLock()
        self._validate()
        self.squares = {key: self._square_map(key, matrix) for key, matrix in sorted(presentation.squares.items())}
        self._vertex_slots = None

    def __repr__(self):
        return f"LambdaSystem({self.name or '?'})"

    # -- Ingestion --
    def _validate(self):
        g = self.graph
        for v in g.vertices:
            if v not in self.algebras:
                raise LambdaSystemError(f"vertex {v!r} has no coefficient algebra")
        for e in g.edges.values():
            x = self.presentation.modules.get(e.id)
            if x is None:
                raise LambdaSystemError(f"edge {e.id!r} has no correspondence")
            if x.left != self.algebras[e.rng] or x.right != self.algebras[e.src]:
                raise LambdaSystemError(
                    f"X_{e.id} is {x.left!r}-{x.right!r}, expected {self.algebras[e.rng]!r}-{self.algebras[e.src]!r}")
        for key in g.squares:
            if key not in self.presentation.squares:
                dims = [self.presentation.modules[eid].dim for eid in key + g.squares[key]]
                if any(d != 1 for d in dims):
                    raise LambdaSystemError(f"square {key} has no isomorphism")
                self.presentation.squares[key] = np.eye(1, dtype=complex)

    def _square_map(self, key, matrix):
        """Push an algebraic-level square matrix to the quotients and take its unitary part."""
        f, g = key
        if key not in self.graph.squares:
            raise LambdaSystemError(f"isomorphism given for {key}, which is not a square of the graph")
        g2, f2 = self.graph.squares[key]
        source = self.module(("X", (f, g)))
        target = self.module(("X", (g2, f2)))
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape == (target.dim, source.dim):
            u = CompactMap(source, target, matrix)
        else:
            algebraic = (self.module(("X", (g2,))).dim * self.module(("X", (f2,))).dim,
                         self.module(("X", (f,))).dim * self.module(("X", (g,))).dim)
            if matrix.shape != algebraic:
                raise LambdaSystemError(f"square {key}: matrix shape {matrix.shape}, expected {algebraic}")
            u = CompactMap(source, target, target.proj @ matrix @ source.lift)
        residual = fdcstar.unitarity_residual(u)
        if residual > config.TOL:
            log.warning("square %s is not unitary (residual %.3e); using its polar part", key, residual)
            self.normalised.append((key, residual))
            u = fdcstar.polar_unitary(u)
        return u

    # -- Modules --
    def module(self, key):
        with self._lock:
            found = self._cache.get(key)
            if found is not None:
                return found
            kind = key[0]
            if kind == "A":
                built = fdcstar.identity_module(self.algebras[key[1]], name=f"A[{key[1]}]")
            elif kind == "X":
                word = key[1]
                if len(word) == 1:
                    built = self.presentation.modules[word[0]]
                else:
                    self.graph._check_composable(word)
                    built = self.module(("T", ("X", word[:-1]), ("X", word[-1:])))
            elif kind == "T":
                built, _ = fdcstar.tensor(self.module(key[1]), self.module(key[2]), name=_key_name(key))
            else:
                raise LambdaSystemError(f"unknown module key {key!r}")
            log.debug("built %s (dim %d)", _key_name(key), built.dim)
            self._cache[key] = built
            return built

    def X(self, lam):
        """X_λ for a normal-form path (X_v = A_v as the identity correspondence)."""
        return self.module(path_key(lam))

    def pair(self, alpha, beta):
        """X_α ⊗ X_β."""
        return self.module(("T", path_key(alpha), path_key(beta)))

    def _memo(self, key, build):
        with self._lock:
            found = self._cache.get(key)
            if found is None:
                found = build()
                self._cache[key] = found
            return found

    # -- Multiplication maps --
    def concat(self, w, u):
        """X_w ⊗ X_u → X_{w+u} for non-empty edge words, by re-bracketing."""
        w, u = tuple(w), tuple(u)

        def build():
            xw_xu = self.module(("T", ("X", w), ("X", u)))
            if len(u) == 1:
                return CompactMap.identity(xw_xu)
            head, last = u[:-1], u[-1:]
            regrouped = self.module(("T", ("T", ("X", w), ("X", head)), ("X", last)))
            step = fdcstar.associator(xw_xu, regrouped)
            inner = self.concat(w, head)
            lifted = fdcstar.tensor_maps(inner, CompactMap.identity(self.module(("X", last))),
                                         regrouped, self.module(("X", w + u)))
            return lifted @ step

        return self._memo(("concat", w, u), build)

    def square(self, x, y):
        """The unitary X_x ⊗ X_y → X_x′ ⊗ X_y′ for one square move, in either direction."""
        if (x, y) in self.squares:
            return self.squares[(x, y)]
        source = self.graph._inverse.get((x, y))
        if source is None:
            raise GraphError(f"no factorisation square for ({x}, {y})")
        return self.squares[source].adjoint()

    def _move(self, word, pos):
        """X_word → X_word′ for the square move at word[pos:pos + 2]."""
        word = tuple(word)
        head, pair_, tail = word[:pos], word[pos:pos + 2], word[pos + 2:]
        new_pair = self.graph.swap(*pair_)
        u = self.square(*pair_)
        if head:
            source = self.module(("T", ("X", head), ("X", pair_)))
            target = self.module(("T", ("X", head), ("X", new_pair)))
            one = CompactMap.identity(self.module(("X", head)))
            u = (self.concat(head, new_pair) @ fdcstar.tensor_maps(one, u, source, target)
                 @ self.concat(head, pair_).adjoint())
        front, new_front = head + pair_, head + new_pair
        if tail:
            source = self.module(("T", ("X", front), ("X", tail)))
            target = self.module(("T", ("X", new_front), ("X", tail)))
            one = CompactMap.identity(self.module(("X", tail)))
            u = (self.concat(new_front, tail) @ fdcstar.tensor_maps(u, one, source, target)
                 @ self.concat(front, tail).adjoint())
        return u

    def sort_map(self, word):
        """X_word → X_{normal form} through the square moves of KGraph.normal_moves."""
        word = tuple(word)

        def build():
            current = word
            total = CompactMap.identity(self.module(("X", word)))
            _, moves = self.graph.normal_moves(word)
            for pos, old, new in moves:
                step = self._move(current, pos)
                current = current[:pos] + new + current[pos + 2:]
                total = step @ total
            log.debug("sort %s: %d square moves", ".".join(word), len(moves))
            return total

        return self._memo(("sort", word), build)

    def chi(self, alpha, beta):
        """χ_{α,β} : X_α ⊗ X_β → X_αβ."""
        if alpha.src != beta.rng:
            raise GraphError(f"cannot multiply {alpha} and {beta}: s = {alpha.src!r} but r = {beta.rng!r}")

        def build():
            domain = self.pair(alpha, beta)
            if alpha.is_vertex:
                # a ⊗ x ↦ a·x
                x = self.X(beta)
                alg = np.stack([x.L[i] @ x.basis_vector(j) for i in range(x.left.dim) for j in range(x.dim)], axis=1)
                return CompactMap(domain, x, alg @ domain.lift)
            if beta.is_vertex:
                # x ⊗ a ↦ x·a
                x = self.X(alpha)
                alg = np.stack([x.R[i] @ x.basis_vector(j) for j in range(x.dim) for i in range(x.right.dim)], axis=1)
                return CompactMap(domain, x, alg @ domain.lift)
            word = alpha.edges + beta.edges
            return self.sort_map(word) @ self.concat(alpha.edges, beta.edges)

        return self._memo(("chi", alpha, beta), build)

    def extend(self, lam, mu, nu, T):
        """i_{λ,μ}^{λν,μν}(T) = χ_{λ,ν}(T ⊗ 1)χ_{μ,ν}^{-1} for T ∈ 𝒦(X_μ, X_λ)."""
        if nu.is_vertex:
            if nu.rng != lam.src:
                raise GraphError(f"{nu} does not extend {lam}")
            return T
        source, target = self.pair(mu, nu), self.pair(lam, nu)
        t1 = fdcstar.tensor_maps(T, CompactMap.identity(self.X(nu)), source, target)
        return self.chi(lam, nu) @ t1 @ self.chi(mu, nu).adjoint()

    def embed(self, alpha, beta, S):
        """i_α^{αβ} : 𝒦(X_α) → 𝒦(X_αβ)."""
        return self.extend(alpha, alpha, beta, S)

    def left_operator(self, lam, a):
        """φ_λ(a) ∈ 𝒦(X_λ)."""
        return CompactMap.left_multiplication(self.X(lam), a)

    # -- Product system --
    def vertex_slots(self):
        with self._lock:
            if self._vertex_slots is None:
                algs = [self.algebras[v] for v in self.graph.vertices]
                big, slots = fdcstar.direct_sum_algebra(algs)
                self._vertex_slots = (big, dict(zip(self.graph.vertices, slots)))
            return self._vertex_slots

    def coefficient_algebra(self):
        """A = ⊕_v A_v in vertex order."""
        return self.vertex_slots()[0]

    def embed_vertex(self, v, a):
        """a ∈ A_v as an element of A."""
        big, slots = self.vertex_slots()
        _, off = slots[v]
        n = self.algebras[v].size
        out = big.zero()
        out[off:off + n, off:off + n] = a
        return out

    def fibre(self, n):
        n = kgraph.as_degree(n, self.graph.rank)
        return self._memo(("fibre", n), lambda: ProductSystemFibre(self, n))

    def multiply(self, y, z):
        """Θ_{m,n}(y ⊗ z) for y ∈ Y_m, z ∈ Y_n given as (fibre, vector) pairs."""
        (fm, ym), (fn, zn) = y, z
        out = self.fibre(kgraph.add(fm.n, fn.n))
        result = np.zeros(out.module.dim, dtype=complex)
        for alpha in fm.paths:
            x = fm.component(ym, alpha)
            if not np.any(x):
                continue
            for beta in fn.paths:
                if beta.rng != alpha.src:
                    continue
                yb = fn.component(zn, beta)
                if not np.any(yb):
                    continue
                value = self.chi(alpha, beta)(self.pair(alpha, beta).factor(x, yb))
                result += out.iota(self.graph.compose(alpha, beta), value)
        return out, result

    def theta(self, m, n):
        """Θ_{m,n} : Y_m ⊗_A Y_n → Y_{m+n} as a CompactMap."""
        fm, fn = self.fibre(m), self.fibre(n)

        def build():
            domain, _ = fdcstar.tensor(fm.module, fn.module, name=f"Y{fm.n}⊗Y{fn.n}")
            target = self.fibre(kgraph.add(fm.n, fn.n))
            cols = [self.multiply((fm, fm.module.basis_vector(i)), (fn, fn.module.basis_vector(j)))[1]
                    for i in range(fm.module.dim) for j in range(fn.module.dim)]
            alg = np.stack(cols, axis=1) if cols else np.zeros((target.module.dim, 0))
            return CompactMap(domain, target.module, alg @ domain.lift)

        return self._memo(("theta", fm.n, fn.n), build)


class ProductSystemFibre:
    """Y_n = ⊕_{λ∈Λ^n} X_λ over A = ⊕_v A_v."""

    def __init__(self, system, n):
        self.system = system
        self.n = n
        self.paths = system.graph.all_paths(n)
        big, slots = system.vertex_slots()
        pieces = [fdcstar.extend_scalars(system.X(lam), big, slots[lam.rng], big, slots[lam.src],
                                         name=f"X[{lam}]")
                  for lam in self.paths]
        self.module, offsets = fdcstar.direct_sum(pieces, name=f"Y{n}")
        self.offsets = dict(zip(self.paths, offsets))
        self.dims = {lam: system.X(lam).dim for lam in self.paths}

    def iota(self, lam, x):
        y = np.zeros(self.module.dim, dtype=complex)
        off = self.offsets[lam]
        y[off:off + len(x)] = x
        return y

    def component(self, y, lam):
        off = self.offsets[lam]
        return np.asarray(y)[off:off + self.dims[lam]]

    def left(self, a):
        """φ_n(a) for a ∈ A."""
        return CompactMap.left_multiplication(self.module, a)


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------
def build_system(presentation):
    system = LambdaSystem(presentation)
    log.info("built %r over %r", system, system.graph)
    return system


def endomorphism_presentation(graph, algebra, maps, name=""):
    """X_e = _{φ_e}A for unital endomorphisms φ_e of one algebra A.

    The square fg = g′f′ is realised by a⊗b ↦ 1⊗φ_g(a)b, which is a bimodule
    map exactly when φ_g∘φ_f = φ_f′∘φ_g′.
    """
    modules = {e: fdcstar.homomorphism_module(maps[e], algebra, algebra, name=f"X[{e}]") for e in graph.edges}
    basis = algebra.basis()
    one = algebra.coords(algebra.unit())
    squares = {}
    for (f, g), _ in graph.squares.items():
        cols = [np.kron(one, algebra.coords(maps[g](a) @ b)) for a in basis for b in basis]
        squares[(f, g)] = np.stack(cols, axis=1)
    return LambdaSystemPresentation(graph, {v: algebra for v in graph.vertices}, modules, squares, name)


def endomorphism_system(graph, algebra, maps, name=""):
    return build_system(endomorphism_presentation(graph, algebra, maps, name))


def _key_name(key):
    if key[0] == "A":
        return f"A[{key[1]}]"
    if key[0] == "X":
        return f"X[{'.'.join(key[1])}]"
    return f"({_key_name(key[1])}⊗{_key_name(key[2])})"


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------
def composable_edge_words(g, length):
    edges = sorted(g.edges)
    words = []
    for word in itertools.product(edges, repeat=length):
        if all(g.edge(a).src == g.edge(b).rng for a, b in zip(word, word[1:])):
            words.append(word)
    return words


def check_coherence(system, tol=None):
    """χ(αβ, γ)(χ(α, β) ⊗ 1) = χ(α, βγ)(1 ⊗ χ(β, γ)) on every composable edge triple."""
    tol = config.TOL if tol is None else tol
    report = Report(f"coherence {system.name}".strip())
    g = system.graph
    worst, count = 0.0, 0
    for word in composable_edge_words(g, 3):
        a, b, c = (g.edge_path(e) for e in word)
        ab, bc = g.compose(a, b), g.compose(b, c)
        left_first = system.module(("T", ("T", path_key(a), path_key(b)), path_key(c)))
        right_first = system.module(("T", path_key(a), ("T", path_key(b), path_key(c))))
        lhs = system.chi(ab, c) @ fdcstar.tensor_maps(
            system.chi(a, b), CompactMap.identity(system.X(c)), left_first, system.pair(ab, c))
        regroup = fdcstar.associator(right_first, left_first).adjoint()
        rhs = system.chi(a, bc) @ fdcstar.tensor_maps(
            CompactMap.identity(system.X(a)), system.chi(b, c), right_first, system.pair(a, bc)) @ regroup
        residual = fdcstar.spectral_norm(lhs.matrix - rhs.matrix)
        count += 1
        worst = max(worst, residual)
        if residual >= tol:
            report.violation("coherence", f"{'.'.join(word)} residual {residual:.3e}")
    report.residual("coherence.max", worst, tol, detail=f"{count} composable edge triples")
    return report


def check_regular(system, tol=None):
    """Row-finite/no sources, per-edge regularity, unitary squares and unitary χ."""
    tol = config.TOL if tol is None else tol
    report = Report(f"check_regular {system.name}".strip())
    g = system.graph
    report.add("no_sources", g.is_row_finite_no_sources(),
               detail=", ".join(f"{v}:colour {c}" for v, c in g.sources()))
    for eid in sorted(g.edges):
        x = system.presentation.modules[eid]
        sub = fdcstar.verify_bimodule(x, tol)
        report.merge(sub, prefix=f"X[{eid}].")
    for key, u in sorted(system.squares.items()):
        report.residual(f"square[{key[0]},{key[1]}].unitary", fdcstar.unitarity_residual(u), tol)
        report.residual(f"square[{key[0]},{key[1]}].bimodule", fdcstar.bimodule_map_residual(u), tol)
    for key, residual in system.normalised:
        report.add(f"square[{key[0]},{key[1]}].normalised", True, residual=residual,
                   detail="replaced by its polar part")
    worst = 0.0
    for word in composable_edge_words(g, 2):
        a, b = (g.edge_path(e) for e in word)
        worst = max(worst, fdcstar.unitarity_residual(system.chi(a, b)))
    for eid in sorted(g.edges):
        e = g.edge_path(eid)
        worst = max(worst, fdcstar.unitarity_residual(system.chi(g.vertex(e.rng), e)),
                    fdcstar.unitarity_residual(system.chi(e, g.vertex(e.src))))
    report.residual("chi.unitary", worst, tol)
    log.info("regularity of %r: %s", system, "ok" if report.ok else f"{len(report.failures())} failures")
    return report


def _random_coords(rng, d):
    return rng.standard_normal(d) + 1j * rng.standard_normal(d)


def check_fibre(system, n, tol=None, rng=None, samples=3):
    """Dimension count, injective φ_n and orthogonal summands on seeded random vectors."""
    tol = config.TOL if tol is None else tol
    rng = np.random.default_rng(config.SEED) if rng is None else rng
    fibre = system.fibre(n)
    report = Report(f"fibre {fibre.n}")
    expected = sum(fibre.dims.values())
    report.add("dimension", fibre.module.dim == expected, detail=f"{fibre.module.dim} = Σ dim X_λ = {expected}")
    big = system.coefficient_algebra()
    inj = fdcstar.rank([m.ravel() for m in fibre.module.L])
    report.add("left.injective", inj == big.dim, detail=f"rank {inj}/{big.dim}")
    worst = 0.0
    for a, b in itertools.combinations(fibre.paths, 2):
        for _ in range(samples):
            x = fibre.iota(a, _random_coords(rng, fibre.dims[a]))
            y = fibre.iota(b, _random_coords(rng, fibre.dims[b]))
            worst = max(worst, fdcstar.spectral_norm(fibre.module.inner(x, y)))
    report.residual("summands.orthogonal", worst, tol)
    return report


def check_associativity(system, m, n, p, rng, samples=3, tol=None):
    tol = config.TOL if tol is None else tol
    fm, fn, fp = system.fibre(m), system.fibre(n), system.fibre(p)
    worst = 0.0
    for _ in range(samples):
        x = (fm, fm.module.random_vector(rng))
        y = (fn, fn.module.random_vector(rng))
        z = (fp, fp.module.random_vector(rng))
        left = system.multiply(system.multiply(x, y), z)[1]
        right = system.multiply(x, system.multiply(y, z))[1]
        worst = max(worst, float(np.max(np.abs(left - right), initial=0.0)))
    return Report(f"associativity {fm.n},{fn.n},{fp.n}").residual("associativity", worst, tol)


def regular_or_raise(system):
    report = check_regular(system)
    if not report.ok:
        names = ", ".join(c.name for c in report.failures()[:5])
        raise LambdaSystemError(f"{system.name}: system is not regular ({names})")
    return system

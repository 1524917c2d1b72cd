"""
Sections of the Fell bundle: the dense *-algebra spanned by f_T^{λ,μ}.

A basic section f_T^{λ,μ} (T ∈ 𝒦(X_μ, X_λ)) is supported on Z(λ, μ). Sums are
kept as term lists; normalize() refines every term of one cocycle class to
a common depth, where supports are equal or disjoint, then merges them.
"""
import logging
from dataclasses import dataclass

import numpy as np

import config
from services import cylsets, fdcstar, kgraph
from services.errors import SectionError
from services.fdcstar import CompactMap

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BasicSection:
    lam: kgraph.Path
    mu: kgraph.Path
    T: CompactMap

    @property
    def cocycle(self):
        return tuple(a - b for a, b in zip(self.lam.degree, self.mu.degree))

    @property
    def key(self):
        return (self.lam, self.mu)


class Section:
    def __init__(self, system, terms=(), normalized=False):
        self.system = system
        self.terms = list(terms)
        self.normalized = normalized

    def __repr__(self):
        inner = " + ".join(f"f[{t.lam},{t.mu}]" for t in self.terms) or "0"
        return f"Section({inner})"

    def _same_system(self, other):
        if other.system is not self.system:
            raise SectionError("sections live over different Λ-systems")

    def __add__(self, other):
        self._same_system(other)
        return Section(self.system, self.terms + other.terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, z):
        return Section(self.system, [BasicSection(t.lam, t.mu, t.T.scale(z)) for t in self.terms], self.normalized)

    def __matmul__(self, other):
        return convolve(self, other)

    @property
    def H(self):
        return involute(self)


def basic(system, lam, mu, T):
    if lam.src != mu.src:
        raise SectionError(f"f^{{{lam},{mu}}} needs s(λ) = s(μ)")
    return Section(system, [BasicSection(lam, mu, T)], normalized=True)


def zero(system):
    return Section(system, [], normalized=True)


def vertex_section(system, v, a):
    """f_{l_a}^{v,v} for a ∈ A_v."""
    p = system.graph.vertex(v)
    return basic(system, p, p, CompactMap.left_multiplication(system.X(p), a))


def creation_map(system, lam, x):
    """l_x : X_{s(λ)} → X_λ, a ↦ x·a."""
    xl = system.X(lam)
    xs = system.X(system.graph.vertex(lam.src))
    cols = [xl.R[k] @ x for k in range(xl.right.dim)]
    return CompactMap(xs, xl, np.stack(cols, axis=1))


def path_section(system, lam, x):
    """f_{l_x}^{λ,s(λ)} for x ∈ X_λ."""
    return basic(system, lam, system.graph.vertex(lam.src), creation_map(system, lam, x))


def random_section(system, rng, degree=1, terms=2):
    """A seeded random sum of basic sections with d(λ), d(μ) ≤ degree."""
    g = system.graph
    bisections = cylsets.bisections_upto(g, degree)
    out = []
    for i in rng.choice(len(bisections), size=terms, replace=True):
        b = bisections[int(i)]
        xl, xm = system.X(b.lam), system.X(b.mu)
        basis = fdcstar.compact_basis(xm, xl)
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        T = CompactMap(xm, xl, sum((ci * m.matrix for ci, m in zip(c, basis)),
                                   np.zeros((xl.dim, xm.dim), dtype=complex)))
        out.append(BasicSection(b.lam, b.mu, T))
    return Section(system, out)


# ---------------------------------------------------------------------------
# Normal form
# ---------------------------------------------------------------------------
def _refine_term(system, term, depth):
    g = system.graph
    p = kgraph.sub(depth, term.lam.degree)
    if not any(p):
        return [term]
    return [BasicSection(g.compose(term.lam, nu), g.compose(term.mu, nu), system.extend(term.lam, term.mu, nu, term.T))
            for nu in g.paths(term.lam.src, p)]


def _sort_key(key):
    lam, mu = key
    return (tuple(a - b for a, b in zip(lam.degree, mu.degree)), lam, mu)


def normalize(a, tol=None):
    """Disjoint supports, merged coefficients, zero terms dropped, deterministic order."""
    tol = config.TOL if tol is None else tol
    system = a.system
    classes = {}
    for t in a.terms:
        classes.setdefault(t.cocycle, []).append(t)
    merged = {}
    for _, terms in sorted(classes.items()):
        depth = terms[0].lam.degree
        for t in terms[1:]:
            depth = kgraph.join(depth, t.lam.degree)
        for t in terms:
            for piece in _refine_term(system, t, depth):
                found = merged.get(piece.key)
                merged[piece.key] = piece.T if found is None else found + piece.T
    out = [BasicSection(lam, mu, T) for (lam, mu), T in sorted(merged.items(), key=lambda kv: _sort_key(kv[0]))
           if T.norm() > tol]
    return Section(system, out, normalized=True)


def _normal(a):
    return a if a.normalized else normalize(a)


def is_zero(a, tol=None):
    return not normalize(a, tol).terms


def equal(a, b, tol=None):
    a._same_system(b)
    return is_zero(a - b, tol)


def distance(a, b):
    """Upper bound for ‖a − b‖ from the normal form."""
    return norm_bounds(a - b)[1]


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------
def convolve(a, b, normalize_result=False):
    """Bilinear extension of f_{T1}^{λ,μ} f_{T2}^{ν,τ} = Σ_{Λ^min(μ,ν)} f^{λα,τβ}_{i(T1) i(T2)}."""
    a._same_system(b)
    system = a.system
    g = system.graph
    out = []
    for s in a.terms:
        for t in b.terms:
            if s.mu.rng != t.lam.rng:
                continue
            for alpha, beta in g.lambda_min(s.mu, t.lam):
                left = system.extend(s.lam, s.mu, alpha, s.T)
                right = system.extend(t.lam, t.mu, beta, t.T)
                out.append(BasicSection(g.compose(s.lam, alpha), g.compose(t.mu, beta), left @ right))
    result = Section(system, out)
    return normalize(result) if normalize_result else result


def involute(a):
    return Section(a.system, [BasicSection(t.mu, t.lam, t.T.adjoint()) for t in a.terms], a.normalized)


def expectation(a):
    """Φ: keep the terms with d(λ) = d(μ)."""
    return Section(a.system, [t for t in a.terms if not any(t.cocycle)], a.normalized)


def grade(a):
    """Split by cocycle value; keys are ℤ^k tuples."""
    parts = {}
    for t in a.terms:
        parts.setdefault(t.cocycle, []).append(t)
    return {c: Section(a.system, terms, a.normalized) for c, terms in sorted(parts.items())}


def gauge(z, a):
    """β_z: scale each term by z^{d(λ) − d(μ)}."""
    z = tuple(complex(x) for x in z)

    def factor(c):
        return complex(np.prod([zi ** ci for zi, ci in zip(z, c)]))

    return Section(a.system, [BasicSection(t.lam, t.mu, t.T.scale(factor(t.cocycle))) for t in a.terms],
                   a.normalized)


def corner(a, v, w):
    """1_v · a · 1_w."""
    return Section(a.system, [t for t in a.terms if t.lam.rng == v and t.mu.rng == w], a.normalized)


# ---------------------------------------------------------------------------
# Fibres
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FibreElement:
    """An element of the fibre over the family Z(λ, μ), at stage 𝒦(X_μ, X_λ)."""
    lam: kgraph.Path
    mu: kgraph.Path
    T: CompactMap

    @property
    def cocycle(self):
        return tuple(a - b for a, b in zip(self.lam.degree, self.mu.degree))

    def norm(self):
        return self.T.norm()

    def adjoint(self):
        return FibreElement(self.mu, self.lam, self.T.adjoint())

    def multiply(self, other):
        if self.mu != other.lam:
            raise SectionError(f"fibres over ({self.lam},{self.mu}) and ({other.lam},{other.mu}) do not compose")
        return FibreElement(self.lam, other.mu, self.T @ other.T)

    def push(self, system, nu):
        """The image of this element at the deeper stage (λν, μν)."""
        g = system.graph
        return FibreElement(g.compose(self.lam, nu), g.compose(self.mu, nu),
                            system.extend(self.lam, self.mu, nu, self.T))


def fibre_eval(a, witness):
    """The value of ``a`` on the witness family, at stage (λν, μν)."""
    system = a.system
    g = system.graph
    target = cylsets.witness_set(g, witness)
    xl, xm = system.X(target.lam), system.X(target.mu)
    total = CompactMap.zero(xm, xl)
    for t in a.terms:
        if t.cocycle != target.cocycle:
            continue
        here = cylsets.Bisection(t.lam, t.mu)
        if kgraph.le(t.lam.degree, target.lam.degree):
            head, rest = g.factorize(target.lam, t.lam.degree, kgraph.sub(target.lam.degree, t.lam.degree))
            if head == t.lam and t.mu.src == rest.rng and g.compose(t.mu, rest) == target.mu:
                total = total + system.extend(t.lam, t.mu, rest, t.T)
                continue
            if not len(cylsets.intersect(g, here, target)):
                continue
        elif not len(cylsets.intersect(g, here, target)):
            continue
        raise SectionError(f"witness {target} is too shallow for the term on {here}")
    return FibreElement(target.lam, target.mu, total)


def witnesses(a, extra=0):
    """Witnesses deep enough to evaluate ``a``: one per normal-form term, refined by ``extra``."""
    a = _normal(a)
    g = a.system.graph
    out = []
    for t in a.terms:
        for nu in g.paths(t.lam.src, kgraph.as_degree(extra, g.rank)):
            out.append((t.lam, t.mu, nu))
    return out


def norm_bounds(a):
    """(max ‖T_i‖, Σ ‖T_i‖) over the normal form; exact when it has one term."""
    a = normalize(a)
    norms = [t.T.norm() for t in a.terms]
    if not norms:
        return 0.0, 0.0
    return max(norms), float(sum(norms))


def core_positive(a, tol=None):
    """Positivity of the degree-zero part, as block operators per source vertex.

    At a common depth D the terms f^{λ,μ} with d(λ) = d(μ) = D and s = w form
    the operator matrix [T_{λμ}] on ⊕_λ X_λ. Returns (ok, min eigenvalue).
    """
    tol = config.TOL if tol is None else tol
    core = normalize(expectation(a))
    system = a.system
    groups = {}
    for t in core.terms:
        groups.setdefault(t.lam.src, []).append(t)
    low = 0.0
    for _, terms in sorted(groups.items()):
        paths = sorted({t.lam for t in terms} | {t.mu for t in terms})
        offs, off = {}, 0
        for p in paths:
            offs[p] = off
            off += system.X(p).dim
        big = np.zeros((off, off), dtype=complex)
        for t in terms:
            xl, xm = system.X(t.lam), system.X(t.mu)
            block = xl.half @ t.T.matrix @ xm.half_inv
            big[offs[t.lam]:offs[t.lam] + xl.dim, offs[t.mu]:offs[t.mu] + xm.dim] += block
        ok, m = fdcstar.positivity(big, tol=tol)
        low = min(low, m)
        if not ok:
            return False, m
    return True, low

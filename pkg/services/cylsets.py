"""
Compact open bisections Z(λ, μ) of the path groupoid and their Boolean algebra.

Z(λ, μ) = {(λz, d(λ) − d(μ), μz)}. Groupoid elements are never built; every
operation works on (λ, μ) pairs, and membership is decided for whole
witness families {(λ′νz, ·, μ′νz)} at once, so the oracle is exact.
"""
import logging
from dataclasses import dataclass, field

from services import kgraph
from services.errors import GraphError

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Bisection:
    lam: kgraph.Path
    mu: kgraph.Path

    def __post_init__(self):
        if self.lam.src != self.mu.src:
            raise GraphError(f"Z({self.lam},{self.mu}) needs s(λ) = s(μ)")

    @property
    def cocycle(self):
        return tuple(a - b for a, b in zip(self.lam.degree, self.mu.degree))

    def __str__(self):
        return f"Z({self.lam},{self.mu})"


@dataclass
class BisectionUnion:
    members: list = field(default_factory=list)
    disjoint: bool = True

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __str__(self):
        if not self.members:
            return "∅"
        return (" ⊔ " if self.disjoint else " ∪ ").join(str(b) for b in self.members)


# ---------------------------------------------------------------------------
# Set operations
# ---------------------------------------------------------------------------
def _common_extensions(g, a, b):
    """Λ^min(λ1, λ2) ∩ Λ^min(μ1, μ2), empty when the cocycles or ranges disagree."""
    if a.cocycle != b.cocycle:
        return []
    if a.lam.rng != b.lam.rng or a.mu.rng != b.mu.rng:
        return []
    return sorted(set(g.lambda_min(a.lam, b.lam)) & set(g.lambda_min(a.mu, b.mu)))


def intersect(g, a, b):
    pieces = [Bisection(g.compose(a.lam, alpha), g.compose(a.mu, alpha))
              for alpha, _ in _common_extensions(g, a, b)]
    return BisectionUnion(pieces)


def complement(g, a, b):
    """Z(λ1, μ1) \\ Z(λ2, μ2)."""
    p = kgraph.sub(kgraph.join(a.lam.degree, b.lam.degree), a.lam.degree)
    hit = {alpha for alpha, _ in _common_extensions(g, a, b)}
    pieces = [Bisection(g.compose(a.lam, alpha), g.compose(a.mu, alpha))
              for alpha in g.paths(a.lam.src, p) if alpha not in hit]
    return BisectionUnion(pieces)


def refine(g, a, p):
    p = kgraph.as_degree(p, g.rank)
    return BisectionUnion([Bisection(g.compose(a.lam, nu), g.compose(a.mu, nu))
                           for nu in g.paths(a.lam.src, p)])


def _minus(g, pieces, bisections):
    for b in bisections:
        pieces = [q for piece in pieces for q in complement(g, piece, b)]
        if not pieces:
            break
    return pieces


def disjointize(g, bisections):
    """Disjoint form of a finite union by sequential relative complements in input order."""
    out = []
    for b in bisections:
        out.extend(_minus(g, [b], list(out)))
    log.debug("disjointize: %d inputs -> %d pieces", len(bisections), len(out))
    return BisectionUnion(out)


# ---------------------------------------------------------------------------
# Membership oracle
# ---------------------------------------------------------------------------
def witness_set(g, witness):
    """The bisection Z(λ′ν, μ′ν) carrying every element a witness (λ′, μ′, ν) stands for."""
    lam, mu, nu = witness
    if not (lam.src == mu.src == nu.rng):
        raise GraphError(f"witness ({lam}, {mu}, {nu}) needs s(λ) = s(μ) = r(ν)")
    return Bisection(g.compose(lam, nu), g.compose(mu, nu))


def factors_through(g, w, a):
    """Z(λ′, μ′) ⊆ Z(λ, μ) for w at least as deep as a: λ′ = λα and μ′ = μα."""
    if w.cocycle != a.cocycle or not kgraph.le(a.lam.degree, w.lam.degree):
        return False
    head, rest = g.factorize(w.lam, a.lam.degree, kgraph.sub(w.lam.degree, a.lam.degree))
    if head != a.lam:
        return False
    head, rest2 = g.factorize(w.mu, a.mu.degree, kgraph.sub(w.mu.degree, a.mu.degree))
    return head == a.mu and rest == rest2


def member(g, witness, a):
    """True iff every (λ′νz, d(λ′) − d(μ′), μ′νz) lies in ``a``."""
    return member_union(g, witness, [a])


def member_union(g, witness, bisections):
    """Refine the witness set below every candidate, then factorise each piece.

    A piece at least as deep as Z(λ, μ) lies inside it or misses it, so the
    answer never depends on complement().
    """
    w = witness_set(g, witness)
    items = [a for a in bisections if a.cocycle == w.cocycle]
    if not items:
        return False
    depth = w.lam.degree
    for a in items:
        depth = kgraph.join(depth, a.lam.degree)
    pieces = refine(g, w, kgraph.sub(depth, w.lam.degree))
    return all(any(factors_through(g, piece, a) for a in items) for piece in pieces)


def pairwise_disjoint(g, bisections):
    items = list(bisections)
    return all(not len(intersect(g, items[i], items[j]))
               for i in range(len(items)) for j in range(i + 1, len(items)))


def bisections_upto(g, n):
    """Every Z(λ, μ) with d(λ), d(μ) ≤ n, deterministic order."""
    n = kgraph.as_degree(n, g.rank)
    out = []
    for v in g.vertices:
        for lam in g.paths_upto(v, n):
            for w in g.vertices:
                out.extend(Bisection(lam, mu) for mu in g.paths_upto(w, n) if mu.src == lam.src)
    return out


def witnesses_upto(g, n, depth):
    """Witness triples (λ, μ, ν) with d(λ), d(μ) ≤ n and d(ν) ≤ depth."""
    depth = kgraph.as_degree(depth, g.rank)
    return [(b.lam, b.mu, nu) for b in bisections_upto(g, n) for nu in g.paths_upto(b.lam.src, depth)]

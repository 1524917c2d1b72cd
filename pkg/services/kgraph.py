"""
Finite k-graphs: coloured skeleton plus factorisation squares.

Path arithmetic (compose, factorize), enumeration of vΛ^n, minimal common
extensions Λ^min(μ, ν) and eventually periodic infinite paths.

Composition convention: λμ is defined when s(λ) = r(μ), and then
r(λμ) = r(λ), s(λμ) = s(μ). A path is stored in colour-ordered normal form:
every colour-1 edge first (nearest the range), then colour 2, and so on.
A square record (f, g) -> (g', f') says fg = g'f' with d(f) = e_i,
d(g) = e_j and i < j, so the key side is always the normal-form side.
"""
import itertools
import logging
from dataclasses import dataclass

from services.errors import GraphError
from services.reports import Report

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Degrees (k-tuples of non-negative integers)
# ---------------------------------------------------------------------------
def zero(k):
    return (0,) * k


def unit(k, color):
    """The generator e_color of ℕ^k; colours are 1-based."""
    return tuple(1 if i == color - 1 else 0 for i in range(k))


def add(m, n):
    return tuple(a + b for a, b in zip(m, n))


def le(m, n):
    return all(a <= b for a, b in zip(m, n))


def sub(m, n):
    """m − n, defined only when n ≤ m."""
    if not le(n, m):
        raise GraphError(f"degree {n} is not below {m}")
    return tuple(a - b for a, b in zip(m, n))


def join(m, n):
    return tuple(max(a, b) for a, b in zip(m, n))


def total(m):
    return sum(m)


def degrees_upto(n):
    """All m with m ≤ n, in lexicographic order."""
    return [tuple(m) for m in itertools.product(*(range(x + 1) for x in n))]


def as_degree(value, k):
    """Accept an int (for k = 1) or any k-sequence."""
    if isinstance(value, int):
        value = (value,) if k == 1 else (value,) * k
    value = tuple(int(x) for x in value)
    if len(value) != k or any(x < 0 for x in value):
        raise GraphError(f"{value!r} is not a degree in ℕ^{k}")
    return value


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Edge:
    id: str
    color: int
    src: str
    rng: str


@dataclass(frozen=True, order=True)
class Path:
    rng: str
    src: str
    degree: tuple
    edges: tuple = ()

    @property
    def is_vertex(self):
        return not self.edges

    def __str__(self):
        return ".".join(self.edges) if self.edges else self.rng


@dataclass(frozen=True)
class InfinitePathEP:
    """The eventually periodic path prefix·cycle·cycle·…"""
    prefix: Path
    cycle: Path

    @property
    def rng(self):
        return self.prefix.rng


# ---------------------------------------------------------------------------
# The graph
# ---------------------------------------------------------------------------
class KGraph:
    def __init__(self, rank, vertices, edges, squares=None, name=""):
        self.rank = int(rank)
        self.name = name
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        self.edges = {}
        for e in edges:
            if not isinstance(e, Edge):
                e = Edge(str(e["id"]), int(e["color"]), str(e["src"]), str(e["rng"]))
            if e.id in self.edges or e.id in self.vertices:
                raise GraphError(f"duplicate id {e.id!r}")
            if e.src not in self.vertices or e.rng not in self.vertices:
                raise GraphError(f"edge {e.id!r} references an unknown vertex")
            if not 1 <= e.color <= self.rank:
                raise GraphError(f"edge {e.id!r} has colour {e.color} outside 1..{self.rank}")
            self.edges[e.id] = e

        self.squares = {}
        for (f, g), (g2, f2) in (squares or {}).items():
            for eid in (f, g, g2, f2):
                if eid not in self.edges:
                    raise GraphError(f"square ({f}, {g}) references unknown edge {eid!r}")
            self.squares[(f, g)] = (g2, f2)
        self._inverse = {}
        for key, value in self.squares.items():
            self._inverse.setdefault(value, key)

        # (vertex, colour) -> edges with that range, sorted by id
        self._into = {}
        for e in sorted(self.edges.values(), key=lambda e: e.id):
            self._into.setdefault((e.rng, e.color), []).append(e)

    def __repr__(self):
        return f"KGraph({self.name or '?'}, k={self.rank}, |V|={len(self.vertices)}, |E|={len(self.edges)})"

    # -- Lookups --
    def edge(self, eid):
        try:
            return self.edges[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def color(self, eid):
        return self.edge(eid).color

    def vertex(self, v):
        if v not in self.vertices:
            raise GraphError(f"unknown vertex {v!r}")
        return Path(v, v, zero(self.rank))

    def edge_path(self, eid):
        e = self.edge(eid)
        return Path(e.rng, e.src, unit(self.rank, e.color), (e.id,))

    def degree_of(self, word):
        d = [0] * self.rank
        for eid in word:
            d[self.color(eid) - 1] += 1
        return tuple(d)

    # -- Words and normal forms --
    def _check_composable(self, word):
        for a, b in zip(word, word[1:]):
            if self.edge(a).src != self.edge(b).rng:
                raise GraphError(f"edges {a!r} and {b!r} do not compose (s({a}) != r({b}))")

    def swap(self, x, y):
        """Rewrite the adjacent pair xy (distinct colours) as the other side of its square."""
        cx, cy = self.color(x), self.color(y)
        if cx == cy:
            raise GraphError(f"cannot swap same-colour edges {x!r}, {y!r}")
        table = self.squares if cx < cy else self._inverse
        try:
            return table[(x, y)]
        except KeyError:
            raise GraphError(f"no factorisation square for ({x}, {y})") from None

    def reorder(self, word, pattern):
        """Move ``word`` by square moves until its colour sequence equals ``pattern``.

        Returns (new_word, moves) where each move is (position, old_pair, new_pair)
        applied at word[position:position + 2]. The move order is fixed: the
        leftmost position is filled first by bubbling the nearest edge of the
        wanted colour leftwards.
        """
        word = list(word)
        moves = []
        for p, want in enumerate(pattern):
            q = next((i for i in range(p, len(word)) if self.color(word[i]) == want), None)
            if q is None:
                raise GraphError(f"word {word} has no colour-{want} edge left to place at {p}")
            while q > p:
                old = (word[q - 1], word[q])
                new = self.swap(*old)
                word[q - 1], word[q] = new
                moves.append((q - 1, old, new))
                q -= 1
        return tuple(word), moves

    def normal_moves(self, word):
        """Square moves taking a composable word to its normal form."""
        word = tuple(word)
        self._check_composable(word)
        return self.reorder(word, sorted(self.color(e) for e in word))

    def path(self, word, vertex=None):
        """The normal-form Path of a composable word (the vertex path when empty)."""
        word = tuple(word)
        if not word:
            if vertex is None:
                raise GraphError("an empty word needs a vertex")
            return self.vertex(vertex)
        normal, _ = self.normal_moves(word)
        return Path(self.edge(normal[0]).rng, self.edge(normal[-1]).src, self.degree_of(normal), normal)

    def parse(self, text):
        """Parse 'v' (a vertex) or 'e1.e2.e3' (a composable word)."""
        text = text.strip()
        if text in self.vertices:
            return self.vertex(text)
        return self.path([t for t in text.split(".") if t])

    # -- Path arithmetic --
    def compose(self, lam, mu):
        if lam.src != mu.rng:
            raise GraphError(f"cannot compose {lam} and {mu}: s = {lam.src!r} but r = {mu.rng!r}")
        if lam.is_vertex:
            return mu
        if mu.is_vertex:
            return lam
        return self.path(lam.edges + mu.edges)

    def factorize(self, lam, m, n):
        """The unique (μ, ν) with d(μ) = m, d(ν) = n and λ = μν."""
        m, n = as_degree(m, self.rank), as_degree(n, self.rank)
        if add(m, n) != lam.degree:
            raise GraphError(f"degree mismatch: {m} + {n} != d({lam}) = {lam.degree}")
        pattern = []
        for part in (m, n):
            for color, count in enumerate(part, start=1):
                pattern.extend([color] * count)
        word, _ = self.reorder(lam.edges, pattern)
        split = total(m)
        head, tail = word[:split], word[split:]
        mid = self.edge(tail[0]).rng if tail else lam.src
        return self.path(head, vertex=lam.rng), self.path(tail, vertex=mid)

    # -- Enumeration --
    def _chains(self, v, color, length):
        """Single-colour words of the given length with range v, with their end vertex."""
        if length == 0:
            yield (), v
            return
        for e in self._into.get((v, color), []):
            for rest, end in self._chains(e.src, color, length - 1):
                yield (e.id,) + rest, end

    def paths(self, v, n):
        """vΛ^n, exhaustive and duplicate-free, in a deterministic order."""
        n = as_degree(n, self.rank)
        self.vertex(v)
        words = [((), v)]
        for color, count in enumerate(n, start=1):
            words = [(w + chain, end) for w, start in words for chain, end in self._chains(start, color, count)]
        return [Path(v, end, n, w) for w, end in words]

    def all_paths(self, n):
        """Λ^n over every vertex."""
        return [p for v in self.vertices for p in self.paths(v, n)]

    def paths_upto(self, v, n):
        """Every path in vΛ with degree ≤ n."""
        return [p for m in degrees_upto(as_degree(n, self.rank)) for p in self.paths(v, m)]

    def is_row_finite_no_sources(self):
        # finite graphs are always row-finite; no sources means vΛ^{e_i} ≠ ∅
        return all(self._into.get((v, c)) for v in self.vertices for c in range(1, self.rank + 1))

    def sources(self):
        return [(v, c) for v in self.vertices for c in range(1, self.rank + 1) if not self._into.get((v, c))]

    # -- Minimal common extensions --
    def lambda_min(self, mu, nu):
        """Λ^min(μ, ν): all (α, β) with μα = νβ and d(μα) = d(μ) ∨ d(ν)."""
        if mu.rng != nu.rng:
            raise GraphError(f"range mismatch: r({mu}) = {mu.rng!r}, r({nu}) = {nu.rng!r}")
        top = join(mu.degree, nu.degree)
        p, q = sub(top, mu.degree), sub(top, nu.degree)
        result = []
        for alpha in self.paths(mu.src, p):
            head, beta = self.factorize(self.compose(mu, alpha), nu.degree, q)
            if head == nu:
                result.append((alpha, beta))
        return sorted(result)

    def lambda_min_oracle(self, mu, nu):
        """Brute-force Λ^min: test every candidate pair for μα = νβ."""
        top = join(mu.degree, nu.degree)
        alphas = self.paths(mu.src, sub(top, mu.degree))
        betas = self.paths(nu.src, sub(top, nu.degree))
        return sorted((a, b) for a in alphas for b in betas if self.compose(mu, a) == self.compose(nu, b))

    # -- Eventually periodic infinite paths --
    def eventually_periodic(self, prefix, cycle):
        if cycle.rng != cycle.src or cycle.rng != prefix.src:
            raise GraphError(f"cycle {cycle} must be a loop at s({prefix}) = {prefix.src!r}")
        if not all(x > 0 for x in cycle.degree):
            raise GraphError(f"cycle {cycle} must have strictly positive degree, got {cycle.degree}")
        return InfinitePathEP(prefix, cycle)

    def periodic_point(self, v=None, limit=4):
        """Some x = (cycle)^∞ with r(x) = v, the cycle of degree (d, …, d) for the least d ≤ limit."""
        starts = self.vertices if v is None else (v,)
        for d in range(1, limit + 1):
            for w in starts:
                for lam in self.paths(w, (d,) * self.rank):
                    if lam.src == w:
                        return self.eventually_periodic(self.vertex(w), lam)
        raise GraphError(f"no cycle of diagonal degree ≤ {limit} at {v or 'any vertex'}")

    def _unroll(self, x, n):
        """prefix·cycle^j for the least j with degree ≥ n."""
        j = 0
        for need, have, step in zip(n, x.prefix.degree, x.cycle.degree):
            j = max(j, -(-(need - have) // step))
        path = x.prefix
        for _ in range(j):
            path = self.compose(path, x.cycle)
        return path, j

    def segment(self, x, m, n):
        """x(m, n) for m ≤ n."""
        m, n = as_degree(m, self.rank), as_degree(n, self.rank)
        if not le(m, n):
            raise GraphError(f"segment bounds {m} ≰ {n}")
        path, _ = self._unroll(x, n)
        head, _ = self.factorize(path, n, sub(path.degree, n))
        _, piece = self.factorize(head, m, sub(n, m))
        return piece

    def shift(self, x, p):
        """σ^p(x), re-expressed with the same cycle."""
        p = as_degree(p, self.rank)
        path, _ = self._unroll(x, p)
        return InfinitePathEP(self.segment(x, p, path.degree), x.cycle)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------
def verify_kgraph(g):
    """Square bijectivity, range/source preservation and (k ≥ 3) coherence.

    Every violating tuple gets its own failed check; nothing is raised.
    """
    report = Report(f"verify_kgraph {g.name}".strip())
    k = g.rank

    for (f, g1), (g2, f2) in sorted(g.squares.items()):
        cf, cg = g.color(f), g.color(g1)
        if not (cf < cg and g.color(g2) == cg and g.color(f2) == cf):
            report.violation("square.colours", f"({f},{g1})->({g2},{f2}) has inconsistent colours")
            continue
        if g.edge(f).src != g.edge(g1).rng:
            report.violation("square.domain", f"({f},{g1}) is not composable")
        if g.edge(g2).src != g.edge(f2).rng:
            report.violation("square.codomain", f"({g2},{f2}) is not composable")
        if g.edge(f).rng != g.edge(g2).rng or g.edge(g1).src != g.edge(f2).src:
            report.violation("square.endpoints", f"({f},{g1})->({g2},{f2}) moves r or s")

    edges = sorted(g.edges.values(), key=lambda e: e.id)
    for i, j in itertools.combinations(range(1, k + 1), 2):
        domain = {(a.id, b.id) for a in edges for b in edges if a.color == i and b.color == j and a.src == b.rng}
        codomain = {(a.id, b.id) for a in edges for b in edges if a.color == j and b.color == i and a.src == b.rng}
        keys = {key for key in g.squares if g.color(key[0]) == i and g.color(key[1]) == j}
        images = [g.squares[key] for key in sorted(keys)]
        for missing in sorted(domain - keys):
            report.violation(f"square.total[{i},{j}]", f"missing pair ({missing[0]},{missing[1]})")
        seen = set()
        for image in images:
            if image in seen:
                report.violation(f"square.injective[{i},{j}]", f"({image[0]},{image[1]}) hit twice")
            seen.add(image)
        for unhit in sorted(codomain - seen):
            report.violation(f"square.surjective[{i},{j}]", f"({unhit[0]},{unhit[1]}) never hit")
        report.add(f"squares[{i},{j}]", domain == keys and len(seen) == len(images) and seen == codomain,
                   detail=f"{len(domain)} composable pairs")

    if k >= 3:
        report.merge(_check_coherence(g))
    report.add("no_sources", g.is_row_finite_no_sources(),
               detail=", ".join(f"{v}:colour {c}" for v, c in g.sources()))
    log.info("verified %r: %s", g, "ok" if report.ok else f"{len(report.failures())} violations")
    return report


def _check_coherence(g):
    """Re-associate every tri-coloured triple fgh both ways through the squares."""
    report = Report("coherence")
    edges = sorted(g.edges.values(), key=lambda e: e.id)
    count = 0
    for f, h1, h2 in itertools.product(edges, repeat=3):
        if not (f.color < h1.color < h2.color and f.src == h1.rng and h1.src == h2.rng):
            continue
        count += 1
        word = (f.id, h1.id, h2.id)
        try:
            left = _moves(g, word, [1, 0, 1])
            right = _moves(g, word, [0, 1, 0])
        except GraphError:
            continue  # an absent square is already reported as a totality violation
        if left != right:
            report.violation("coherence", f"{'.'.join(word)} -> {'.'.join(left)} vs {'.'.join(right)}")
    report.add("coherence", not report.failures(), detail=f"{count} tri-coloured triples")
    return report


def _moves(g, word, positions):
    word = list(word)
    for p in positions:
        word[p], word[p + 1] = g.swap(word[p], word[p + 1])
    return tuple(word)

"""
Gallery: small k-graphs and the Λ-systems the command surface ships with.

  trivial-b2   B_2 with ℂ everywhere; C*(A, X, χ) is the Cuntz algebra O_2
  sse          two vertices linked by imprimitivity bimodules ℂ^2 and (ℂ^2)*
  zk-crossed   T_k with commuting automorphisms Ad(u_c) of M_2
  twisted-o2   B_2 over M_2 twisted by Ad(diag(1, -1)) and Ad(flip)
  pwy-block    the 1-graph of Σ = [[1, 1], [1, 0]] with M_2 at each vertex
"""
import logging
import os

import numpy as np

import config
from services import fdcstar, lsystem, specfile
from services.errors import PimsnerError
from services.kgraph import Edge, KGraph

log = logging.getLogger(__name__)

_COLOUR_NAMES = ["b", "r", "g", "y"]


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------
def graph_bn(n, name=""):
    """One vertex, n loops of colour 1."""
    return KGraph(1, ["v"], [Edge(f"e{i}", 1, "v", "v") for i in range(1, n + 1)], name=name or f"B{n}")


def colour_edge(c):
    return _COLOUR_NAMES[c - 1] if c <= len(_COLOUR_NAMES) else f"c{c}"


def graph_tk(k, name=""):
    """One vertex, one loop per colour; every square is xy = yx."""
    edges = [Edge(colour_edge(c), c, "v", "v") for c in range(1, k + 1)]
    squares = {(colour_edge(i), colour_edge(j)): (colour_edge(j), colour_edge(i))
               for i in range(1, k + 1) for j in range(i + 1, k + 1)}
    return KGraph(k, ["v"], edges, squares, name=name or f"T{k}")


def graph_cycle(n, name=""):
    """C_n: vertices v0..v{n-1}, edge e_i from v_{i+1} to v_i."""
    vertices = [f"v{i}" for i in range(n)]
    edges = [Edge(f"e{i}", 1, vertices[(i + 1) % n], vertices[i]) for i in range(n)]
    return KGraph(1, vertices, edges, name=name or f"C{n}")


def graph_sse(name=""):
    """e: v → w and f: w → v."""
    return KGraph(1, ["v", "w"], [Edge("e", 1, "v", "w"), Edge("f", 1, "w", "v")], name=name or "sse")


def graph_matrix(sigma, name=""):
    """The 1-graph of a {0,1}-matrix: an edge e{i}{j} from v{j} to v{i} whenever Σ_ij = 1."""
    sigma = np.asarray(sigma, dtype=int)
    n = sigma.shape[0]
    vertices = [f"v{i}" for i in range(1, n + 1)]
    edges = [Edge(f"e{i + 1}{j + 1}", 1, vertices[j], vertices[i])
             for i in range(n) for j in range(n) if sigma[i, j]]
    return KGraph(1, vertices, edges, name=name or "matrix")


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------
def _ad(u):
    u = np.asarray(u, dtype=complex)
    return lambda a: u @ a @ u.conj().T


def trivial_presentation(graph, name=""):
    """ℂ at every vertex and edge; the system of the graph algebra C*(Λ)."""
    c = fdcstar.FDAlgebra([1])
    modules = {eid: fdcstar.identity_module(c, name=f"X[{eid}]") for eid in graph.edges}
    return lsystem.LambdaSystemPresentation(graph, {v: c for v in graph.vertices}, modules, {},
                                            name=name or f"trivial-{graph.name}")


def trivial_b2():
    return trivial_presentation(graph_bn(2), name="trivial-b2")


def sse():
    c, m2 = fdcstar.FDAlgebra([1]), fdcstar.FDAlgebra([2])
    g = graph_sse()
    modules = {
        "e": fdcstar.matrix_module(m2, c, name="X[e]"),
        "f": fdcstar.matrix_module(c, m2, name="X[f]"),
    }
    return lsystem.LambdaSystemPresentation(g, {"v": c, "w": m2}, modules, {}, name="sse")


def crossed_unitaries(k):
    """Commuting diagonal unitaries diag(1, e^{iπ/c}), c = 1..k."""
    return {colour_edge(c): np.diag([1, np.exp(1j * np.pi / c)]) for c in range(1, k + 1)}


def zk_crossed(k=2):
    m2 = fdcstar.FDAlgebra([2])
    maps = {eid: _ad(u) for eid, u in crossed_unitaries(k).items()}
    return lsystem.endomorphism_presentation(graph_tk(k), m2, maps, name="zk-crossed" if k == 2 else f"z{k}-crossed")


TWIST_UNITARIES = {
    "e1": np.diag([1, -1]).astype(complex),
    "e2": np.array([[0, 1], [1, 0]], dtype=complex),
}


def twisted_o2():
    """X_{e_i} = _{α_i^{-1}}M_2 with α_i = Ad(u_i), so that α_i(a)V_i = V_i a."""
    m2 = fdcstar.FDAlgebra([2])
    g = graph_bn(2)
    modules = {eid: fdcstar.homomorphism_module(_ad(u.conj().T), m2, m2, name=f"X[{eid}]")
               for eid, u in TWIST_UNITARIES.items()}
    return lsystem.LambdaSystemPresentation(g, {"v": m2}, modules, {}, name="twisted-o2")


PWY_SIGMA = [[1, 1], [1, 0]]


def pwy_block(sigma=None, size=2):
    """M_size at every vertex of the graph of Σ, X_e = M_size as an M_size–M_size correspondence."""
    sigma = PWY_SIGMA if sigma is None else sigma
    alg = fdcstar.FDAlgebra([size])
    g = graph_matrix(sigma, name="pwy")
    modules = {eid: fdcstar.matrix_module(alg, alg, name=f"X[{eid}]") for eid in g.edges}
    return lsystem.LambdaSystemPresentation(g, {v: alg for v in g.vertices}, modules, {}, name="pwy-block")


GALLERY = {
    "trivial-b2": trivial_b2,
    "sse": sse,
    "zk-crossed": zk_crossed,
    "twisted-o2": twisted_o2,
    "pwy-block": pwy_block,
}

OPTIONS = {"tol": config.TOL, "depth": 1, "fock_top": 2, "seed": config.SEED}


def presentation(name):
    try:
        builder = GALLERY[name]
    except KeyError:
        raise PimsnerError(f"unknown gallery system {name!r}; choose from {', '.join(GALLERY)}") from None
    return builder()


def system(name):
    return lsystem.build_system(presentation(name))


def write_gallery(name, directory=None):
    directory = config.GALLERY_DIR if directory is None else directory
    doc = specfile.dump_document(presentation(name), OPTIONS)
    path = specfile.save(os.path.join(directory, f"{name}.json"), doc)
    log.info("gallery %s -> %s", name, path)
    return path

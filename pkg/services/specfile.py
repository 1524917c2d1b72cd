"""
Spec files: JSON documents describing a k-graph and a Λ-system over it.

Complex numbers are [re, im] pairs (a bare number is read as real),
matrices are row-major nested lists and every dimension is explicit.
Parse failures raise SpecFileError with a JSON-pointer style location.
Writes are atomic (tmp file + os.replace).
"""
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from services import fdcstar, kgraph, lsystem, sections
from services.cylsets import Bisection
from services.errors import GraphError, ModuleError, PimsnerError, SpecFileError

log = logging.getLogger(__name__)

FORMAT = "kgraph-pimsner/1"


@dataclass
class SpecFile:
    name: str
    graph: kgraph.KGraph
    presentation: lsystem.LambdaSystemPresentation
    options: dict = field(default_factory=dict)
    path: str = ""


# ---------------------------------------------------------------------------
# Literals
# ---------------------------------------------------------------------------
def parse_complex(value, loc):
    if isinstance(value, bool):
        raise SpecFileError(f"expected a number or [re, im], got {value!r}", loc)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise SpecFileError(f"expected a number or [re, im], got {value!r}", loc)


def parse_matrix(value, loc, shape=None):
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise SpecFileError("expected a matrix (list of rows)", loc)
    rows = [[parse_complex(x, f"{loc}/{i}/{j}") for j, x in enumerate(row)] for i, row in enumerate(value)]
    width = {len(r) for r in rows}
    if len(width) > 1:
        raise SpecFileError("ragged matrix rows", loc)
    m = np.array(rows, dtype=complex).reshape(len(rows), width.pop() if width else 0)
    if shape is not None and m.shape != tuple(shape):
        raise SpecFileError(f"matrix has shape {m.shape}, expected {tuple(shape)}", loc)
    return m


def encode_complex(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(m):
    return [[encode_complex(x) for x in row] for row in np.asarray(m)]


def _require(doc, key, loc, kind=None):
    if not isinstance(doc, dict) or key not in doc:
        raise SpecFileError(f"missing {key!r}", loc)
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise SpecFileError(f"{key!r} must be {kind.__name__}", f"{loc}/{key}")
    return value


# ---------------------------------------------------------------------------
# Graph section
# ---------------------------------------------------------------------------
def parse_graph(doc, loc="/graph", name=""):
    rank = _require(doc, "rank", loc, int)
    vertices = [str(v) for v in _require(doc, "vertices", loc, list)]
    edges = []
    for i, e in enumerate(_require(doc, "edges", loc, list)):
        here = f"{loc}/edges/{i}"
        edges.append(kgraph.Edge(str(_require(e, "id", here)), int(_require(e, "color", here, int)),
                                 str(_require(e, "src", here)), str(_require(e, "rng", here))))
    squares = {}
    for i, s in enumerate(doc.get("squares", [])):
        here = f"{loc}/squares/{i}"
        key = (str(_require(s, "f", here)), str(_require(s, "g", here)))
        if key in squares:
            raise SpecFileError(f"duplicate square ({key[0]}, {key[1]})", here)
        squares[key] = (str(_require(s, "gprime", here)), str(_require(s, "fprime", here)))
    try:
        return kgraph.KGraph(rank, vertices, edges, squares, name=doc.get("name", name))
    except GraphError as e:
        raise SpecFileError(str(e), loc) from e


def dump_graph(g):
    return {
        "name": g.name,
        "rank": g.rank,
        "vertices": list(g.vertices),
        "edges": [{"id": e.id, "color": e.color, "src": e.src, "rng": e.rng}
                  for e in sorted(g.edges.values(), key=lambda e: e.id)],
        "squares": [{"f": f, "g": h, "gprime": g2, "fprime": f2}
                    for (f, h), (g2, f2) in sorted(g.squares.items())],
    }


# ---------------------------------------------------------------------------
# System section
# ---------------------------------------------------------------------------
def parse_module(doc, left, right, loc, name=""):
    dim = _require(doc, "dim", loc, int)
    if dim < 0:
        raise SpecFileError("dim must be non-negative", f"{loc}/dim")
    raw_left = _require(doc, "left", loc, list)
    raw_right = _require(doc, "right", loc, list)
    raw_gram = _require(doc, "gram", loc, list)
    if len(raw_left) != left.dim:
        raise SpecFileError(f"expected {left.dim} left-action matrices", f"{loc}/left")
    if len(raw_right) != right.dim:
        raise SpecFileError(f"expected {right.dim} right-action matrices", f"{loc}/right")
    L = [parse_matrix(m, f"{loc}/left/{k}", (dim, dim)) for k, m in enumerate(raw_left)]
    R = [parse_matrix(m, f"{loc}/right/{k}", (dim, dim)) for k, m in enumerate(raw_right)]
    if len(raw_gram) != dim or any(not isinstance(row, list) or len(row) != dim for row in raw_gram):
        raise SpecFileError(f"gram must be a {dim}x{dim} grid of matrices", f"{loc}/gram")
    G = [[parse_matrix(m, f"{loc}/gram/{i}/{j}", (right.size, right.size)) for j, m in enumerate(row)]
         for i, row in enumerate(raw_gram)]
    shape_l, shape_r, shape_g = (left.dim, dim, dim), (right.dim, dim, dim), (dim, dim, right.size, right.size)
    try:
        return fdcstar.Bimodule(left, right,
                                np.array(L, dtype=complex).reshape(shape_l),
                                np.array(R, dtype=complex).reshape(shape_r),
                                np.array(G, dtype=complex).reshape(shape_g), name=name)
    except ModuleError as e:
        raise SpecFileError(str(e), loc) from e


def dump_module(x):
    return {
        "dim": x.dim,
        "left": [encode_matrix(m) for m in x.L],
        "right": [encode_matrix(m) for m in x.R],
        "gram": [[encode_matrix(x.gram[i, j]) for j in range(x.dim)] for i in range(x.dim)],
    }


def parse_presentation(doc, graph, loc="/system", name=""):
    algebras = {}
    raw = _require(doc, "algebras", loc, dict)
    for v in graph.vertices:
        if v not in raw:
            raise SpecFileError(f"no algebra for vertex {v!r}", f"{loc}/algebras")
        try:
            algebras[v] = fdcstar.FDAlgebra(raw[v])
        except (ModuleError, TypeError, ValueError) as e:
            raise SpecFileError(f"bad block list {raw[v]!r}", f"{loc}/algebras/{v}") from e
    modules = {}
    raw = _require(doc, "modules", loc, dict)
    for eid in sorted(graph.edges):
        e = graph.edge(eid)
        if eid not in raw:
            raise SpecFileError(f"no correspondence for edge {eid!r}", f"{loc}/modules")
        modules[eid] = parse_module(raw[eid], algebras[e.rng], algebras[e.src], f"{loc}/modules/{eid}",
                                    name=f"X[{eid}]")
    squares = {}
    for i, s in enumerate(doc.get("squares", [])):
        here = f"{loc}/squares/{i}"
        key = (str(_require(s, "f", here)), str(_require(s, "g", here)))
        if key not in graph.squares:
            raise SpecFileError(f"({key[0]}, {key[1]}) is not a square of the graph", here)
        squares[key] = parse_matrix(_require(s, "matrix", here), f"{here}/matrix")
    return lsystem.LambdaSystemPresentation(graph, algebras, modules, squares, name=name)


def dump_presentation(p):
    return {
        "algebras": {v: list(p.algebras[v].blocks) for v in p.graph.vertices},
        "modules": {eid: dump_module(p.modules[eid]) for eid in sorted(p.modules)},
        "squares": [{"f": f, "g": g, "matrix": encode_matrix(m)} for (f, g), m in sorted(p.squares.items())],
    }


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------
def parse_document(doc, base_dir="."):
    if not isinstance(doc, dict):
        raise SpecFileError("a spec file must be a JSON object", "/")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise SpecFileError(f"unsupported format {fmt!r}", "/format")
    name = str(doc.get("name", ""))
    raw_graph = _require(doc, "graph", "")
    if isinstance(raw_graph, str):
        graph_doc = _read_json(os.path.join(base_dir, raw_graph))
        graph = parse_graph(graph_doc.get("graph", graph_doc), loc=f"{raw_graph}#/graph", name=name)
    else:
        graph = parse_graph(raw_graph, name=name)
    presentation = parse_presentation(_require(doc, "system", "", dict), graph, name=name)
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise SpecFileError("options must be an object", "/options")
    return SpecFile(name, graph, presentation, options)


def dump_document(presentation, options=None):
    return {
        "format": FORMAT,
        "name": presentation.name,
        "graph": dump_graph(presentation.graph),
        "system": dump_presentation(presentation),
        "options": dict(options or {}),
    }


def _read_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise SpecFileError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise SpecFileError(f"invalid JSON: {e.msg}", f"{path}:{e.lineno}:{e.colno}") from e


def load(path):
    spec = parse_document(_read_json(path), base_dir=os.path.dirname(os.path.abspath(path)))
    spec.path = path
    log.info("loaded %s (%r)", path, spec.graph)
    return spec


def load_system(path):
    """(SpecFile, LambdaSystem); presentation errors surface as SpecFileError."""
    spec = load(path)
    try:
        system = lsystem.build_system(spec.presentation)
    except PimsnerError as e:
        if isinstance(e, SpecFileError):
            raise
        raise SpecFileError(str(e), "/system") from e
    return spec, system


def save(path, doc):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = path + ".tmp"
    with open(tmp_path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp_path, path)
    log.info("wrote %s", path)
    return path


# ---------------------------------------------------------------------------
# Command-line literals
# ---------------------------------------------------------------------------
def parse_degree(text, k):
    try:
        parts = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise SpecFileError(f"bad degree {text!r}") from None
    if len(parts) == 1 and k > 1:
        parts = parts * k
    try:
        return kgraph.as_degree(tuple(parts), k)
    except GraphError as e:
        raise SpecFileError(str(e)) from e


def parse_path(g, text):
    try:
        return g.parse(text)
    except GraphError as e:
        raise SpecFileError(str(e), text) from e


def parse_bisection(g, text):
    """'λ/μ', e.g. 'e1/v'."""
    try:
        lam, mu = text.split("/")
    except ValueError:
        raise SpecFileError("a bisection is written λ/μ", text) from None
    try:
        return Bisection(parse_path(g, lam), parse_path(g, mu))
    except GraphError as e:
        raise SpecFileError(str(e), text) from e


def parse_section(system, text):
    """A JSON list of [λ-word, μ-word, matrix] triples, the matrix acting X_μ → X_λ."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFileError(f"invalid section literal: {e.msg}") from e
    if not isinstance(raw, list):
        raise SpecFileError("a section literal is a list of [λ, μ, matrix] triples")
    g = system.graph
    terms = []
    for i, item in enumerate(raw):
        if not isinstance(item, list) or len(item) != 3:
            raise SpecFileError("expected [λ, μ, matrix]", f"/{i}")
        lam, mu = parse_path(g, str(item[0])), parse_path(g, str(item[1]))
        xl, xm = system.X(lam), system.X(mu)
        T = fdcstar.CompactMap(xm, xl, parse_matrix(item[2], f"/{i}/2", (xl.dim, xm.dim)))
        try:
            terms.append(sections.basic(system, lam, mu, T))
        except PimsnerError as e:
            raise SpecFileError(str(e), f"/{i}") from e
    total = sections.zero(system)
    for t in terms:
        total = total + t
    return total

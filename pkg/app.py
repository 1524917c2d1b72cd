"""
kgraph-pimsner: command surface only.

All mathematics lives in services/. This file parses arguments, loads
spec files, dispatches to the services and prints reports. Exit status:
0 when every check passes, 1 when a report has failures, 2 on a hard
error (malformed file, non-composable arguments, non-regular system).
"""
import argparse
import logging
import sys

import numpy as np

import config
from services import cprep, cylsets, gallery, kgraph, lsystem, sections, specfile, suite
from services.errors import PimsnerError
from services.reports import Report, emit, render

log = logging.getLogger(__name__)


def _out(fmt, lines_text, json_lines):
    print("\n".join(json_lines if fmt == "json" else lines_text))


def _finish(report, fmt):
    print(render(report, fmt))
    return 0 if report.ok else 1


def _matrix_text(m):
    rows = []
    for row in np.round(np.asarray(m), 12) + 0.0:
        rows.append("[" + ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in row) + "]")
    return "[" + ", ".join(rows) + "]"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------
def cmd_verify(args):
    spec = specfile.load(args.file)
    report = Report(f"verify {spec.name or args.file}")
    report.merge(kgraph.verify_kgraph(spec.graph), prefix="graph.")
    if not report.ok:
        return _finish(report, args.format)
    system = lsystem.build_system(spec.presentation)
    report.merge(lsystem.check_regular(system), prefix="regular.")
    report.merge(lsystem.check_coherence(system), prefix="coherence.")
    return _finish(report, args.format)


def cmd_min(args):
    g = specfile.load(args.file).graph
    mu, nu = specfile.parse_path(g, args.mu), specfile.parse_path(g, args.nu)
    pairs = g.lambda_min(mu, nu)
    text = [f"Λ^min({mu}, {nu}): {len(pairs)} pair(s)"] + [f"  ({a}, {b})" for a, b in pairs]
    json_lines = [emit("lambda_min", {"mu": str(mu), "nu": str(nu),
                                      "pairs": [[str(a), str(b)] for a, b in pairs]})]
    _out(args.format, text, json_lines)
    return 0


def cmd_cyl(args):
    g = specfile.load(args.file).graph
    if args.op == "refine":
        if len(args.items) != 2:
            raise PimsnerError("refine takes one bisection and one degree")
        result = cylsets.refine(g, specfile.parse_bisection(g, args.items[0]),
                                specfile.parse_degree(args.items[1], g.rank))
    else:
        items = [specfile.parse_bisection(g, t) for t in args.items]
        if args.op == "disjointize":
            result = cylsets.disjointize(g, items)
        elif len(items) != 2:
            raise PimsnerError(f"{args.op} takes exactly two bisections")
        elif args.op == "intersect":
            result = cylsets.intersect(g, *items)
        else:
            result = cylsets.complement(g, *items)
    disjoint = cylsets.pairwise_disjoint(g, result.members)
    text = [str(result), f"-- {len(result)} piece(s), pairwise disjoint: {disjoint}"]
    json_lines = [emit("bisections", {"op": args.op, "disjoint": disjoint,
                                      "members": [[str(b.lam), str(b.mu)] for b in result]})]
    _out(args.format, text, json_lines)
    return 0 if disjoint else 1


def cmd_check(args):
    spec, system = specfile.load_system(args.file)
    lsystem.regular_or_raise(system)
    depth = args.depth if args.depth is not None else spec.options.get("depth", config.DEPTH)
    if args.rep == "fock":
        rep = cprep.fock_truncation(system, args.top or spec.options.get("fock_top", 2))
    else:
        rep = cprep.canonical_representation(system)
    report = Report(f"check {system.name} --rep {args.rep}")
    report.merge(cprep.check_representation(rep, depth), prefix="relations.")
    for n in suite.degrees_total(system.graph.rank, args.covariance):
        report.merge(cprep.check_covariance(rep, n), prefix=f"covariance.{n}.")
    report.merge(cprep.check_giut_hypotheses(rep), prefix="gauge.")
    return _finish(report, args.format)


def cmd_conv(args):
    _, system = specfile.load_system(args.file)
    a = specfile.parse_section(system, args.a)
    b = specfile.parse_section(system, args.b)
    result = sections.convolve(a, b, normalize_result=True)
    upper_max, upper_sum = sections.norm_bounds(result)
    text = [f"f[{t.lam},{t.mu}] = {_matrix_text(t.T.matrix)}" for t in result.terms] or ["0"]
    text.append(f"-- {len(result.terms)} term(s), norm bounds max {upper_max:.6e}, sum {upper_sum:.6e}")
    json_lines = [emit("term", {"lam": str(t.lam), "mu": str(t.mu),
                                "matrix": specfile.encode_matrix(np.round(t.T.matrix, 12) + 0.0)})
                  for t in result.terms]
    json_lines.append(emit("norm_bounds", {"max": float(f"{upper_max:.6e}"), "sum": float(f"{upper_sum:.6e}")}))
    _out(args.format, text, json_lines)
    return 0


def cmd_gallery(args):
    names = list(gallery.GALLERY) if args.name == "all" else [args.name]
    paths = [gallery.write_gallery(name, args.out) for name in names]
    _out(args.format, [f"wrote {p}" for p in paths], [emit("written", {"path": p}) for p in paths])
    return 0


def cmd_report(args):
    spec, system = specfile.load_system(args.file)
    options = dict(spec.options)
    if args.depth is not None:
        options["depth"] = args.depth
    options["tol"] = config.TOL
    if args.samples is not None:
        options["samples"] = args.samples
    seed = args.seed if args.seed is not None else options.get("seed", config.SEED)
    return _finish(suite.run_suite(system, options, seed=seed), args.format)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help=f"identity tolerance (default {config.TOL:g})")
    common.add_argument("--depth", type=int, help="relation-check depth per colour")
    common.add_argument("--seed", type=int, help="seed for sampled checks")
    common.add_argument("--format", choices=["text", "json"], default=None, help="report format")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="kgraph-pimsner",
                                     description="Executable Cuntz–Pimsner algebras of k-graph systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="graph, regularity and coherence checks")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("min", parents=[common], help="minimal common extensions Λ^min(μ, ν)")
    p.add_argument("file")
    p.add_argument("mu")
    p.add_argument("nu")
    p.set_defaults(func=cmd_min)

    p = sub.add_parser("cyl", parents=[common], help="bisection algebra: λ/μ arguments")
    p.add_argument("file")
    p.add_argument("op", choices=["intersect", "complement", "refine", "disjointize"])
    p.add_argument("items", nargs="+")
    p.set_defaults(func=cmd_cyl)

    p = sub.add_parser("check", parents=[common], help="Cuntz–Pimsner relations of a representation")
    p.add_argument("file")
    p.add_argument("--rep", choices=["canonical", "fock"], default="canonical")
    p.add_argument("--top", type=int, help="Fock truncation level")
    p.add_argument("--covariance", type=int, default=2, help="largest total degree for covariance")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("conv", parents=[common], help="convolve two section literals")
    p.add_argument("file")
    p.add_argument("a", help='JSON list of [λ, μ, matrix], e.g. \'[["e1", "v", [[1]]]]\'')
    p.add_argument("b")
    p.set_defaults(func=cmd_conv)

    p = sub.add_parser("gallery", parents=[common], help="write a gallery spec file")
    p.add_argument("name", choices=sorted(gallery.GALLERY) + ["all"])
    p.add_argument("--out", default=None, help=f"output directory (default {config.GALLERY_DIR})")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("report", parents=[common], help="run the full acceptance suite")
    p.add_argument("file")
    p.add_argument("--samples", type=int, help="random samples per stage")
    p.set_defaults(func=cmd_report)
    return parser


def apply_overrides(args):
    if args.tol is not None:
        if not 0 < args.tol < 1e-3:
            raise PimsnerError(f"--tol {args.tol:g} is outside (0, 1e-3)")
        config.TOL = args.tol
        config.RANK_CUT = min(config.RANK_CUT, args.tol)
    if args.depth is not None:
        config.DEPTH = max(0, min(4, args.depth))
    if args.seed is not None:
        config.SEED = args.seed
    args.format = args.format or config.FORMAT


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        apply_overrides(args)
        return args.func(args)
    except PimsnerError as e:
        log.debug("hard error in %s", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

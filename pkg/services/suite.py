"""
The acceptance suite behind the ``report`` command.

run_suite() checks one Λ-system end to end: graph and regularity,
Λ^min against its oracle, the cylinder algebra, the section *-algebra,
the conditional expectation, the gauge grading, the canonical
representation with covariance, the product system, truncated fibres
and the negative controls. Every stage appends to one Report whose
check names are prefixed by stage.
"""
import logging

import numpy as np

import config
from services import cprep, cylsets, kgraph, lsystem, sections
from services.errors import PimsnerError
from services.reports import Report

log = logging.getLogger(__name__)

DEFAULTS = {"depth": 1, "samples": 100, "covariance_degree": 2, "fock_top": 2, "fibre_top": 2}


def degrees_total(k, n):
    """Non-zero degrees with total ≤ n."""
    return [m for m in kgraph.degrees_upto((n,) * k) if 0 < kgraph.total(m) <= n]


def paths_total(g, n):
    return [p for m in kgraph.degrees_upto((n,) * g.rank) if kgraph.total(m) <= n for p in g.all_paths(m)]


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------
def check_lambda_min(g, n=2):
    report = Report("lambda_min")
    paths = paths_total(g, n)
    bad = [(mu, nu) for mu in paths for nu in paths
           if mu.rng == nu.rng and g.lambda_min(mu, nu) != g.lambda_min_oracle(mu, nu)]
    report.add("oracle", not bad, detail=f"{len(paths)} paths" + (f", first mismatch ({bad[0][0]},{bad[0][1]})"
                                                                  if bad else ""))
    return report


def check_cylinders(g, n=1):
    """The set algebra against factorisation membership on witnesses of depth ≤ n + 1."""
    report = Report("cylinders")
    items = cylsets.bisections_upto(g, n)
    floor = kgraph.as_degree(n, g.rank)
    # witnesses at least as deep as every item: inside or disjoint, never straddling
    deep = [w for w in cylsets.witnesses_upto(g, n, kgraph.as_degree(n + 1, g.rank))
            if kgraph.le(floor, w[2].degree)]
    inside = {(i, j): cylsets.member(g, w, a) for i, w in enumerate(deep) for j, a in enumerate(items)}
    bad_meet = bad_minus = 0
    for ja, a in enumerate(items):
        for jb, b in enumerate(items):
            both = cylsets.intersect(g, a, b).members
            minus = cylsets.complement(g, a, b).members
            for i, w in enumerate(deep):
                in_a, in_b = inside[i, ja], inside[i, jb]
                bad_meet += cylsets.member_union(g, w, both) != (in_a and in_b)
                bad_minus += cylsets.member_union(g, w, minus) != (in_a and not in_b)
    report.add("intersect", bad_meet == 0, detail=f"{bad_meet} disagreements over {len(deep)} witnesses")
    report.add("complement", bad_minus == 0, detail=f"{bad_minus} disagreements over {len(deep)} witnesses")
    pieces = cylsets.disjointize(g, items)
    report.add("disjointize.disjoint", cylsets.pairwise_disjoint(g, pieces), detail=f"{len(pieces)} pieces")
    mismatches = 0
    for w in cylsets.witnesses_upto(g, 0, kgraph.as_degree(n + 1, g.rank)):
        if cylsets.member_union(g, w, items) != cylsets.member_union(g, w, pieces.members):
            mismatches += 1
    report.add("disjointize.same_union", mismatches == 0, detail=f"{mismatches} witnesses disagree")
    return report


def check_section_algebra(system, rng, samples, tol):
    report = Report("sections")
    assoc = invol = 0.0
    for _ in range(samples):
        a, b, c = (sections.random_section(system, rng) for _ in range(3))
        assoc = max(assoc, sections.distance((a @ b) @ c, a @ (b @ c)))
        invol = max(invol, sections.distance((a @ b).H, b.H @ a.H))
    report.residual("associative", assoc, tol)
    report.residual("involution", invol, tol)
    return report


def check_expectation(system, rng, samples, tol):
    report = Report("expectation")
    idem = 0.0
    low = 0.0
    faithful = True
    for _ in range(samples):
        a = sections.random_section(system, rng)
        e = sections.expectation(a)
        idem = max(idem, sections.distance(sections.expectation(e), e))
        aa = a.H @ a
        ok, m = sections.core_positive(aa, tol)
        low = min(low, m)
        if sections.is_zero(sections.expectation(aa), tol) and not sections.is_zero(a, tol):
            faithful = False
    report.residual("idempotent", idem, tol)
    report.add("positive", low >= -tol, residual=max(0.0, -low), detail=f"min eigenvalue {low:.3e}")
    report.add("faithful", faithful)
    return report


def check_gauge(system, rng, samples, tol):
    report = Report("gauge")
    worst_mult = worst_fix = 0.0
    for z in cprep.torus_points(system.graph.rank):
        for _ in range(max(1, samples // 4)):
            a, b = sections.random_section(system, rng), sections.random_section(system, rng)
            lhs = sections.gauge(z, a @ b)
            rhs = sections.gauge(z, a) @ sections.gauge(z, b)
            worst_mult = max(worst_mult, sections.distance(lhs, rhs))
            e = sections.expectation(a)
            worst_fix = max(worst_fix, sections.distance(sections.gauge(z, e), e))
    report.residual("multiplicative", worst_mult, tol)
    report.residual("fixes_expectation", worst_fix, tol)
    return report


def check_controls(system, options, tol):
    """Injected faults must be detected; a control that passes is a failed check."""
    report = Report("controls")
    g = system.graph
    canonical = cprep.canonical_representation(system)
    for eid in sorted(g.edges):
        caught = not cprep.check_representation(cprep.corrupt(canonical, eid), depth=1, tol=tol).ok
        report.add(f"corrupt[{eid}].detected", caught)
    fock = cprep.fock_truncation(system, options["fock_top"])
    n = kgraph.unit(g.rank, 1)
    covariance = cprep.check_covariance(fock, n)
    floor = 0.5  # half the norm of a vertex unit
    worst = covariance.max_residual("covariance")
    report.add("fock.covariance_fails", worst >= floor, residual=worst, detail=f"floor {floor:.3f}")
    zero = cprep.zero_representation(system)
    report.add("zero.not_injective", not cprep.check_giut_hypotheses(zero, samples=2).ok)
    return report


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------
def run_suite(system, options=None, seed=None):
    options = {**DEFAULTS, **(options or {})}
    tol = float(options.get("tol", config.TOL))
    seed = config.SEED if seed is None else seed
    rng = np.random.default_rng(seed)
    g = system.graph
    samples = int(options["samples"])
    report = Report(f"report {system.name}")

    report.merge(kgraph.verify_kgraph(g), prefix="graph.")
    regular = lsystem.check_regular(system, tol)
    report.merge(regular, prefix="regular.")
    if not report.ok:
        log.warning("%r is not regular; skipping the remaining stages", system)
        return report
    report.merge(lsystem.check_coherence(system, tol), prefix="coherence.")
    report.merge(check_lambda_min(g), prefix="lambda_min.")
    report.merge(check_cylinders(g), prefix="cylinders.")
    report.merge(check_section_algebra(system, rng, samples, tol), prefix="sections.")
    report.merge(check_expectation(system, rng, samples, tol), prefix="expectation.")
    report.merge(check_gauge(system, rng, samples, tol), prefix="gauge.")

    canonical = cprep.canonical_representation(system)
    report.merge(cprep.check_representation(canonical, options["depth"], tol), prefix="canonical.")
    for n in degrees_total(g.rank, options["covariance_degree"]):
        report.merge(cprep.check_covariance(canonical, n), prefix=f"canonical.{n}.")
    report.merge(cprep.check_giut_hypotheses(canonical, tol=tol), prefix="canonical.")

    for n in degrees_total(g.rank, 1):
        report.merge(lsystem.check_fibre(system, n, tol, rng=rng), prefix=f"product.{n}.")
        report.merge(cprep.check_product_covariance(canonical, n), prefix=f"product.{n}.")
    one = kgraph.unit(g.rank, 1)
    report.merge(lsystem.check_associativity(system, one, one, one, rng, tol=tol), prefix="product.")

    try:
        x = g.periodic_point()
    except PimsnerError as e:
        report.violation("fibres.base", str(e))
    else:
        fibre = cprep.fibre_E(system, x, options["fibre_top"])
        report.merge(cprep.check_fibre_stages(fibre, tol), prefix="fibres.")
        report.merge(cprep.check_fell_axioms(fibre, rng, samples=samples, tol=tol), prefix="fibres.")

    report.merge(check_controls(system, options, tol), prefix="controls.")
    log.info("%s: %s", report.title, "ok" if report.ok else f"{len(report.failures())} failures")
    return report

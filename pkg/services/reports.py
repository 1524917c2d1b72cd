"""
Verification reports: named checks with residuals, rendered as text or JSON lines.

Every checker in services/ returns a Report instead of raising on a
mathematical failure. Rendering is deterministic: checks keep insertion
order and floats are printed with a fixed format, so identical inputs
produce byte-identical output.
"""
import json
from dataclasses import dataclass


@dataclass
class Check:
    name: str
    ok: bool
    residual: float = None
    detail: str = ""


class Report:
    def __init__(self, title):
        self.title = title
        self.checks = []

    def add(self, name, ok, residual=None, detail=""):
        self.checks.append(Check(name, bool(ok), None if residual is None else float(residual), detail))
        return self

    def residual(self, name, value, tol, detail=""):
        """Record a toleranced identity: passes when ``value < tol``."""
        return self.add(name, value < tol, value, detail)

    def violation(self, name, detail):
        return self.add(name, False, detail=detail)

    def merge(self, other, prefix=""):
        for c in other.checks:
            name = f"{prefix}{c.name}" if prefix else c.name
            self.checks.append(Check(name, c.ok, c.residual, c.detail))
        return self

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.ok]

    def max_residual(self, prefix=""):
        values = [c.residual for c in self.checks if c.residual is not None and c.name.startswith(prefix)]
        return max(values) if values else 0.0

    def find(self, prefix):
        return [c for c in self.checks if c.name.startswith(prefix)]

    def __bool__(self):
        return self.ok


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------
def _fmt(value):
    return "-" if value is None else f"{value:.3e}"


def render_text(report):
    lines = [f"== {report.title}"]
    for c in report.checks:
        status = "ok  " if c.ok else "FAIL"
        line = f"  [{status}] {c.name}  residual={_fmt(c.residual)}"
        if c.detail:
            line += f"  {c.detail}"
        lines.append(line)
    failed = len(report.failures())
    verdict = "PASS" if report.ok else "FAIL"
    lines.append(f"-- {verdict}: {len(report.checks) - failed}/{len(report.checks)} checks passed, "
                 f"max residual {_fmt(report.max_residual())}")
    return "\n".join(lines)


def emit(msg_type, payload):
    """One JSON line; keys sorted so the output is stable."""
    return json.dumps({"type": msg_type, **payload}, sort_keys=True)


def render_json(report):
    lines = [emit("report", {"title": report.title})]
    for c in report.checks:
        lines.append(emit("check", {
            "name": c.name,
            "ok": c.ok,
            "residual": None if c.residual is None else float(f"{c.residual:.6e}"),
            "detail": c.detail,
        }))
    lines.append(emit("summary", {
        "title": report.title,
        "ok": report.ok,
        "checks": len(report.checks),
        "failed": len(report.failures()),
        "max_residual": float(f"{report.max_residual():.6e}"),
    }))
    return "\n".join(lines)


def render(report, fmt="text"):
    return render_json(report) if fmt == "json" else render_text(report)

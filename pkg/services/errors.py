"""
Exception hierarchy.

Hard errors only: malformed input, non-composable arguments, mismatched
algebras. Mathematical failures (a square that is not a bijection, a
representation that violates a relation) are reported, never raised.
"""


class PimsnerError(Exception):
    """Base class for every error raised by the services package."""


class GraphError(PimsnerError):
    """Malformed k-graph data, non-composable paths or degree mismatches."""


class ModuleError(PimsnerError):
    """Algebra mismatch or a module that fails definiteness."""


class LambdaSystemError(PimsnerError):
    """A presentation that cannot be assembled into a Λ-system."""


class SectionError(PimsnerError):
    """Sections over different systems, or a witness too shallow to evaluate."""


class SpecFileError(PimsnerError):
    """A spec file that fails to parse; ``location`` points into the document."""

    def __init__(self, message, location=""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)

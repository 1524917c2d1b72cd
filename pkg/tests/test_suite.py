"""
The staged acceptance suite behind ``report``.
"""
import numpy as np
import pytest

from services import cylsets, fdcstar, gallery, lsystem, suite


def test_degrees_total():
    assert suite.degrees_total(2, 1) == [(0, 1), (1, 0)]
    assert len(suite.degrees_total(2, 2)) == 5
    assert suite.degrees_total(1, 3) == [(1,), (2,), (3,)]


def test_paths_total_counts(b2_system):
    # 1 + 2 + 4 paths of length ≤ 2 in B_2
    assert len(suite.paths_total(b2_system.graph, 2)) == 7


class TestStages:
    def test_lambda_min(self, system):
        assert suite.check_lambda_min(system.graph).ok

    def test_cylinders(self, system):
        report = suite.check_cylinders(system.graph)
        assert report.ok, report.failures()

    def test_cylinders_check_the_set_operations(self, b2_system):
        names = [c.name for c in suite.check_cylinders(b2_system.graph).checks]
        assert names[:2] == ["intersect", "complement"]

    def test_broken_complement_caught(self, b2_system, monkeypatch):
        monkeypatch.setattr(cylsets, "complement", lambda g, a, b: cylsets.BisectionUnion([]))
        report = suite.check_cylinders(b2_system.graph)
        assert "complement" in [c.name for c in report.failures()]
        assert "intersect" not in [c.name for c in report.failures()]

    def test_controls_detect_faults(self, b2_system):
        report = suite.check_controls(b2_system, suite.DEFAULTS, 1e-9)
        assert report.ok, report.failures()
        assert [c.name for c in report.find("corrupt")] == ["corrupt[e1].detected", "corrupt[e2].detected"]


class TestRunSuite:
    def test_trivial_b2(self, b2_system):
        report = suite.run_suite(b2_system, {"samples": 2}, seed=7)
        assert report.ok, report.failures()
        stages = {c.name.split(".")[0] for c in report.checks}
        assert {"graph", "regular", "coherence", "sections", "canonical", "fibres", "controls"} <= stages

    def test_same_seed_same_report(self, b2_system):
        first = suite.run_suite(b2_system, {"samples": 2}, seed=7)
        second = suite.run_suite(b2_system, {"samples": 2}, seed=7)
        assert [(c.name, c.ok, c.residual) for c in first.checks] == \
               [(c.name, c.ok, c.residual) for c in second.checks]

    def test_stops_when_not_regular(self):
        hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        maps = {"b": lambda a: np.diag([1, 1j]) @ a @ np.diag([1, -1j]),
                "r": lambda a: hadamard @ a @ hadamard}
        system = lsystem.endomorphism_system(gallery.graph_tk(2), fdcstar.FDAlgebra([2]), maps, name="bad")
        report = suite.run_suite(system, {"samples": 1})
        assert not report.ok
        assert not report.find("coherence.")
        assert not report.find("canonical.")


@pytest.mark.parametrize("name", ["sse", "twisted-o2"])
def test_gallery_passes(systems, name):
    report = suite.run_suite(systems[name], {"samples": 2})
    assert report.ok, report.failures()

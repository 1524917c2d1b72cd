"""
Command surface: exit codes and deterministic output.
"""
import json

import pytest

import app
import config
from services import gallery, specfile


@pytest.fixture(autouse=True)
def _restore_config(monkeypatch):
    for name in ("TOL", "RANK_CUT", "DEPTH", "SEED", "FORMAT"):
        monkeypatch.setattr(config, name, getattr(config, name))


@pytest.fixture
def files(tmp_path):
    for name in ("trivial-b2", "twisted-o2"):
        gallery.write_gallery(name, str(tmp_path))
    return tmp_path


def _run(capsys, *argv):
    code = app.main([str(a) for a in argv])
    return code, capsys.readouterr().out


class TestVerify:
    def test_gallery_then_verify(self, files, capsys):
        code, out = _run(capsys, "verify", files / "trivial-b2.json")
        assert code == 0
        assert "PASS" in out

    def test_gallery_all(self, tmp_path, capsys):
        code, out = _run(capsys, "gallery", "all", "--out", tmp_path)
        assert code == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == sorted(f"{n}.json" for n in gallery.GALLERY)

    def test_broken_square(self, tmp_path, capsys):
        doc = specfile.dump_document(gallery.trivial_presentation(gallery.graph_tk(2), name="t2"))
        doc["graph"]["squares"] = []
        path = specfile.save(str(tmp_path / "t2.json"), doc)
        code, out = _run(capsys, "verify", path)
        assert code == 1
        assert "missing pair (b,r)" in out

    def test_malformed_file_is_hard_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{\"graph\": ")
        assert app.main(["verify", str(path)]) == 2
        assert "error:" in capsys.readouterr().err


class TestPathCommands:
    def test_min(self, files, capsys):
        code, out = _run(capsys, "min", files / "trivial-b2.json", "e1", "e1.e2")
        assert code == 0
        assert "(e2, v)" in out

    def test_min_not_composable(self, files, capsys):
        code, _ = _run(capsys, "min", files / "trivial-b2.json", "e1", "e3")
        assert code == 2

    def test_cyl_complement(self, files, capsys):
        code, out = _run(capsys, "cyl", files / "trivial-b2.json", "complement", "v/v", "e1/e1")
        assert code == 0
        assert "Z(e2,e2)" in out

    def test_cyl_refine(self, files, capsys):
        code, out = _run(capsys, "cyl", files / "trivial-b2.json", "refine", "v/v", "1")
        assert code == 0
        assert "2 piece(s)" in out

    def test_cyl_arity(self, files, capsys):
        code, _ = _run(capsys, "cyl", files / "trivial-b2.json", "intersect", "v/v")
        assert code == 2


class TestConv:
    def test_product(self, files, capsys):
        code, out = _run(capsys, "conv", files / "trivial-b2.json", '[["e1", "v", [[1]]]]', '[["v", "e1", [[1]]]]')
        assert code == 0
        assert out.startswith("f[e1,e1]")

    def test_json_deterministic(self, files, capsys):
        argv = ("conv", files / "trivial-b2.json", "--format", "json",
                '[["e1", "v", [[2]]], ["v", "v", [[1]]]]', '[["v", "e2", [[1]]]]')
        first = _run(capsys, *argv)
        second = _run(capsys, *argv)
        assert first == second
        lines = [json.loads(line) for line in first[1].splitlines()]
        assert lines[-1]["type"] == "norm_bounds"


class TestCheck:
    def test_canonical(self, files, capsys):
        code, out = _run(capsys, "check", files / "twisted-o2.json", "--covariance", "1")
        assert code == 0
        assert "PASS" in out

    def test_fock_fails_covariance(self, files, capsys):
        code, out = _run(capsys, "check", files / "trivial-b2.json", "--rep", "fock", "--top", "2",
                         "--covariance", "1")
        assert code == 1
        assert "FAIL" in out

    def test_json_report(self, files, capsys):
        code, out = _run(capsys, "check", files / "trivial-b2.json", "--format", "json", "--covariance", "1")
        lines = [json.loads(line) for line in out.splitlines()]
        assert lines[-1]["type"] == "summary"
        assert lines[-1]["ok"] is (code == 0)

    def test_tol_out_of_range(self, files, capsys):
        code, _ = _run(capsys, "check", files / "trivial-b2.json", "--tol", "0.5")
        assert code == 2


class TestReport:
    def test_trivial_b2(self, files, capsys):
        code, out = _run(capsys, "report", files / "trivial-b2.json", "--samples", "2")
        assert code == 0, out
        assert "controls.fock.covariance_fails" in out

    def test_deterministic(self, files, capsys):
        argv = ("report", files / "trivial-b2.json", "--samples", "2", "--format", "json")
        assert _run(capsys, *argv) == _run(capsys, *argv)

"""
Spec-file parsing and writing.
"""
import json
import os

import pytest

from services import gallery, lsystem, sections, specfile
from services.errors import SpecFileError


def _doc(name="trivial-b2"):
    return specfile.dump_document(gallery.presentation(name), gallery.OPTIONS)


def _error(doc):
    with pytest.raises(SpecFileError) as info:
        specfile.parse_document(doc)
    return info.value


class TestGalleryFiles:
    @pytest.mark.parametrize("name", sorted(gallery.GALLERY))
    def test_written_file_loads_regular(self, name, tmp_path):
        path = gallery.write_gallery(name, str(tmp_path))
        assert path == os.path.join(str(tmp_path), f"{name}.json")
        spec, system = specfile.load_system(path)
        assert spec.name == name
        assert spec.options["depth"] == 1
        report = lsystem.check_regular(system)
        assert report.ok, report.failures()

    def test_save_is_atomic(self, tmp_path):
        path = specfile.save(str(tmp_path / "sub" / "b2.json"), _doc())
        assert os.path.exists(path)
        assert not os.path.exists(path + ".tmp")

    def test_save_is_deterministic(self, tmp_path):
        a = specfile.save(str(tmp_path / "a.json"), _doc("twisted-o2"))
        b = specfile.save(str(tmp_path / "b.json"), _doc("twisted-o2"))
        with open(a) as fa, open(b) as fb:
            assert fa.read() == fb.read()

    def test_graph_by_relative_path(self, tmp_path):
        doc = _doc()
        specfile.save(str(tmp_path / "graphs" / "b2.json"), {"graph": doc["graph"]})
        doc["graph"] = "graphs/b2.json"
        path = specfile.save(str(tmp_path / "system.json"), doc)
        spec = specfile.load(path)
        assert sorted(spec.graph.edges) == ["e1", "e2"]


class TestErrors:
    def test_missing_edges(self):
        doc = _doc()
        del doc["graph"]["edges"]
        assert _error(doc).location == "/graph"

    def test_bad_complex_literal(self):
        doc = _doc()
        doc["system"]["modules"]["e1"]["gram"][0][0][0][0] = "one"
        assert _error(doc).location == "/system/modules/e1/gram/0/0/0/0"

    def test_boolean_is_not_a_number(self):
        with pytest.raises(SpecFileError):
            specfile.parse_complex(True, "/x")

    def test_wrong_shape(self):
        doc = _doc()
        doc["system"]["modules"]["e1"]["left"][0] = [[1, 0], [0, 1]]
        err = _error(doc)
        assert err.location == "/system/modules/e1/left/0"
        assert "shape" in str(err)

    def test_unknown_square(self):
        doc = _doc()
        doc["system"]["squares"] = [{"f": "e1", "g": "e2", "matrix": [[1]]}]
        assert _error(doc).location == "/system/squares/0"

    def test_missing_algebra(self):
        doc = _doc()
        del doc["system"]["algebras"]["v"]
        assert _error(doc).location == "/system/algebras"

    def test_bad_format(self):
        doc = _doc()
        doc["format"] = "something-else"
        assert _error(doc).location == "/format"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{")
        with pytest.raises(SpecFileError) as info:
            specfile.load(str(path))
        assert info.value.location.startswith(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecFileError):
            specfile.load(str(tmp_path / "nope.json"))

    def test_presentation_error_located(self, tmp_path):
        doc = _doc("zk-crossed")
        doc["system"]["squares"] = []
        path = specfile.save(str(tmp_path / "zk.json"), doc)
        with pytest.raises(SpecFileError) as info:
            specfile.load_system(path)
        assert info.value.location == "/system"


class TestLiterals:
    def test_complex(self):
        assert specfile.parse_complex([1, -2], "/") == 1 - 2j
        assert specfile.parse_complex(3, "/") == 3
        assert specfile.encode_complex(1j) == [0.0, 1.0]

    def test_ragged_matrix(self):
        with pytest.raises(SpecFileError):
            specfile.parse_matrix([[1, 2], [3]], "/m")

    def test_degree(self):
        assert specfile.parse_degree("1", 2) == (1, 1)
        assert specfile.parse_degree("1,0", 2) == (1, 0)
        with pytest.raises(SpecFileError):
            specfile.parse_degree("a", 2)
        with pytest.raises(SpecFileError):
            specfile.parse_degree("1,0,0", 2)

    def test_bisection(self, b2_system):
        g = b2_system.graph
        b = specfile.parse_bisection(g, "e1/v")
        assert (b.lam, b.mu) == (g.edge_path("e1"), g.vertex("v"))
        with pytest.raises(SpecFileError):
            specfile.parse_bisection(g, "e1")
        with pytest.raises(SpecFileError):
            specfile.parse_bisection(g, "e3/v")

    def test_section(self, b2_system):
        a = sections.normalize(specfile.parse_section(b2_system, json.dumps([["e1", "v", [[1]]], ["e1", "v", [[2]]]])))
        g = b2_system.graph
        assert len(a.terms) == 1
        assert a.terms[0].lam == g.edge_path("e1")
        assert a.terms[0].T.matrix[0, 0] == pytest.approx(3.0)

    def test_section_errors(self, b2_system):
        with pytest.raises(SpecFileError):
            specfile.parse_section(b2_system, "[")
        with pytest.raises(SpecFileError):
            specfile.parse_section(b2_system, json.dumps([["e1", "v"]]))
        with pytest.raises(SpecFileError):
            specfile.parse_section(b2_system, json.dumps([["e1", "v", [[1, 2]]]]))

    def test_section_needs_common_source(self, systems):
        s = systems["sse"]
        with pytest.raises(SpecFileError):
            specfile.parse_section(s, json.dumps([["e", "f", [[0, 0]]]]))

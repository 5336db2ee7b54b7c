"""End-to-end tests of the command line and the JSON file formats."""

import json

import pytest

from symdimer.cli_io import (
    emit_json,
    main,
    model_from_doc,
    model_to_doc,
    render_svg,
    render_tikz,
)
from symdimer.construct import CATALOG


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def group_file(tmp_path, name, generators):
    return write_json(tmp_path / name, {"generators": generators})


def polygon_file(tmp_path, name, corners):
    return write_json(tmp_path / name, {"corners": corners})


def model_file(tmp_path, name, model, meta=None):
    path = tmp_path / name
    path.write_text(emit_json(model_to_doc(model, meta)))
    return str(path)


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_classify_group_names_a_rotation(tmp_path, capsys):
    path = group_file(tmp_path, "g.json", [[[0, -1], [1, 0]]])
    code, out, _ = run(capsys, ["classify-group", "--in", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["tag"] == "C4"
    assert doc["order"] == 4


def test_classify_group_identity_only(tmp_path, capsys):
    path = group_file(tmp_path, "g.json", [[[1, 0], [0, 1]]])
    code, out, _ = run(capsys, ["classify-group", "--in", path])
    assert code == 0
    assert json.loads(out)["tag"] == "TRIVIAL"


def test_classify_group_rejects_infinite_order(tmp_path, capsys):
    path = group_file(tmp_path, "g.json", [[[1, 1], [0, 1]]])
    code, _, err = run(capsys, ["classify-group", "--in", path])
    assert code == 2
    assert "not finite" in err


def test_malformed_json_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{broken")
    code, _, err = run(capsys, ["classify-group", "--in", str(path)])
    assert code == 1
    assert "not valid JSON" in err


def test_wrong_schema_exits_one(tmp_path, capsys):
    path = write_json(tmp_path / "g.json", {"generators": [[[1, 0]]]})
    code, _, err = run(capsys, ["classify-group", "--in", path])
    assert code == 1
    assert "2x2" in err


def test_synthesize_writes_a_verifiable_model(tmp_path, capsys):
    group = group_file(tmp_path, "g.json", [[[-1, 0], [0, -1]]])
    polygon = polygon_file(tmp_path, "d.json", [[1, 1], [-1, 1], [-1, -1], [1, -1]])
    out = tmp_path / "model.json"
    code, summary, _ = run(
        capsys,
        ["synthesize", "--polygon", polygon, "--group", group, "--out", str(out)],
    )
    assert code == 0
    assert json.loads(summary)["verified"] is True
    code, report, _ = run(
        capsys,
        ["verify", "--model", str(out), "--group", group, "--polygon", polygon],
    )
    assert code == 0
    doc = json.loads(report)
    assert doc["ok"] is True
    assert doc["symmetric"] is True
    assert doc["polygon_match"] is True


def test_synthesize_rejects_a_non_invariant_polygon(tmp_path, capsys):
    group = group_file(tmp_path, "g.json", [[[0, -1], [1, 0]]])
    polygon = polygon_file(tmp_path, "d.json", [[0, 0], [1, 0], [0, 1]])
    out = tmp_path / "model.json"
    code, _, err = run(
        capsys,
        ["synthesize", "--polygon", polygon, "--group", group, "--out", str(out)],
    )
    assert code == 3
    assert "not invariant" in err
    assert not out.exists()


def test_synthesize_matches_the_sixfold_catalog_model(tmp_path, capsys):
    group = group_file(
        tmp_path, "g.json", [[[1, -1], [1, 0]], [[0, 1], [1, 0]]]
    )
    polygon = polygon_file(
        tmp_path,
        "d.json",
        [[1, 0], [1, 1], [0, 1], [-1, 0], [-1, -1], [0, -1]],
    )
    out = tmp_path / "model.json"
    code, summary, _ = run(
        capsys,
        ["synthesize", "--polygon", polygon, "--group", group, "--out", str(out)],
    )
    assert code == 0
    doc = json.loads(summary)
    catalog = CATALOG["dodecagon"]()
    assert doc["tag"] == "D12"
    assert doc["nodes"] == len(catalog.nodes)
    assert doc["edges"] == len(catalog.edges)


def test_synthesize_side_outputs_are_deterministic(tmp_path, capsys):
    group = group_file(tmp_path, "g.json", [[[-1, 0], [0, -1]]])
    polygon = polygon_file(tmp_path, "d.json", [[1, 1], [-1, 1], [-1, -1], [1, -1]])
    results = []
    for tag in ("a", "b"):
        out = tmp_path / f"model_{tag}.json"
        trace = tmp_path / f"trace_{tag}.json"
        svg = tmp_path / f"pic_{tag}.svg"
        tikz = tmp_path / f"pic_{tag}.tex"
        code, _, _ = run(
            capsys,
            [
                "synthesize",
                "--polygon", polygon,
                "--group", group,
                "--out", str(out),
                "--trace", str(trace),
                "--svg", str(svg),
                "--tikz", str(tikz),
            ],
        )
        assert code == 0
        results.append(
            (out.read_text(), trace.read_text(), svg.read_text(), tikz.read_text())
        )
    assert results[0] == results[1]
    svg_text = results[0][2]
    assert svg_text.startswith('<svg xmlns="http://www.w3.org/2000/svg" version="1.1"')
    assert 'fill="black"' in svg_text
    assert 'fill="white"' in svg_text
    assert "\\begin{tikzpicture}" in results[0][3]
    trace_doc = json.loads(results[0][1])
    assert trace_doc["trace"][0]["step"] == "classify"


def test_verify_accepts_a_catalog_model_alone(tmp_path, capsys):
    path = model_file(tmp_path, "model.json", CATALOG["octagon"]())
    code, out, _ = run(capsys, ["verify", "--model", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["valid_dimer"] is True
    assert doc["consistent"] is True
    assert doc["char_matches_zigzag"] is True
    assert doc["symmetric"] is None


def test_verify_reports_the_first_failing_check(tmp_path, capsys):
    model = CATALOG["octagon"]()
    doc = model_to_doc(model)
    doc["edges"][0]["offset"] = [doc["edges"][0]["offset"][0] + 1, doc["edges"][0]["offset"][1]]
    path = write_json(tmp_path / "broken.json", doc)
    code, out, err = run(capsys, ["verify", "--model", path])
    assert code == 4
    assert json.loads(out)["ok"] is False
    assert "valid_dimer" in err


def test_verify_survives_a_dropped_edge(tmp_path, capsys):
    model = CATALOG["octagon"]()
    doc = model_to_doc(model)
    doc["edges"] = doc["edges"][:-1]
    path = write_json(tmp_path / "broken.json", doc)
    code, out, _ = run(capsys, ["verify", "--model", path])
    doc = json.loads(out)
    assert code in (0, 4)
    assert isinstance(doc["notes"], list)


def test_model_documents_round_trip(tmp_path):
    for name in CATALOG:
        model = CATALOG[name]()
        text = emit_json(model_to_doc(model, {"name": name}))
        parsed, meta = model_from_doc(json.loads(text))
        assert parsed == model
        assert meta == {"name": name}
        assert emit_json(model_to_doc(parsed, meta)) == text


def test_model_documents_reduce_rationals():
    doc = model_to_doc(CATALOG["hexagonal"]())
    doc["nodes"][0]["pos"] = [[2, 4], [0, -1]]
    model, _ = model_from_doc(doc)
    rebuilt = model_to_doc(model)
    assert rebuilt["nodes"][0]["pos"] == [[1, 2], [0, 1]]


def test_quiver_counts_for_the_small_models(tmp_path, capsys):
    hex_path = model_file(tmp_path, "hex.json", CATALOG["hexagonal"]())
    code, out, _ = run(capsys, ["quiver", "--model", hex_path])
    assert code == 0
    doc = json.loads(out)
    assert (len(doc["vertices"]), len(doc["arrows"]), len(doc["relations"])) == (1, 3, 3)
    sq_path = model_file(tmp_path, "sq.json", CATALOG["square"]())
    code, out, _ = run(capsys, ["quiver", "--model", sq_path])
    assert code == 0
    doc = json.loads(out)
    assert (len(doc["vertices"]), len(doc["arrows"]), len(doc["relations"])) == (2, 4, 4)


def test_quiver_twist_with_the_trivial_group_keeps_all_signs(tmp_path, capsys):
    meta = {"generators": [[[1, 0], [0, 1]]]}
    path = model_file(tmp_path, "hex.json", CATALOG["hexagonal"](), meta)
    code, out, _ = run(capsys, ["quiver", "--model", path, "--twist"])
    assert code == 0
    doc = json.loads(out)
    assert doc["twist"]["certificate_ok"] is True
    for element in doc["twist"]["elements"]:
        assert all(a["sign"] == 1 for a in element["arrows"])


def test_quiver_twist_flips_signs_under_a_reflection(tmp_path, capsys):
    meta = {"generators": [[[1, 0], [0, -1]]]}
    path = model_file(tmp_path, "oct.json", CATALOG["octagon"](), meta)
    code, out, _ = run(capsys, ["quiver", "--model", path, "--twist"])
    assert code == 0
    doc = json.loads(out)
    assert doc["twist"]["certificate_ok"] is True
    matched = set(doc["twist"]["matching"])
    refl = next(e for e in doc["twist"]["elements"] if e["det"] == -1)
    for arrow in refl["arrows"]:
        assert arrow["sign"] == (-1 if arrow["id"] in matched else 1)


def test_quiver_twist_requires_group_metadata(tmp_path, capsys):
    path = model_file(tmp_path, "hex.json", CATALOG["hexagonal"]())
    code, _, err = run(capsys, ["quiver", "--model", path, "--twist"])
    assert code == 1
    assert "metadata" in err


def test_matchings_of_the_unit_hexagonal_model(tmp_path, capsys):
    path = model_file(tmp_path, "hex.json", CATALOG["hexagonal"]())
    code, out, _ = run(capsys, ["matchings", "--model", path])
    assert code == 0
    doc = json.loads(out)
    assert doc["count"] == 3
    assert len(doc["polygon_from_matchings"]) == 3
    assert doc["polygons_match"] is True
    assert all(len(m["edges"]) == 1 for m in doc["matchings"])


def test_matchings_cap_exceeded(tmp_path, capsys):
    path = model_file(tmp_path, "sq.json", CATALOG["square"]())
    code, _, err = run(capsys, ["matchings", "--model", path, "--cap", "1"])
    assert code == 6
    assert "cap exceeded" in err


def test_matchings_output_is_deterministic(tmp_path, capsys):
    path = model_file(tmp_path, "oct.json", CATALOG["octagon"]())
    outputs = []
    for _ in range(2):
        code, out, _ = run(capsys, ["matchings", "--model", path])
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_renderers_cover_the_margin_with_translates():
    model = CATALOG["square"]()
    svg = render_svg(model)
    assert svg.count("<circle") == 9 * len(model.nodes)
    assert svg.count("<line") == 9 * len(model.edges)
    tikz = render_tikz(model)
    assert tikz.count("circle (0.06)") == 9 * len(model.nodes)

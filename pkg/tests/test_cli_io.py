import json

import pytest
from hypothesis import given, settings, strategies as st

from painleve_stokes.cli_io import (RenderSpec, UsageError, canonical, format_complex, main,
                                    parse_complex, render_svg)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=100)
@given(finite, finite)
def test_complex_literal_round_trip(a, b):
    z = complex(a, b)
    w = parse_complex(format_complex(z))
    assert abs(w - complex(float(f"{a:.12g}"), float(f"{b:.12g}"))) <= 1e-12 * max(1, abs(z))


@pytest.mark.parametrize("s,z", [("0+1i", 1j), ("-2.5-0.5i", -2.5 - 0.5j), ("1e-3+2E2i", 1e-3 + 200j),
                                 ("-6", -6 + 0j)])
def test_complex_literal_accepts(s, z):
    assert parse_complex(s) == z


@pytest.mark.parametrize("s", ["1i", "i", "1+i", "1+2j", "1 + 2i", "abc", ""])
def test_complex_literal_rejects(s):
    with pytest.raises(UsageError):
        parse_complex(s)


def test_canonical_rounds_to_12_digits():
    d = canonical({"a": 1 / 3, "z": 2j / 3, "l": [0.1 + 0.2]})
    assert d == {"a": 0.333333333333, "z": [0.0, 0.666666666667], "l": [0.3]}


def test_render_spec_rejects_empty_viewport():
    with pytest.raises(ValueError):
        RenderSpec(half_width=0)


def test_graph_json_svg_round_trip(tmp_path, capsys):
    js, svg = tmp_path / "g.json", tmp_path / "g.svg"
    assert main(["graph", "--eq", "P_II", "--param", "c=0+1i", "--uplane", "--svg", str(svg),
                 "--out", str(js)]) == 0
    payload = json.loads(js.read_text())
    assert len(payload["certified_segments"]) == 3
    assert svg.read_text() == render_svg(json.loads(js.read_text()))
    assert svg.read_text().count('class="segment"') == 3
    svg2 = tmp_path / "g2.svg"
    assert main(["render", str(js), "--svg", str(svg2)]) == 0
    assert svg2.read_bytes() == svg.read_bytes()


def test_sl_graph_of_P1(capsys):
    assert main(["graph", "--eq", "P_I", "--sl", "--t", "-6"]) == 0
    d = json.loads(capsys.readouterr().out)
    kinds = {tp["kind"]: tp["loc"] for tp in d["turning_points"]}
    assert kinds["double"] == [1.0, 0.0] or abs(kinds["double"][0] - 1) < 1e-9
    assert abs(kinds["simple"][0] + 2) < 1e-9


def test_exit_codes(capsys):
    assert main(["graph", "--eq", "P_II", "--param", "c=1i"]) == 2
    capsys.readouterr()
    assert main(["graph", "--eq", "P_II", "--param", "c=0+0i", "--uplane"]) == 3
    err = capsys.readouterr().err
    assert "computation error" in err and "{" not in err
    with pytest.raises(SystemExit) as exc:
        main(["verify", "no-such-suite"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["graph", "--param", "c=0+1i"])
    assert exc.value.code == 2


def test_config_merges_under_cli(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eq": "P_II", "param": ["c=0+2i"]}))
    assert main(["period", "--config", str(cfg)]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert len(lines) == 3 and all(abs(abs(l["period"][0]) - 4 * 3.14159265359) < 1e-9 for l in lines)
    assert main(["period", "--config", str(cfg), "--param", "c=0+1i"]) == 0
    lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert all(abs(abs(l["period"][0]) - 2 * 3.14159265359) < 1e-9 for l in lines)


def test_scan_and_wkb_commands(capsys):
    assert main(["scan", "--eq", "P_II", "--param", "c", "--line", "0+0.2i:0+3i:4"]) == 0
    recs = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert [r["count"] for r in recs] == [3, 3, 3, 3]
    assert main(["wkb", "--potential", "weber", "--c", "0+1i", "--grades", "6", "--residue-at", "inf"]) == 0
    res = json.loads(capsys.readouterr().out)["residues"]
    assert abs(abs(complex(*res[0]["residue"])) - 1) < 1e-10
    assert all(abs(complex(*r["residue"])) < 1e-10 for r in res[1:])


def test_verify_residues_exit_code(capsys):
    assert main(["verify", "residues", "--eq", "P_VI", "--seed", "7"]) == 0
    assert main(["verify", "residues", "--eq", "P_V", "--seed", "7"]) == 1

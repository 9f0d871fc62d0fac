import json

import pytest

from qgk import cli, corep, fock

DIAGRAM_T = "0.8090169943749475+0.5877852522924731i,0.9009688679024191+0.4338837391175581i,1,1"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_weyl_command(capsys):
    code, out, _ = run(capsys, "weyl", "--family", "D", "--rank", "4", "--word", "1 2 3 4 2")
    assert code == 0
    rep = json.loads(out)
    assert rep["length"] == 5 and rep["is_reduced"]
    assert rep["normal_form"].endswith("4,2,2")


def test_weyl_identity_and_non_reduced(capsys):
    code, out, _ = run(capsys, "weyl", "--family", "A", "--rank", "2", "--word", "")
    assert code == 0 and json.loads(out)["length"] == 0
    code, out, _ = run(capsys, "weyl", "--family", "A", "--rank", "2", "--word", "1 1")
    assert code == 0 and json.loads(out)["is_reduced"] is False


def test_weyl_quotient_membership(capsys):
    code, out, _ = run(capsys, "weyl", "--family", "A", "--rank", "3", "--word", "2 1", "--quotient", "2")
    assert code == 0 and json.loads(out)["min_coset_rep"] is True
    code, out, _ = run(capsys, "weyl", "--family", "A", "--rank", "3", "--word", "1 2", "--quotient", "2")
    assert json.loads(out)["min_coset_rep"] is False


@pytest.mark.parametrize("argv", [
    ["weyl", "--family", "A", "--rank", "2", "--word", "1 x"],
    ["weyl", "--family", "B", "--rank", "2"],
    ["gkdim", "--family", "A", "--rank", "2", "--word", "1 1"],
    ["act", "--family", "A", "--rank", "2", "--word", "1", "--entry", "1"],
    ["act", "--family", "A", "--rank", "2", "--word", "1", "--entry", "1,9"],
    ["gkdim", "--family", "A", "--rank", "1", "--word", "1", "--t", "0.5"],
    ["gkdim", "--family", "D", "--rank", "4", "--word", "1", "--quotient", "2"],
    ["verify", "--family", "A", "--rank", "2", "--normal-form", "1,7,1"],
    ["gkdim", "--family", "A", "--rank", "2", "--q", "1.5", "--word", "1"],
    ["nonsense"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2


def test_parse_error_mentions_column(capsys):
    code, _, err = run(capsys, "weyl", "--family", "A", "--rank", "2", "--word", "1 2 x")
    assert code == 2 and "column 5" in err


def test_act_diagram_entry(capsys):
    code, out, _ = run(capsys, "act", "--family", "D", "--rank", "4", "--word", "1 2 3 4 2",
                       "--t", DIAGRAM_T, "--entry", "1,2")
    assert code == 0
    entry = json.loads(out)["entries"][0]
    assert len(entry["paths"]) == 2
    assert entry["paths"][0]["scalar"] == pytest.approx([0.8090169943749475, -0.5877852522924731])


def test_act_absent_entry_and_dense(capsys):
    code, out, _ = run(capsys, "act", "--family", "A", "--rank", "2", "--word", "1", "--entry", "1,3")
    assert json.loads(out)["entries"][0]["text"] == "zero (no path)"
    code, out, _ = run(capsys, "act", "--family", "A", "--rank", "1", "--word", "1", "--entry", "2,2",
                       "--dense", "--cutoff", "3", "--kmax", "1")
    dense = json.loads(out)["entries"][0]["dense"]
    assert dense["real"][1][0] == pytest.approx((1 - 0.25) ** 0.5)


def test_verify_diagram_module_passes(capsys):
    code, out, _ = run(capsys, "verify", "--family", "D", "--rank", "4", "--word", "1 2 3 4 2", "--t", DIAGRAM_T)
    lines = [json.loads(x) for x in out.strip().splitlines()]
    assert code == 0
    assert lines[-1]["pass"] and lines[-1]["checks_failed"] == 0
    kinds = {x["check"] for x in lines[:-1]}
    assert {"unique_path", "hitting", "unitarity", "bracketing"} <= kinds


def test_verify_su2_passes(capsys):
    code, out, _ = run(capsys, "verify", "--family", "A", "--rank", "1", "--word", "1")
    assert code == 0


def test_verify_corrupted_table_fails(capsys, monkeypatch):
    real = corep.elementary_table

    def corrupted(family, n, i):
        tab = dict(real(family, n, i))
        # wrong deformation on one raising arrow
        if (i + 1, i + 1) in tab and tab[(i + 1, i + 1)] is fock.RAISE:
            tab[(i + 1, i + 1)] = fock.RAISE2
        return tab

    monkeypatch.setattr(corep, "elementary_table", corrupted)
    code, out, _ = run(capsys, "verify", "--family", "A", "--rank", "1", "--word", "1")
    assert code == 1
    summary = json.loads(out.strip().splitlines()[-1])
    assert summary["checks_failed"] > 0


def test_gkdim_su2(capsys):
    code, out, _ = run(capsys, "gkdim", "--family", "A", "--rank", "1", "--word", "1")
    rep = json.loads(out)
    assert code == 0 and rep["estimated_gkdim"] == 1 and rep["pass"]
    assert rep["cutoff"] == 16 and rep["k_max"] == 12 and rep["q"] == 0.5


def test_gkdim_json_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        code, _, _ = run(capsys, "gkdim", "--family", "C", "--rank", "2", "--word", "1 2 1", "--kmax", "8",
                         "--t", "0.6+0.8i,1", "--seed", "7", "--out", str(p))
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_gkdim_csv(tmp_path, capsys):
    p = tmp_path / "dims.csv"
    code, _, _ = run(capsys, "gkdim", "--family", "A", "--rank", "2", "--word", "1 2", "--kmax", "8", "--out", str(p))
    assert code == 0
    lines = p.read_text().splitlines()
    assert lines[0] == "k,dim" and lines[1] == "0,1" and len(lines) == 10


def test_gkdim_normal_form_input(capsys):
    code, out, _ = run(capsys, "gkdim", "--family", "C", "--rank", "2", "--normal-form", "2,1,2", "--kmax", "8")
    rep = json.loads(out)
    assert code == 0 and rep["length"] == 3


def test_gkdim_quotient(capsys):
    code, out, _ = run(capsys, "gkdim", "--family", "A", "--rank", "3", "--word", "2 3 1", "--quotient", "2",
                       "--kmax", "8")
    rep = json.loads(out)
    assert code == 0 and rep["quotient_m"] == 2 and rep["estimated_gkdim"] == 3


def test_truncation_contact_exit_3(capsys):
    code, _, err = run(capsys, "gkdim", "--family", "A", "--rank", "1", "--word", "1", "--kmax", "10",
                       "--cutoff", "6")
    assert code == 3 and "cutoff" in err


def test_c2_battery_cli(capsys):
    from qgk import weyl

    lengths = []
    for nf in weyl.all_elements("C", 2):
        word = " ".join(map(str, nf.word()))
        code, out, _ = run(capsys, "gkdim", "--family", "C", "--rank", "2", "--word", word)
        rep = json.loads(out)
        assert code == 0, rep
        assert rep["estimated_gkdim"] == rep["length"]
        lengths.append(rep["estimated_gkdim"])
    assert sorted(lengths) == [0, 1, 1, 2, 2, 3, 3, 4]

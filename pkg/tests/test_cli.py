import textwrap

import pytest

from fdrelay import cli
from fdrelay.channel import SystemConfig
from fdrelay.errors import ConvergenceError

FIG4 = """\
[system]
N_T = 2
M_R = 2
M_T = 2
N_R = 2
c_RR = 0.05
R_0 = 2

[power]
P_S_dB = 0, 50, 10
alpha = 1

[run]
schemes = OP, MM, PR, LI
trials = 5000
seed = 11
"""


def _write(tmp_path, text, name="s.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_fig4_scenario():
    sc = cli.parse_scenario(FIG4)
    assert sc.config == SystemConfig(2, 2, 2, 2, c_RR=0.05, R_0=2.0)
    assert sc.grid_dB == (0.0, 10.0, 20.0, 30.0, 40.0, 50.0)
    assert sc.schemes == ("OP", "MM", "PR", "LI")
    assert sc.methods == ("montecarlo",)
    assert sc.trials == 5000 and sc.seed == 11
    assert sc.scheme_config("PR").alpha == 1.0


def test_scenario_round_trip():
    sc = cli.parse_scenario(FIG4.replace("alpha = 1", "alpha = MM: auto, PR: 0.9"))
    again = cli.parse_scenario(cli.format_scenario(sc))
    assert again == sc
    assert again.scheme_config("MM").alpha == 0.5
    assert again.scheme_config("PR").alpha == 0.9
    assert again.scheme_config("LI").alpha == 1.0


def test_alpha_auto_and_fixed_relay_power():
    sc = cli.parse_scenario(FIG4.replace("alpha = 1", "alpha = auto"))
    assert sc.scheme_config("PR").alpha == pytest.approx(2 / 3)
    sc = cli.parse_scenario(FIG4.replace("alpha = 1", "P_R_dB = 20"))
    cfg = sc.scheme_config("MM")
    assert cfg.alpha is None and cfg.P_R == pytest.approx(100.0)


@pytest.mark.parametrize("edit,needle", [
    (("c_RR = 0.05", "c_RR = 0.05\nbogus = 1"), "line 7: [system] bogus: unknown key"),
    (("schemes = OP, MM, PR, LI", "schemes ="), "schemes"),
    (("c_RR = 0.05", "c_RR = -0.05"), "c_RR"),
    (("P_S_dB = 0, 50, 10", "P_S_dB = 0, 50"), "line 10"),
    (("schemes = OP, MM, PR, LI", "schemes = OP, XX"), "unknown scheme 'XX'"),
    (("alpha = 1", "alpha = 1\nP_R_dB = 3"), "not both"),
    (("[run]", "[extra]\nx = 1\n[run]"), "unknown section"),
    (("trials = 5000", "trials = many"), "trials"),
])
def test_parse_errors_carry_context(edit, needle):
    with pytest.raises(cli.ScenarioError) as info:
        cli.parse_scenario(FIG4.replace(*edit))
    assert needle in str(info.value)


def test_sweep_writes_sorted_csv_and_is_deterministic(tmp_path):
    path = _write(tmp_path, FIG4)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", "--scenario", path, "--out", str(out1)]) == 0
    assert cli.main(["sweep", "--scenario", path, "--out", str(out2)]) == 0
    data = out1.read_bytes()
    assert data == out2.read_bytes()
    lines = data.decode().splitlines()
    assert lines[0] == "scheme,method,P_S_dB,p_out,stderr"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 4 * 6
    keys = [(r[0], r[1], float(r[2])) for r in rows]
    assert keys == sorted(keys)
    assert all(r[1] == "montecarlo" and r[4] != "" for r in rows)


def test_sweep_analytic_methods(tmp_path, capsys):
    text = FIG4.replace("alpha = 1", "alpha = auto").replace("trials = 5000", "trials = 2000\nmethods = exact, asymptotic")
    path = _write(tmp_path, text)
    assert cli.main(["sweep", "--scenario", path, "--out", "-", "--schemes", "MM,OP"]) == 0
    out = capsys.readouterr()
    rows = out.out.splitlines()[1:]
    methods = {(r.split(",")[0], r.split(",")[1]) for r in rows}
    assert methods == {("MM", "exact"), ("MM", "asymptotic"), ("OP", "asymptotic")}
    assert "OP" in out.err
    # 12 significant digits
    value = rows[0].split(",")[3]
    assert len(value.replace(".", "").lstrip("0")) <= 12


def test_float_format():
    pts = [cli.OutagePoint("MM", "exact", 10.0, 1.0 / 3.0)]
    assert cli.curves_csv(pts).splitlines()[1] == "MM,exact,10,0.333333333333,"


def test_exit_codes(tmp_path, monkeypatch, capsys):
    bad = _write(tmp_path, FIG4.replace("schemes = OP, MM, PR, LI", "schemes ="), "bad.ini")
    assert cli.main(["sweep", "--scenario", bad, "--out", "-"]) == 2
    assert "schemes" in capsys.readouterr().err
    assert cli.main(["sweep", "--scenario", str(tmp_path / "missing.ini")]) == 2

    zf = _write(tmp_path, FIG4.replace("M_R = 2", "M_R = 1").replace("OP, MM, PR, LI", "receive_zf"), "zf.ini")
    assert cli.main(["sweep", "--scenario", zf, "--out", "-"]) == 3

    asym = _write(tmp_path, FIG4.replace("trials = 5000", "methods = asymptotic"), "asym.ini")
    assert cli.main(["sweep", "--scenario", asym, "--out", "-", "--schemes", "MM"]) == 3

    def boom(*a, **k):
        raise ConvergenceError("no")
    monkeypatch.setattr(cli, "outage_exact", boom)
    ex = _write(tmp_path, FIG4.replace("trials = 5000", "methods = exact"), "ex.ini")
    assert cli.main(["sweep", "--scenario", ex, "--out", "-", "--schemes", "MM"]) == 4


def test_validate_passes_and_marks_op(tmp_path, capsys):
    path = _write(tmp_path, FIG4.replace("trials = 5000", "trials = 100000"))
    assert cli.main(["validate", "--scenario", path, "--schemes", "OP,MM"]) == 0
    out = capsys.readouterr().out
    assert "MC + bounds only" in out
    assert "FAIL" not in out


def test_validate_detects_mismatch(tmp_path, monkeypatch, capsys):
    path = _write(tmp_path, FIG4)
    monkeypatch.setattr(cli, "outage_exact", lambda s, c: 0.5)
    assert cli.main(["validate", "--scenario", path, "--schemes", "LI"]) == 5
    assert "FAIL" in capsys.readouterr().out


def test_constants_table(capsys):
    assert cli.main(["constants", "--antennas", "2,2,2,2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    rows = {line.split()[0]: line for line in lines[2:]}
    assert rows["PR"].split()[1:3] == ["0.667", "(2/3)"]
    assert rows["PR"].split()[3:] == ["1.33", "(4/3)", "10"]
    assert rows["OP"].split() == ["OP", "0.5", "(1/2)", "2", "16"]
    assert rows["MM"].split() == ["MM", "0.5", "(1/2)", "2", "8"]
    assert rows["LI"].split() == ["LI", "0.5", "(1/2)", "1", "8"]
    assert rows["receive_zf"].split() == ["receive_zf", "1", "2", "-"]


def test_constants_single_antennas(capsys):
    assert cli.main(["constants", "--antennas", "1,1,1,1"]) == 0
    rows = {line.split()[0]: line.split() for line in capsys.readouterr().out.splitlines()[2:]}
    assert rows["OP"][1:-1] == rows["MM"][1:-1]
    assert rows["receive_zf"][2] == "n/a"


@pytest.mark.parametrize("arg", ["0,1,1,1", "2,2,2", "a,b,c,d"])
def test_constants_invalid(arg, capsys):
    assert cli.main(["constants", "--antennas", arg]) == 2


def test_module_docstring_example_parses():
    example = textwrap.dedent(cli.__doc__.split("::")[1].split("Exit codes")[0])
    sc = cli.parse_scenario(example)
    assert sc.methods == ("exact", "montecarlo") and sc.output == "curves.csv"

import filecmp

import pytest
from click.testing import CliRunner

from sgsp.cli import cli
from sgsp.scenario import (
    ConfigError,
    bundled_scenarios,
    dumps_csv,
    dumps_scenario,
    load_scenario,
    parse_scenario,
    run_scenario,
)

SMALL = """
[scenario]
name = small
seed = 3

[engine]
kind = translation
weight = expdecay
rate = 1

[probe shadow]
kind = shadow
count = 3
expect = pass

[probe laws]
kind = laws
count = 3
"""


def run_text(text, tmp_path, **kw):
    return run_scenario(parse_scenario(text), tmp_path, **kw)


@pytest.fixture(scope="module")
def expdecay_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    code = run_scenario(load_scenario(bundled_scenarios()["translation_expdecay"]), out)
    return code, out / "translation_expdecay"


def test_bundled_expdecay(expdecay_run):
    code, out = expdecay_run
    assert code == 0
    report = (out / "report.txt").read_text()
    assert "kind=equivalences verdict=consistent expectation=met" in report
    assert report.rstrip().endswith("result: ok")


def test_report_numbers_come_from_csvs(expdecay_run):
    _, out = expdecay_run
    summaries = {p.read_text().rstrip().splitlines()[-1] for p in out.glob("*.csv")}
    for line in (out / "report.txt").read_text().splitlines():
        if line.startswith("# summary"):
            assert line in summaries


def test_engine_probe_mismatch(tmp_path):
    text = SMALL + "\n[probe eig]\nkind = hhte_eigenfield\n"
    with pytest.raises(ConfigError, match=r"\[probe eig\]"):
        run_text(text, tmp_path)
    res = CliRunner().invoke(cli, ["--out", str(tmp_path), "run", _write(tmp_path, text)])
    assert res.exit_code == 2 and "probe eig" in res.output


def test_empty_probe_list(tmp_path):
    text = "[scenario]\nname = empty\n[engine]\nkind = hhte\n"
    assert run_text(text, tmp_path) == 0
    report = (tmp_path / "empty" / "report.txt").read_text()
    assert "[probe" not in report and "result: ok" in report


def test_missing_seed_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="seed"):
        run_text(SMALL.replace("seed = 3\n", ""), tmp_path)


def test_unknown_names(tmp_path):
    with pytest.raises(ConfigError, match="unknown probe kind"):
        run_text(SMALL.replace("kind = laws", "kind = lawz"), tmp_path)
    with pytest.raises(ConfigError, match="engine"):
        run_text(SMALL.replace("kind = translation", "kind = heat"), tmp_path)
    with pytest.raises(ConfigError, match="unknown parameter"):
        run_text(SMALL.replace("count = 3\nexpect", "cuont = 3\nexpect"), tmp_path)
    with pytest.raises(ConfigError, match="unknown engine key"):
        run_text(SMALL.replace("rate = 1", "rho = 1"), tmp_path)


def test_failed_expectation(tmp_path):
    assert run_text(SMALL + "expect_composition_max = 1:\n", tmp_path) == 1
    report = (tmp_path / "small" / "report.txt").read_text()
    assert "expectation failed" in report


def test_refusal_is_not_an_error(tmp_path):
    code = run_scenario(load_scenario(bundled_scenarios()["translation_constant"]), tmp_path)
    assert code == 0
    report = (tmp_path / "translation_constant" / "report.txt").read_text()
    assert "verdict=refused" in report


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_text(SMALL, a) == run_text(SMALL, b) == 0
    cmp = filecmp.dircmp(a / "small", b / "small")
    assert cmp.left_list == cmp.right_list
    assert not filecmp.cmpfiles(a / "small", b / "small", cmp.left_list, shallow=False)[1]


def test_seed_override_changes_suite(tmp_path):
    run_text(SMALL, tmp_path / "a")
    run_text(SMALL, tmp_path / "b", seed=11)
    assert (tmp_path / "a/small/shadow.csv").read_bytes() != (tmp_path / "b/small/shadow.csv").read_bytes()


def test_scenario_round_trip():
    for path in bundled_scenarios().values():
        sc = load_scenario(path)
        again = parse_scenario(dumps_scenario(sc))
        assert (again.name, again.engine, again.probes, again.tolerances, again.seed) == \
            (sc.name, sc.engine, sc.probes, sc.tolerances, sc.seed)


def test_csv_summary_line():
    text = dumps_csv(("t", "value"), [(0.1, 1 / 3)], {"ok": True, "note": "a,b"})
    lines = text.splitlines()
    assert lines[0] == "t,value"
    assert lines[1] == "0.1,0.3333333333333333"
    assert lines[-1] == "# summary,ok=true,note=a;b"


# click front end ----------------------------------------------------------------------

def _write(tmp_path, text):
    path = tmp_path / "scenario.ini"
    path.write_text(text)
    return str(path)


def test_cli_list():
    res = CliRunner().invoke(cli, ["list"])
    assert res.exit_code == 0 and "translation_expdecay" in res.output.split()


def test_cli_run_file(tmp_path):
    res = CliRunner().invoke(cli, ["--out", str(tmp_path), "run", _write(tmp_path, SMALL)])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "small" / "shadow.csv").exists()


def test_cli_missing_file(tmp_path):
    res = CliRunner().invoke(cli, ["run", str(tmp_path / "nope.ini")])
    assert res.exit_code == 2 and "cannot read" in res.output


def test_cli_env_output_root(tmp_path):
    res = CliRunner(env={"SGSP_OUT": str(tmp_path)}).invoke(cli, ["laws", "--count", "2"])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "laws" / "laws.csv").exists()


@pytest.mark.parametrize("args", [
    ["shadow", "--count", "2"],
    ["shadow", "--weight", "constant"],
    ["mixing", "--t-max", "8"],
    ["densities", "--set", "intervals", "--intervals", "0:1,4:9", "--horizon", "100"],
    ["equivalences", "--weight", "constant", "--suite-size", "2"],
    ["eigenfield", "--engine", "blackscholes", "--count", "5"],
    ["eigenfield", "--engine", "wave", "--count", "5"],
    ["laws", "--engine", "hhte", "--count", "2"],
])
def test_cli_subcommands(tmp_path, args):
    res = CliRunner().invoke(cli, ["--out", str(tmp_path), "--seed", "1", *args])
    assert res.exit_code == 0, res.output
    assert (tmp_path / args[0] / "report.txt").exists()

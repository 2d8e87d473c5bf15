import json

import pytest

from priorfree.cli import main


@pytest.fixture
def profile_file(tmp_path):
    path = tmp_path / "profile.txt"
    path.write_text("4\n4\n2\n2\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def env_file(tmp_path):
    path = tmp_path / "env.json"
    path.write_text(json.dumps([{"family": "uniform", "h": 3},
                                {"family": "uniform", "h": 2},
                                {"family": "uniform", "h": 1}]), encoding="utf-8")
    return str(path)


def test_benchmark_kinds(profile_file, capsys):
    assert main(["benchmark", "--input", profile_file, "--kind", "f2", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == 8.0
    assert main(["benchmark", "--input", profile_file, "--kind", "m2", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == 12.0 and out["prices"] == [4.0, 4.0, 2.0, 2.0]
    assert main(["benchmark", "--input", profile_file, "--kind", "m2k", "--k", "2",
                 "--json", "--oracle"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == 8.0 and out["winners"] == [1, 2]


def test_benchmark_config_errors(profile_file, capsys):
    assert main(["benchmark", "--input", profile_file, "--kind", "m2k"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["benchmark", "--input", "does-not-exist.txt", "--kind", "m2"]) == 2
    capsys.readouterr()


def test_run_csv_and_replay(profile_file, capsys):
    args = ["run", "--input", profile_file, "--auction", "ops", "--trials", "4", "--seed", "3"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert first.splitlines()[0] == "trial,branch,revenue,benchmark,ratio,k,selection_size,error"
    assert len(first.splitlines()) == 5
    assert main(args) == 0
    assert capsys.readouterr().out == first  # byte-identical replay


def test_run_generator_json_rows(capsys):
    assert main(["run", "--generator", "iid-uniform:8,1", "--auction", "bbr-ops", "--k", "3",
                 "--trials", "3", "--seed", "5", "--json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["aggregates"]["trials"] == 3
    for row in obj["rows"]:
        assert row["k"] == 3 and "selection_size" in row and "thresholds" in row


def test_run_requires_exactly_one_source(profile_file, capsys):
    assert main(["run", "--auction", "ops"]) == 2
    capsys.readouterr()
    assert main(["run", "--input", profile_file, "--generator", "harmonic:4",
                 "--auction", "ops"]) == 2
    capsys.readouterr()


def test_run_partial_failures_exit_code(tmp_path, capsys):
    tiny = tmp_path / "tiny.txt"
    tiny.write_text("5\n", encoding="utf-8")  # too small for the benchmark
    assert main(["run", "--input", str(tiny), "--auction", "ops", "--trials", "2"]) == 3
    out = capsys.readouterr().out
    assert "at least 2 bidders" in out


def test_run_writes_reports(profile_file, tmp_path, capsys):
    outdir = tmp_path / "reports"
    assert main(["run", "--input", profile_file, "--auction", "rsop", "--trials", "2",
                 "--seed", "1", "--out", str(outdir)]) == 0
    capsys.readouterr()
    csv_text = (outdir / "report.csv").read_text(encoding="utf-8")
    assert csv_text.startswith("trial,branch,")
    obj = json.loads((outdir / "report.json").read_text(encoding="utf-8"))
    assert obj["config"]["auction"] == "rsop" and len(obj["rows"]) == 2


def test_bayes_summary(env_file, capsys):
    assert main(["bayes", "--env", env_file, "--k", "2", "--trials", "40", "--seed", "2"]) == 0
    captured = capsys.readouterr()
    obj = json.loads(captured.out)
    assert obj["pointwise_ordered"] is True
    assert obj["trials"] == 40
    assert "ratio_of_means" in obj and "well_behaved_fraction" in obj


def test_bayes_warns_on_unordered(tmp_path, capsys):
    path = tmp_path / "unordered.json"
    path.write_text(json.dumps([{"family": "uniform", "h": 1},
                                {"family": "uniform", "h": 2}]), encoding="utf-8")
    assert main(["bayes", "--env", str(path), "--k", "1", "--trials", "10", "--seed", "1"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["pointwise_ordered"] is False
    assert "warning" in captured.err


def test_compare_outputs(env_file, tmp_path, capsys):
    outdir = tmp_path / "cmp"
    assert main(["compare", "--env", env_file, "--k", "2", "--trials", "12", "--seed", "4",
                 "--out", str(outdir)]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "trial,optimal_revenue,auction_revenue"
    assert (outdir / "report.csv").exists() and (outdir / "report.json").exists()
    assert main(["compare", "--env", env_file, "--k", "2", "--trials", "12", "--seed", "4",
                 "--json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert len(obj["rows"]) == 12


def test_bad_env_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[]", encoding="utf-8")
    assert main(["bayes", "--env", str(bad), "--k", "1"]) == 2
    capsys.readouterr()

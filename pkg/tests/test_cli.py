import pytest

from fas_uav_relay import cli, data, dump_config
from fas_uav_relay.systemConfig import PRESET_DIR


@pytest.fixture
def validation_file(rural_validation, tmp_path):
    path = tmp_path / "validation.cfg"
    dump_config(rural_validation, str(path))
    return str(path)


def test_inspect(capsys):
    assert cli.main(["inspect", "--verbosity", "WARNING"]) == 0
    out = capsys.readouterr().out
    assert "eigenvalues" in out
    assert "N_eff" in out


def test_inspect_urban_preset(capsys):
    assert cli.main(["inspect", "-c", "urban", "--theta", "1.0"]) == 0
    assert "theta=1 rad" in capsys.readouterr().out


def test_sweep_to_file(tmp_path):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--sweep-var", "P_2", "--grid", "0,10", "-o", str(out)]
    assert cli.main(argv) == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("# config_hash")
    assert "# variable: P_2" in text
    assert text.splitlines()[-3] == "P_2 [dBm],closed"


def test_sweep_to_stdout(capsys):
    argv = ["sweep", "--sweep-var", "N", "--grid", "1,2", "--estimators", "closed,ee"]
    assert cli.main(argv) == 0
    out = capsys.readouterr().out
    assert "N [ports],closed,causality_ok,ee [bits/J]" in out


def test_unknown_estimator_is_a_config_error():
    argv = ["sweep", "--sweep-var", "N", "--grid", "1", "--estimators", "magic"]
    assert cli.main(argv) == 4


def test_bad_config(tmp_path):
    with open(f"{PRESET_DIR}/rural.cfg", encoding="utf-8") as f:
        text = f.read().replace("aperture = 0.5", "aperture = -1")
    path = tmp_path / "bad.cfg"
    path.write_text(text, encoding="utf-8")
    assert cli.main(["inspect", "-c", str(path)]) == 4
    assert cli.main(["inspect", "-c", str(tmp_path / "missing.cfg")]) == 4


def test_infeasible_optimization(rural, tmp_path):
    config = rural.replace(
        search__l_max=200,
        search__z_max=100,
        search__n_max=2,
        search__p_min=1e-7,
        search__p_max=1e-6,
    )
    path = tmp_path / "tiny.cfg"
    dump_config(config, str(path))
    out = tmp_path / "surface.csv"
    assert cli.main(["optimize", "-c", str(path), "-o", str(out)]) == 3
    assert "# feasible: False" in out.read_text(encoding="utf-8")


def test_optimization(rural, tmp_path, capsys):
    config = rural.replace(
        search__l_max=250, search__z_max=125, search__n_min=2, search__n_max=3
    )
    path = tmp_path / "small.cfg"
    dump_config(config, str(path))
    assert cli.main(["optimize", "-c", str(path), "--verbosity", "WARNING"]) == 0
    assert "feasible=True" in capsys.readouterr().out


def test_validation_passes_outside_the_checked_window(validation_file, tmp_path):
    out = tmp_path / "validation.csv"
    argv = ["validate", "-c", validation_file, "--grid=-20,30", "--trials", "20000"]
    assert cli.main(argv + ["-o", str(out)]) == 0
    assert "# validation: PASS" in out.read_text(encoding="utf-8")


def test_validation_detects_a_corrupted_closed_form(
    validation_file, monkeypatch, rural_validation, piecewise_mc
):
    exact = data.bler_analytic.average_bler

    def corrupted(config, *args, **kwargs):
        return min(1.0, 1.5 * exact(config, *args, **kwargs))

    monkeypatch.setattr(data.bler_analytic, "average_bler", corrupted)
    config = piecewise_mc(rural_validation, trials=20_000)
    table, passed = cli.run_validate(config, [3.0])
    assert not passed
    assert bool(table["checked"].iloc[0])

    argv = ["validate", "-c", validation_file, "--grid", "3", "--trials", "20000"]
    assert cli.main(argv) == 2


def test_literal_gcq_flag(capsys):
    argv = ["sweep", "--sweep-var", "P_2", "--grid", "10", "--verbosity", "WARNING"]
    documents = []
    for flag in ([], ["--paper-literal-gcq"], ["--literal-gcq"]):
        assert cli.main(argv + flag) == 0
        documents.append(capsys.readouterr().out)
    normalized, literal, alias = documents
    assert literal == alias
    assert literal != normalized


def test_parser_accepts_the_literal_flag():
    args = cli.build_parser().parse_args(["inspect", "--paper-literal-gcq"])
    assert args.literal_gcq
    assert not cli.build_parser().parse_args(["inspect"]).literal_gcq

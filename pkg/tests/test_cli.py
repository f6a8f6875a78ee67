import pytest
from click.testing import CliRunner

from api.command import EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO, EXIT_OK, load_spec
from models.experiment import ExperimentKind
from router import cli
from utils.errors import ConfigError, DomainError

SIMULATE_TOML = """
kind = "Simulate"
t_final = 1.0
dt = 0.01
batches = 2
sigma = 0.1

[init]
kind = "point"
mean = [1.0]
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "simulate.toml"
    path.write_text(SIMULATE_TOML)
    return path


def test_simulate_writes_outputs(runner, config_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["simulate", "--config", str(config_file), "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    directory = out / "simulate"
    assert (directory / "report.csv").exists()
    assert (directory / "dumps" / "run" / "true" / "0.csv").exists()
    assert (directory / "dumps" / "run" / "true" / "1.csv").exists()
    meta = (directory / "meta.txt").read_text()
    assert "seed: 0\n" in meta
    assert "experiment: Simulate\n" in meta


def test_reports_are_byte_identical(runner, config_file, tmp_path):
    reports = []
    for name, threads in (("a", "1"), ("b", "2")):
        out = tmp_path / name
        args = ["simulate", "--config", str(config_file), "--out", str(out), "--threads", threads]
        assert runner.invoke(cli, args).exit_code == EXIT_OK
        reports.append((out / "simulate" / "report.csv").read_bytes())
    assert reports[0] == reports[1]


def test_flags_override_the_file(runner, config_file, tmp_path):
    out = tmp_path / "out"
    args = ["simulate", "--config", str(config_file), "--out", str(out), "--seed", "5"]
    assert runner.invoke(cli, args).exit_code == EXIT_OK
    assert "seed: 5\n" in (out / "simulate" / "meta.txt").read_text()


@pytest.mark.parametrize(
    "text",
    [
        SIMULATE_TOML + "\nunknown = 3\n",
        SIMULATE_TOML.replace('"Simulate"', '"ExpGrid"'),
        "kind = ",
    ],
)
def test_bad_config_exits_with_config_code(runner, tmp_path, text):
    path = tmp_path / "bad.toml"
    path.write_text(text)
    result = runner.invoke(cli, ["simulate", "--config", str(path), "--out", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIG


def test_missing_config_file(runner, tmp_path):
    missing = tmp_path / "missing.toml"
    result = runner.invoke(cli, ["simulate", "--config", str(missing), "--out", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIG


def test_unwritable_output_exits_with_io_code(runner, config_file, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    out = blocker / "out"
    result = runner.invoke(cli, ["simulate", "--config", str(config_file), "--out", str(out)])
    assert result.exit_code == EXIT_IO


def test_divergent_cells_exit_with_divergence_code(runner, tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        'kind = "ExpGrid"\na_values = [10.0]\nbeta_values = [1.0]\ndt = 1.0\nt_final = 1000.0\n'
    )
    result = runner.invoke(cli, ["exp-grid", "--config", str(path), "--out", str(tmp_path)])
    assert result.exit_code == EXIT_DIVERGENCE
    report = (tmp_path / "exp-grid" / "report.csv").read_text()
    assert "divergent at step" in report


def test_desk_scale_preset():
    spec = load_spec(ExperimentKind.powerlaw_grid, None, True, {})
    assert spec.a_values == [5.0, 16.0, 27.0, 38.0, 50.0]
    assert spec.beta_values == [1.5, 2.0, 3.0, 5.0, 8.0]


def test_load_spec_layers(tmp_path):
    path = tmp_path / "grid.toml"
    path.write_text('kind = "PowerLawGrid"\nt_final = 5.0\nseed = 3\n')
    spec = load_spec(
        ExperimentKind.powerlaw_grid, path, False, {"t_final": 7.0, "seed": None, "batches": 4}
    )
    assert spec.t_final == 7.0
    assert spec.seed == 3
    with pytest.raises(ConfigError):
        load_spec(ExperimentKind.exp_grid, path, False, {})


def test_unbuildable_potential_exits_with_config_code(runner, tmp_path):
    path = tmp_path / "gle2.toml"
    path.write_text(
        'kind = "SecondOrderPerturb"\n\n'
        "[potential]\n"
        "r_matrix = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]\n"
    )
    result = runner.invoke(cli, ["gle2-perturb", "--config", str(path), "--out", str(tmp_path)])
    assert result.exit_code == EXIT_CONFIG
    assert not isinstance(result.exception, DomainError)

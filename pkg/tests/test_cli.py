import json

import pytest
from bootens import __version__
from bootens.cli import app, diverged_error_handler, io_error_handler
from bootens.config import TEMPLATE
from bootens.ensemble import training as ensemble_training
from bootens.errors import ConfigError, TrainingDivergedError
from bootens.utils import write_json
from typer.testing import CliRunner

TINY_TOML = """\
n_sim = 1
alphas = [0.2]
n_t = 1000

[ensemble]
m = 2

[network]
hidden_sizes = [8]
epochs = 2
"""


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path, runner):
    path = tmp_path / "experiment.toml"
    result = runner.invoke(app, ["init", str(path)])
    assert result.exit_code == 0
    return path


def exit_code(args) -> int:
    with pytest.raises(SystemExit) as e:
        app(args, prog_name="bootens")
    return e.value.code


def test_version(runner):
    result = runner.invoke(app, ["version"])
    assert result.exit_code == 0
    assert result.stdout.strip() == f"bootens {__version__}"


def test_init_writes_template(config_file):
    assert config_file.read_text() == TEMPLATE.read_text()


def test_init_asks_before_overwriting(config_file, runner):
    config_file.write_text("n_sim = 3\n")
    result = runner.invoke(app, ["init", str(config_file)], input="n\n")
    assert result.exit_code == 1
    assert config_file.read_text() == "n_sim = 3\n"
    result = runner.invoke(app, ["init", str(config_file)], input="y\n")
    assert result.exit_code == 0
    assert config_file.read_text() == TEMPLATE.read_text()


config_tests = [
    ("ensemble.m", 5, 7),
    ("noise", "gaussian", "t3"),
    ("network.hidden_sizes", [40, 30, 20], [10, 5]),
    ("ensemble.reuse_order", True, False),
]


@pytest.mark.parametrize("key, old_value, new_value", config_tests)
def test_config_query_and_update(config_file, runner, key, old_value, new_value):
    result = runner.invoke(app, ["config", key, "--file", str(config_file)])
    assert result.exit_code == 0
    assert json.loads(result.stdout)[key] == old_value
    literal = new_value if isinstance(new_value, str) else repr(new_value)
    result = runner.invoke(app, ["config", key, literal, "--file", str(config_file)])
    assert result.exit_code == 0
    result = runner.invoke(app, ["config", key, "--file", str(config_file)])
    assert json.loads(result.stdout)[key] == new_value


def test_config_update_keeps_comments(config_file, runner):
    runner.invoke(app, ["config", "n_sim", "4", "--file", str(config_file)])
    text = config_file.read_text()
    assert "n_sim = 4" in text
    assert "# Monte-Carlo draws per BDE prediction interval" in text


def test_config_rejects_invalid_update(config_file, runner):
    before = config_file.read_text()
    result = runner.invoke(app, ["config", "ensemble.m", "1", "--file", str(config_file)])
    assert isinstance(result.exception, ConfigError)
    assert config_file.read_text() == before


def test_config_whole_document(config_file, runner):
    result = runner.invoke(app, ["config", "--file", str(config_file)])
    assert result.exit_code == 0
    assert json.loads(result.stdout)["ensemble"]["m"] == 5


def test_report(tmp_path, runner):
    summary = {
        "experiment": "exp4",
        "alpha": 0.1,
        "mean_bde_width_at_points": 0.5,
        "mean_de_width_at_points": 0.25,
        "width_ratio": 2.0,
    }
    write_json(tmp_path / "summary.json", summary)
    result = runner.invoke(app, ["report", str(tmp_path)])
    assert result.exit_code == 0
    assert "mean BDE CI90 width at the data" in result.stdout
    assert "ratio" in result.stdout


def test_train_and_evaluate(tmp_path, runner):
    config = tmp_path / "tiny.toml"
    config.write_text(TINY_TOML)
    ensembles = tmp_path / "ensembles"
    result = runner.invoke(
        app, ["train", "-c", str(config), "--method", "DE", "--out", str(ensembles)]
    )
    assert result.exit_code == 0, result.stdout
    assert (ensembles / "DE").is_dir()
    assert not (ensembles / "BDE").exists()

    intervals = tmp_path / "intervals.csv"
    result = runner.invoke(
        app, ["evaluate", str(ensembles / "DE"), "-c", str(config), "--out", str(intervals)]
    )
    assert result.exit_code == 0, result.stdout
    assert "DE ensemble, 500 points" in result.stdout
    header = intervals.read_text().splitlines()[0].split(",")
    assert header[:3] == ["point", "y", "f_star"]
    assert len(intervals.read_text().splitlines()) == 501


def test_exit_code_for_bad_config(tmp_path):
    config = tmp_path / "bad.toml"
    config.write_text("n_sim = 0\n")
    assert exit_code(["simulate", "-c", str(config)]) == 2


def test_exit_code_for_missing_config(tmp_path):
    assert exit_code(["simulate", "-c", str(tmp_path / "nope.toml")]) == 2


def test_exit_code_for_missing_dataset(tmp_path):
    config = tmp_path / "experiment.toml"
    config.write_text(f'dataset = "{tmp_path / "missing.csv"}"\n')
    assert exit_code(["simulate", "-c", str(config)]) == 3


def test_exit_code_for_unfinished_run(tmp_path):
    assert exit_code(["report", str(tmp_path)]) == 5


def test_exit_code_for_diverged_training(tmp_path, monkeypatch):
    def always_diverges(*args, **kwargs):
        raise TrainingDivergedError(1)

    monkeypatch.setattr(ensemble_training, "train", always_diverges)
    config = tmp_path / "tiny.toml"
    config.write_text(TINY_TOML)
    out = tmp_path / "ensembles"
    assert exit_code(["train", "-c", str(config), "--method", "DE", "--out", str(out)]) == 4


def test_error_handlers_follow_exception_hierarchy():
    assert app.handler_for(FileNotFoundError()) is io_error_handler
    assert app.handler_for(TrainingDivergedError(3)) is diverged_error_handler
    assert diverged_error_handler(TrainingDivergedError(3)) == 4
    assert app.handler_for(ValueError()) is None

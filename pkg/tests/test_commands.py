"""命令行层：退出码、输出格式"""

import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from sasaki_deform.commands.check import check
from sasaki_deform.commands.flow import flow
from sasaki_deform.commands.gen import gen
from sasaki_deform.commands.identity import identity
from sasaki_deform.commands.moduli import moduli
from sasaki_deform.commands.spectrum import COLUMNS, cluster_ids, spectrum, spectrum_rows
from sasaki_deform.core.logging import configure_logging
from sasaki_deform.main import cli
from sasaki_deform.mesh.io import load_mesh
from sasaki_deform.schemas.run import CSV_COLUMNS


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def restore_logging():
    # group 回调会把处理器绑到 CliRunner 的临时 stderr 上
    yield
    configure_logging("WARNING", "text")


def test_gen_writes_mesh(runner: CliRunner, tmp_path: Path) -> None:
    target = tmp_path / "torus.json"
    result = runner.invoke(gen, ["--builtin", "clifford-torus", "--res", "6x4", "-o", str(target)])
    assert result.exit_code == 0, result.output
    mesh, _ = load_mesh(target)
    assert mesh.n_vertices == 24
    assert json.loads(result.stdout)["vertices"] == 24


def test_check_circle_passes(runner: CliRunner, tmp_path: Path) -> None:
    target = tmp_path / "check.json"
    result = runner.invoke(
        check, ["--builtin", "clifford-circle", "--res", "64", "-o", str(target)]
    )
    assert result.exit_code == 0, result.output
    report = json.loads(target.read_text(encoding="utf-8"))
    assert report["classification"]["legendrian"]["status"] == "pass"


def test_check_auto_theta_passes_special(runner: CliRunner) -> None:
    result = runner.invoke(
        check, ["--builtin", "clifford-circle", "--res", "64", "--theta", "auto"]
    )
    assert result.exit_code == 0, result.output
    classification = json.loads(result.stdout)["classification"]
    h = classification["mesh_size"]
    assert classification["special_legendrian"]["status"] == "pass"
    assert classification["special_legendrian"]["residual"] < 10 * h * h
    assert classification["theta_special"]["status"] == "pass"


def test_check_refinement_table(runner: CliRunner) -> None:
    result = runner.invoke(
        check, ["--builtin", "clifford-circle", "--res", "16", "--refine", "1"]
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert len(report["refinements"]) == 1
    assert [t["quantity"] for t in report["convergence"]] == ["legendrian", "theta_special"]


def test_check_mesh_file(runner: CliRunner, tmp_path: Path) -> None:
    target = tmp_path / "circle.json"
    runner.invoke(gen, ["--builtin", "clifford-circle", "--res", "32", "-o", str(target)])
    result = runner.invoke(check, ["--mesh", str(target)])
    assert result.exit_code == 0, result.output


def test_identity_passes(runner: CliRunner) -> None:
    result = runner.invoke(identity, ["--n", "1", "--samples", "20"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["passed"] is True


def test_moduli_circle(runner: CliRunner) -> None:
    result = runner.invoke(
        moduli,
        ["--builtin", "clifford-circle", "--res", "32", "--kind", "special-legendrian", "--kappa", "2"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["kernel_dim"] == report["predicted_dim"] == 2


def test_spectrum_csv(runner: CliRunner) -> None:
    result = runner.invoke(
        spectrum, ["--builtin", "clifford-circle", "--res", "32", "--max-lambda", "10"]
    )
    assert result.exit_code == 0, result.output
    rows = list(csv.reader(io.StringIO(result.stdout)))
    assert tuple(rows[0]) == COLUMNS
    values = [float(r[1]) for r in rows[1:]]
    assert values == sorted(values)
    assert abs(values[0]) < 1e-8
    assert values[0] == 0.0


def test_spectrum_degree_above_dimension(runner: CliRunner) -> None:
    result = runner.invoke(spectrum, ["--builtin", "clifford-circle", "--res", "16", "--degree", "2"])
    assert result.exit_code == 2
    assert json.loads(result.stdout)["error"]["type"] == "ParameterError"


def test_flow_writes_path(runner: CliRunner, tmp_path: Path) -> None:
    target = tmp_path / "path"
    result = runner.invoke(
        flow,
        ["--builtin", "clifford-circle", "--res", "32", "--direction", "reeb", "--steps", "1",
         "-o", str(target)],
    )
    assert result.exit_code == 0, result.output
    with open(target / "residuals.csv", newline="", encoding="utf-8") as handle:
        assert tuple(next(csv.reader(handle))) == CSV_COLUMNS
    assert (target / "step_0001.json").exists()


def test_two_sources_is_usage_error(runner: CliRunner, tmp_path: Path) -> None:
    result = runner.invoke(
        check, ["--builtin", "clifford-circle", "--mesh", str(tmp_path / "x.json")]
    )
    assert result.exit_code == 2
    assert json.loads(result.stdout)["error"]["type"] == "ParameterError"


def test_missing_source_is_usage_error(runner: CliRunner) -> None:
    result = runner.invoke(check, [])
    assert result.exit_code == 2


def test_bad_mesh_file(runner: CliRunner, tmp_path: Path) -> None:
    target = tmp_path / "broken.json"
    target.write_text("{not json", encoding="utf-8")
    result = runner.invoke(check, ["--mesh", str(target)])
    assert result.exit_code == 2
    assert json.loads(result.stdout)["error"]["type"] == "MeshParseError"


def test_cli_group(runner: CliRunner, restore_logging: None) -> None:
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for name in ("gen", "check", "identity", "moduli", "flow", "spectrum"):
        assert name in result.output
    result = runner.invoke(cli, ["--log-level", "ERROR", "identity", "--n", "1", "--samples", "5"])
    assert result.exit_code == 0, result.output


@pytest.mark.parametrize(
    ("values", "expected"),
    [
        ([0.0, 1.0, 1.01, 4.0], [0, 1, 1, 2]),
        ([0.0, 0.02, 0.5], [0, 0, 1]),
        ([], []),
    ],
)
def test_cluster_ids(values, expected) -> None:
    assert cluster_ids(values, 0.05) == expected


def test_spectrum_rows_sorted() -> None:
    rows = spectrum_rows([4.0, 0.0, 1.0], 0.05)
    assert [r[0] for r in rows] == [0, 1, 2]
    assert [r[1] for r in rows] == [0.0, 1.0, 4.0]


def test_thread_cap_applied_while_parsing(
    runner: CliRunner, restore_logging: None, monkeypatch: pytest.MonkeyPatch
) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.setenv(var, "1")
    result = runner.invoke(cli, ["--threads", "3", "identity", "--n", "1", "--samples", "5"])
    assert result.exit_code == 0, result.output
    assert os.environ["OMP_NUM_THREADS"] == "3"


def test_entry_point_defers_numeric_imports() -> None:
    # 线程环境变量只在 numpy/scipy 首次导入前生效
    script = (
        "import sys; import sasaki_deform.main; "
        "print(sorted(m for m in ('numpy', 'scipy') if m in sys.modules))"
    )
    completed = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, check=True
    )
    assert completed.stdout.strip() == "[]"

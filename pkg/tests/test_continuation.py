"""模空间方向上的延拓"""

import csv
import importlib
from pathlib import Path

import numpy as np
import pytest

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import DivergenceError, ParameterError
from sasaki_deform.deform.classify import max_edge_length, wrap_angle
from sasaki_deform.deform.continuation import aligned_direction, continuation, transverse_kernel
from sasaki_deform.deform.newton import newton_green_correct
from sasaki_deform.mesh.builders import build_clifford_torus
from sasaki_deform.mesh.io import load_mesh
from sasaki_deform.schemas.run import CSV_COLUMNS


def test_transverse_kernel_dim(torus_ops) -> None:
    basis = transverse_kernel(torus_ops)
    assert basis.shape == (torus_ops.size(1), 2)


def test_alignment_keeps_direction(torus_ops) -> None:
    basis = transverse_kernel(torus_ops)
    aligned = aligned_direction(basis, torus_ops.star[1], basis[:, 1])
    np.testing.assert_allclose(aligned, basis[:, 1], atol=1e-12)


@pytest.mark.parametrize("index", [0, 1])
def test_harmonic_path(torus, index: int) -> None:
    mesh, embedding = torus
    path = continuation(
        mesh, embedding, AmbientStructure.standard(2), index=index, step=0.01, steps=3, tol=1e-6
    )
    assert not path.log.truncated
    assert len(path.embeddings) == 4
    assert [s.step for s in path.log.steps] == [0, 1, 2, 3]
    h = max_edge_length(mesh, embedding)
    for step in path.log.steps:
        assert step.res_psi_im <= 10 * h * h
        assert step.res_omega_T <= 10 * h * h
    assert path.log.eta_drift < 0.1
    assert path.log.eta_drift == max(s.res_eta for s in path.log.steps)


def test_reeb_path_rotates_phase(circle) -> None:
    mesh, embedding = circle
    path = continuation(mesh, embedding, AmbientStructure.standard(1), "reeb", step=0.01, steps=3)
    assert not path.log.truncated
    assert path.log.eta_drift < 1e-10
    thetas = [s.theta for s in path.log.steps]
    for before, after in zip(thetas, thetas[1:]):
        assert abs(wrap_angle(after - before)) == pytest.approx(0.02, abs=1e-8)
    assert all(s.newton_iters == 0 for s in path.log.steps)


def test_zero_steps(circle) -> None:
    path = continuation(*circle, AmbientStructure.standard(1), "reeb", steps=0)
    assert len(path.embeddings) == 1
    assert path.log.requested_steps == 0


def test_save(circle, tmp_path: Path) -> None:
    path = continuation(*circle, AmbientStructure.standard(1), "reeb", step=0.01, steps=2)
    target = path.save(tmp_path / "path")
    assert sorted(p.name for p in target.glob("step_*.json")) == [
        "step_0000.json",
        "step_0001.json",
        "step_0002.json",
    ]
    _, loaded = load_mesh(target / "step_0002.json")
    np.testing.assert_allclose(loaded.points, path.embeddings[-1].points)
    with open(target / "residuals.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4


@pytest.mark.parametrize(
    "kwargs",
    [{"direction": "sideways"}, {"steps": -1}, {"step": 1.0}, {"index": 5}],
)
def test_bad_arguments(torus, kwargs) -> None:
    with pytest.raises(ParameterError):
        continuation(*torus, AmbientStructure.standard(2), **kwargs)


def test_step_failure_truncates(circle, monkeypatch: pytest.MonkeyPatch) -> None:
    calls = []

    def failing_second_step(*args, **kwargs):
        calls.append(1)
        if len(calls) == 3:
            raise DivergenceError("stalled", log=[1e-3, 2e-3, 4e-3])
        return newton_green_correct(*args, **kwargs)

    # 包的 continuation 导出是同名函数，按模块对象打补丁
    module = importlib.import_module("sasaki_deform.deform.continuation")
    monkeypatch.setattr(module, "newton_green_correct", failing_second_step)
    path = continuation(*circle, AmbientStructure.standard(1), "reeb", step=0.01, steps=4)
    assert path.log.truncated
    assert path.log.error is not None and path.log.error["type"] == "DivergenceError"
    assert len(path.embeddings) == len(path.log.steps) == 2


@pytest.mark.slow
def test_desk_scale_harmonic_path() -> None:
    mesh, embedding = build_clifford_torus(64, 64)
    h = max_edge_length(mesh, embedding)
    for index in (0, 1):
        path = continuation(mesh, embedding, AmbientStructure.standard(2), index=index, steps=10)
        assert not path.log.truncated
        for step in path.log.steps:
            assert step.res_psi_im <= 10 * h * h
            assert step.res_omega_T <= 10 * h * h
        assert path.log.eta_drift < 0.05

"""共享 fixture：小分辨率内置网格、组装好的算子与标准结构"""

from typing import Tuple

import hypothesis
import numpy as np
import pytest

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.dec.operators import FormOperators, assemble_operators
from sasaki_deform.deform.classify import calibrated
from sasaki_deform.mesh.builders import build_clifford_circle, build_clifford_torus
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex
from sasaki_deform.mesh.metric import induced_metric

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile("fast")

Mesh = Tuple[SimplicialComplex, Embedding]

CIRCLE_SEGMENTS = 32
TORUS_SIZE = 8


@pytest.fixture(scope="session")
def circle() -> Mesh:
    return build_clifford_circle(CIRCLE_SEGMENTS)


@pytest.fixture(scope="session")
def torus() -> Mesh:
    return build_clifford_torus(TORUS_SIZE, TORUS_SIZE)


@pytest.fixture(scope="session")
def circle_ops(circle: Mesh) -> FormOperators:
    mesh, embedding = circle
    return assemble_operators(mesh, induced_metric(mesh, embedding))


@pytest.fixture(scope="session")
def torus_ops(torus: Mesh) -> FormOperators:
    mesh, embedding = torus
    return assemble_operators(mesh, induced_metric(mesh, embedding))


@pytest.fixture(scope="session")
def circle_structure(circle: Mesh) -> AmbientStructure:
    """相位已校准的 S³ 标准结构"""
    mesh, embedding = circle
    return calibrated(mesh, embedding, AmbientStructure.standard(1))


@pytest.fixture(scope="session")
def torus_structure(torus: Mesh) -> AmbientStructure:
    mesh, embedding = torus
    return calibrated(mesh, embedding, AmbientStructure.standard(2))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)

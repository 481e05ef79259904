"""球面结构的求值器、恒等式与 D-同伦"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sasaki_deform.ambient.identities import ALGEBRAIC, DIFFERENTIAL, fd_order_study, identity_check
from sasaki_deform.ambient.structure import (
    AmbientStructure,
    c_const,
    cone_lift,
    d_homothety,
    reeb_flow,
    sample_sphere,
    tangent_frame,
)
from sasaki_deform.core.errors import DomainError, ParameterError

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=2)


def _point_and_frame(n: int, seed: int, size: int):
    rng = np.random.default_rng(seed)
    x = sample_sphere(n, 1, rng)[0]
    return x, tangent_frame(x, size, rng)


class TestEvaluators:
    @given(n=dims, seed=seeds)
    def test_omega_antisymmetric(self, n: int, seed: int) -> None:
        s = AmbientStructure.standard(n)
        x, (u, v) = _point_and_frame(n, seed, 2)
        assert s.eval_omega_T(x, u, v) == pytest.approx(-s.eval_omega_T(x, v, u), abs=1e-12)

    @given(seed=seeds, a=st.floats(-3, 3), b=st.floats(-3, 3))
    def test_psi_multilinear(self, seed: int, a: float, b: float) -> None:
        s = AmbientStructure.standard(2)
        x, frame = _point_and_frame(2, seed, 3)
        combined = np.stack([a * frame[0] + b * frame[2], frame[1]])
        expected = a * s.eval_psi(x, frame[[0, 1]]) + b * s.eval_psi(x, frame[[2, 1]])
        assert s.eval_psi(x, combined) == pytest.approx(expected, abs=1e-10)

    @given(n=dims, seed=seeds, theta=st.floats(-10, 10))
    def test_phase_periodic(self, n: int, seed: int, theta: float) -> None:
        x, frame = _point_and_frame(n, seed, n)
        a = AmbientStructure.standard(n, theta).eval_psi(x, frame)
        b = AmbientStructure.standard(n, theta + 2 * np.pi).eval_psi(x, frame)
        assert a == pytest.approx(b, abs=1e-12)

    @given(n=dims, seed=seeds)
    def test_evaluators_scale_invariant(self, n: int, seed: int) -> None:
        s = AmbientStructure.standard(n)
        x, frame = _point_and_frame(n, seed, n + 1)
        assert s.eval_eta(3.0 * x, frame[0]) == pytest.approx(
            s.eval_eta(x, frame[0]) / 3.0, abs=1e-12
        )

    @given(n=dims, seed=seeds)
    def test_eta_variation_matches_difference(self, n: int, seed: int) -> None:
        s = AmbientStructure.weighted(n, 1.5)
        rng = np.random.default_rng(seed)
        x = 1.2 * sample_sphere(n, 1, rng)[0]
        w = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        v = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        step = 1e-5
        difference = (s.eval_eta(x + step * w, v) - s.eval_eta(x - step * w, v)) / (2 * step)
        assert s.eval_eta_variation(x, w, v) == pytest.approx(difference, abs=1e-6)

    def test_eta_of_xi(self) -> None:
        s = AmbientStructure.weighted(2, 5.0)
        x = sample_sphere(2, 7, np.random.default_rng(1))
        np.testing.assert_allclose(s.eval_eta(x, s.eval_xi(x)), 1.0, atol=1e-14)

    def test_origin_rejected(self) -> None:
        s = AmbientStructure.standard(1)
        with pytest.raises(DomainError):
            s.eval_eta(np.zeros(2, dtype=complex), np.ones(2, dtype=complex))

    def test_psi_needs_n_vectors(self) -> None:
        s = AmbientStructure.standard(2)
        with pytest.raises(ParameterError):
            s.eval_psi(np.array([1, 0, 0], dtype=complex), np.zeros((1, 3), dtype=complex))

    def test_c_const(self) -> None:
        assert c_const(1) == pytest.approx(-2j)
        assert c_const(2) == pytest.approx(2.0)


class TestStructure:
    def test_weighted_kappa(self) -> None:
        s = AmbientStructure.weighted(2, 5.0)
        assert s.kappa == pytest.approx(5.0)
        assert s.scale == pytest.approx(0.6)

    @pytest.mark.parametrize("kappa", [0.0, -1.0, float("inf")])
    def test_weighted_rejects(self, kappa: float) -> None:
        with pytest.raises(ParameterError):
            AmbientStructure.weighted(1, kappa)

    def test_d_homothety(self) -> None:
        s = d_homothety(AmbientStructure.standard(2), 5.0 / 3.0)
        assert s.kappa == pytest.approx(3.0 * 3.0 / 5.0)
        with pytest.raises(ParameterError):
            d_homothety(s, 0.0)

    def test_reeb_flow_rotates_psi(self, circle) -> None:
        _, embedding = circle
        s = AmbientStructure.standard(1)
        t = 0.3
        moved = reeb_flow(embedding, t)
        x = embedding.points[:1]
        tangent = (embedding.points[1] - embedding.points[0])[None, None, :]
        before = s.eval_psi(x, tangent)
        after = s.eval_psi(moved.points[:1], np.exp(1j * t) * tangent)
        assert after == pytest.approx(np.exp(1j * s.kappa * t) * before, abs=1e-12)

    def test_cone_euler_contraction(self) -> None:
        s = AmbientStructure.standard(1)
        z = np.array([0.6, 0.8j]) * 2.0
        v = np.array([0.3 + 0.1j, -0.2j])
        value = cone_lift(s)(z, np.stack([z, v]))
        assert value == pytest.approx(2.0**s.kappa * s.eval_psi(z, v[None, :]), abs=1e-12)


class TestIdentities:
    @pytest.mark.parametrize(("n", "kappa"), [(1, 2.0), (2, 3.0), (2, 5.0), (1, 0.5)])
    def test_identity_check_passes(self, n: int, kappa: float) -> None:
        report = identity_check(AmbientStructure.weighted(n, kappa), samples=100, seed=0)
        assert report.passed
        for name in ALGEBRAIC:
            assert report.residual(name) < 1e-10

    def test_report_reproducible(self) -> None:
        s = AmbientStructure.standard(2)
        first = identity_check(s, samples=5, seed=11).model_dump_json()
        assert identity_check(s, samples=5, seed=11).model_dump_json() == first

    def test_bad_arguments(self) -> None:
        s = AmbientStructure.standard(1)
        with pytest.raises(ParameterError):
            identity_check(s, samples=0)
        with pytest.raises(ParameterError):
            identity_check(s, fd_step=-1.0)

    @pytest.mark.parametrize("n", [1, 2])
    def test_finite_difference_order_two(self, n: int) -> None:
        table = fd_order_study(AmbientStructure.standard(n), samples=10, seed=3)
        assert set(table) == set(DIFFERENTIAL)
        for name in ("d_psi", "cone_scaling"):
            values = table[name]
            orders = [np.log2(values[i] / values[i + 1]) for i in range(len(values) - 1)]
            assert min(orders) > 1.8, (name, values)

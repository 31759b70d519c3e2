import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracperim.quadrature import QuadratureError, _seminorm_band_once, default_resolution
from fracperim.specfun import lambda_eigenvalue, sphere_area
from fracperim.sphere import (
    AliasingError,
    SphereFunction,
    analyze,
    basis_gradient,
    c1_norm_estimate,
    dense_grid,
    flat_index,
    grid_for_band,
    make_grid,
    num_coeffs,
    seminorm_gagliardo,
    synthesize,
    tensor_analysis,
    tensor_synthesis,
)

coeff = st.floats(-1.0, 1.0, allow_nan=False)


def random_function(n, K, seed):
    rng = np.random.default_rng(seed)
    return SphereFunction(n, rng.standard_normal(num_coeffs(n, K)), K)


class TestGrids:
    def test_circle(self):
        g = make_grid(2, 64)
        assert g.size == 64
        np.testing.assert_allclose(g.weights, 2 * np.pi / 64, rtol=0, atol=1e-15)

    def test_sphere_area(self):
        g = make_grid(3, (32, 64))
        assert g.weights.sum() == pytest.approx(4 * np.pi, abs=1e-12)
        np.testing.assert_allclose(np.linalg.norm(g.nodes, axis=1), 1.0, atol=1e-14)

    def test_orthogonal_to_constants(self):
        g = make_grid(2, 128)
        Y3 = SphereFunction.harmonic(2, 3, 1)
        assert abs(g.integrate(synthesize(Y3, g))) < 1e-12

    def test_unsupported(self):
        with pytest.raises(ValueError):
            make_grid(4, 10)

    @pytest.mark.parametrize("n", [2, 3])
    def test_orthonormal_basis(self, n):
        K = 7
        g = grid_for_band(n, K)
        B = g.basis(K)
        G = B.T @ (g.weights[:, None] * B)
        np.testing.assert_allclose(G, np.eye(num_coeffs(n, K)), atol=1e-12)


class TestBasis:
    def test_circle_explicit(self):
        th = np.linspace(0, 2 * np.pi, 7)
        u = SphereFunction.harmonic(2, 2, 2)
        np.testing.assert_allclose(u.evaluate(th), np.sin(2 * th) / np.sqrt(np.pi), atol=1e-15)
        assert flat_index(2, 2, 1) == 3

    def test_sphere_explicit(self):
        x = make_grid(3, 6).nodes
        Y10 = SphereFunction.harmonic(3, 1, 1)
        np.testing.assert_allclose(Y10.evaluate(x), np.sqrt(3 / (4 * np.pi)) * x[:, 2], atol=1e-14)

    @pytest.mark.parametrize("n", [2, 3])
    def test_gradient_fd(self, n):
        u = random_function(n, 6, 1)
        rng = np.random.default_rng(2)
        x = rng.standard_normal((20, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        v = rng.standard_normal((20, n))
        v -= np.sum(v * x, axis=1, keepdims=True) * x
        h = 1e-6
        ext = lambda p: u.evaluate(p / np.linalg.norm(p, axis=1, keepdims=True))
        fd = (ext(x + h * v) - ext(x - h * v)) / (2 * h)
        g = u.gradient(x)
        np.testing.assert_allclose(np.sum(g * v, axis=1), fd, atol=1e-7)
        np.testing.assert_allclose(np.sum(g * x, axis=1), 0.0, atol=1e-12)
        assert basis_gradient(n, 6, x).shape == (20, num_coeffs(n, 6), n)

    def test_tensor_transforms(self):
        K = 12
        u = random_function(3, K, 3)
        g = grid_for_band(3, K)
        vals, grads = tensor_synthesis(u.coeffs, K, g, gradient=True)
        np.testing.assert_allclose(vals, u.evaluate(g.nodes), atol=1e-12)
        np.testing.assert_allclose(grads, u.gradient(g.nodes), atol=1e-11)
        np.testing.assert_allclose(tensor_analysis(vals, K, g), u.coeffs, atol=1e-12)


class TestAnalyze:
    @pytest.mark.parametrize("n", [2, 3])
    def test_single_harmonic(self, n):
        Y = SphereFunction.harmonic(n, 2, 1, K=6)
        g = grid_for_band(n, 6)
        a = analyze(synthesize(Y, g), g, 6)
        assert a.coefficient(2, 1) == pytest.approx(1.0, abs=1e-12)
        rest = np.delete(a.coeffs, flat_index(n, 2, 1))
        assert np.max(np.abs(rest)) < 1e-10

    def test_zero(self):
        g = grid_for_band(2, 4)
        assert not np.any(analyze(np.zeros(g.size), g, 4).coeffs)

    def test_combination(self):
        u = SphereFunction.harmonic(2, 1, 1, 0.3, K=4) + SphereFunction.harmonic(2, 4, 2, 0.1)
        g = grid_for_band(2, 4)
        a = analyze(synthesize(u, g), g, 4)
        assert a.coefficient(1, 1) == pytest.approx(0.3, abs=1e-13)
        assert a.coefficient(4, 2) == pytest.approx(0.1, abs=1e-13)

    def test_aliasing_flagged(self):
        g = grid_for_band(2, 8)
        u = SphereFunction.harmonic(2, 6, 1)
        with pytest.raises(AliasingError):
            analyze(synthesize(u, g), g, 3)
        with pytest.warns(RuntimeWarning):
            analyze(synthesize(u, g), g, 3, check_aliasing=False)

    @settings(max_examples=25, deadline=None)
    @given(n=st.sampled_from([2, 3]), K=st.integers(0, 8), seed=st.integers(0, 10**6))
    def test_round_trip_and_parseval(self, n, K, seed):
        u = random_function(n, K, seed)
        g = grid_for_band(n, K)
        vals = synthesize(u, g)
        assert g.integrate(vals**2) == pytest.approx(u.l2_norm() ** 2, rel=1e-11)
        np.testing.assert_allclose(analyze(vals, g, K).coeffs, u.coeffs, atol=1e-11)


class TestSphereFunction:
    def test_constant_and_mean(self):
        c = SphereFunction.constant(3, 0.25)
        assert c.mean() == pytest.approx(0.25)
        g = make_grid(3, 8)
        np.testing.assert_allclose(synthesize(c, g), 0.25, atol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(a=coeff, b=coeff, seed=st.integers(0, 1000))
    def test_linearity(self, a, b, seed):
        u, v = random_function(2, 5, seed), random_function(2, 3, seed + 1)
        x = np.linspace(0, 6, 11)
        np.testing.assert_allclose((u * a + v * b).evaluate(x), a * u.evaluate(x) + b * v.evaluate(x), atol=1e-12)

    def test_immutable(self):
        u = random_function(2, 3, 0)
        with pytest.raises(ValueError):
            u.coeffs[0] = 1.0

    def test_with_band(self):
        u = random_function(3, 4, 0)
        assert u.with_band(6).with_band(4).coeffs.tolist() == u.coeffs.tolist()

    @pytest.mark.parametrize("n", [2, 3])
    def test_json_round_trip(self, n):
        u = random_function(n, 5, 4)
        doc = json.loads(u.to_json())
        assert doc["n"] == n and doc["K"] == 5 and len(doc["coefficients"]) == num_coeffs(n, 5)
        v = SphereFunction.from_json(u.to_json())
        assert v.coeffs.tolist() == u.coeffs.tolist()

    def test_h_norm(self):
        u = random_function(2, 4, 5)
        lam = lambda_eigenvalue(2, 0.5, np.arange(5))
        assert u.h_norm_sq(0.5) == pytest.approx(u.l2_norm() ** 2 + np.dot(lam, u.degree_energy()))


class TestC1Norm:
    def test_zero(self):
        assert c1_norm_estimate(SphereFunction.zeros(2, 3)) == 0.0

    @pytest.mark.parametrize("n", [2, 3])
    def test_constant(self, n):
        assert c1_norm_estimate(SphereFunction.constant(n, -0.3)) == pytest.approx(0.3, abs=1e-14)

    def test_first_harmonic_circle(self):
        eps = 0.02
        u = SphereFunction.harmonic(2, 1, 1, eps)
        # max|cos| + max|sin| over 1/sqrt(pi), checked against a much denser sample
        th = np.linspace(0, 2 * np.pi, 200001)
        dense = np.max(np.abs(u.evaluate(th))) + np.max(np.abs(np.linalg.norm(u.gradient(th), axis=1)))
        assert c1_norm_estimate(u) == pytest.approx(dense, abs=1e-6)
        assert c1_norm_estimate(u) == pytest.approx(2 * eps / np.sqrt(np.pi), abs=1e-6)

    def test_sphere_against_denser(self):
        u = random_function(3, 6, 7) * 0.01
        g = make_grid(3, (300, 600))
        v = synthesize(u, g)
        gr = u.gradient(g.nodes)
        dense = np.max(np.abs(v)) + np.max(np.linalg.norm(gr, axis=1))
        assert c1_norm_estimate(u) == pytest.approx(dense, rel=1e-3)
        assert dense_grid(3, 6).size < g.size


class TestSeminorm:
    @pytest.mark.parametrize("n,k", [(2, 1), (2, 4), (3, 2)])
    def test_harmonic_spectral_and_quadrature(self, n, k):
        Y = SphereFunction.harmonic(n, k, 1)
        lam = lambda_eigenvalue(n, 0.5, k)
        assert seminorm_gagliardo(Y, 0.5) == pytest.approx(lam, rel=1e-14)
        q = seminorm_gagliardo(Y, 0.5, method="quadrature", tol=1e-8)
        assert q == pytest.approx(lam, rel=1e-8)

    def test_constant(self):
        c = SphereFunction.constant(2, 0.7)
        assert seminorm_gagliardo(c, 0.4) == 0.0
        assert seminorm_gagliardo(c, 0.4, method="quadrature") == 0.0

    def test_cross_method(self):
        u = SphereFunction.harmonic(2, 3, 1, 0.2, K=5) + SphereFunction.harmonic(2, 5, 2, 0.05)
        spec = seminorm_gagliardo(u, 0.6)
        q, err = seminorm_gagliardo(u, 0.6, method="quadrature", full_output=True)
        assert q == pytest.approx(spec, rel=1e-4)
        assert err < 1e-8 * q

    def test_band_method(self):
        Y = SphereFunction.harmonic(2, 3, 1)
        q = seminorm_gagliardo(Y, 0.5, method="quadrature", near_diagonal="band")
        assert q == pytest.approx(lambda_eigenvalue(2, 0.5, 3), rel=1e-6)

    def test_band_refinement_order(self):
        # error of the excised-band rule under eta -> eta/2
        Y = SphereFunction.harmonic(2, 3, 1)
        alpha = 0.5
        exact = lambda_eigenvalue(2, alpha, 3)
        res = default_resolution(2, 3)
        errs = [abs(_seminorm_band_once(Y, alpha, eta, res) - exact) for eta in (0.2, 0.1, 0.05)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 1.5)

    def test_tolerance_failure(self):
        from fracperim.quadrature import Resolution

        Y = SphereFunction.harmonic(2, 8, 1)
        with pytest.raises(QuadratureError):
            seminorm_gagliardo(Y, 0.5, method="quadrature", tol=1e-12, resolution=Resolution(8, 4, 2, 4))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            seminorm_gagliardo(SphereFunction.zeros(2), 0.5, method="nope")

    @settings(max_examples=30, deadline=None)
    @given(n=st.sampled_from([2, 3]), K=st.integers(1, 12), seed=st.integers(0, 10**6))
    def test_embedding_ratio(self, n, K, seed):
        # ||u||_{H^{(1+s)/2}} <= C ||u||_{H^{(1+t)/2}}, with C the largest per-degree quotient
        s_, t_ = 0.25, 0.75
        ks = np.arange(0, 200)
        C = np.max(np.sqrt((1 + lambda_eigenvalue(n, s_, ks)) / (1 + lambda_eigenvalue(n, t_, ks))))
        u = random_function(n, K, seed)
        assert math.sqrt(u.h_norm_sq(s_)) <= C * math.sqrt(u.h_norm_sq(t_)) * (1 + 1e-12)


@pytest.mark.parametrize("n,res,deg,tol", [(2, 33, 32, 1e-12), (3, (17, 34), 32, 1e-10)])
def test_polynomial_exactness(n, res, deg, tol):
    # integrate x1^a x2^b (x3^c) of total degree deg against the closed-form moments
    from scipy.special import gammaln

    g = make_grid(n, res)
    rng = np.random.default_rng(0)
    for _ in range(10):
        e = rng.multinomial(deg // 2, np.ones(n) / n) * 2
        val = g.integrate(np.prod(g.nodes ** e, axis=1))
        b = (e + 1) / 2.0
        exact = 2.0 * np.exp(np.sum(gammaln(b)) - gammaln(np.sum(b)))
        assert val == pytest.approx(exact, rel=tol, abs=tol)
    assert g.integrate(np.ones(g.size)) == pytest.approx(sphere_area(n), rel=tol)

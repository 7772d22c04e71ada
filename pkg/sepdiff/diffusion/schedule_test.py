import unittest

import numpy as np

from sepdiff.audio import AudioBuffer
from sepdiff.diffusion import (make_schedule, coeffs, alpha_beta, diffuse, velocity, x0_from_v, eps_from_v,
                               forward_diffuse, velocity_target, recover_x0, recover_eps)
from sepdiff.errors import InvalidArgumentError


def _buf(value, shape=(2, 8)):
    return AudioBuffer(np.full(shape, value, dtype=np.float32), 44100)


class TestMakeSchedule(unittest.TestCase):
    def test_endpoints(self):
        self.assertEqual(make_schedule(1).sigmas, (0.0, 1.0))
        self.assertEqual(make_schedule(2).sigmas, (0.0, 0.5, 1.0))

    def test_length_and_order(self):
        schedule = make_schedule(20)
        self.assertEqual(len(schedule), 21)
        self.assertEqual(schedule.sigmas[-1], 1.0)
        self.assertTrue(np.all(np.diff(schedule.sigmas) > 0))

    def test_zero_steps(self):
        with self.assertRaises(InvalidArgumentError):
            make_schedule(0)

    def test_reverse_pairs(self):
        pairs = list(make_schedule(2).reverse_pairs())
        self.assertEqual(pairs, [(2, 1.0, 0.5), (1, 0.5, 0.0)])

    def test_coefficients_on_circle_and_monotone(self):
        for steps in (1, 10, 20, 50, 100):
            alpha, beta = alpha_beta(np.array(make_schedule(steps).sigmas))
            np.testing.assert_allclose(alpha ** 2 + beta ** 2, 1.0, atol=1e-6)
            self.assertTrue(np.all(np.diff(alpha) <= 0))
            self.assertTrue(np.all(np.diff(beta) >= 0))


class TestCoeffs(unittest.TestCase):
    def test_known_values(self):
        c0 = coeffs(0.0)
        self.assertEqual((c0.alpha, c0.beta), (1.0, 0.0))
        c1 = coeffs(1.0)
        self.assertEqual((c1.alpha, c1.beta), (0.0, 1.0))
        half = coeffs(0.5)
        self.assertAlmostEqual(half.alpha, 0.70710678, places=8)
        self.assertAlmostEqual(half.beta, 0.70710678, places=8)
        self.assertAlmostEqual(half.phi, np.pi / 4)

    def test_out_of_range(self):
        for sigma in (-0.1, 1.5, float("nan")):
            with self.assertRaises(InvalidArgumentError):
                coeffs(sigma)


class TestDiffusionAlgebra(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2024)

    def test_forward_diffuse_examples(self):
        x0 = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 16)), 44100)
        eps = AudioBuffer(self.rng.standard_normal((2, 16)), 44100)
        np.testing.assert_array_equal(forward_diffuse(x0, eps, 0.0).samples, x0.samples)
        np.testing.assert_array_equal(forward_diffuse(x0, eps, 1.0).samples, eps.samples)
        np.testing.assert_allclose(forward_diffuse(_buf(2.0), _buf(0.0), 0.5).samples, 1.41421356, atol=1e-6)

    def test_velocity_examples(self):
        x0 = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 16)), 44100)
        eps = AudioBuffer(self.rng.standard_normal((2, 16)), 44100)
        np.testing.assert_array_equal(velocity_target(x0, eps, 0.0).samples, eps.samples)
        np.testing.assert_array_equal(velocity_target(x0, eps, 1.0).samples, -x0.samples)
        np.testing.assert_allclose(velocity_target(_buf(1.0), _buf(1.0), 0.5).samples, 0.0, atol=1e-7)

    def test_recover_examples(self):
        x_t = AudioBuffer(self.rng.standard_normal((2, 16)), 44100)
        v = AudioBuffer(self.rng.standard_normal((2, 16)), 44100)
        np.testing.assert_array_equal(recover_x0(x_t, v, 0.0).samples, x_t.samples)
        np.testing.assert_allclose(recover_x0(_buf(1.0), _buf(1.0), 0.5).samples, 0.0, atol=1e-7)
        np.testing.assert_array_equal(recover_eps(x_t, v, 1.0).samples, x_t.samples)
        np.testing.assert_array_equal(recover_eps(x_t, v, 0.0).samples, v.samples)

    def test_round_trip_thousand_cases(self):
        worst_x0, worst_eps = 0.0, 0.0
        for _ in range(1000):
            sigma = float(self.rng.uniform(0, 1))
            x0 = self.rng.uniform(-1, 1, size=(2, 8)).astype(np.float32)
            eps = self.rng.standard_normal((2, 8)).astype(np.float32)
            x_t = diffuse(x0, eps, sigma)
            v = velocity(x0, eps, sigma)
            worst_x0 = max(worst_x0, float(np.max(np.abs(x0_from_v(x_t, v, sigma) - x0))))
            worst_eps = max(worst_eps, float(np.max(np.abs(eps_from_v(x_t, v, sigma) - eps))))
        self.assertLess(worst_x0, 1e-5)
        self.assertLess(worst_eps, 1e-5)

    def test_batched_sigmas(self):
        x0 = self.rng.uniform(-1, 1, size=(3, 2, 8))
        eps = self.rng.standard_normal((3, 2, 8))
        sigmas = np.array([0.1, 0.5, 0.9])
        x_t = diffuse(x0, eps, sigmas)
        for i, sigma in enumerate(sigmas):
            np.testing.assert_allclose(x_t[i], diffuse(x0[i], eps[i], float(sigma)), atol=1e-12)
        self.assertEqual(x_t.dtype, np.float64)

    def test_linearity(self):
        x0 = AudioBuffer(self.rng.uniform(-0.5, 0.5, size=(2, 32)), 44100)
        eps = AudioBuffer(self.rng.uniform(-0.5, 0.5, size=(2, 32)), 44100)
        scaled = forward_diffuse(x0.with_samples(1.5 * x0.samples), eps.with_samples(1.5 * eps.samples), 0.3)
        np.testing.assert_allclose(scaled.samples, 1.5 * forward_diffuse(x0, eps, 0.3).samples, atol=1e-6)

    def test_shape_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            forward_diffuse(_buf(0.0, (2, 8)), _buf(0.0, (2, 9)), 0.5)


if __name__ == "__main__":
    unittest.main()

import unittest
from dataclasses import replace

import numpy as np

from sepdiff.streams import SubStream, make_rng
from sepdiff.training import TrainingConfig, filter_and_augment, rms_db


class TestSilenceFilter(unittest.TestCase):
    def setUp(self):
        self.silent = np.zeros((2, 64), dtype=np.float32)
        self.mixture = np.random.default_rng(0).uniform(-0.5, 0.5, (2, 64)).astype(np.float32)

    def test_rms_db(self):
        self.assertEqual(rms_db(self.silent), float("-inf"))
        self.assertAlmostEqual(rms_db(np.full((1, 10), 0.1)), -20.0)

    def test_keep_prob_zero_always_drops(self):
        config = TrainingConfig(silence_keep_prob=0.0)
        rng = np.random.default_rng(1)
        for _ in range(100):
            self.assertIsNone(filter_and_augment(self.silent, self.mixture, config, rng))

    def test_loud_vocals_always_kept(self):
        config = TrainingConfig(silence_keep_prob=0.0)
        rng = np.random.default_rng(2)
        for _ in range(20):
            self.assertIsNotNone(filter_and_augment(self.mixture, self.mixture, config, rng))

    def test_keep_fraction(self):
        config = TrainingConfig(silence_keep_prob=0.05)
        rng = make_rng(0, SubStream.AUGMENTATION)
        kept = sum(filter_and_augment(self.silent, self.mixture, config, rng) is not None
                   for _ in range(10_000))
        self.assertGreaterEqual(kept / 10_000, 0.03)
        self.assertLessEqual(kept / 10_000, 0.07)


class TestAugmentations(unittest.TestCase):
    def setUp(self):
        rng = np.random.default_rng(3)
        self.vocals = rng.uniform(-0.5, 0.5, (2, 128)).astype(np.float32)
        self.accompaniment = rng.uniform(-0.5, 0.5, (2, 128)).astype(np.float32)
        self.mixture = self.vocals + self.accompaniment
        self.other = rng.uniform(-0.5, 0.5, (2, 128)).astype(np.float32)

    def test_mixture_stays_a_sum(self):
        config = TrainingConfig(augment_prob=1.0)
        rng = np.random.default_rng(4)
        for _ in range(20):
            vocals, mixture = filter_and_augment(self.vocals, self.mixture, config, rng, self.other)
            np.testing.assert_allclose(mixture - vocals, self.other[::-1], atol=1e-6)

    def test_polarity_inverts_vocals_only(self):
        config = TrainingConfig(augment_prob=1.0, augment_channel_flip=False, augment_remix=False)
        vocals, mixture = filter_and_augment(self.vocals, self.mixture, config, np.random.default_rng(5))
        np.testing.assert_array_equal(vocals, -self.vocals)
        np.testing.assert_allclose(mixture, self.accompaniment - self.vocals, atol=1e-6)

    def test_channel_flip(self):
        config = TrainingConfig(augment_prob=1.0, augment_polarity=False, augment_remix=False)
        vocals, mixture = filter_and_augment(self.vocals, self.mixture, config, np.random.default_rng(6))
        np.testing.assert_array_equal(vocals, self.vocals[::-1])
        np.testing.assert_allclose(mixture, self.mixture[::-1], atol=1e-6)

    def test_disabled_is_identity(self):
        config = replace(TrainingConfig(), augment_polarity=False, augment_channel_flip=False,
                         augment_remix=False)
        vocals, mixture = filter_and_augment(self.vocals, self.mixture, config,
                                             np.random.default_rng(7), self.other)
        np.testing.assert_array_equal(vocals, self.vocals)
        np.testing.assert_allclose(mixture, self.mixture, atol=1e-6)


if __name__ == "__main__":
    unittest.main()

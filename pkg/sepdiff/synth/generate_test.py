import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from sepdiff.audio import read_wav, scan_dataset
from sepdiff.errors import ConfigError
from sepdiff.synth import SynthSpec, render_track, synthesize

SMALL = dict(track_count=2, test_track_count=1, duration_s=1.0, sample_rate=8000)


class TestSynthSpec(unittest.TestCase):
    def test_rejects_out_of_range_fundamental(self):
        with self.assertRaises(ConfigError):
            SynthSpec(f0_min_hz=40.0)
        with self.assertRaises(ConfigError):
            SynthSpec(f0_max_hz=1200.0)

    def test_rejects_bad_snr_and_silence(self):
        with self.assertRaises(ConfigError):
            SynthSpec(snr_db_min=float("nan"))
        with self.assertRaises(ConfigError):
            SynthSpec(silence_fraction=0.05)


class TestRenderTrack(unittest.TestCase):
    def test_additive(self):
        vocals, accompaniment, mixture = render_track(SynthSpec(**SMALL), 0, 0)
        np.testing.assert_allclose(mixture - vocals, accompaniment, atol=1e-6)
        self.assertLessEqual(np.max(np.abs(mixture)), 10 ** (-1 / 20) + 1e-6)

    def test_zero_db_snr(self):
        spec = SynthSpec(snr_db_min=0.0, snr_db_max=0.0, **SMALL)
        for index in range(3):
            vocals, accompaniment, _ = render_track(spec, 0, index)
            measured = 10 * np.log10(np.sum(vocals.astype(np.float64) ** 2) /
                                     np.sum(accompaniment.astype(np.float64) ** 2))
            self.assertLess(abs(measured), 0.5)

    def test_silent_regions(self):
        spec = SynthSpec(**SMALL)
        vocals, _, _ = render_track(spec, 0, 1)
        silent = np.mean(np.all(vocals == 0, axis=0))
        self.assertGreaterEqual(silent, 0.1)

    def test_vocals_reach_high_band(self):
        spec = SynthSpec(track_count=1, test_track_count=0, duration_s=1.0, sample_rate=44100)
        vocals, _, _ = render_track(spec, 0, 0)
        power = np.abs(np.fft.rfft(vocals[0].astype(np.float64))) ** 2
        freqs = np.fft.rfftfreq(vocals.shape[1], 1 / 44100)
        self.assertGreater(power[freqs >= 5000].sum() / power.sum(), 1e-4)
        self.assertGreater(power[freqs < 1000].sum() / power.sum(), 0.5)

    def test_channels_decorrelated(self):
        vocals, _, _ = render_track(SynthSpec(**SMALL), 0, 0)
        self.assertFalse(np.allclose(vocals[0], vocals[1]))


class TestSynthesize(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        patcher = patch("sepdiff.synth.generate.output")
        patcher.start()
        self.addCleanup(patcher.stop)

    def tearDown(self):
        self.tmp.cleanup()

    def test_layout(self):
        root = os.path.join(self.tmp.name, "data")
        dirs = synthesize(SynthSpec(**SMALL), root)
        self.assertEqual(len(dirs), 3)
        train = scan_dataset(os.path.join(root, "train"))
        self.assertEqual([item.name for item in train], ["track_000", "track_001"])
        self.assertEqual(len(scan_dataset(os.path.join(root, "test"))), 1)
        mixture = read_wav(train[0].mixture_path)
        vocals = read_wav(train[0].target_path)
        self.assertEqual(mixture.shape, (2, 8000))
        self.assertLess(np.max(np.abs(mixture.samples - vocals.samples - render_track(SynthSpec(**SMALL), 0, 0)[1])),
                        1e-6)

    def test_same_seed_same_bytes(self):
        roots = [os.path.join(self.tmp.name, name) for name in ("one", "two")]
        for root in roots:
            synthesize(SynthSpec(seed=4, **SMALL), root, workers=2)
        for split, track in (("train", "track_001"), ("test", "track_000")):
            for name in ("mixture.wav", "vocals.wav"):
                paths = [os.path.join(root, split, track, name) for root in roots]
                with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
                    self.assertEqual(a.read(), b.read())


if __name__ == "__main__":
    unittest.main()

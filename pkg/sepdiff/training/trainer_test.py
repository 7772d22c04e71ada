import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from sepdiff.audio import AudioBuffer, scan_dataset, write_wav
from sepdiff.errors import EmptyDatasetError, InvalidArgumentError
from sepdiff.fileio import read_csv
from sepdiff.model import SeparationModel, load_model, preset
from sepdiff.training import ChunkSampler, Trainer, TrainingConfig, checkpoint_path, loss_curve_path


def _write_track(root, name, length=400, rate=8000):
    track = os.path.join(root, name)
    os.makedirs(track, exist_ok=True)
    rng = np.random.default_rng(len(name) + length)
    vocals = rng.uniform(-0.3, 0.3, size=(1, length))
    accompaniment = rng.uniform(-0.3, 0.3, size=(1, length))
    write_wav(os.path.join(track, "mixture.wav"), AudioBuffer(vocals + accompaniment, rate))
    write_wav(os.path.join(track, "vocals.wav"), AudioBuffer(vocals, rate))


class TrainerCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.data = os.path.join(self.tmp.name, "data")
        for name in ("a", "b", "c"):
            _write_track(self.data, name)
        self.items = scan_dataset(self.data)
        self.config = TrainingConfig(batch_size=2, chunk_seconds=0.004, warmup_steps=2, total_steps=6,
                                     log_every=4, seed=5)
        patcher = patch("sepdiff.training.trainer.output")
        self.output = patcher.start()
        self.addCleanup(patcher.stop)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class TestChunkSampler(TrainerCase):
    def test_batch_shape_and_determinism(self):
        model = SeparationModel(preset("tiny"))
        sampler = ChunkSampler(self.items, model, self.config)
        x0, c = sampler.batch(3)
        self.assertEqual(x0.shape, (2, 1, 32))
        self.assertEqual(c.shape, (2, 1, 32))
        again = sampler.batch(3)
        np.testing.assert_array_equal(x0, again[0])
        np.testing.assert_array_equal(c, again[1])

    def test_short_tracks_skipped(self):
        _write_track(self.data, "short", length=16)
        sampler = ChunkSampler(scan_dataset(self.data), SeparationModel(preset("tiny")), self.config)
        self.assertEqual(len(sampler.items), 3)
        self.assertEqual(self.output.call_args[0][0], "warning")

    def test_rate_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            ChunkSampler(self.items, SeparationModel(preset("toy")), self.config)

    def test_all_silent_with_no_keep(self):
        silent = os.path.join(self.tmp.name, "silent")
        track = os.path.join(silent, "quiet")
        os.makedirs(track)
        zeros = AudioBuffer(np.zeros((1, 400)), 8000)
        write_wav(os.path.join(track, "mixture.wav"), zeros)
        write_wav(os.path.join(track, "vocals.wav"), zeros)
        config = TrainingConfig(batch_size=1, chunk_seconds=0.004, silence_keep_prob=0.0,
                                total_steps=1, warmup_steps=0)
        sampler = ChunkSampler(scan_dataset(silent), SeparationModel(preset("tiny")), config)
        with self.assertRaises(EmptyDatasetError):
            sampler.batch(0)

    def test_excluded_track_never_drawn(self):
        sampler = ChunkSampler(self.items, SeparationModel(preset("tiny")), self.config)
        rng = np.random.default_rng(0)
        for exclude in range(3):
            drawn = {sampler._random_chunk(rng, exclude=exclude)[0] for _ in range(60)}
            self.assertEqual(drawn, set(range(3)) - {exclude})

    def test_remix_accompaniment_from_another_track(self):
        config = TrainingConfig(batch_size=8, chunk_seconds=0.004, augment_remix=True, augment_prob=1.0, seed=2)
        sampler = ChunkSampler(self.items, SeparationModel(preset("tiny")), config)
        draws = []
        draw = sampler._random_chunk

        def record(rng, exclude=None):
            chunk = draw(rng, exclude)
            draws.append((chunk[0], exclude))
            return chunk

        with patch.object(sampler, "_random_chunk", side_effect=record):
            sampler.batch(0)
        self.assertEqual(len(draws) % 2, 0)
        for (index, _), (other, exclude) in zip(draws[::2], draws[1::2]):
            self.assertEqual(exclude, index)
            self.assertNotEqual(other, index)


class TestTrainer(TrainerCase):
    def test_zero_steps_saves_unchanged(self):
        model = SeparationModel(preset("tiny"), seed=2)
        out = self.path("zero.npz")
        config = TrainingConfig(batch_size=2, chunk_seconds=0.004, warmup_steps=0, total_steps=0)
        self.assertEqual(Trainer(model, self.items, config, out).run(), [])
        saved = load_model(out).state_dict()
        for name, data in model.state_dict().items():
            np.testing.assert_array_equal(saved[name], data)

    def test_seed_determinism_and_curve(self):
        curves = []
        for run in ("one", "two"):
            out = self.path(f"{run}.npz")
            reports = Trainer(SeparationModel(preset("tiny"), seed=1), self.items, self.config, out).run()
            self.assertEqual(len(reports), 6)
            rows = read_csv(loss_curve_path(out))
            self.assertEqual([int(r["step"]) for r in rows], list(range(6)))
            self.assertEqual(float(rows[0]["lr"]), 0.0)
            curves.append([(r["l_diff"], r["l_lat"], r["l_rec"]) for r in rows])
        self.assertEqual(curves[0], curves[1])

    def test_checkpoints(self):
        out = self.path("model.npz")
        config = TrainingConfig(batch_size=1, chunk_seconds=0.004, warmup_steps=0, total_steps=5,
                                checkpoint_every=2)
        Trainer(SeparationModel(preset("tiny")), self.items, config, out).run()
        self.assertTrue(os.path.exists(checkpoint_path(out, 2)))
        self.assertTrue(os.path.exists(checkpoint_path(out, 4)))
        self.assertFalse(os.path.exists(checkpoint_path(out, 5)))
        self.assertTrue(os.path.exists(out))


if __name__ == "__main__":
    unittest.main()

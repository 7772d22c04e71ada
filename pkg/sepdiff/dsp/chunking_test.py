import unittest

import numpy as np

from sepdiff.audio import AudioBuffer
from sepdiff.dsp import ChunkPlan, chunk_and_process, chunk_count, crossfade_ramps
from sepdiff.errors import ContractViolationError, InvalidArgumentError


class TestChunkPlan(unittest.TestCase):
    def test_hop(self):
        plan = ChunkPlan(chunk_len=100, overlap=0.2)
        self.assertEqual(plan.overlap_len, 20)
        self.assertEqual(plan.hop, 80)

    def test_rejects_half_overlap(self):
        with self.assertRaises(InvalidArgumentError):
            ChunkPlan(chunk_len=100, overlap=0.5)

    def test_from_seconds_rounds_to_multiple(self):
        plan = ChunkPlan.from_seconds(3.0, 44100, multiple_of=64)
        self.assertEqual(plan.chunk_len % 64, 0)
        self.assertLessEqual(plan.chunk_len, 3 * 44100)

    def test_chunk_count(self):
        plan = ChunkPlan(chunk_len=100, overlap=0.2)
        self.assertEqual(chunk_count(50, plan), 1)
        self.assertEqual(chunk_count(100, plan), 1)
        self.assertEqual(chunk_count(181, plan), 3)


class TestChunkAndProcess(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_ramps_partition_unity(self):
        fade_in, fade_out = crossfade_ramps(37)
        np.testing.assert_allclose(fade_in + fade_out, 1.0, atol=1e-7)

    def test_identity_reconstructs(self):
        x = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 1234)), 8000)
        plan = ChunkPlan(chunk_len=200, overlap=0.2)
        y = chunk_and_process(x, plan, lambda chunk, i: chunk)
        self.assertEqual(y.shape, x.shape)
        self.assertLess(np.max(np.abs(y.samples - x.samples)), 1e-6)

    def test_identity_reconstructs_default_plan(self):
        rate = 8000
        x = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 10 * rate + 17)), rate)
        plan = ChunkPlan.from_seconds(3.0, rate, overlap=0.2)
        y = chunk_and_process(x, plan, lambda chunk, i: chunk)
        self.assertLess(np.max(np.abs(y.samples - x.samples)), 1e-6)

    def test_doubling(self):
        x = AudioBuffer(self.rng.uniform(-0.4, 0.4, size=(1, 999)), 8000)
        plan = ChunkPlan(chunk_len=128, overlap=0.25)
        y = chunk_and_process(x, plan, lambda chunk, i: chunk.with_samples(2 * chunk.samples))
        np.testing.assert_allclose(y.samples, 2 * x.samples, atol=1e-6)

    def test_short_input_single_chunk(self):
        x = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 30)), 8000)
        seen = []

        def process(chunk, index):
            seen.append((index, chunk.length))
            return chunk

        y = chunk_and_process(x, ChunkPlan(chunk_len=100, overlap=0.2), process)
        self.assertEqual(seen, [(0, 100)])
        np.testing.assert_allclose(y.samples, x.samples, atol=1e-7)

    def test_threaded_matches_serial(self):
        x = AudioBuffer(self.rng.uniform(-1, 1, size=(2, 2000)), 8000)
        plan = ChunkPlan(chunk_len=256, overlap=0.2)
        process = lambda chunk, i: chunk.with_samples(chunk.samples * (1 + i))
        serial = chunk_and_process(x, plan, process)
        threaded = chunk_and_process(x, plan, process, workers=4)
        np.testing.assert_array_equal(serial.samples, threaded.samples)

    def test_shape_mismatch(self):
        x = AudioBuffer(np.zeros((2, 500)), 8000)
        with self.assertRaises(ContractViolationError):
            chunk_and_process(x, ChunkPlan(chunk_len=100), lambda chunk, i: chunk.with_samples(chunk.samples[:, :50]))


if __name__ == "__main__":
    unittest.main()

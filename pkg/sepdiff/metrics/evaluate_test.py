import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from sepdiff.audio import AudioBuffer, load_item, scan_dataset, write_wav
from sepdiff.diffusion import SamplerConfig
from sepdiff.dsp import ChunkPlan
from sepdiff.errors import EmptyDatasetError
from sepdiff.fileio import read_csv
from sepdiff.metrics import (DB_CAP, AblationGrid, EvalResult, TrackScore, evaluate_estimates, evaluate_model,
                             parse_cutoff, run_ablation, sdr, write_eval_csv)
from sepdiff.model import GaussianOracleDenoiser


def _write_track(root, name, gain, length=400):
    track = os.path.join(root, name)
    os.makedirs(track, exist_ok=True)
    rng = np.random.default_rng(sum(map(ord, name)))
    vocals = rng.uniform(-0.4, 0.4, size=(2, length))
    accompaniment = gain * rng.uniform(-0.4, 0.4, size=(2, length))
    write_wav(os.path.join(track, "mixture.wav"), AudioBuffer(vocals + accompaniment, 8000))
    write_wav(os.path.join(track, "vocals.wav"), AudioBuffer(vocals, 8000))


class EvalCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.data = os.path.join(self.tmp.name, "data")
        for name, gain in (("a", 0.5), ("b", 1.0), ("c", 2.0)):
            _write_track(self.data, name, gain)
        self.items = scan_dataset(self.data)
        self.plan = ChunkPlan(chunk_len=200, overlap=0.2)
        self.denoiser = GaussianOracleDenoiser(mean=0.0, std=0.25)
        for target in ("sepdiff.metrics.evaluate.output", "sepdiff.metrics.ablation.output"):
            patcher = patch(target)
            patcher.start()
            self.addCleanup(patcher.stop)

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class TestEvalResult(unittest.TestCase):
    def test_median_is_order_independent(self):
        scores = [TrackScore(f"t{i}", sdr_db=v, sir_db=2 * v, baseline_sdr_db=v - 1) for i, v in enumerate([5, 1, 9, 3])]
        forward = EvalResult(scores=scores)
        backward = EvalResult(scores=list(reversed(scores)))
        self.assertEqual(forward.median_sdr_db, 4.0)
        self.assertEqual(forward.median_sdr_db, backward.median_sdr_db)
        self.assertEqual(forward.summary(0).median_improvement_db, 1.0)

    def test_non_finite_values_ignored(self):
        scores = [TrackScore("a", 1.0, float("nan"), 0.0), TrackScore("b", 3.0, 4.0, 0.0)]
        self.assertEqual(EvalResult(scores=scores).median_sir_db, 4.0)

    def test_mean_of_medians(self):
        scores = [TrackScore("a", 2.0, 0.0, 0.0, repeat_index=0), TrackScore("a", 4.0, 0.0, 0.0, repeat_index=1)]
        self.assertEqual(EvalResult(scores=scores).median_sdr_db, 3.0)


class TestEvaluateEstimates(EvalCase):
    def test_oracle_estimates_hit_cap(self):
        result = evaluate_estimates(self.items, self.data)
        self.assertEqual(result.median_sdr_db, DB_CAP)
        self.assertEqual(result.track_count, 3)

    def test_mixture_baseline(self):
        result = evaluate_estimates(self.items, self.data)
        expected = []
        for name in ("a", "b", "c"):
            mixture, vocals = load_item(next(i for i in self.items if i.name == name))
            expected.append(sdr(vocals, mixture))
        self.assertAlmostEqual(result.summary(0).median_baseline_sdr_db, float(np.median(expected)))
        self.assertGreater(result.summary(0).median_baseline_sdr_db, -10.0)

    def test_empty(self):
        with self.assertRaises(EmptyDatasetError):
            evaluate_estimates([], self.data)


class TestEvaluateModel(EvalCase):
    def test_deterministic_repeats_collapse(self):
        cfg = SamplerConfig(steps=5, eta=0.0, cutoff_hz=None, seed=3)
        result = evaluate_model(self.items, self.denoiser, cfg, self.plan, repeats=5)
        self.assertEqual(result.repeats, [0])
        again = evaluate_model(self.items, self.denoiser, cfg, self.plan, repeats=1)
        self.assertEqual([s.sdr_db for s in result.scores], [s.sdr_db for s in again.scores])

    def test_stochastic_repeats_and_csv(self):
        cfg = SamplerConfig(steps=5, eta=0.4, cutoff_hz=2000.0, seed=3)
        result = evaluate_model(self.items, self.denoiser, cfg, self.plan, repeats=2,
                                estimates_out=self.path("estimates"))
        self.assertEqual(result.repeats, [0, 1])
        self.assertTrue(os.path.exists(os.path.join(self.path("estimates"), "a", "vocals.wav")))

        path = self.path("eval.csv")
        write_eval_csv(path, result)
        with open(path) as f:
            self.assertTrue(f.readline().startswith("# sepdiff eval csv v1"))
        rows = read_csv(path)
        self.assertEqual(len(rows), 2 * 3 + 2 + 1)
        self.assertEqual([r["track"] for r in rows[-3:]], ["c", "median", "mean"])
        self.assertEqual(rows[0]["cutoff_hz"], "2000.000000")
        self.assertEqual(rows[-1]["repeat_index"], "-1")


class TestAblation(EvalCase):
    def test_grid_rows_and_resume(self):
        grid = AblationGrid(steps=(2, 3), etas=(0.0, 0.4), cutoffs_hz=(None, 2000.0))
        base = SamplerConfig(seed=1)
        path = self.path("ablation.csv")
        results = run_ablation(self.items, self.denoiser, grid, base, self.plan, path, repeats=1)
        self.assertEqual(len(results), 8)
        rows = read_csv(path)
        self.assertEqual(sum(r["track"] == "median" for r in rows), 8)
        self.assertEqual(sum(r["track"] == "mean" for r in rows), 8)

        again = run_ablation(self.items, self.denoiser, grid, base, self.plan, path, repeats=1)
        self.assertEqual(again, [])
        self.assertEqual(len(read_csv(path)), len(rows))

    def test_eta_zero_cells_run_once(self):
        grid = AblationGrid(steps=(2,), etas=(0.0, 0.4), cutoffs_hz=(None,))
        path = self.path("ablation.csv")
        run_ablation(self.items, self.denoiser, grid, SamplerConfig(seed=1), self.plan, path, repeats=3)
        medians = [r for r in read_csv(path) if r["track"] == "median"]
        self.assertEqual([r["eta"] for r in medians], ["0.000000", "0.400000", "0.400000", "0.400000"])

    def test_parse_cutoff(self):
        self.assertIsNone(parse_cutoff("none"))
        self.assertEqual(parse_cutoff("600"), 600.0)


if __name__ == "__main__":
    unittest.main()

import os
import tempfile
import unittest

import yaml

from sepdiff.config import dump_config, from_mapping, load_config, read_config_file, to_mapping
from sepdiff.diffusion import SamplerConfig
from sepdiff.errors import ConfigError
from sepdiff.metrics import AblationGrid
from sepdiff.model import ModelConfig, preset


class TestConfigFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text):
        path = os.path.join(self.tmp.name, "config.yaml")
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            read_config_file(os.path.join(self.tmp.name, "absent.yaml"))

    def test_empty_file_is_empty_mapping(self):
        self.assertEqual(read_config_file(self.write("")), {})

    def test_not_a_mapping(self):
        with self.assertRaises(ConfigError):
            read_config_file(self.write("- 1\n- 2\n"))

    def test_bad_yaml(self):
        with self.assertRaises(ConfigError):
            read_config_file(self.write("steps: [1, 2\n"))

    def test_file_then_overrides(self):
        path = self.write("steps: 20\neta: 0.8\ncutoff_hz: null\n")
        cfg = load_config(SamplerConfig, path, eta=0.2, seed=None)
        self.assertEqual(cfg, SamplerConfig(steps=20, eta=0.2, cutoff_hz=None))

    def test_dump_reloads(self):
        config = preset("tiny")
        path = self.write(dump_config(config))
        self.assertEqual(load_config(ModelConfig, path), config)


class TestFromMapping(unittest.TestCase):
    def test_unknown_key(self):
        with self.assertRaisesRegex(ConfigError, "stepz"):
            from_mapping(SamplerConfig, {"stepz": 3})

    def test_type_checks(self):
        with self.assertRaises(ConfigError):
            from_mapping(SamplerConfig, {"steps": 2.5})
        with self.assertRaises(ConfigError):
            from_mapping(SamplerConfig, {"eta": True})
        with self.assertRaises(ConfigError):
            from_mapping(ModelConfig, {"down_factors": 2})

    def test_ints_widen_to_float(self):
        cfg = from_mapping(SamplerConfig, {"eta": 1, "cutoff_hz": 600})
        self.assertIsInstance(cfg.eta, float)
        self.assertEqual(cfg.cutoff_hz, 600.0)

    def test_invalid_values_become_config_errors(self):
        with self.assertRaises(ConfigError):
            from_mapping(SamplerConfig, {"steps": 0})

    def test_base_is_kept(self):
        cfg = from_mapping(ModelConfig, {"channel_count": 1}, base=preset("toy"))
        self.assertEqual(cfg.channel_count, 1)
        self.assertEqual(cfg.levels, preset("toy").levels)

    def test_sequences_and_optionals(self):
        grid = from_mapping(AblationGrid, {"steps": [10], "etas": [0, 0.5], "cutoffs_hz": [None, 600]})
        self.assertEqual(grid.steps, (10,))
        self.assertEqual(grid.cutoffs_hz, (None, 600.0))
        self.assertEqual(yaml.safe_load(dump_config(grid))["cutoffs_hz"], [None, 600.0])
        self.assertEqual(to_mapping(grid)["etas"], [0.0, 0.5])


if __name__ == "__main__":
    unittest.main()

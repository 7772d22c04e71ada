import os
import zipfile
from typing import Optional

import numpy as np
import yaml

from ..config import from_mapping, to_mapping
from ..errors import ConfigError, ConfigMismatchError, ModelFormatError, VersionMismatchError
from ..fileio import atomic_path
from .network import SeparationModel
from .types import ModelConfig

FORMAT_VERSION = "sepdiff-model-1"
_VERSION_KEY = "__version__"
_CONFIG_KEY = "__config__"


def save_model(path: str, model: SeparationModel):
    """
    Writes one .npz container: a version tag, the YAML config, and every parameter
    (frozen Fourier frequencies included) as little-endian float32 under its dotted name.
    """
    config_bytes = yaml.safe_dump(to_mapping(model.config), sort_keys=False).encode("utf-8")
    arrays = {
        _VERSION_KEY: np.array(FORMAT_VERSION),
        _CONFIG_KEY: np.frombuffer(config_bytes, dtype=np.uint8),
    }
    for name, data in model.state_dict().items():
        arrays[name] = np.ascontiguousarray(data, dtype="<f4")
    with atomic_path(path) as tmp:
        with open(tmp, "wb") as f:
            np.savez(f, **arrays)


def read_model_config(path: str) -> ModelConfig:
    with _open(path) as archive:
        return _config_from(archive, path)


def _open(path: str):
    if not os.path.isfile(path):
        raise ModelFormatError(f"Model file not found: {path}")
    try:
        return np.load(path, allow_pickle=False)
    except (OSError, ValueError, EOFError, zipfile.BadZipFile) as e:
        raise ModelFormatError(f"Corrupt model file {path}: {e}")


def _config_from(archive, path: str) -> ModelConfig:
    if _VERSION_KEY not in archive.files or _CONFIG_KEY not in archive.files:
        raise ModelFormatError(f"Corrupt model file {path}: missing header")
    version = str(archive[_VERSION_KEY])
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"Model file {path} has format '{version}', expected '{FORMAT_VERSION}'")
    try:
        values = yaml.safe_load(archive[_CONFIG_KEY].tobytes().decode("utf-8"))
        return from_mapping(ModelConfig, values)
    except (yaml.YAMLError, UnicodeDecodeError, ConfigError) as e:
        raise ModelFormatError(f"Corrupt model config in {path}: {e}")


def load_model(path: str, expected_config: Optional[ModelConfig] = None) -> SeparationModel:
    """Restores a model exactly; a config differing from `expected_config` is an error."""
    with _open(path) as archive:
        config = _config_from(archive, path)
        if expected_config is not None and expected_config != config:
            raise ConfigMismatchError(
                f"Model file {path} was saved with a different configuration than requested")

        model = SeparationModel(config)
        stored = set(archive.files) - {_VERSION_KEY, _CONFIG_KEY}
        expected = set(name for name, _ in model.named_parameters())
        if stored != expected:
            missing = sorted(expected - stored)[:3]
            extra = sorted(stored - expected)[:3]
            raise ConfigMismatchError(
                f"Parameters in {path} do not match its configuration (missing {missing}, unexpected {extra})")
        try:
            for name, param in model.named_parameters():
                data = archive[name]
                if data.shape != param.shape:
                    raise ConfigMismatchError(
                        f"Parameter {name} in {path} has shape {data.shape}, expected {param.shape}")
                param.data = data.astype(np.float32)
        except (OSError, ValueError, EOFError, zipfile.BadZipFile) as e:
            raise ModelFormatError(f"Corrupt model file {path}: {e}")
    return model

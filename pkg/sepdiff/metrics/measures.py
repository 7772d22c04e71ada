from typing import Union

import numpy as np

from ..audio import AudioBuffer
from ..errors import InvalidArgumentError, UndefinedReferenceError

DB_CAP = 100.0

Signal = Union[AudioBuffer, np.ndarray]


def _samples(x: Signal) -> np.ndarray:
    data = x.samples if isinstance(x, AudioBuffer) else np.asarray(x)
    return np.atleast_2d(data).astype(np.float64)


def _same_shape(*arrays: np.ndarray):
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise InvalidArgumentError(f"Signals must have equal shapes, got {sorted(shapes)}")


def _ratio_db(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return DB_CAP
    if numerator == 0.0:
        return -DB_CAP
    return float(np.clip(10.0 * np.log10(numerator / denominator), -DB_CAP, DB_CAP))


def sdr(reference: Signal, estimate: Signal) -> float:
    """Utterance-level SDR: reference energy over residual energy, all channels pooled."""
    s, e = _samples(reference), _samples(estimate)
    _same_shape(s, e)
    energy = float(np.sum(s * s))
    if energy == 0.0:
        raise UndefinedReferenceError("SDR is undefined for an all-zero reference")
    return _ratio_db(energy, float(np.sum((s - e) ** 2)))


def sir(target: Signal, accompaniment: Signal, estimate: Signal) -> float:
    """
    Projects the estimate onto span{target, accompaniment} per channel by least squares and
    compares the energy of the two components.
    """
    s, a, e = _samples(target), _samples(accompaniment), _samples(estimate)
    _same_shape(s, a, e)
    if not np.any(s) or not np.any(a):
        raise UndefinedReferenceError("SIR needs non-zero target and accompaniment references")

    target_energy = interference_energy = 0.0
    for ch in range(s.shape[0]):
        basis = np.stack([s[ch], a[ch]], axis=1)
        gram = basis.T @ basis
        if np.linalg.det(gram) <= 1e-12 * gram[0, 0] * gram[1, 1]:
            raise UndefinedReferenceError(f"Target and accompaniment are collinear in channel {ch}")
        coef = np.linalg.solve(gram, basis.T @ e[ch])
        target_energy += coef[0] ** 2 * gram[0, 0]
        interference_energy += coef[1] ** 2 * gram[1, 1]
    return _ratio_db(float(target_energy), float(interference_energy))

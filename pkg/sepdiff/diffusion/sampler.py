from typing import Any, Callable, List, Optional, Tuple

import numpy as np

from ..audio import AudioBuffer
from ..dsp import BiquadCascade, design_butterworth_hp, normalized_filtered_noise
from ..errors import InvalidArgumentError, NumericFailureError
from ..streams import SubStream, make_rng
from .schedule import alpha_beta, eps_from_v, make_schedule, x0_from_v
from .types import Denoiser, SamplerConfig, StepDiagnostics

# relative slack for delta^2 <= beta_prev^2 when the two are equal up to rounding
_VARIANCE_SLACK = 1e-12


def refinement_scales(eta: float, sigma_t: float, sigma_prev: float) -> Tuple[float, float]:
    """
    DDIM noise split for the step sigma_t -> sigma_prev:

        delta = eta * (beta_prev / beta_t) * sqrt(1 - alpha_t^2 / alpha_prev^2)
        beta' = sqrt(beta_prev^2 - delta^2)
    """
    if eta < 0:
        raise InvalidArgumentError(f"eta must be >= 0, got {eta}")
    if not 0.0 <= sigma_prev < sigma_t <= 1.0:
        raise InvalidArgumentError(f"Need 0 <= sigma_prev < sigma_t <= 1, got {sigma_prev}, {sigma_t}")

    alpha_t, beta_t = (float(c) for c in alpha_beta(sigma_t))
    alpha_p, beta_p = (float(c) for c in alpha_beta(sigma_prev))
    if eta == 0:
        return 0.0, beta_p

    delta = eta * (beta_p / beta_t) * np.sqrt(1.0 - (alpha_t * alpha_t) / (alpha_p * alpha_p))
    delta = float(delta)
    if delta * delta > beta_p * beta_p * (1.0 + _VARIANCE_SLACK):
        raise InvalidArgumentError(
            f"eta={eta} too large for step sigma {sigma_t} -> {sigma_prev}: "
            f"delta^2={delta * delta:.6g} exceeds beta_prev^2={beta_p * beta_p:.6g}")
    if delta == 0.0:
        return 0.0, beta_p
    return delta, float(np.sqrt(max(beta_p * beta_p - delta * delta, 0.0)))


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x, dtype=np.float64))))


def ddim_step(x_t: AudioBuffer, sigma_t: float, sigma_prev: float, denoiser: Denoiser, condition: Any,
              cfg: SamplerConfig, rng: Optional[np.random.Generator], t: int = 0,
              hpf: Optional[BiquadCascade] = None) -> Tuple[AudioBuffer, StepDiagnostics]:
    """
    One reverse step. `condition` is what `denoiser.prepare` returned for the mixture.

    The final step (sigma_prev = 0) returns the x0 estimate without refinement noise;
    with eta = 0 no noise is drawn at all. `hpf` is a prebuilt refinement filter; when it
    is omitted the filter is designed from `cfg`.
    """
    v_hat = np.asarray(denoiser.predict_v(x_t.samples, sigma_t, condition))
    if v_hat.shape != x_t.shape:
        raise InvalidArgumentError(f"Denoiser returned shape {v_hat.shape} for input {x_t.shape}")
    if not np.all(np.isfinite(v_hat)):
        raise NumericFailureError("Denoiser produced non-finite output", where=f"step {t} (sigma={sigma_t:g})")

    x0_hat = x0_from_v(x_t.samples, v_hat, sigma_t)
    x0_rms = _rms(x0_hat)

    if sigma_prev == 0.0:
        diag = StepDiagnostics(t=t, sigma=sigma_t, delta=0.0, beta_prime=0.0, x0_estimate_rms=x0_rms)
        return x_t.with_samples(x0_hat), diag

    eps_hat = eps_from_v(x_t.samples, v_hat, sigma_t)
    delta, beta_prime = refinement_scales(cfg.eta, sigma_t, sigma_prev)
    alpha_p = float(alpha_beta(sigma_prev)[0])

    x_prev = alpha_p * x0_hat.astype(np.float64) + beta_prime * eps_hat.astype(np.float64)
    if delta > 0.0:
        if rng is None:
            raise InvalidArgumentError("A stochastic step needs a noise stream")
        if hpf is None:
            hpf = refinement_filter(cfg, x_t.sample_rate)
        noise = normalized_filtered_noise(hpf, x_t.shape, rng, sample_rate=x_t.sample_rate)
        x_prev = x_prev + delta * noise.samples.astype(np.float64)

    if not np.all(np.isfinite(x_prev)):
        raise NumericFailureError("Sampler state became non-finite", where=f"step {t} (sigma={sigma_t:g})")
    diag = StepDiagnostics(t=t, sigma=sigma_t, delta=delta, beta_prime=beta_prime, x0_estimate_rms=x0_rms)
    return x_t.with_samples(x_prev), diag


def refinement_filter(cfg: SamplerConfig, sample_rate: int) -> Optional[BiquadCascade]:
    if cfg.cutoff_hz is None or cfg.deterministic:
        return None
    return design_butterworth_hp(cfg.cutoff_hz, sample_rate, cfg.filter_order)


def sample(mixture: AudioBuffer, denoiser: Denoiser, cfg: SamplerConfig,
           on_step: Optional[Callable[[StepDiagnostics], None]] = None) -> Tuple[AudioBuffer, List[StepDiagnostics]]:
    """
    Separates `mixture` by denoising x_T ~ N(0, I) from sigma = 1 down to 0.

    The starting noise comes from the sampling stream of `cfg.seed`; refinement noise from
    the refinement stream of (seed, repeat_index), so eta = 0 runs never depend on the repeat.
    """
    expected_channels = getattr(denoiser, "channel_count", None)
    if expected_channels is not None and mixture.channels != expected_channels:
        raise InvalidArgumentError(
            f"Mixture has {mixture.channels} channels, the model expects {expected_channels}")
    expected_rate = getattr(denoiser, "sample_rate", None)
    if expected_rate is not None and mixture.sample_rate != expected_rate:
        raise InvalidArgumentError(
            f"Mixture sample rate {mixture.sample_rate} Hz, the model expects {expected_rate} Hz")
    cfg.validate_for(mixture.sample_rate)

    schedule = make_schedule(cfg.steps)
    hpf = refinement_filter(cfg, mixture.sample_rate)
    init_rng = make_rng(cfg.seed, SubStream.SAMPLING)
    refine_rng = None if cfg.deterministic else make_rng(cfg.seed, SubStream.REFINEMENT, cfg.repeat_index)

    condition = denoiser.prepare(mixture.samples)
    x = mixture.with_samples(init_rng.standard_normal(mixture.shape))
    trace = []
    for t, sigma_t, sigma_prev in schedule.reverse_pairs():
        x, diag = ddim_step(x, sigma_t, sigma_prev, denoiser, condition, cfg, refine_rng, t=t, hpf=hpf)
        trace.append(diag)
        if on_step is not None:
            on_step(diag)
    return x, trace

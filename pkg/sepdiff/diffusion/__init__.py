from .types import Spacing, NoiseSchedule, DiffusionCoeffs, SamplerConfig, StepDiagnostics, Denoiser
from .schedule import (make_schedule, coeffs, alpha_beta, diffuse, velocity, x0_from_v, eps_from_v,
                       forward_diffuse, velocity_target, recover_x0, recover_eps)
from .sampler import refinement_scales, refinement_filter, ddim_step, sample
from .separate import separate, chunk_config, trace_rows, TRACE_HEADER

__all__ = ['Spacing', 'NoiseSchedule', 'DiffusionCoeffs', 'SamplerConfig', 'StepDiagnostics', 'Denoiser',
           'make_schedule', 'coeffs', 'alpha_beta', 'diffuse', 'velocity', 'x0_from_v', 'eps_from_v',
           'forward_diffuse', 'velocity_target', 'recover_x0', 'recover_eps',
           'refinement_scales', 'refinement_filter', 'ddim_step', 'sample',
           'separate', 'chunk_config', 'trace_rows', 'TRACE_HEADER']

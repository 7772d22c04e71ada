from .types import ModelConfig, ParameterReport, PRESETS, preset
from .layers import Parameter, Module, ParamFactory
from .embedding import StepEmbedding
from .conditioner import Conditioner, ConditionerOutput
from .generator import Generator
from .network import SeparationModel, parameter_count
from .oracle import GaussianOracleDenoiser, oracle_predict_v, oracle_x0
from .serialization import save_model, load_model, read_model_config, FORMAT_VERSION

__all__ = ['ModelConfig', 'ParameterReport', 'PRESETS', 'preset', 'Parameter', 'Module', 'ParamFactory',
           'StepEmbedding', 'Conditioner', 'ConditionerOutput', 'Generator', 'SeparationModel',
           'parameter_count', 'GaussianOracleDenoiser', 'oracle_predict_v', 'oracle_x0',
           'save_model', 'load_model', 'read_model_config', 'FORMAT_VERSION']

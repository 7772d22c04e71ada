from .types import AudioBuffer, DatasetItem, DatasetLayout, WavFormat
from .wav import read_wav, write_wav, quantize_pcm16
from .dataset import scan_dataset, load_item

__all__ = ['AudioBuffer', 'DatasetItem', 'DatasetLayout', 'WavFormat',
           'read_wav', 'write_wav', 'quantize_pcm16', 'scan_dataset', 'load_item']

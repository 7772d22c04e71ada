from .types import SynthSpec
from .generate import SPLITS, phrase_envelope, render_voice, render_accompaniment, render_track, synthesize

__all__ = ['SynthSpec', 'SPLITS', 'phrase_envelope', 'render_voice', 'render_accompaniment', 'render_track',
           'synthesize']

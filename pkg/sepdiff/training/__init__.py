from .types import TrainingConfig, LossReport
from .losses import mse, draw_noise, diffusion_loss, aux_latent_loss, aux_reconstruction_loss, total_loss
from .augment import rms_db, filter_and_augment
from .optimizer import AdamW, learning_rate
from .trainer import ChunkSampler, Trainer, train, loss_curve_path, checkpoint_path, LOSS_HEADER

__all__ = ['TrainingConfig', 'LossReport', 'mse', 'draw_noise', 'diffusion_loss', 'aux_latent_loss',
           'aux_reconstruction_loss', 'total_loss', 'rms_db', 'filter_and_augment', 'AdamW',
           'learning_rate', 'ChunkSampler', 'Trainer', 'train', 'loss_curve_path', 'checkpoint_path',
           'LOSS_HEADER']

from .checkpoint import Checkpoint, load_checkpoint, load_parameters, save_checkpoint
from .data import TrainingData, apply_noise_augmentation, batches
from .losses import LOSS_VARIANTS, coupled_loss, trainable_networks
from .loop import TrainingHistory, fit, predict, pretrain_ae, train_coupled, train_denoiser
from .pipeline import MODEL_DIR, reconstruct_images, run_training

"""toytrainer: reference masked-LM consumer for currikit shard manifests."""

__version__ = "0.1.0"

from .data import DigestMismatchError, Plan, load_plan
from .masking import mask_batch
from .model import ModelPreset, TinyMaskedLM
from .train import TrainRun, train

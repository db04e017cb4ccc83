"""
Sequence-to-sequence captioning model and its checkpoint format.
"""
from .model import (
    GRU_LAYERS,
    Seq2SeqModel,
    Context,
    DecodeTrainResult,
    encode,
    encode_batch,
    decode_train,
    decode_greedy,
    teacher_forced_predictions
)
from .checkpoint import (
    MAGIC,
    VERSION,
    Checkpoint,
    CheckpointHeader,
    encode_checkpoint,
    decode_checkpoint,
    save_checkpoint,
    read_checkpoint,
    check_against_template,
    load_checkpoint,
    read_checkpoint_header
)

__all__ = [
    'GRU_LAYERS',
    'Seq2SeqModel',
    'Context',
    'DecodeTrainResult',
    'encode',
    'encode_batch',
    'decode_train',
    'decode_greedy',
    'teacher_forced_predictions',
    'MAGIC',
    'VERSION',
    'Checkpoint',
    'CheckpointHeader',
    'encode_checkpoint',
    'decode_checkpoint',
    'save_checkpoint',
    'read_checkpoint',
    'check_against_template',
    'load_checkpoint',
    'read_checkpoint_header'
]

"""
Fully-training variant: trainable audio and text summarizers with an auxiliary label head.
"""
from .summarizers import (
    AUDIO_CHANNELS,
    MIN_SPECTROGRAM_SIZE,
    AudioSummarizerParams,
    AudioCache,
    TextSummarizerParams,
    audio_summarize,
    audio_summarize_backward,
    text_summarize,
    text_summarize_backward
)
from .label_head import (
    LabelHeadParams,
    MultitaskLoss,
    label_head_forward,
    label_head_backward,
    multitask_loss
)
from .bundle import (
    RawTrack,
    BundleLoss,
    FullyTrainBundle,
    track_features,
    playlist_context,
    bundle_loss
)

__all__ = [
    'AUDIO_CHANNELS',
    'MIN_SPECTROGRAM_SIZE',
    'AudioSummarizerParams',
    'AudioCache',
    'TextSummarizerParams',
    'audio_summarize',
    'audio_summarize_backward',
    'text_summarize',
    'text_summarize_backward',
    'LabelHeadParams',
    'MultitaskLoss',
    'label_head_forward',
    'label_head_backward',
    'multitask_loss',
    'RawTrack',
    'BundleLoss',
    'FullyTrainBundle',
    'track_features',
    'playlist_context',
    'bundle_loss'
]

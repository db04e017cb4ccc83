"""
Music playlist captioning: a GRU encoder-decoder that regresses word embeddings
of a playlist description from per-track audio and metadata features.
"""
__version__ = "1.0.0"

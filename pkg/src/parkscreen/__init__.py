"""Parkinson's screening from hand-drawn spiral and wave images.

Pipeline: load a small labeled drawing corpus, expand it with geometric
augmentation, train frozen-backbone two-class classifiers over five CNN
architectures, compare them, export portable model bundles, and serve a
dual-model fused verdict over HTTP.
"""

__version__ = "0.1.0"

CLASS_ORDER = ("healthy", "parkinson")
DRAWING_TYPES = ("spiral", "wave")

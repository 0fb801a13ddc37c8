"""Conditional normalizing flows with a built-in reverse-mode gradient engine."""

from . import engine
from .checkpoint import load_checkpoint, save_checkpoint
from .made import MaskedConditioner
from .model import MAF, NSF, AffineMaskedTransform, FlowModel
from .spline import SplineMaskedTransform

__all__ = [
    "MAF",
    "NSF",
    "AffineMaskedTransform",
    "FlowModel",
    "MaskedConditioner",
    "SplineMaskedTransform",
    "engine",
    "load_checkpoint",
    "save_checkpoint",
]

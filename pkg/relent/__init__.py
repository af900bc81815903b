from . import finstat, finstat2, harness, prob_core, randgen, serializer
from .document import Document, load, parse, serialize
from .errors import RelentError
from .finstat import StatMorphism, compose_stat, re
from .finstat2 import TwoMorphism, ce, hcompose, re2, vcompose
from .prob_core import Channel, DetMap, Dist, FinSet, kl, log_base, set_log_base
from .randgen import GenConfig

__all__ = [
    "Channel",
    "DetMap",
    "Dist",
    "Document",
    "FinSet",
    "GenConfig",
    "RelentError",
    "StatMorphism",
    "TwoMorphism",
    "ce",
    "compose_stat",
    "finstat",
    "finstat2",
    "harness",
    "hcompose",
    "kl",
    "load",
    "log_base",
    "parse",
    "prob_core",
    "randgen",
    "re",
    "re2",
    "serialize",
    "serializer",
    "set_log_base",
    "vcompose",
]

__version__ = "0.1.0"

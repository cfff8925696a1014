"""
Appearance descriptors: encoders, per-track galleries and the cosine metric.
"""

from edgewatch.appearance.encoders import (
    ENCODERS,
    DegeneratePatchError,
    Encoder,
    EncoderSpec,
    HistogramEncoder,
    UnknownEncoderError,
    build_encoder,
    crop,
    encode,
    load_encoder_plugins,
    parse_encoder_size,
    register_encoder,
)
from edgewatch.appearance.gallery import (
    EmptyGalleryError,
    Gallery,
    cosine_distance,
    gallery_push,
    min_cosine_to_gallery,
    normalize_descriptor,
)

__all__ = [
    "ENCODERS",
    "DegeneratePatchError",
    "EmptyGalleryError",
    "Encoder",
    "EncoderSpec",
    "Gallery",
    "HistogramEncoder",
    "UnknownEncoderError",
    "build_encoder",
    "cosine_distance",
    "crop",
    "encode",
    "gallery_push",
    "load_encoder_plugins",
    "min_cosine_to_gallery",
    "normalize_descriptor",
    "parse_encoder_size",
    "register_encoder",
]

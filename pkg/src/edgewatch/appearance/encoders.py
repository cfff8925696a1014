"""
Pluggable appearance encoders.

Any encoder that turns an image patch into a 128-d unit vector qualifies.
The built-in HistogramEncoder is a deterministic colour-histogram projection;
further encoders can be registered from plugin modules exporting ENCODERS.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Type
import importlib
import logging

import numpy as np

from edgewatch.appearance.gallery import normalize_descriptor
from edgewatch.geometry import DESCRIPTOR_DIM, BoundingBox


logger = logging.getLogger(__name__)


class UnknownEncoderError(ValueError):
    """Raised when an encoder name is not registered."""


class DegeneratePatchError(ValueError):
    """Raised for patches with zero area."""


@dataclass(frozen=True)
class EncoderSpec:
    """
    Encoder name and patch input size as (height, width).
    """

    name: str = "histogram"
    input_size: Tuple[int, int] = (64, 32)

    @property
    def label(self) -> str:
        return f"{self.input_size[0]}x{self.input_size[1]}"


def parse_encoder_size(text: str) -> Tuple[int, int]:
    """Parse 'HxW' (e.g. '64x32') into (64, 32)."""
    parts = str(text).lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"Encoder size must look like HxW, got '{text}'")
    try:
        height, width = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"Encoder size must look like HxW, got '{text}'") from None
    if height <= 0 or width <= 0:
        raise ValueError(f"Encoder size must be positive, got '{text}'")
    return height, width


class Encoder(ABC):
    """Base interface for appearance encoders."""

    name: str

    def __init__(self, input_size: Tuple[int, int] = (64, 32)):
        self.input_size = input_size

    @abstractmethod
    def encode_patch(self, patch: np.ndarray) -> np.ndarray:
        """Return a raw 128-value descriptor for a validated (H, W, 3) patch."""
        raise NotImplementedError

    def encode(self, patch: np.ndarray) -> np.ndarray:
        """Validate the patch, encode it and enforce the unit-norm contract."""
        patch = _as_rgb(patch)
        return normalize_descriptor(self.encode_patch(patch))


class HistogramEncoder(Encoder):
    """
    Grid colour-histogram encoder.

    The patch is resampled to input_size, split into a 4x2 grid, and each cell
    contributes an 8-bin histogram of a hue-like and of an intensity-like
    channel: 4 * 2 * 8 * 2 = 128 values, L2-normalized.
    """

    name = "histogram"
    grid = (4, 2)
    bins = 8

    def encode_patch(self, patch: np.ndarray) -> np.ndarray:
        resized = resample(patch, self.input_size)
        hue, intensity = color_channels(resized)

        rows, cols = self.grid
        height, width = self.input_size
        row_cell = np.minimum(np.arange(height) * rows // height, rows - 1)
        col_cell = np.minimum(np.arange(width) * cols // width, cols - 1)
        cell = (row_cell[:, None] * cols + col_cell[None, :]).ravel()

        n_cells = rows * cols
        hue_hist = self._cell_histogram(cell, hue.ravel(), n_cells)
        intensity_hist = self._cell_histogram(cell, intensity.ravel(), n_cells)
        return np.concatenate([hue_hist, intensity_hist], axis=1).ravel()

    def _cell_histogram(self, cell: np.ndarray, values: np.ndarray, n_cells: int) -> np.ndarray:
        bin_index = np.minimum((values * self.bins).astype(np.int64), self.bins - 1)
        counts = np.bincount(cell * self.bins + bin_index, minlength=n_cells * self.bins)
        return counts.reshape(n_cells, self.bins).astype(np.float64)


def resample(patch: np.ndarray, size: Tuple[int, int]) -> np.ndarray:
    """Nearest-neighbour resample of an (H, W, C) patch to size (h, w)."""
    height, width = size
    src_h, src_w = patch.shape[:2]
    rows = np.arange(height) * src_h // height
    cols = np.arange(width) * src_w // width
    return patch[rows[:, None], cols[None, :]]


def color_channels(patch: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Hue-like and intensity-like channels in [0, 1] from RGB values in [0, 255].
    """
    rgb = patch[..., :3].astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    hue = (np.arctan2(np.sqrt(3.0) * (g - b), 2.0 * r - g - b) + np.pi) / (2.0 * np.pi)
    intensity = (r + g + b) / 3.0
    return np.clip(hue, 0.0, 1.0), np.clip(intensity, 0.0, 1.0)


def crop(image: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Crop a box from an image, clipped to the image bounds."""
    height, width = image.shape[:2]
    x0 = int(np.clip(np.floor(box.x), 0, width))
    y0 = int(np.clip(np.floor(box.y), 0, height))
    x1 = int(np.clip(np.ceil(box.x + box.w), 0, width))
    y1 = int(np.clip(np.ceil(box.y + box.h), 0, height))
    return image[y0:y1, x0:x1]


ENCODERS: Dict[str, Type[Encoder]] = {
    HistogramEncoder.name: HistogramEncoder,
}


def register_encoder(encoder_cls: Type[Encoder]) -> Type[Encoder]:
    if not getattr(encoder_cls, "name", None):
        raise ValueError(f"Encoder {encoder_cls.__name__} must define a name")
    ENCODERS[encoder_cls.name] = encoder_cls
    return encoder_cls


def load_encoder_plugins(plugin_modules: Sequence[str]) -> List[str]:
    """
    Import plugin modules and register the encoders in their ENCODERS dict.
    Returns the names that were registered.
    """
    registered: List[str] = []
    for module_path in plugin_modules:
        module = importlib.import_module(module_path)
        module_encoders = getattr(module, "ENCODERS", {})
        if not isinstance(module_encoders, dict):
            raise ValueError(f"Plugin module {module_path} must export ENCODERS dict")
        for name, encoder_cls in module_encoders.items():
            if not (isinstance(encoder_cls, type) and issubclass(encoder_cls, Encoder)):
                raise ValueError(
                    f"Plugin encoder '{name}' in {module_path} must subclass Encoder"
                )
            ENCODERS[name] = encoder_cls
            registered.append(name)
            logger.debug("Registered encoder '%s' from %s", name, module_path)
    return registered


def build_encoder(spec: EncoderSpec) -> Encoder:
    encoder_cls = ENCODERS.get(spec.name)
    if encoder_cls is None:
        raise UnknownEncoderError(
            f"Unknown encoder '{spec.name}'. Registered encoders: "
            f"{', '.join(sorted(ENCODERS))}"
        )
    return encoder_cls(spec.input_size)


def encode(patch: np.ndarray, spec: EncoderSpec) -> np.ndarray:
    """Encode one patch with the encoder named in spec."""
    return build_encoder(spec).encode(patch)


def _as_rgb(patch: np.ndarray) -> np.ndarray:
    patch = np.asarray(patch)
    if patch.ndim == 2:
        patch = np.repeat(patch[..., None], 3, axis=2)
    if patch.ndim != 3 or patch.shape[2] < 3:
        raise DegeneratePatchError(
            f"Patch must be (H, W) or (H, W, 3), got shape {patch.shape}"
        )
    if patch.shape[0] == 0 or patch.shape[1] == 0:
        raise DegeneratePatchError(f"Patch has zero area (shape {patch.shape})")
    return patch


__all__ = [
    "DESCRIPTOR_DIM",
    "DegeneratePatchError",
    "Encoder",
    "EncoderSpec",
    "ENCODERS",
    "HistogramEncoder",
    "UnknownEncoderError",
    "build_encoder",
    "crop",
    "encode",
    "load_encoder_plugins",
    "parse_encoder_size",
    "register_encoder",
]

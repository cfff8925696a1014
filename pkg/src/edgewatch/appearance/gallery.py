"""
Appearance descriptors and per-track descriptor galleries.
"""

from typing import Iterable
import numpy as np

from edgewatch.geometry import DESCRIPTOR_DIM


class EmptyGalleryError(ValueError):
    """Raised when a distance is requested against an empty gallery."""


def normalize_descriptor(values: Iterable[float]) -> np.ndarray:
    """
    Return values as a float64 unit vector of length 128.
    Raises ValueError for wrong length, non-finite values or a zero vector.
    """
    vector = np.asarray(values, dtype=np.float64).reshape(-1)
    if vector.shape != (DESCRIPTOR_DIM,):
        raise ValueError(
            f"Descriptor must have {DESCRIPTOR_DIM} values, got {vector.size}"
        )
    if not np.all(np.isfinite(vector)):
        raise ValueError("Descriptor contains non-finite values")
    norm = np.linalg.norm(vector)
    if norm == 0:
        raise ValueError("Descriptor has zero norm")
    return vector / norm


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - a.b for unit vectors, clipped to [0, 2]."""
    return float(np.clip(1.0 - np.dot(a, b), 0.0, 2.0))


class Gallery:
    """
    Bounded FIFO of descriptors for one track (the set R_k).

    Stored as a fixed ring buffer; once full, each push overwrites the
    oldest entry.
    """

    def __init__(self, capacity: int = 100):
        if capacity <= 0:
            raise ValueError(f"Gallery capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._buffer = np.zeros((capacity, DESCRIPTOR_DIM), dtype=np.float64)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, descriptor: np.ndarray) -> "Gallery":
        self._buffer[self._next] = descriptor
        self._next = (self._next + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)
        return self

    @property
    def descriptors(self) -> np.ndarray:
        """Entries ordered oldest to newest."""
        if self._size < self.capacity:
            return self._buffer[: self._size].copy()
        return np.roll(self._buffer, -self._next, axis=0)

    @property
    def matrix(self) -> np.ndarray:
        """Entries in storage order; a view, for distance computations only."""
        return self._buffer[: self._size]

    def min_cosine_distance(self, queries: np.ndarray) -> np.ndarray:
        """Minimum cosine distance from the gallery to each row of queries."""
        if self._size == 0:
            raise EmptyGalleryError("Gallery is empty")
        similarity = self.matrix @ np.atleast_2d(queries).T
        return np.clip(1.0 - similarity.max(axis=0), 0.0, 2.0)


def gallery_push(gallery: Gallery, descriptor: np.ndarray) -> Gallery:
    return gallery.push(descriptor)


def min_cosine_to_gallery(gallery: Gallery, query: np.ndarray) -> float:
    return float(gallery.min_cosine_distance(query)[0])

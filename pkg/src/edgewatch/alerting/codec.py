"""
Binary alert frames.

Layout, big-endian:

    magic 0xA7 | version 0x01 | node_id u16 | timestamp u32 |
    code:4 track_count:4 | score_q u8 | track_id u16 * track_count | crc16

The CRC is CRC-16/CCITT-FALSE over every preceding byte. A frame is
12 + 2 * track_count bytes, at most 42. Frames carry no coordinates, pixels
or descriptors.
"""

from dataclasses import dataclass
from typing import Tuple
import binascii
import struct

from edgewatch.anomaly.events import AnomalyCode, AnomalyEvent


MAGIC = 0xA7
VERSION = 0x01
MAX_TRACKS = 15
MAX_FRAME_BYTES = 51
HEADER = struct.Struct(">BBHIBB")
TRACK_ID = struct.Struct(">H")
CRC = struct.Struct(">H")
MIN_FRAME_BYTES = HEADER.size + CRC.size
MAX_CODE = int(max(AnomalyCode))


class AlertEncodeError(ValueError):
    """Raised for alerts that cannot be represented on the wire."""


class AlertDecodeError(ValueError):
    """Base class for rejected frames."""


class BadMagicError(AlertDecodeError):
    pass


class UnsupportedVersionError(AlertDecodeError):
    pass


class LengthMismatchError(AlertDecodeError):
    pass


class CrcMismatchError(AlertDecodeError):
    pass


def crc16_ccitt(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout."""
    return binascii.crc_hqx(data, 0xFFFF)


def quantize_score(score: float) -> int:
    return int(round(min(max(score, 0.0), 1.0) * 255))


@dataclass(frozen=True)
class AnomalyAlert:
    node_id: int
    timestamp: int
    code: int
    score_q: int
    track_ids: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "track_ids", tuple(int(t) for t in self.track_ids))
        _check_range("node_id", self.node_id, 0xFFFF)
        _check_range("timestamp", self.timestamp, 0xFFFFFFFF)
        _check_range("code", self.code, MAX_CODE)
        _check_range("score_q", self.score_q, 0xFF)
        if len(self.track_ids) > MAX_TRACKS:
            raise AlertEncodeError(
                f"An alert carries at most {MAX_TRACKS} track ids, got {len(self.track_ids)}"
            )
        for track_id in self.track_ids:
            _check_range("track id", track_id, 0xFFFF)

    @property
    def track_count(self) -> int:
        return len(self.track_ids)

    @property
    def score(self) -> float:
        return self.score_q / 255.0

    @classmethod
    def from_event(cls, event: AnomalyEvent, node_id: int, timestamp: int) -> "AnomalyAlert":
        """
        Build the wire record for an event. Only the first 15 ids fit; ids
        are reduced modulo 2**16.
        """
        track_ids = tuple(track_id & 0xFFFF for track_id in event.track_ids[:MAX_TRACKS])
        return cls(
            node_id=node_id,
            timestamp=timestamp & 0xFFFFFFFF,
            code=int(event.code),
            score_q=quantize_score(event.score),
            track_ids=track_ids,
        )


def _check_range(name: str, value: int, upper: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= upper:
        raise AlertEncodeError(f"{name} must be an integer in [0, {upper}], got {value!r}")


def encode_alert(alert: AnomalyAlert) -> bytes:
    body = bytearray(
        HEADER.pack(
            MAGIC,
            VERSION,
            alert.node_id,
            alert.timestamp,
            (alert.code << 4) | alert.track_count,
            alert.score_q,
        )
    )
    for track_id in alert.track_ids:
        body += TRACK_ID.pack(track_id)
    body += CRC.pack(crc16_ccitt(bytes(body)))
    return bytes(body)


def decode_alert(frame: bytes) -> AnomalyAlert:
    frame = bytes(frame)
    if len(frame) < MIN_FRAME_BYTES:
        raise LengthMismatchError(
            f"Frame of {len(frame)} bytes is shorter than the {MIN_FRAME_BYTES}-byte minimum"
        )
    magic, version, node_id, timestamp, packed, score_q = HEADER.unpack_from(frame)
    if magic != MAGIC:
        raise BadMagicError(f"Bad magic byte 0x{magic:02X}")
    if version != VERSION:
        raise UnsupportedVersionError(f"Unsupported frame version {version}")
    count = packed & 0x0F
    expected = MIN_FRAME_BYTES + TRACK_ID.size * count
    if len(frame) != expected:
        raise LengthMismatchError(
            f"Frame announces {count} tracks ({expected} bytes) but has {len(frame)} bytes"
        )
    (crc,) = CRC.unpack_from(frame, expected - CRC.size)
    if crc != crc16_ccitt(frame[: expected - CRC.size]):
        raise CrcMismatchError(f"CRC mismatch (frame carries 0x{crc:04X})")
    code = packed >> 4
    if code > MAX_CODE:
        raise AlertDecodeError(f"Unknown anomaly code {code}")
    track_ids = tuple(
        TRACK_ID.unpack_from(frame, HEADER.size + TRACK_ID.size * i)[0] for i in range(count)
    )
    return AnomalyAlert(node_id, timestamp, code, score_q, track_ids)


__all__ = [
    "AlertDecodeError",
    "AlertEncodeError",
    "AnomalyAlert",
    "BadMagicError",
    "CrcMismatchError",
    "LengthMismatchError",
    "MAX_FRAME_BYTES",
    "MAX_TRACKS",
    "UnsupportedVersionError",
    "crc16_ccitt",
    "decode_alert",
    "encode_alert",
    "quantize_score",
]

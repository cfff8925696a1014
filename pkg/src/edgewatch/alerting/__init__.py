"""Anomaly alert records, wire codec and delivery sinks."""

from edgewatch.alerting.codec import (
    MAX_FRAME_BYTES,
    MAX_TRACKS,
    AlertDecodeError,
    AlertEncodeError,
    AnomalyAlert,
    BadMagicError,
    CrcMismatchError,
    LengthMismatchError,
    UnsupportedVersionError,
    crc16_ccitt,
    decode_alert,
    encode_alert,
    quantize_score,
)
from edgewatch.alerting.sinks import (
    SINK_NAMES,
    AlertingConfig,
    AlertSink,
    DatagramAlertSink,
    DeliveryReport,
    FileAlertSink,
    SinkResult,
    StdoutAlertSink,
    alert_for_event,
    build_sinks,
    dispatch,
)

__all__ = [
    "AlertDecodeError",
    "AlertEncodeError",
    "AlertSink",
    "AlertingConfig",
    "AnomalyAlert",
    "BadMagicError",
    "CrcMismatchError",
    "DatagramAlertSink",
    "DeliveryReport",
    "FileAlertSink",
    "LengthMismatchError",
    "MAX_FRAME_BYTES",
    "MAX_TRACKS",
    "SINK_NAMES",
    "SinkResult",
    "StdoutAlertSink",
    "UnsupportedVersionError",
    "alert_for_event",
    "build_sinks",
    "crc16_ccitt",
    "decode_alert",
    "dispatch",
    "encode_alert",
    "quantize_score",
]

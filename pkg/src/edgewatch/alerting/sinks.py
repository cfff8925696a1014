"""
Alert delivery - file, datagram and stdout sinks.

Every sink receives the encoded frame. dispatch attempts each configured sink
and records the outcome; a failing sink never stops the others or the
pipeline.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence
import logging
import socket
import threading
import time

from edgewatch.alerting.codec import AnomalyAlert, encode_alert
from edgewatch.anomaly.events import AnomalyEvent


logger = logging.getLogger(__name__)

SINK_NAMES = ("file", "datagram", "stdout")
CLOCKS = ("frame", "wall")


@dataclass(frozen=True)
class AlertingConfig:
    """
    Alert delivery settings.

    clock "frame" stamps alerts with base_timestamp + frame // fps so repeated
    runs write identical alert files; "wall" uses the host clock.
    """

    sinks: Sequence[str] = ("file",)
    alert_file: str = "alerts.hex"
    datagram_host: str = "127.0.0.1"
    datagram_port: int = 5005
    datagram_timeout: float = 1.0
    node_id: int = 1
    clock: str = "frame"
    base_timestamp: int = 0
    fps: int = 10

    def validate(self) -> List[str]:
        errors: List[str] = []
        unknown = [name for name in self.sinks if name not in SINK_NAMES]
        if unknown:
            errors.append(
                f"Unknown alert sink(s): {', '.join(unknown)}. "
                f"Supported: {', '.join(SINK_NAMES)}"
            )
        if not 0 <= self.node_id <= 0xFFFF:
            errors.append(f"node_id must fit 16 bits, got {self.node_id}")
        if not 0 < self.datagram_port <= 0xFFFF:
            errors.append(f"datagram_port must lie in (0, 65535], got {self.datagram_port}")
        if self.clock not in CLOCKS:
            errors.append(f"clock must be one of {', '.join(CLOCKS)}, got '{self.clock}'")
        if self.fps <= 0:
            errors.append(f"fps must be positive, got {self.fps}")
        if self.base_timestamp < 0:
            errors.append(f"base_timestamp must be >= 0, got {self.base_timestamp}")
        return errors

    def timestamp(self, frame: int) -> int:
        if self.clock == "wall":
            return int(time.time()) & 0xFFFFFFFF
        return (self.base_timestamp + frame // self.fps) & 0xFFFFFFFF


@dataclass(frozen=True)
class SinkResult:
    name: str
    ok: bool
    message: str = ""


@dataclass
class DeliveryReport:
    """Per-sink outcome of one dispatch."""

    alert: AnomalyAlert
    results: List[SinkResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(result.ok for result in self.results)

    @property
    def failures(self) -> List[SinkResult]:
        return [result for result in self.results if not result.ok]


class AlertSink:
    """
    Base class for alert sinks. send must write one frame atomically.
    """

    name = "base"

    def send(self, frame: bytes) -> Optional[str]:
        raise NotImplementedError("AlertSink.send must be implemented")

    def close(self) -> None:
        pass


class FileAlertSink(AlertSink):
    """
    Append hex-encoded frames to a file, one LF-terminated line per frame.
    """

    name = "file"

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def send(self, frame: bytes) -> Optional[str]:
        line = frame.hex().upper() + "\n"
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", newline="\n") as handle:
                handle.write(line)
        return f"Alert appended to {self.path}"


class DatagramAlertSink(AlertSink):
    """
    Send each frame as one UDP datagram to host:port.
    """

    name = "datagram"

    def __init__(self, host: str, port: int, timeout: float = 1.0):
        self.host = host
        self.port = port
        self.timeout = timeout
        self._lock = threading.Lock()
        self._socket: Optional[socket.socket] = None

    def send(self, frame: bytes) -> Optional[str]:
        with self._lock:
            if self._socket is None:
                self._socket = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
                self._socket.settimeout(self.timeout)
            try:
                sent = self._socket.sendto(frame, (self.host, self.port))
            except OSError as exc:
                raise RuntimeError(
                    f"Datagram to {self.host}:{self.port} failed: {exc}"
                ) from exc
        if sent != len(frame):
            raise RuntimeError(f"Datagram truncated ({sent} of {len(frame)} bytes)")
        return f"Alert sent to {self.host}:{self.port}"

    def close(self) -> None:
        with self._lock:
            if self._socket is not None:
                self._socket.close()
                self._socket = None


class StdoutAlertSink(AlertSink):
    """
    Print hex-encoded frames to stdout.
    """

    name = "stdout"

    def send(self, frame: bytes) -> Optional[str]:
        print(frame.hex().upper())
        return "Alert printed to stdout"


def build_sinks(config: AlertingConfig, output_dir=None) -> List[AlertSink]:
    """
    Instantiate the configured sinks. A relative alert_file is resolved
    against output_dir when one is given.
    """
    sinks: List[AlertSink] = []
    for name in config.sinks:
        if name == "file":
            path = Path(config.alert_file)
            if output_dir is not None and not path.is_absolute():
                path = Path(output_dir) / path
            sinks.append(FileAlertSink(path))
        elif name == "datagram":
            sinks.append(
                DatagramAlertSink(
                    config.datagram_host, config.datagram_port, config.datagram_timeout
                )
            )
        elif name == "stdout":
            sinks.append(StdoutAlertSink())
        else:
            raise ValueError(
                f"Unknown alert sink '{name}'. Supported: {', '.join(SINK_NAMES)}"
            )
    return sinks


def dispatch(alert: AnomalyAlert, sinks: Sequence[AlertSink]) -> DeliveryReport:
    """
    Encode alert once and hand the frame to every sink.
    """
    report = DeliveryReport(alert=alert)
    frame = encode_alert(alert)
    for sink in sinks:
        try:
            message = sink.send(frame)
            report.results.append(SinkResult(sink.name, True, message or ""))
        except Exception as exc:
            logger.warning("Alert sink '%s' failed: %s", sink.name, exc)
            report.results.append(SinkResult(sink.name, False, str(exc)))
    return report


def alert_for_event(event: AnomalyEvent, config: AlertingConfig) -> AnomalyAlert:
    """Wire record for an event, stamped at the frame the event opened."""
    return AnomalyAlert.from_event(
        event, node_id=config.node_id, timestamp=config.timestamp(event.frame_start)
    )


__all__ = [
    "AlertSink",
    "AlertingConfig",
    "DatagramAlertSink",
    "DeliveryReport",
    "FileAlertSink",
    "SINK_NAMES",
    "SinkResult",
    "StdoutAlertSink",
    "alert_for_event",
    "build_sinks",
    "dispatch",
]

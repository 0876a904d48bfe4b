"""Corner-classification (CC4) intrusion labeling and the event-log pipeline.

Event records are symbolized into binary vectors (one-hot categoricals,
thermometer-coded numerics), classified by a one-shot-trained CC4 network
into Known / Unknown / Attack, and merged with rate-based surge/dropout
alerts into a single timestamp-ordered alert stream.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .detect import (
    AnomalyAlert,
    detect_dropout,
    detect_surges,
    merge_alerts,
)
from .errors import EmptyTrainingSet, SchemaMismatch, WidthMismatch
from .forecast import ForecasterConfig, fit
from .series import TimeSeries, split

PACKET_CLASSES = ("Known", "Unknown", "Attack")


@dataclass(frozen=True)
class EventLogRecord:
    timestamp: datetime
    source_id: str
    fields: dict

    def dedupe_key(self) -> tuple:
        return (self.source_id, self.timestamp,
                tuple(sorted(self.fields.items())))


@dataclass(frozen=True)
class FieldEncoder:
    name: str
    kind: str                        # one_hot | thermometer
    vocabulary: tuple = ()           # one_hot
    bin_edges: tuple = ()            # thermometer; width = len(edges) + 1

    @property
    def width(self) -> int:
        if self.kind == "one_hot":
            return len(self.vocabulary)
        return len(self.bin_edges) + 1

    def encode(self, value) -> tuple[np.ndarray, bool]:
        """Returns (bits, unknown_flag). Out-of-vocabulary -> all zeros."""
        bits = np.zeros(self.width, dtype=np.int8)
        if self.kind == "one_hot":
            try:
                bits[self.vocabulary.index(value)] = 1
            except ValueError:
                return bits, True
            return bits, False
        # thermometer: set the value's bin and every lower bin
        v = float(value)
        bin_index = sum(1 for e in self.bin_edges if v >= e)
        bits[:bin_index + 1] = 1
        return bits, False


@dataclass(frozen=True)
class SymbolSchema:
    encoders: tuple[FieldEncoder, ...]

    @property
    def total_bits(self) -> int:
        return sum(e.width for e in self.encoders)

    def to_json_obj(self) -> dict:
        out = []
        for e in self.encoders:
            if e.kind == "one_hot":
                out.append({"name": e.name, "encoder": "one_hot",
                            "vocabulary": list(e.vocabulary)})
            else:
                out.append({"name": e.name, "encoder": "thermometer",
                            "bin_edges": list(e.bin_edges)})
        return {"fields": out}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SymbolSchema":
        encoders = []
        for f in obj["fields"]:
            if f["encoder"] == "one_hot":
                encoders.append(FieldEncoder(name=f["name"], kind="one_hot",
                                             vocabulary=tuple(f["vocabulary"])))
            else:
                encoders.append(FieldEncoder(name=f["name"], kind="thermometer",
                                             bin_edges=tuple(f["bin_edges"])))
        return cls(encoders=tuple(encoders))


def symbolize(record: EventLogRecord, schema: SymbolSchema) -> tuple[np.ndarray, bool]:
    """Concatenated per-field binary code plus an unknown-value flag."""
    names = {e.name for e in schema.encoders}
    got = set(record.fields)
    if names != got:
        raise SchemaMismatch(f"schema fields {sorted(names)} vs record {sorted(got)}")
    parts = []
    unknown = False
    for enc in schema.encoders:
        bits, flag = enc.encode(record.fields[enc.name])
        parts.append(bits)
        unknown = unknown or flag
    return np.concatenate(parts), unknown


@dataclass
class CC4Network:
    """One-shot corner-classification network.

    One hidden neuron per training sample: input weights 2x-1 in {-1,+1},
    bias r - s + 1 with s the sample's 1-bit count. A hidden neuron fires on
    a probe exactly when its Hamming distance to the training vector is <= r.
    Output weights are +1 to the neuron's own class, -1 to the rest.
    """

    radius: int
    vectors: np.ndarray       # (n_samples, width) in {0,1}
    classes: list[str]

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.int8)

    @property
    def width(self) -> int:
        return self.vectors.shape[1]

    def hidden_weights(self) -> np.ndarray:
        return (2 * self.vectors - 1).astype(np.int8)

    def hidden_biases(self) -> np.ndarray:
        s = self.vectors.sum(axis=1)
        return self.radius - s + 1

    def fires(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=np.int8)
        if vector.shape != (self.width,):
            raise WidthMismatch(f"probe width {vector.shape} vs network {self.width}")
        activation = self.hidden_weights() @ vector + self.hidden_biases()
        return activation > 0

    def to_json_obj(self) -> dict:
        # Weights are reconstructed from the vectors, never stored.
        return {
            "radius": self.radius,
            "vectors": ["".join(map(str, row)) for row in self.vectors.tolist()],
            "classes": list(self.classes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "CC4Network":
        vectors = np.array([[int(ch) for ch in row] for row in obj["vectors"]],
                           dtype=np.int8)
        return cls(radius=obj["radius"], vectors=vectors, classes=list(obj["classes"]))

    @classmethod
    def from_json(cls, text: str) -> "CC4Network":
        return cls.from_json_obj(json.loads(text))


def cc4_train(samples: list[tuple[np.ndarray, str]], radius: int) -> CC4Network:
    """One-shot construction; no iterative optimization."""
    if not samples:
        raise EmptyTrainingSet("no training samples")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    width = len(samples[0][0])
    for vec, cls in samples:
        if len(vec) != width:
            raise WidthMismatch(f"vector width {len(vec)} vs {width}")
        if cls not in PACKET_CLASSES:
            raise ValueError(f"unknown class {cls!r}")
    vectors = np.array([np.asarray(v, dtype=np.int8) for v, _ in samples])
    return CC4Network(radius=radius, vectors=vectors,
                      classes=[cls for _, cls in samples])


def cc4_classify(network: CC4Network, vector: np.ndarray) -> tuple[str, bool]:
    """Argmax over class scores from firing neurons. No firing neuron means
    Unknown with the ambiguity flag; score ties resolve in PACKET_CLASSES
    order with the flag set."""
    firing = network.fires(vector)
    if not firing.any():
        return "Unknown", True
    scores = {cls: 0 for cls in PACKET_CLASSES}
    for fired, cls in zip(firing, network.classes):
        if not fired:
            continue
        for c in scores:
            scores[c] += 1 if c == cls else -1
    best = max(scores.values())
    winners = [c for c in PACKET_CLASSES if scores[c] == best]
    return winners[0], len(winners) > 1


# --- streaming pipeline -----------------------------------------------------


@dataclass
class StreamConfig:
    interval_seconds: float = 60.0
    skew_intervals: int = 5          # records older than this are dropped late
    strict_unknown: bool = False     # Unknown class also raises Intrusion alerts
    confidence: float = 0.95
    surge_window: int = 24
    gap_threshold: int = 3
    train_fraction: float = 0.5
    rate_detectors: bool = True
    queue_capacity: int = 1024       # bound for staged/concurrent deployments


@dataclass
class StreamCounts:
    records_in: int = 0
    emitted_classifications: int = 0
    dropped_malformed: int = 0       # includes duplicates
    dropped_duplicate: int = 0
    dropped_late: int = 0

    def to_json_obj(self) -> dict:
        return {
            "records_in": self.records_in,
            "emitted_classifications": self.emitted_classifications,
            "dropped_malformed": self.dropped_malformed,
            "dropped_duplicate": self.dropped_duplicate,
            "dropped_late": self.dropped_late,
        }


def parse_event_obj(obj: dict) -> EventLogRecord:
    ts = obj.get("ts")
    src = obj.get("src")
    if not ts or not src:
        raise SchemaMismatch("event record requires nonempty ts and src")
    fields = {k: v for k, v in obj.items() if k not in ("ts", "src")}
    return EventLogRecord(timestamp=datetime.fromisoformat(ts),
                          source_id=str(src), fields=fields)


def read_events_jsonl(path) -> list[EventLogRecord]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(parse_event_obj(json.loads(line)))
    return events


def new_id_counts(records: list[EventLogRecord], start: datetime,
                  interval_seconds: float, duration: int) -> TimeSeries:
    """Count distinct never-before-seen source ids per interval."""
    counts = np.zeros(duration)
    seen: set[str] = set()
    for rec in sorted(records, key=lambda r: (r.timestamp, r.source_id)):
        if rec.source_id in seen:
            continue
        seen.add(rec.source_id)
        idx = int((rec.timestamp - start).total_seconds() // interval_seconds)
        if 0 <= idx < duration:
            counts[idx] += 1
    return TimeSeries(start=start, interval_seconds=interval_seconds,
                      values=counts, missing=np.zeros(duration, dtype=bool))


def _rate_alerts(per_source: dict[str, list[datetime]], config: StreamConfig,
                 start: datetime, duration: int) -> list[AnomalyAlert]:
    alerts: list[AnomalyAlert] = []
    for source, stamps in sorted(per_source.items()):
        counts = np.zeros(duration)
        for ts in stamps:
            idx = int((ts - start).total_seconds() // config.interval_seconds)
            if 0 <= idx < duration:
                counts[idx] += 1
        rates = TimeSeries(start=start, interval_seconds=config.interval_seconds,
                           values=counts, missing=np.zeros(duration, dtype=bool))
        alerts.extend(detect_dropout(rates, config.gap_threshold,
                                     zero_is_silence=True, source=source))
        if duration >= 4:
            try:
                train, test = split(rates, config.train_fraction)
                model = fit(ForecasterConfig(variant="moving_average",
                                             ma_window=1), train)
                alerts.extend(detect_surges(test, model, config.confidence,
                                            mode="mean_shift",
                                            window=config.surge_window,
                                            source=source))
            except Exception:
                pass  # degenerate rate series: no surge scoring for this source
    return alerts


def stream_pipeline(records: list[EventLogRecord], schema: SymbolSchema,
                    network: CC4Network, config: StreamConfig,
                    ) -> tuple[list[AnomalyAlert], StreamCounts]:
    """collect -> cleanse -> symbolize -> classify -> emit.

    Records are accepted in roughly increasing time; anything older than the
    bounded skew window is counted late and excluded, never silently
    reordered. End of input flushes everything.
    """
    counts = StreamCounts()
    skew = timedelta(seconds=config.skew_intervals * config.interval_seconds)
    max_ts: datetime | None = None
    seen: set[tuple] = set()
    accepted: list[EventLogRecord] = []

    for rec in records:
        counts.records_in += 1
        if not rec.source_id or rec.timestamp is None:
            counts.dropped_malformed += 1
            continue
        if max_ts is not None and rec.timestamp < max_ts - skew:
            counts.dropped_late += 1
            continue
        if max_ts is None or rec.timestamp > max_ts:
            max_ts = rec.timestamp
        key = rec.dedupe_key()
        if key in seen:
            counts.dropped_duplicate += 1
            counts.dropped_malformed += 1
            continue
        seen.add(key)
        accepted.append(rec)

    accepted.sort(key=lambda r: (r.timestamp, r.source_id))
    intrusion_alerts: list[AnomalyAlert] = []
    per_source: dict[str, list[datetime]] = {}
    for rec in accepted:
        try:
            vector, unknown_value = symbolize(rec, schema)
        except SchemaMismatch:
            counts.dropped_malformed += 1
            continue
        packet_class, ambiguous = cc4_classify(network, vector)
        counts.emitted_classifications += 1
        per_source.setdefault(rec.source_id, []).append(rec.timestamp)
        flag = packet_class == "Attack" or (config.strict_unknown
                                            and packet_class == "Unknown")
        if flag:
            intrusion_alerts.append(AnomalyAlert(
                timestamp=rec.timestamp, kind="Intrusion",
                observed=1.0, expected=0.0, band=None,
                severity="Critical" if packet_class == "Attack" else "Warning",
                source=rec.source_id, packet_class=packet_class,
                ambiguous=ambiguous or unknown_value))

    rate_alerts: list[AnomalyAlert] = []
    if config.rate_detectors and accepted:
        start = accepted[0].timestamp
        span = (accepted[-1].timestamp - start).total_seconds()
        duration = int(span // config.interval_seconds) + 1
        rate_alerts = _rate_alerts(per_source, config, start, duration)

    return merge_alerts(intrusion_alerts, rate_alerts), counts

"""Seeded generator of labeled smart-city IoT traces.

Baseline device traffic is a one-harmonic diurnal sinusoid plus Gaussian
noise, floored at zero. Scripted attacks perturb it: UDP floods multiply the
target's rate, buffer-overflow silence blanks the target's reporting, and
Sybil windows inject never-seen source identities into the event log. Every
perturbed (interval, device) is labeled, and nothing else is.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .cc4 import EventLogRecord, FieldEncoder, SymbolSchema, symbolize
from .detect import AnomalyAlert
from .errors import InvalidScript, TimeBaseMismatch
from .ingest import FLOW_COLUMNS, format_timestamp
from .series import TimeSeries

DEVICE_KINDS = ("streetlight", "camera", "water_sensor")
ATTACK_KINDS = ("UdpFlood", "SilenceAfterOverflow", "Sybil")

# Which detector alert kinds count as hits for which scripted attack kinds.
COMPATIBLE = {
    "Surge": {"UdpFlood"},
    "Dropout": {"SilenceAfterOverflow"},
    "IdentityFlood": {"Sybil"},
    "Intrusion": set(ATTACK_KINDS),
}

KIND_PROTO = {"streetlight": "zigbee", "camera": "wifi", "water_sensor": "lora"}
GATEWAY_IP = "10.0.0.254"


@dataclass(frozen=True)
class DeviceSpec:
    id: str
    kind: str
    base_rate: float
    diurnal_amplitude: float
    noise_std: float

    def __post_init__(self):
        if self.kind not in DEVICE_KINDS:
            raise ValueError(f"unknown device kind {self.kind!r}")
        if self.base_rate <= 0 or self.noise_std < 0:
            raise ValueError("base_rate must be > 0 and noise_std >= 0")


@dataclass(frozen=True)
class AttackScript:
    kind: str
    target_id: str
    start: int
    end: int
    magnitude: float = 10.0      # flood multiplier k
    fake_id_count: int = 20      # Sybil identities per interval

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")


@dataclass
class SimConfig:
    seed: int = 42
    duration: int = 480
    interval_seconds: float = 3600.0
    start: datetime = field(
        default_factory=lambda: datetime(2021, 1, 1, tzinfo=timezone.utc))
    fleet: list[DeviceSpec] = field(default_factory=list)
    attacks: list[AttackScript] = field(default_factory=list)

    def validate(self) -> None:
        if self.duration < 1:
            raise ValueError("duration must be >= 1")
        ids = {d.id for d in self.fleet}
        per_target: dict[str, list[AttackScript]] = {}
        for script in self.attacks:
            if script.target_id not in ids:
                raise InvalidScript(f"unknown target {script.target_id!r}")
            if not 0 <= script.start < script.end <= self.duration:
                raise InvalidScript(
                    f"window [{script.start}, {script.end}) out of range")
            per_target.setdefault(script.target_id, []).append(script)
        for scripts in per_target.values():
            scripts = sorted(scripts, key=lambda s: s.start)
            for a, b in zip(scripts, scripts[1:]):
                if b.start < a.end:
                    raise InvalidScript(
                        f"overlapping scripts on {a.target_id!r}")


@dataclass
class LabeledTrace:
    config: SimConfig
    device_series: dict[str, TimeSeries]
    events: list[EventLogRecord]
    labels: list[tuple[int, str, str]]   # (interval_index, device_id, attack_kind)
    device_ips: dict[str, str]

    @property
    def start(self) -> datetime:
        return self.config.start

    @property
    def interval_seconds(self) -> float:
        return self.config.interval_seconds

    @property
    def duration(self) -> int:
        return self.config.duration

    def labels_for(self, device_id: str) -> set[int]:
        return {i for i, d, _ in self.labels if d == device_id}


def _day_period(interval_seconds: float) -> float:
    return 86400.0 / interval_seconds


def generate_trace(config: SimConfig) -> LabeledTrace:
    """Deterministic: identical seed + config give byte-identical trace files."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    period = _day_period(config.interval_seconds)
    t = np.arange(config.duration)

    floods: dict[str, list[AttackScript]] = {}
    silences: dict[str, list[AttackScript]] = {}
    sybils: list[AttackScript] = []
    for script in config.attacks:
        if script.kind == "UdpFlood":
            floods.setdefault(script.target_id, []).append(script)
        elif script.kind == "SilenceAfterOverflow":
            silences.setdefault(script.target_id, []).append(script)
        else:
            sybils.append(script)

    device_series: dict[str, TimeSeries] = {}
    device_ips: dict[str, str] = {}
    labels: list[tuple[int, str, str]] = []
    events: list[EventLogRecord] = []
    attacked: dict[tuple[int, str], str] = {}

    for index, dev in enumerate(config.fleet):
        device_ips[dev.id] = f"10.0.0.{index + 1}"
        rates = (dev.base_rate
                 + dev.diurnal_amplitude * np.sin(2 * np.pi * t / period)
                 + rng.normal(0.0, dev.noise_std, size=config.duration))
        rates = np.maximum(rates, 0.0)
        missing = np.zeros(config.duration, dtype=bool)
        for script in floods.get(dev.id, []):
            rates[script.start:script.end] *= script.magnitude
            for i in range(script.start, script.end):
                labels.append((i, dev.id, "UdpFlood"))
                attacked[(i, dev.id)] = "UdpFlood"
        for script in silences.get(dev.id, []):
            rates[script.start:script.end] = np.nan
            missing[script.start:script.end] = True
            for i in range(script.start, script.end):
                labels.append((i, dev.id, "SilenceAfterOverflow"))
                attacked[(i, dev.id)] = "SilenceAfterOverflow"
        device_series[dev.id] = TimeSeries(
            start=config.start, interval_seconds=config.interval_seconds,
            values=rates, missing=missing)
        for i in range(config.duration):
            if missing[i]:
                continue
            stamp = config.start + timedelta(seconds=config.interval_seconds * i)
            flooded = attacked.get((i, dev.id)) == "UdpFlood"
            events.append(EventLogRecord(
                timestamp=stamp, source_id=dev.id,
                fields={"proto": "udp" if flooded else KIND_PROTO[dev.kind],
                        "packets": round(float(rates[i]), 3),
                        "status": "ok"}))

    for script in sybils:
        for i in range(script.start, script.end):
            stamp = config.start + timedelta(seconds=config.interval_seconds * i)
            labels.append((i, script.target_id, "Sybil"))
            for j in range(script.fake_id_count):
                events.append(EventLogRecord(
                    timestamp=stamp, source_id=f"fake-{script.target_id}-{i}-{j}",
                    fields={"proto": "wifi", "packets": 1.0, "status": "ok"}))

    events.sort(key=lambda e: (e.timestamp, e.source_id))
    labels.sort()
    return LabeledTrace(config=config, device_series=device_series,
                        events=events, labels=labels, device_ips=device_ips)


def event_schema() -> SymbolSchema:
    """Default symbolization for simulator event logs."""
    return SymbolSchema(encoders=(
        FieldEncoder(name="proto", kind="one_hot",
                     vocabulary=("zigbee", "wifi", "lora", "udp")),
        FieldEncoder(name="packets", kind="thermometer",
                     bin_edges=(5.0, 20.0, 100.0, 500.0)),
        FieldEncoder(name="status", kind="one_hot",
                     vocabulary=("ok", "overflow", "retry")),
    ))


def training_samples(trace: LabeledTrace,
                     schema: SymbolSchema) -> list[tuple[np.ndarray, str]]:
    """Labeled (vector, class) pairs for CC4 training: an event is Attack when
    its (interval, source) carries an attack label, else Known. Duplicate
    vectors keep their first label."""
    attack_cells = {(i, d) for i, d, _ in trace.labels}
    samples: list[tuple[np.ndarray, str]] = []
    seen: set[bytes] = set()
    for event in trace.events:
        idx = int((event.timestamp - trace.start).total_seconds()
                  // trace.interval_seconds)
        vector, _ = symbolize(event, schema)
        key = vector.tobytes()
        if key in seen:
            continue
        seen.add(key)
        cls = "Attack" if (idx, event.source_id) in attack_cells else "Known"
        samples.append((vector, cls))
    return samples


# --- file output ------------------------------------------------------------


def write_trace(trace: LabeledTrace, outdir) -> dict[str, Path]:
    """Emit flow.csv (ingestion schema), events.jsonl, and labels.csv."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    flow_path = outdir / "flow.csv"
    events_path = outdir / "events.jsonl"
    labels_path = outdir / "labels.csv"

    rows = []
    for dev in trace.config.fleet:
        series = trace.device_series[dev.id]
        ip = trace.device_ips[dev.id]
        port = 1000 + list(trace.device_ips).index(dev.id)
        for i in range(len(series)):
            if series.missing[i]:
                continue
            rows.append((series.timestamp_at(i),
                         f"{ip}-{GATEWAY_IP}-{port}-80-17",
                         float(series.values[i])))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(flow_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FLOW_COLUMNS)
        for stamp, flow_id, rate in rows:
            writer.writerow([flow_id, format_timestamp(stamp),
                             f"{rate:.6f}", f"{rate:.6f}", -1, 8192, 0])

    with open(events_path, "w", encoding="utf-8") as fh:
        for event in trace.events:
            obj = {"ts": event.timestamp.isoformat(), "src": event.source_id}
            obj.update(event.fields)
            fh.write(json.dumps(obj) + "\n")

    with open(labels_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["interval_index", "device_id", "attack_kind"])
        for row in trace.labels:
            writer.writerow(row)

    return {"flow": flow_path, "events": events_path, "labels": labels_path}


def read_labels_csv(path) -> list[tuple[int, str, str]]:
    labels = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            labels.append((int(row["interval_index"]), row["device_id"],
                           row["attack_kind"]))
    return labels


# --- scoring ----------------------------------------------------------------


@dataclass
class DetectionScore:
    precision: float | None
    recall: float
    true_positives: int
    false_positives: int
    false_negatives: int
    per_kind: dict[str, int]

    def to_json_obj(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "per_kind": self.per_kind,
        }


def score_detections(alerts: list[AnomalyAlert], trace: LabeledTrace,
                     coverage: int = 1) -> DetectionScore:
    """Match alerts to ground-truth labels on the trace's time base.

    An alert covers intervals [i, i + coverage) starting at its timestamp
    (window-mean alerts flag a whole window). It is a true positive when it
    covers at least one kind-compatible label for its source; a label is
    recalled when some compatible alert covers it.
    """
    span = trace.interval_seconds * trace.duration
    label_set = set(trace.labels)
    covered: set[tuple[int, str, str]] = set()
    tp = fp = 0
    per_kind: dict[str, int] = {}
    for alert in alerts:
        offset = (alert.timestamp - trace.start).total_seconds()
        if offset < 0 or offset >= span or offset % trace.interval_seconds != 0:
            raise TimeBaseMismatch(
                f"alert at {alert.timestamp.isoformat()} is off the trace grid")
        start_idx = int(offset // trace.interval_seconds)
        compatible = COMPATIBLE.get(alert.kind, set())
        hits = [
            (i, d, k) for (i, d, k) in label_set
            if start_idx <= i < start_idx + coverage and k in compatible
            and (not alert.source or d == alert.source
                 or k == "Sybil")  # flood of fake ids has no single source
        ]
        per_kind[alert.kind] = per_kind.get(alert.kind, 0) + 1
        if hits:
            tp += 1
            covered.update(hits)
        else:
            fp += 1
    fn = len(label_set - covered)
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = len(covered) / len(label_set) if label_set else 1.0
    return DetectionScore(precision=precision, recall=recall,
                          true_positives=tp, false_positives=fp,
                          false_negatives=fn, per_kind=per_kind)


# --- stock scenarios --------------------------------------------------------


def default_fleet() -> list[DeviceSpec]:
    return [
        DeviceSpec(id="streetlight-1", kind="streetlight",
                   base_rate=20.0, diurnal_amplitude=5.0, noise_std=1.0),
        DeviceSpec(id="camera-1", kind="camera",
                   base_rate=50.0, diurnal_amplitude=10.0, noise_std=2.0),
        DeviceSpec(id="water-1", kind="water_sensor",
                   base_rate=10.0, diurnal_amplitude=2.0, noise_std=0.5),
    ]


def default_flood_config(seed: int = 42, magnitude: float = 10.0) -> SimConfig:
    return SimConfig(seed=seed, fleet=default_fleet(), attacks=[
        AttackScript(kind="UdpFlood", target_id="camera-1",
                     start=250, end=340, magnitude=magnitude)])


def default_silence_config(seed: int = 42) -> SimConfig:
    return SimConfig(seed=seed, fleet=default_fleet(), attacks=[
        AttackScript(kind="SilenceAfterOverflow", target_id="streetlight-1",
                     start=200, end=230)])


def default_sybil_config(seed: int = 42) -> SimConfig:
    return SimConfig(seed=seed, fleet=default_fleet(), attacks=[
        AttackScript(kind="Sybil", target_id="water-1",
                     start=300, end=360, fake_id_count=40)])

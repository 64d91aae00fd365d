"""Time-tagged detection events and the ``eraser-ev/1`` NDJSON format.

An event file is one JSON object per line.  The first line is a header::

    {"format": "eraser-ev/1", "config": {...}}

followed by events ordered by ``t_ps``::

    {"kind":"electron","t_ps":1234,"x_m":-3e-07,"loss":true,"setting":"xz"}
    {"kind":"photon","t_ps":1260,"det":"SPD0","setting":"xz"}

A setting label is two axis letters, electron first: ``"xz"`` means the
electron is read in diffraction mode (sigma_x quadrature) while the photon
is projected on the sigma_z eigenbasis.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

FORMAT_VERSION = "eraser-ev/1"

ELECTRON, PHOTON = 0, 1
KIND_NAMES = ("electron", "photon")
DETECTORS = ("SPD0", "SPD1")

AXES = ("x", "y", "z")
ALL_SETTINGS = tuple(e + p for e in AXES for p in AXES)


class EventFormatError(ValueError):
    """Malformed, empty or wrong-version event data."""


def check_setting(label: str) -> str:
    if len(label) != 2 or label[0] not in AXES or label[1] not in AXES:
        raise ValueError(f"invalid setting label {label!r}; expected e.g. 'xz'")
    return label


@dataclass(frozen=True)
class DetectionEvent:
    """One detector click.  Electron events have no detector id, photons no position."""

    kind: str
    t_ps: int
    x_m: float | None = None
    loss: bool | None = None
    det: str | None = None
    setting: str | None = None

    def __post_init__(self):
        if self.kind not in KIND_NAMES:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.t_ps < 0:
            raise ValueError("timestamps must be nonnegative")
        if self.kind == "electron" and self.det is not None:
            raise ValueError("electron events carry no detector id")
        if self.kind == "photon" and self.x_m is not None:
            raise ValueError("photon events carry no position")


@dataclass
class EventStream:
    """Columnar event stream.

    ``x_m`` is NaN for photons and ``det`` is -1 for electrons; ``setting``
    indexes into ``settings``.
    """

    kind: np.ndarray
    t_ps: np.ndarray
    x_m: np.ndarray
    loss: np.ndarray
    det: np.ndarray
    setting: np.ndarray
    settings: tuple[str, ...] = ALL_SETTINGS
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kind = np.asarray(self.kind, dtype=np.int8)
        self.t_ps = np.asarray(self.t_ps, dtype=np.int64)
        self.x_m = np.asarray(self.x_m, dtype=float)
        self.loss = np.asarray(self.loss, dtype=bool)
        self.det = np.asarray(self.det, dtype=np.int8)
        self.setting = np.asarray(self.setting, dtype=np.int16)
        self.settings = tuple(self.settings)
        n = self.kind.size
        for name in ("t_ps", "x_m", "loss", "det", "setting"):
            if getattr(self, name).size != n:
                raise ValueError(f"column {name} has the wrong length")

    def __len__(self) -> int:
        return int(self.kind.size)

    @property
    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.t_ps) >= 0))

    def count(self, kind: int) -> int:
        return int(np.count_nonzero(self.kind == kind))

    def event(self, i: int) -> DetectionEvent:
        label = self.settings[self.setting[i]] if self.setting[i] >= 0 else None
        if self.kind[i] == ELECTRON:
            return DetectionEvent("electron", int(self.t_ps[i]), float(self.x_m[i]),
                                  bool(self.loss[i]), None, label)
        return DetectionEvent("photon", int(self.t_ps[i]), None, None,
                              DETECTORS[self.det[i]], label)

    def __iter__(self) -> Iterator[DetectionEvent]:
        for i in range(len(self)):
            yield self.event(i)

    @classmethod
    def from_events(cls, events, settings=ALL_SETTINGS, config=None) -> "EventStream":
        events = list(events)
        settings = tuple(settings)
        lookup = {s: i for i, s in enumerate(settings)}
        kind = [KIND_NAMES.index(e.kind) for e in events]
        return cls(
            kind=kind,
            t_ps=[e.t_ps for e in events],
            x_m=[np.nan if e.x_m is None else e.x_m for e in events],
            loss=[bool(e.loss) for e in events],
            det=[-1 if e.det is None else DETECTORS.index(e.det) for e in events],
            setting=[-1 if e.setting is None else lookup[e.setting] for e in events],
            settings=settings,
            config=dict(config or {}),
        )

    def write_ndjson(self, path) -> None:
        """Write header and events; identical streams give identical bytes."""
        header = {"format": FORMAT_VERSION, "settings": list(self.settings), "config": self.config}
        labels = [json.dumps(s) for s in self.settings] + ["null"]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
            lines = []
            for k, t, x, loss, det, s in zip(self.kind.tolist(), self.t_ps.tolist(), self.x_m.tolist(),
                                             self.loss.tolist(), self.det.tolist(), self.setting.tolist()):
                lab = labels[s]
                if k == ELECTRON:
                    lines.append(f'{{"kind":"electron","t_ps":{t},"x_m":{x!r},'
                                 f'"loss":{"true" if loss else "false"},"setting":{lab}}}\n')
                else:
                    lines.append(f'{{"kind":"photon","t_ps":{t},"det":"{DETECTORS[det]}","setting":{lab}}}\n')
                if len(lines) >= 65536:
                    fh.write("".join(lines))
                    lines.clear()
            fh.write("".join(lines))

    @classmethod
    def read_ndjson(cls, path) -> "EventStream":
        with open(path, encoding="utf-8") as fh:
            first = fh.readline()
            if not first.strip():
                raise EventFormatError("no events")
            try:
                header = json.loads(first)
            except json.JSONDecodeError as exc:
                raise EventFormatError(f"unreadable header: {exc}") from None
            if not isinstance(header, dict) or "format" not in header:
                raise EventFormatError("first line is not an event-file header")
            if header["format"] != FORMAT_VERSION:
                raise EventFormatError(f"unsupported format {header['format']!r}; expected {FORMAT_VERSION!r}")
            settings = tuple(header.get("settings", ALL_SETTINGS))
            lookup = {s: i for i, s in enumerate(settings)}
            kind, t, x, loss, det, sett = [], [], [], [], [], []
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    ev = json.loads(line)
                    if ev["kind"] == "electron":
                        kind.append(ELECTRON)
                        x.append(float(ev["x_m"]))
                        loss.append(bool(ev["loss"]))
                        det.append(-1)
                    elif ev["kind"] == "photon":
                        kind.append(PHOTON)
                        x.append(np.nan)
                        loss.append(False)
                        det.append(DETECTORS.index(ev["det"]))
                    else:
                        raise ValueError(f"unknown kind {ev['kind']!r}")
                    t.append(int(ev["t_ps"]))
                    s = ev.get("setting")
                    sett.append(-1 if s is None else lookup[s])
                except (KeyError, ValueError, TypeError) as exc:
                    raise EventFormatError(f"line {lineno}: {exc}") from None
        if not kind:
            raise EventFormatError("no events")
        return cls(kind, t, x, loss, det, sett, settings, header.get("config", {}))

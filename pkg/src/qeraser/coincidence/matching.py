"""Coincidence matching of photon clicks to energy-loss electrons."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import ELECTRON, PHOTON, DetectionEvent, EventStream, EventFormatError

DEFAULT_WINDOW_PS = 2000


class UnsortedStreamError(EventFormatError):
    pass


@dataclass(frozen=True)
class CoincidencePair:
    electron: DetectionEvent
    photon: DetectionEvent
    delta_t: int


@dataclass
class MatchResult:
    """Matched pairs in photon time order, plus bookkeeping.

    Index arrays point into the originating stream; ``x_m``, ``det`` and
    ``setting`` are copied out per pair for the analysis stage.
    """

    electron_index: np.ndarray
    photon_index: np.ndarray
    delta_t: np.ndarray
    x_m: np.ndarray
    det: np.ndarray
    setting: np.ndarray
    settings: tuple[str, ...]
    n_photons: int
    n_orphan_photons: int
    n_unmatched_loss_electrons: int
    window_ps: int

    def __len__(self) -> int:
        return int(self.electron_index.size)

    def pairs(self, stream: EventStream) -> list[CoincidencePair]:
        return [CoincidencePair(stream.event(e), stream.event(p), int(dt))
                for e, p, dt in zip(self.electron_index, self.photon_index, self.delta_t)]

    def select(self, setting: str | None = None, detector: int | None = None) -> np.ndarray:
        """Boolean mask of pairs with the given setting label and/or detector."""
        mask = np.ones(len(self), dtype=bool)
        if setting is not None:
            if setting not in self.settings:
                return np.zeros(len(self), dtype=bool)
            mask &= self.setting == self.settings.index(setting)
        if detector is not None:
            mask &= self.det == detector
        return mask

    def summary(self) -> dict:
        return {
            "pairs": len(self),
            "photons": self.n_photons,
            "orphan_photons": self.n_orphan_photons,
            "unmatched_loss_electrons": self.n_unmatched_loss_electrons,
            "window_ps": self.window_ps,
        }


def match_coincidences(stream: EventStream, window_ps: int = DEFAULT_WINDOW_PS) -> MatchResult:
    """Pair photons with loss electrons, closest pairs first, within ``window_ps``.

    Every (loss electron, photon) pair with ``|t_p - t_e| <= window_ps`` is a
    candidate.  Candidates are taken in order of increasing ``|delta_t|``
    (ties: earlier electron, then earlier photon) and accepted when neither
    event is already used.  Candidate ranges come from a binary search on the
    sorted times, so the work is linear in the stream length for windows
    much shorter than the mean event spacing.
    """
    if window_ps <= 0:
        raise ValueError("window must be positive")
    if not stream.is_sorted:
        raise UnsortedStreamError("event stream is not sorted by timestamp")
    e_idx = np.flatnonzero((stream.kind == ELECTRON) & stream.loss)
    p_idx = np.flatnonzero(stream.kind == PHOTON)
    te = stream.t_ps[e_idx]
    tp = stream.t_ps[p_idx]
    lo = np.searchsorted(te, tp - window_ps, side="left")
    hi = np.searchsorted(te, tp + window_ps, side="right")

    # flatten the candidate ranges into (electron, photon) index pairs
    n_cand = hi - lo
    cand_p = np.repeat(np.arange(tp.size), n_cand)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(n_cand)[:-1]]), n_cand)
    cand_e = starts + np.arange(cand_p.size)
    dist = np.abs(tp[cand_p] - te[cand_e])
    order = np.lexsort((cand_p, cand_e, dist))

    used_e = np.zeros(te.size, dtype=bool)
    got_e = np.full(tp.size, -1, dtype=np.int64)
    for e, p in zip(cand_e[order].tolist(), cand_p[order].tolist()):
        if used_e[e] or got_e[p] >= 0:
            continue
        used_e[e] = True
        got_e[p] = e

    ok = got_e >= 0
    ei = e_idx[got_e[ok]]
    pi = p_idx[ok]
    return MatchResult(
        electron_index=ei,
        photon_index=pi,
        delta_t=stream.t_ps[pi] - stream.t_ps[ei],
        x_m=stream.x_m[ei],
        det=stream.det[pi],
        setting=stream.setting[pi],
        settings=stream.settings,
        n_photons=int(p_idx.size),
        n_orphan_photons=int(p_idx.size - ok.sum()),
        n_unmatched_loss_electrons=int(te.size - ok.sum()),
        window_ps=int(window_ps),
    )

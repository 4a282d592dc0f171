"""Summary metrics of a simulation log."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InsufficientDecayError


def fit_decay_rate(t, y, start_frac: float = 0.5, end_frac: float = 0.01, window=None) -> float:
    """Exponential rate of ``y`` by least squares on ``log y``.

    The fit runs from the first sample after the peak below
    ``start_frac * peak`` up to the first sample below ``end_frac * peak``
    (or the end of ``window``/the series).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if y.size < 2:
        raise InsufficientDecayError("series too short")
    k_peak = int(np.argmax(y))
    peak = y[k_peak]
    if not peak > 0.0:
        raise InsufficientDecayError("series is identically zero")
    below = np.flatnonzero(y[k_peak:] < start_frac * peak)
    if below.size == 0:
        raise InsufficientDecayError(f"never falls below {start_frac:g} of its peak")
    a = k_peak + int(below[0])
    end = np.flatnonzero(y[a:] <= end_frac * peak)
    b = a + int(end[0]) if end.size else y.size - 1
    seg_t, seg_y = t[a:b + 1], y[a:b + 1]
    ok = seg_y > 0.0
    seg_t, seg_y = seg_t[ok], seg_y[ok]
    if seg_t.size < 2:
        raise InsufficientDecayError("fewer than two samples in the fit window")
    slope = np.polyfit(seg_t, np.log(seg_y), 1)[0]
    return float(-slope)


def time_to_fraction(t, y, frac: float = 0.05, settle: bool = True) -> float | None:
    """Time at which ``y`` drops to ``frac * y[0]``.

    With ``settle`` the time after which it stays below; ``None`` if never.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    thr = frac * y[0]
    above = y > thr
    if settle:
        if above[-1]:
            return None
        last = np.flatnonzero(above)
        return float(t[0]) if last.size == 0 else float(t[last[-1] + 1])
    hit = np.flatnonzero(~above)
    return None if hit.size == 0 else float(t[hit[0]])


@dataclass
class Summary:
    final_sync_norm: float
    final_tracking_norm: float
    sync_rate: float | None
    tracking_rate: float | None
    rate_ratio: float | None
    sync_t5: float | None
    tracking_t5: float | None
    peak_control: float
    control_effort: float
    final_sync_norm_pos: float | None = None
    final_tracking_norm_pos: float | None = None
    sync_rate_pos: float | None = None
    tracking_rate_pos: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _control(log):
    if log.u is not None:
        return log.u
    return log.F


def _effort(t, u) -> tuple[float, float]:
    mag = np.linalg.norm(u, axis=2)  # (N, p)
    tot = mag.sum(axis=1)
    effort = float(np.sum(0.5 * (tot[1:] + tot[:-1]) * np.diff(t))) if t.size > 1 else 0.0
    return float(mag.max()), effort


def metrics(log, basis=None) -> Summary:
    """Summary of ``log``; raises :class:`InsufficientDecayError` if a norm does not decay.

    ``basis`` is accepted for interface symmetry; the log already stores the
    projected norms.
    """
    return _summary(log, strict=True)


def summarize(log) -> Summary:
    """Like :func:`metrics` but reports missing rates as ``None``."""
    return _summary(log, strict=False)


def _rate(t, y, strict):
    try:
        return fit_decay_rate(t, y)
    except InsufficientDecayError:
        if strict:
            raise
        return None


def _summary(log, strict: bool) -> Summary:
    t = log.t
    sync_rate = _rate(t, log.sync_norm, strict) if log.p > 1 else None
    tr_rate = _rate(t, log.tracking_norm, strict)
    ratio = sync_rate / tr_rate if sync_rate is not None and tr_rate else None
    peak, effort = _effort(t, _control(log))
    s = Summary(
        final_sync_norm=float(log.sync_norm[-1]),
        final_tracking_norm=float(log.tracking_norm[-1]),
        sync_rate=sync_rate,
        tracking_rate=tr_rate,
        rate_ratio=ratio,
        sync_t5=time_to_fraction(t, log.sync_norm) if log.p > 1 else None,
        tracking_t5=time_to_fraction(t, log.tracking_norm),
        peak_control=peak,
        control_effort=effort,
    )
    if log.plant == "combined":
        s.final_sync_norm_pos = float(log.sync_norm_pos[-1])
        s.final_tracking_norm_pos = float(log.tracking_norm_pos[-1])
        s.sync_rate_pos = _rate(t, log.sync_norm_pos, strict)
        s.tracking_rate_pos = _rate(t, log.tracking_norm_pos, strict)
    return s


def relative_phase_deg(log) -> np.ndarray:
    """Phase of each craft in the x-z plane relative to craft 0, wrapped to [0, 360)."""
    if log.r is None:
        raise ValueError("log has no translational states")
    ang = np.arctan2(log.r[:, :, 2], log.r[:, :, 0])
    rel = np.degrees(ang - ang[:, :1]) % 360.0
    return rel


def spiral_radius(log) -> np.ndarray:
    return np.hypot(log.r[:, :, 0], log.r[:, :, 2])


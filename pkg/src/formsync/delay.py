"""Wave-variable coupling over a constant communication delay.

A channel carries one direction of a link: the sender transmits
``v = G^T s`` and the receiver reflects it against its own wave,
producing the coupling force ``(1/k) G (v(t - T) - G^T s_local)``.
With ``G = sqrt(K2)``, ``k = 1`` and ``T = 0`` this is exactly
``K2 (s_remote - s_local)``.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .control import as_diag
from .errors import NonMonotoneTimeError


@dataclass
class WaveChannel:
    G: np.ndarray
    delay: float = 0.0
    k_wave: float = 1.0
    initial_wave: np.ndarray | None = None
    interpolation: str = "zoh"
    _times: list = field(default_factory=list, init=False, repr=False)
    _waves: list = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        if G.ndim == 1:
            G = np.diag(G)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("G must be square")
        if not self.k_wave > 0.0:
            raise ValueError("k_wave must be positive")
        if not self.delay >= 0.0:
            raise ValueError("delay must be non-negative")
        if self.interpolation not in ("zoh", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        self.G = G
        n = G.shape[0]
        v0 = np.zeros(n) if self.initial_wave is None else np.asarray(self.initial_wave, float)
        self.initial_wave = v0.reshape(n)

    @classmethod
    def from_gain(cls, K2, delay: float = 0.0, k_wave: float = 1.0, **kw) -> "WaveChannel":
        """Default factorization ``G = sqrt(K2)`` (element-wise on the diagonal)."""
        return cls(np.diag(np.sqrt(as_diag(K2))), delay, k_wave, **kw)

    def __len__(self) -> int:
        return len(self._times)

    def encode(self, s) -> np.ndarray:
        return self.G.T @ np.asarray(s, dtype=float)

    def transmit(self, s_local, t: float) -> None:
        if self._times and not t > self._times[-1]:
            raise NonMonotoneTimeError(f"transmit at t = {t} after t = {self._times[-1]}")
        self._times.append(float(t))
        self._waves.append(self.encode(s_local))

    def delayed_wave(self, t: float) -> np.ndarray:
        """Wave value sent at ``t - delay`` (held or interpolated)."""
        tq = t - self.delay
        k = bisect.bisect_right(self._times, tq + 1e-12 * max(1.0, abs(tq))) - 1
        if k < 0:
            return self.initial_wave
        if self.interpolation == "linear" and k + 1 < len(self._times):
            t0, t1 = self._times[k], self._times[k + 1]
            a = (tq - t0) / (t1 - t0)
            return (1.0 - a) * self._waves[k] + a * self._waves[k + 1]
        return self._waves[k]

    def receive(self, s_local, t: float, s_remote_now=None) -> np.ndarray:
        """Coupling force at ``t``.

        With zero delay the remote's current value ``s_remote_now`` is used
        when supplied, so the channel reproduces direct coupling inside
        integrator substeps.
        """
        if self.delay == 0.0 and s_remote_now is not None:
            v = self.encode(s_remote_now)
        else:
            v = self.delayed_wave(t)
        return (self.G @ (v - self.encode(s_local))) / self.k_wave

    def prune(self, t: float) -> None:
        """Drop samples that can no longer be read at times ``>= t``."""
        tq = t - self.delay
        k = bisect.bisect_right(self._times, tq) - 1
        keep = max(k - 1, 0) if self.interpolation == "linear" else max(k, 0)
        if keep > 0:
            del self._times[:keep]
            del self._waves[:keep]


def channel_transmit(channel: WaveChannel, s_local, t: float) -> None:
    channel.transmit(s_local, t)


def channel_receive(channel: WaveChannel, s_local, t: float) -> np.ndarray:
    return channel.receive(s_local, t)

"""Shared helpers for the test-suite."""
from __future__ import annotations

import copy
import functools
import time
from importlib import resources

import yaml

from formsync.sim import integrate
from formsync.sim.config import config_from_dict

# (label, passed, detail) in the order the acceptance checks ran
RESULTS: list[tuple[str, bool, str]] = []


def fixture_dict(name: str) -> dict:
    text = resources.files("formsync.scenarios").joinpath(f"{name}.yaml").read_text()
    return yaml.safe_load(text)


def run_dict(d: dict, **kw):
    """Integrate a scenario mapping; returns ``(log, wall_seconds)``."""
    cfg = config_from_dict(copy.deepcopy(d))
    t0 = time.perf_counter()
    log = integrate(cfg, **kw)
    return log, time.perf_counter() - t0


@functools.lru_cache(maxsize=None)
def run_fixture(name: str):
    return run_dict(fixture_dict(name))


def verdict(label: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    RESULTS.append((label, bool(ok), detail))
    print(line)
    return bool(ok)


def first_time_below(t, y, thr):
    """First time after which ``y`` stays below ``thr`` (``None`` if never)."""
    above = y >= thr
    if above[-1]:
        return None
    idx = above.nonzero()[0]
    return float(t[0]) if idx.size == 0 else float(t[idx[-1] + 1])

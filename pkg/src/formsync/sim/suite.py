"""The four reference case studies run end to end."""
from __future__ import annotations

from .config import BUNDLED, load_scenario
from .engine import SimLog, integrate


def run_paper_suite(names=BUNDLED, backend: str | None = None) -> list[SimLog]:
    """Integrate each bundled case study; each log carries its reports and summary."""
    return [integrate(load_scenario(n), backend=backend) for n in names]

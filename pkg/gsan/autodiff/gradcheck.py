from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..errors import NonDeterministic
from .tape import Node, Tape, backward


_log = logging.getLogger(__name__)

LossFn = Callable[[Mapping[str, np.ndarray]], tuple[Tape, Node]]

MAGNITUDE_FLOOR = 1e-8
DENOMINATOR_FLOOR = 1e-6


@dataclass
class GradCheckReport:
    rtol: float
    h: float
    max_rel_error: dict[str, float] = field(default_factory=dict)

    @property
    def failing(self) -> list[str]:
        return [name for name, err in self.max_rel_error.items() if err > self.rtol]

    @property
    def passed(self) -> bool:
        return not self.failing

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rtol": self.rtol,
            "h": self.h,
            "max_rel_error": dict(self.max_rel_error),
            "failing": self.failing,
        }


def finite_difference_check(
    f: LossFn,
    params: Mapping[str, np.ndarray],
    h: float = 1e-5,
    rtol: float = 1e-4,
    gradients: Mapping[str, np.ndarray] | None = None,
) -> GradCheckReport:
    """Compare analytic gradients of ``f`` with central differences.

    ``f`` builds a tape from a parameter dict and returns it with its scalar
    loss node. ``gradients`` replaces the analytic side when given (used to
    check that a wrong gradient is caught). Entries whose analytic and numeric
    values are both below ``MAGNITUDE_FLOOR`` are skipped.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    params = {k: np.array(v, dtype=np.float64) for k, v in params.items()}

    tape, loss = f(params)
    _, loss_again = f(params)
    if not np.array_equal(loss.value, loss_again.value):
        raise NonDeterministic("repeated evaluation gave different losses")
    analytic = dict(gradients) if gradients is not None else backward(tape, loss)

    def value_at(name: str, flat_index: int, delta: float) -> float:
        nudged = {k: v.copy() for k, v in params.items()}
        nudged[name].reshape(-1)[flat_index] += delta
        return float(f(nudged)[1].value)

    report = GradCheckReport(rtol=rtol, h=h)
    for name, p in params.items():
        a = np.asarray(analytic.get(name, np.zeros_like(p))).reshape(-1)
        worst = 0.0
        for i in range(p.size):
            numeric = (value_at(name, i, h) - value_at(name, i, -h)) / (2.0 * h)
            scale = max(abs(a[i]), abs(numeric))
            if scale <= MAGNITUDE_FLOOR:
                continue
            worst = max(worst, abs(a[i] - numeric) / max(scale, DENOMINATOR_FLOOR))
        report.max_rel_error[name] = worst
    if not report.passed:
        _log.warning("gradient check failed params=%s", ",".join(report.failing))
    return report

"""Nonparametric diagnostics: Kaplan-Meier survival and the TTT transform.

Both produce a `StepCurve`, a plain ordered point set meant to be dumped as
CSV and plotted elsewhere.  The TTT (total time on test) curve is the usual
hazard-shape diagnostic: concave above the diagonal suggests increasing
hazard, convex below suggests decreasing, an S-shape suggests a mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fit_complete import LifetimeData

__all__ = ["StepCurve", "kaplan_meier", "ttt_curve"]


@dataclass(frozen=True)
class StepCurve:
    """Ordered (x, y) pairs of a step or polyline plot."""

    points: tuple

    def __post_init__(self):
        xs = [p[0] for p in self.points]
        for a, b in zip(xs, xs[1:]):
            if not b > a:
                raise ValueError("StepCurve: x values must strictly increase")

    @property
    def xs(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def ys(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def kaplan_meier(data: LifetimeData) -> StepCurve:
    """Product-limit survival estimate.

    Returns the curve as (0, 1) followed by one point per distinct event
    time carrying the post-drop value of S.  Subjects censored at an event
    time are still at risk for that event (events-first tie handling), and
    censoring times without events contribute no point.
    """
    order = np.argsort(data.times, kind="stable")
    t = data.times[order]
    status = data.status[order]
    points = [(0.0, 1.0)]
    surv = 1.0
    at_risk = data.n
    i = 0
    while i < data.n:
        j = i
        events = 0
        while j < data.n and t[j] == t[i]:
            events += int(status[j])
            j += 1
        if events:
            surv *= 1.0 - events / at_risk
            points.append((float(t[i]), surv))
        at_risk -= j - i
        i = j
    return StepCurve(tuple(points))


def ttt_curve(data: LifetimeData) -> StepCurve:
    """Scaled total-time-on-test transform on the order statistics.

    Point r (r = 1..n) is (r/n, G(r/n)) with
    G(r/n) = (sum of the r smallest times + (n-r) t_(r)) / (sum of all times).
    Censoring flags are ignored: the transform is computed on the observed
    times as is, which is the conventional quick-look usage; read curves
    from heavily censored data with that caveat in mind.
    """
    if data.n < 2:
        raise ValueError("ttt_curve: need at least 2 observations")
    t = np.sort(data.times)
    n = data.n
    csum = np.cumsum(t)
    ranks = np.arange(1, n + 1)
    # rounding in the partial sums must not push G past 1
    g = np.minimum((csum + (n - ranks) * t) / csum[-1], 1.0)
    return StepCurve(tuple((float(r) / n, float(v))
                           for r, v in zip(ranks, g)))

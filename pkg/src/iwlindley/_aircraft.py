"""Embedded demonstration dataset.

Failure times of 194 devices installed in aircraft, a classic reliability
table.  A trailing '+' marks a unit still in service at last inspection;
those entries enter likelihoods as right-censored.  The transcription keeps
the printed row layout; a couple of entries are typographically ambiguous
in common reprints (column spacing) and are read here as plain integers.
"""

from __future__ import annotations

import numpy as np

from .fit_complete import LifetimeData

_ROWS = """\
43 29 37 88 5 14 9 43+ 1 78 1 77 17 100
3 119+ 22 3 8 80 1 19 157+ 65 34 13 62+ 2
1 1 2 3 6 1 2 5 7 6 1 1 4 1
1 1 2 7 2 1 1 2 1 1 7 1 1 4
1 4 2 4 5 5 4 3 2 2 2 3 3 9
1 6 9 2 5 7 4 2 1 2 2 3 11 8
3 1 2 2 2 2 2 1 3 20+ 8 8 197 20
14 7 29 7 16 34 25 10 80 42 32 1 3 1
12 7 7 39+ 60 53 32 9 8 1 1 27 2 4
8 13 7 7 1 19 7 12 19 5 18 1 4 18
20 9 14 13 70 18 3 7 20 3 11 10 3 38+
278 13 79 145+ 19 2 18 2 65 14 31 10 19 5
9 45 13 5 1 1 31 35 34 4 3 5 12 140+
106 5 40 130+ 21 19 7 10 91 193 64 85+"""


def _parse():
    times = []
    status = []
    for tok in _ROWS.split():
        if tok.endswith("+"):
            times.append(float(tok[:-1]))
            status.append(0)
        else:
            times.append(float(tok))
            status.append(1)
    return (np.array(times, dtype=np.float64),
            np.array(status, dtype=np.int64))


AIRCRAFT_TIMES, AIRCRAFT_STATUS = _parse()


def aircraft_data() -> LifetimeData:
    """The aircraft-device failure times as a LifetimeData (n=194, 11 censored)."""
    return LifetimeData(AIRCRAFT_TIMES.copy(), AIRCRAFT_STATUS.copy())

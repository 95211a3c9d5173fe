"""Two-station run simulator with a shared clock index.

Each run draws a clock value ``m`` (cycling through 0..15 or uniformly at
random), places ``(u, v)`` uniformly in the cell supported by ``(m, a, b)``,
and lets each station compute its outcome from what it can see locally.

Random numbers come from counter-based Philox streams keyed by
``(seed, stream)``; the draw for run ``i`` is the ``i``-th output of the
stream, so any block of runs can be generated independently and the result
does not depend on how the runs are partitioned.
"""
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .outcomes import outcomes_A, outcomes_B
from .regions import N_CLOCK, SIDE, station_distributions

__all__ = [
    "CYCLIC",
    "UNIFORM_RANDOM",
    "CLOCK_MODES",
    "STREAM_CLOCK",
    "STREAM_STATION1",
    "STREAM_STATION2",
    "STREAM_SETTINGS",
    "uniform_stream",
    "Schedule",
    "random_schedule",
    "message_schedule",
    "RunRecord",
    "Records",
    "Station1View",
    "Station2View",
    "run_experiment",
    "CorrelationEstimate",
    "estimate_correlation",
    "signal_decode",
    "blind_decode",
    "blind_advantage",
    "bit_error_rate",
    "instrument_distribution",
    "write_records",
    "read_records",
]

CYCLIC = "CYCLIC"
UNIFORM_RANDOM = "UNIFORM-RANDOM"
CLOCK_MODES = (CYCLIC, UNIFORM_RANDOM)

STREAM_CLOCK = 0
STREAM_STATION1 = 1
STREAM_STATION2 = 2
STREAM_SETTINGS = 3

_BLOCK = 4  # Philox outputs per counter increment


def uniform_stream(seed, stream, start, count):
    """Doubles in [0, 1) at positions ``start .. start+count-1`` of a keyed stream."""
    if seed < 0 or start < 0 or count < 0:
        raise ValueError("seed, start and count must be nonnegative")
    bg = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64))
    bg.advance(start // _BLOCK)
    skip = start % _BLOCK
    raw = bg.random_raw(skip + count)[skip:]
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True, eq=False)
class Schedule:
    """Setting pairs per run (cycled when shorter than the run count) and a clock mode."""

    settings: np.ndarray
    clock: str = CYCLIC

    def __post_init__(self):
        s = np.array(self.settings, dtype=np.int64).reshape(-1, 2)
        if len(s) == 0:
            raise ValueError("schedule must not be empty")
        if np.any((s != 0) & (s != 1)):
            raise ValueError("settings must be binary")
        if self.clock not in CLOCK_MODES:
            raise ValueError(f"clock mode must be one of {CLOCK_MODES}")
        s.setflags(write=False)
        object.__setattr__(self, "settings", s)

    def pairs(self, start, count):
        idx = np.arange(start, start + count) % len(self.settings)
        return self.settings[idx, 0], self.settings[idx, 1]


def random_schedule(n, seed, clock=CYCLIC):
    """``n`` setting pairs drawn uniformly from the settings stream."""
    k = (uniform_stream(seed, STREAM_SETTINGS, 0, n) * 4).astype(np.int64)
    return Schedule(np.column_stack([k // 2, k % 2]), clock)


def message_schedule(bits, a=0, clock=CYCLIC):
    """Encode a bit string in station 2's setting, one bit per run."""
    bits = np.asarray(bits, dtype=np.int64)
    return Schedule(np.column_stack([np.full(len(bits), a), bits]), clock)


class RunRecord(NamedTuple):
    index: int
    m: int
    u: float
    v: float
    a: int
    b: int
    x: int
    y: int


class Station1View(NamedTuple):
    """What station 1 sees: never ``b`` or ``v``. ``m`` is None when hidden."""

    index: np.ndarray
    m: Optional[np.ndarray]
    u: np.ndarray
    a: np.ndarray
    x: np.ndarray


class Station2View(NamedTuple):
    """What station 2 sees: never ``a`` or ``u``. ``m`` is None when hidden."""

    index: np.ndarray
    m: Optional[np.ndarray]
    v: np.ndarray
    b: np.ndarray
    y: np.ndarray


_COLUMNS = RunRecord._fields


@dataclass(eq=False)
class Records:
    """Column store of runs (one array per :class:`RunRecord` field)."""

    index: np.ndarray
    m: np.ndarray
    u: np.ndarray
    v: np.ndarray
    a: np.ndarray
    b: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.index)

    def __getitem__(self, k):
        return RunRecord(*(getattr(self, f)[k].item() for f in _COLUMNS))

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def select(self, mask):
        return Records(*(getattr(self, f)[mask] for f in _COLUMNS))

    def concat(self, other):
        return Records(*(np.concatenate([getattr(self, f), getattr(other, f)]) for f in _COLUMNS))

    def equals(self, other):
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in _COLUMNS)

    def station1_view(self, hide_clock=False):
        return Station1View(self.index, None if hide_clock else self.m, self.u, self.a, self.x)

    def station2_view(self, hide_clock=False):
        return Station2View(self.index, None if hide_clock else self.m, self.v, self.b, self.y)


def run_experiment(n, sched, seed, fns, rc, start=0):
    """Simulate runs ``start .. start+n-1``."""
    if n < 1:
        raise ValueError("need at least one run")
    index = np.arange(start, start + n, dtype=np.int64)
    a, b = sched.pairs(start, n)
    if sched.clock == CYCLIC:
        m = index % N_CLOCK
    else:
        m = (uniform_stream(seed, STREAM_CLOCK, start, n) * N_CLOCK).astype(np.int64)

    cell_col = np.empty((N_CLOCK, 2, 2), dtype=np.int64)
    cell_row = np.empty((N_CLOCK, 2, 2), dtype=np.int64)
    for k in range(N_CLOCK):
        for aa in (0, 1):
            for bb in (0, 1):
                c = rc.cell(k, aa, bb)
                cell_col[k, aa, bb], cell_row[k, aa, bb] = c.column, c.row
    u = cell_col[m, a, b] + uniform_stream(seed, STREAM_STATION1, start, n)
    v = cell_row[m, a, b] + uniform_stream(seed, STREAM_STATION2, start, n)

    x = outcomes_A(m, a, u, fns, rc)
    y = outcomes_B(m, b, v, fns, rc)
    return Records(index, m, u, v, a, b, x, y)


class CorrelationEstimate(NamedTuple):
    estimate: float
    stderr: float
    n: int


def estimate_correlation(records, a, b):
    """Mean of ``x y`` over runs with settings ``(a, b)`` and its standard error."""
    mask = (records.a == a) & (records.b == b)
    n = int(mask.sum())
    if n == 0:
        raise ValueError(f"no runs with settings ({a}, {b})")
    prod = (records.x[mask] * records.y[mask]).astype(float)
    if n == 1:
        warnings.warn("standard error undefined for a single run; reported as 0", RuntimeWarning)
        return CorrelationEstimate(float(prod[0]), 0.0, 1)
    return CorrelationEstimate(float(prod.mean()), float(prod.std(ddof=1) / math.sqrt(n)), n)


def _setting_by_column(rc):
    table = np.full((N_CLOCK, SIDE), -1, dtype=np.int64)
    for m in range(N_CLOCK):
        for a in (0, 1):
            for b in (0, 1):
                table[m, rc.cell(m, a, b).column] = b
    return table


def signal_decode(view, rc):
    """Station 2's setting per run, read off the clock index and ``u``."""
    if view.m is None:
        raise ValueError("clock index hidden; use blind_decode")
    b = _setting_by_column(rc)[view.m, view.u.astype(np.int64)]
    if np.any(b < 0):
        raise ValueError("record stream contains unattainable (m, u)")
    return b


def blind_decode(view, rc):
    """Best guess of the distant setting from ``(a, u)`` alone.

    Picks the ``b`` with the larger clock-averaged likelihood of ``u``'s
    column; ties go to 0. With the mixture uniform for every ``b`` all
    columns tie, so the guess carries no information.
    """
    u_mix, _ = station_distributions(rc, marginalize_clock=True)
    col = view.u.astype(np.int64)
    like0 = u_mix[view.a, 0, col]
    like1 = u_mix[view.a, 1, col]
    return np.where(like1 > like0, 1, 0)


def blind_advantage(rc):
    """Largest total-variation distance between ``u``-column laws under ``b = 0, 1``.

    The advantage of any decoder that sees ``(a, u)`` but not the clock is
    at most half of this.
    """
    u_mix, _ = station_distributions(rc, marginalize_clock=True)
    return float(max(0.5 * np.abs(u_mix[a, 0] - u_mix[a, 1]).sum() for a in (0, 1)))


def bit_error_rate(decoded, truth):
    decoded, truth = np.asarray(decoded), np.asarray(truth)
    if decoded.shape != truth.shape or decoded.size == 0:
        raise ValueError("decoded and true bits must be nonempty and the same shape")
    return float(np.mean(decoded != truth))


def instrument_distribution(records, m, a, b, exact=False, rc=None):
    """Distribution of ``u`` over the four columns for runs matching ``(m, a, b)``.

    ``m=None`` pools all clock values. With ``exact=True`` the distribution is
    computed from ``rc`` instead of the records.
    """
    if exact:
        if rc is None:
            raise ValueError("exact mode needs a region config")
        if m is None:
            return station_distributions(rc, marginalize_clock=True)[0][a, b]
        return station_distributions(rc)[0][m, a, b]
    mask = (records.a == a) & (records.b == b)
    if m is not None:
        mask &= records.m == m
    if not mask.any():
        raise ValueError(f"no runs with m={m}, settings ({a}, {b})")
    counts = np.bincount(records.u[mask].astype(np.int64), minlength=SIDE)
    return counts / counts.sum()


def write_records(records, path, delimiter=","):
    """One run per line in the column order of :class:`RunRecord`."""
    with open(path, "w") as fh:
        fh.write(delimiter.join(_COLUMNS) + "\n")
        for r in zip(*(getattr(records, f).tolist() for f in _COLUMNS)):
            idx, m, u, v, a, b, x, y = r
            fh.write(delimiter.join([str(idx), str(m), f"{u:.17g}", f"{v:.17g}",
                                     str(a), str(b), str(x), str(y)]) + "\n")


def read_records(path, delimiter=","):
    with open(path) as fh:
        header = fh.readline().strip().split(delimiter)
        if tuple(header) != _COLUMNS:
            raise ValueError(f"unexpected record header {header}")
        data = np.loadtxt(fh, delimiter=delimiter, dtype=str, ndmin=2)
    cols = {}
    for k, f in enumerate(_COLUMNS):
        cols[f] = data[:, k].astype(float if f in ("u", "v") else np.int64)
    return Records(**cols)

"""Outcome functions ``A_m(a, u)`` and ``B_m(b, v)`` for the toy model.

Under clock index ``m`` the cell column of ``u`` identifies the distant
setting ``b``. Station 1 then answers ``+1`` when the fractional part of
``u`` lies below a threshold ``p[a, b]``, station 2 likewise with ``q[a, b]``
on ``v``. Thresholds are chosen so that ``(2p - 1)(2q - 1) = t[a, b]``, the
singlet target ``-da . db``. Both outcomes are negated on a fixed half of the
clock values, which leaves every product unchanged and zeroes each
single-station average.
"""
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .locality import OUTCOMES, JointKernel
from .regions import (
    N_CLOCK,
    SETTING_PAIRS,
    SIDE,
    AttainabilityError,
    RegionConfig,
    clock_pair,
    infer_settings_from_u,
    infer_settings_from_v,
    supported_cell,
)

__all__ = [
    "DEFAULT_FLIP_SET",
    "OutcomeFns",
    "thresholds_for_target",
    "build_outcome_functions",
    "eval_A",
    "eval_B",
    "outcomes_A",
    "outcomes_B",
    "model_correlation",
    "model_correlations",
    "model_marginal",
    "clock_kernel",
    "full_kernel",
    "save_model",
    "load_model",
]

#: Clock values ``<i, j>`` with ``i + j`` even.
DEFAULT_FLIP_SET = frozenset(m for m in range(N_CLOCK) if sum(clock_pair(m)) % 2 == 0)


def thresholds_for_target(t):
    """Thresholds ``(p, q)`` with ``2p - 1 = sgn(t) sqrt|t|`` and ``2q - 1 = sqrt|t|``."""
    if not -1.0 <= t <= 1.0:
        raise ValueError(f"target correlation {t!r} outside [-1, 1]")
    root = math.sqrt(abs(t))
    return (1.0 + math.copysign(root, t)) / 2.0, (1.0 + root) / 2.0


@dataclass(frozen=True, eq=False)
class OutcomeFns:
    """Thresholds per setting pair plus the sign-flip set.

    The thresholds do not depend on ``m``; :meth:`threshold_p` and
    :meth:`threshold_q` still take it so callers can address ``(m, a, b)``.
    """

    targets: np.ndarray
    p: np.ndarray
    q: np.ndarray
    flip_set: frozenset = field(default=DEFAULT_FLIP_SET)

    def __post_init__(self):
        for name in ("targets", "p", "q"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (2, 2):
                raise ValueError(f"{name} must be a 2x2 table")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any((self.p < 0) | (self.p > 1)) or np.any((self.q < 0) | (self.q > 1)):
            raise ValueError("thresholds must lie in [0, 1]")
        flips = frozenset(int(m) for m in self.flip_set)
        if len(flips) != N_CLOCK // 2 or not flips <= set(range(N_CLOCK)):
            raise ValueError("flip set must hold exactly 8 clock values")
        object.__setattr__(self, "flip_set", flips)

    def threshold_p(self, m, a, b):
        return float(self.p[a, b])

    def threshold_q(self, m, a, b):
        return float(self.q[a, b])

    def sign(self, m):
        return -1 if m in self.flip_set else 1

    def to_text(self):
        lines = ["[outcomes]", "# a b  target  p  q"]
        for a, b in SETTING_PAIRS:
            lines.append(
                f"{a} {b}  {self.targets[a, b]:.17g}  {self.p[a, b]:.17g}  {self.q[a, b]:.17g}"
            )
        lines.append("flip " + " ".join(str(m) for m in sorted(self.flip_set)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        targets, p, q = np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2))
        seen = set()
        flips = None
        in_section = False
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                in_section = line == "[outcomes]"
                continue
            if not in_section:
                continue
            parts = line.split()
            if parts[0] == "flip":
                flips = frozenset(int(s) for s in parts[1:])
            else:
                if len(parts) != 5:
                    raise ValueError(f"malformed outcome row: {raw!r}")
                a, b = int(parts[0]), int(parts[1])
                targets[a, b], p[a, b], q[a, b] = map(float, parts[2:])
                seen.add((a, b))
        if seen != set(SETTING_PAIRS) or flips is None:
            raise ValueError("outcome section incomplete")
        return cls(targets, p, q, flips)


def build_outcome_functions(rc, settings, flip_set=DEFAULT_FLIP_SET):
    """Thresholds reproducing ``-da . db`` for the four setting pairs of ``settings``."""
    if not rc.is_valid():
        raise ValueError("region config is not valid")
    targets = settings.targets()
    p, q = np.zeros((2, 2)), np.zeros((2, 2))
    for a, b in SETTING_PAIRS:
        p[a, b], q[a, b] = thresholds_for_target(targets[a, b])
    return OutcomeFns(targets, p, q, flip_set)


def eval_A(m, a, u, fns, rc):
    """Station-1 outcome; sees only its own setting, the clock and ``u``."""
    inferred_a, b = infer_settings_from_u(m, u, rc)
    if inferred_a != a:
        raise AttainabilityError(f"u={u} not attainable under m={m} with a={a}")
    x = 1 if u - int(u) < fns.threshold_p(m, a, b) else -1
    return fns.sign(m) * x


def eval_B(m, b, v, fns, rc):
    """Station-2 outcome; sees only its own setting, the clock and ``v``."""
    a, inferred_b = infer_settings_from_v(m, v, rc)
    if inferred_b != b:
        raise AttainabilityError(f"v={v} not attainable under m={m} with b={b}")
    y = 1 if v - int(v) < fns.threshold_q(m, a, b) else -1
    return fns.sign(m) * y


def _lookup_tables(rc):
    # [m, column] -> setting-pair index (2a + b), -1 where unsupported
    by_col = np.full((N_CLOCK, SIDE), -1, dtype=np.int64)
    by_row = np.full((N_CLOCK, SIDE), -1, dtype=np.int64)
    for m in range(N_CLOCK):
        for a, b in SETTING_PAIRS:
            c = rc.cell(m, a, b)
            by_col[m, c.column] = 2 * a + b
            by_row[m, c.row] = 2 * a + b
    return by_col, by_row


def _signs(fns):
    return np.array([fns.sign(m) for m in range(N_CLOCK)], dtype=np.int64)


def outcomes_A(m, a, u, fns, rc):
    """Vectorized :func:`eval_A` over arrays of runs."""
    m, a, u = np.asarray(m), np.asarray(a), np.asarray(u, dtype=float)
    by_col, _ = _lookup_tables(rc)
    col = u.astype(np.int64)
    ab = by_col[m, col]
    if np.any(ab < 0) or np.any(ab // 2 != a):
        raise AttainabilityError("some (m, a, u) are not attainable")
    p = fns.p.ravel()[ab]
    return _signs(fns)[m] * np.where(u - col < p, 1, -1)


def outcomes_B(m, b, v, fns, rc):
    """Vectorized :func:`eval_B` over arrays of runs."""
    m, b, v = np.asarray(m), np.asarray(b), np.asarray(v, dtype=float)
    _, by_row = _lookup_tables(rc)
    row = v.astype(np.int64)
    ab = by_row[m, row]
    if np.any(ab < 0) or np.any(ab % 2 != b):
        raise AttainabilityError("some (m, b, v) are not attainable")
    q = fns.q.ravel()[ab]
    return _signs(fns)[m] * np.where(v - row < q, 1, -1)


def _integrate_step(fn, start, threshold):
    """Integral of a two-piece step function over ``[start, start + 1)``.

    ``fn`` is evaluated once inside each piece; the pieces meet at
    ``start + threshold``.
    """
    total = 0.0
    for lo, hi in ((0.0, threshold), (threshold, 1.0)):
        if hi > lo:
            total += (hi - lo) * fn(start + (lo + hi) / 2)
    return total


def _station_means(m, a, b, fns, rc):
    c = supported_cell(m, a, b, rc)
    mean_a = _integrate_step(lambda u: eval_A(m, a, u, fns, rc), c.column, fns.threshold_p(m, a, b))
    mean_b = _integrate_step(lambda v: eval_B(m, b, v, fns, rc), c.row, fns.threshold_q(m, a, b))
    return mean_a, mean_b


def model_correlation(a, b, fns, rc):
    """Exact ``(1/16) sum_m int int rho^m_ab A_m B_m`` by cell integration."""
    total = 0.0
    for m in range(N_CLOCK):
        mean_a, mean_b = _station_means(m, a, b, fns, rc)
        total += mean_a * mean_b
    return total / N_CLOCK


def model_correlations(fns, rc):
    """2x2 table of :func:`model_correlation`."""
    table = np.empty((2, 2))
    for a, b in SETTING_PAIRS:
        table[a, b] = model_correlation(a, b, fns, rc)
    return table


def model_marginal(a, b, station, fns, rc, m=None):
    """Average outcome at one station, over the clock or at a single ``m``."""
    if station not in (1, 2):
        raise ValueError("station must be 1 or 2")
    clocks = range(N_CLOCK) if m is None else [m]
    means = [_station_means(k, a, b, fns, rc)[station - 1] for k in clocks]
    return sum(means) / len(means)


def clock_kernel(fns, rc):
    """Kernel with the clock index as hidden state, weights uniform."""
    def joint(a, b, m):
        mean_a, mean_b = _station_means(m, a, b, fns, rc)
        pa = (1 + OUTCOMES * mean_a) / 2
        pb = (1 + OUTCOMES * mean_b) / 2
        return np.outer(pa, pb)

    return JointKernel.from_function(joint, range(N_CLOCK), name="table-clock")


def full_kernel(fns, rc):
    """Kernel over the complete hidden state ``(m, u, v)``.

    Within a supported cell the outcomes are constant on the pieces of
    ``u`` below/above ``p`` and of ``v`` below/above ``q``, so states
    ``(m, column, row, piece_u, piece_v)`` with weights equal to the piece
    areas lose nothing. The conditional kernel is deterministic and
    undefined (NaN) wherever ``(a, b)`` gives the cell no weight; the
    weights themselves depend on ``(a, b)``.
    """
    labels = []
    for m in range(N_CLOCK):
        for c in sorted(rc.region(m)):
            for pu, pv in product((0, 1), repeat=2):
                labels.append((m, c.column, c.row, pu, pv))
    n = len(labels)
    probs = np.full((n, 2, 2, 2, 2), np.nan)
    weights = np.zeros((2, 2, n))
    for k, (m, col, row, pu, pv) in enumerate(labels):
        for a, b in SETTING_PAIRS:
            if rc.cell(m, a, b) != (col, row):
                continue
            (ulo, uhi), (vlo, vhi) = (
                _piece(fns.threshold_p(m, a, b), pu), _piece(fns.threshold_q(m, a, b), pv)
            )
            x = eval_A(m, a, col + (ulo + uhi) / 2, fns, rc)
            y = eval_B(m, b, row + (vlo + vhi) / 2, fns, rc)
            dist = np.zeros((2, 2))
            dist[(x + 1) // 2, (y + 1) // 2] = 1.0
            probs[k, a, b] = dist
            weights[a, b, k] = (uhi - ulo) * (vhi - vlo) / N_CLOCK
    return JointKernel(probs, weights, tuple(labels), name="table-full")


def _piece(threshold, k):
    return (0.0, threshold) if k == 0 else (threshold, 1.0)


def save_model(path, rc, fns=None):
    """Write a region config, optionally followed by outcome thresholds."""
    text = rc.to_text()
    if fns is not None:
        text += "\n" + fns.to_text()
    with open(path, "w") as fh:
        fh.write(text)


def load_model(path):
    """Read ``(rc, fns)``; ``fns`` is None when the file has no outcome section."""
    with open(path) as fh:
        text = fh.read()
    rc = RegionConfig.from_text(text)
    fns = OutcomeFns.from_text(text) if "[outcomes]" in text else None
    return rc, fns

"""Checkers for the locality conditions of two-station hidden-variable models.

A model is a :class:`JointKernel`: for every binary setting pair ``(a, b)``
and every hidden state ``lam`` drawn from a finite grid it gives a
distribution over outcome pairs ``(x, y)`` with ``x, y in {-1, +1}``, and a
weight for ``lam`` that is allowed to depend on ``(a, b)``.

The conditional kernel is tested for Parameter Independence, Outcome
Independence and factorizability; the weights are tested separately by
:func:`check_distribution_independence`.
"""
import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "OUTCOMES",
    "HOLDS",
    "VIOLATED",
    "DEFAULT_TOL",
    "JointKernel",
    "ConditionReport",
    "outcome_index",
    "marginal_station1",
    "marginal_station2",
    "check_parameter_independence",
    "check_outcome_independence",
    "check_factorizability",
    "jarrett_equivalence",
    "check_distribution_independence",
    "check_weight_independence",
    "averaged_correlation",
    "station_averages",
    "kernel_correlations",
    "chsh",
    "chsh_from_table",
    "random_kernel",
    "RANDOM_KERNEL_KINDS",
]

#: Outcome values in axis order: index 0 is -1, index 1 is +1.
OUTCOMES = np.array([-1, 1])

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"

DEFAULT_TOL = 1e-9

_SUM_TOL = 1e-9


def outcome_index(x):
    """Axis index of outcome ``x`` (-1 -> 0, +1 -> 1)."""
    if x not in (-1, 1):
        raise ValueError(f"outcome must be -1 or +1, got {x!r}")
    return (x + 1) // 2


@dataclass(frozen=True, eq=False)
class JointKernel:
    """Finite hidden-state kernel ``p_ab(x, y | lam)`` with weights ``w_ab(lam)``.

    ``probs`` has shape ``(L, 2, 2, 2, 2)`` indexed ``[lam, a, b, x, y]``.
    Entries for a ``(lam, a, b)`` that carries zero weight may be NaN, meaning
    the conditional distribution is undefined there; checkers skip them.

    ``weights`` has shape ``(2, 2, L)``; a 1-d array of length ``L`` is
    broadcast to all four setting pairs.
    """

    probs: np.ndarray
    weights: np.ndarray
    labels: tuple = field(default=None)
    name: str = "kernel"

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 5 or probs.shape[1:] != (2, 2, 2, 2):
            raise ValueError(f"probs must have shape (L, 2, 2, 2, 2), got {probs.shape}")
        n_lam = probs.shape[0]
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim == 1:
            weights = np.broadcast_to(weights, (2, 2, n_lam)).copy()
        if weights.shape != (2, 2, n_lam):
            raise ValueError(f"weights must have shape (2, 2, {n_lam}), got {weights.shape}")
        if np.any(weights < 0) or not np.allclose(weights.sum(axis=-1), 1.0, atol=_SUM_TOL):
            raise ValueError("lambda weights must be nonnegative and sum to 1 for each (a, b)")

        defined = ~np.isnan(probs).any(axis=(3, 4))
        if np.any(~defined & (weights.transpose(2, 0, 1) > 0)):
            raise ValueError("conditional distribution undefined on a lambda with positive weight")
        flat = probs[defined]
        if np.any(flat < -_SUM_TOL) or not np.allclose(flat.sum(axis=(1, 2)), 1.0, atol=_SUM_TOL):
            raise ValueError("each conditional distribution must be nonnegative and sum to 1")

        labels = tuple(range(n_lam)) if self.labels is None else tuple(self.labels)
        if len(labels) != n_lam:
            raise ValueError("one label per hidden state required")
        probs.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_function(cls, fn, labels, weights=None, name="kernel"):
        """Build a kernel by evaluating ``fn(a, b, lam)`` on every grid point.

        ``fn`` returns a 2x2 array ``[x, y]`` (outcome axis order as in
        :data:`OUTCOMES`) or ``None`` where the state is unsupported.
        """
        labels = list(labels)
        probs = np.full((len(labels), 2, 2, 2, 2), np.nan)
        for k, lam in enumerate(labels):
            for a, b in product((0, 1), repeat=2):
                dist = fn(a, b, lam)
                if dist is not None:
                    probs[k, a, b] = dist
        if weights is None:
            weights = np.full(len(labels), 1.0 / len(labels))
        return cls(probs, weights, tuple(labels), name)

    @property
    def n_states(self):
        return self.probs.shape[0]

    def defined(self):
        """Boolean mask ``[lam, a, b]`` of defined conditional distributions."""
        return ~np.isnan(self.probs).any(axis=(3, 4))

    def joint(self, a, b, lam):
        return self.probs[lam, a, b]


@dataclass
class ConditionReport:
    """Verdict of a locality check with its witness."""

    condition: str
    verdict: str
    tolerance: float
    max_deviation: float
    witness: dict = field(default_factory=dict)

    @property
    def holds(self):
        return self.verdict == HOLDS

    def __bool__(self):
        return self.holds

    def to_dict(self):
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "max_deviation": self.max_deviation,
            "witness": _plain(self.witness),
        }

    def to_text(self):
        """Render as ``key = value`` lines; nested arrays as bracketed lists."""
        lines = []
        for key, value in self.to_dict().items():
            if key == "witness":
                for wkey, wval in value.items():
                    lines.append(f"witness.{wkey} = {json.dumps(wval)}")
            else:
                lines.append(f"{key} = {value if isinstance(value, str) else json.dumps(value)}")
        return "\n".join(lines)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _report(condition, tol, max_dev, witness):
    verdict = VIOLATED if witness else HOLDS
    return ConditionReport(condition, verdict, tol, float(max_dev), witness or {})


def marginal_station1(k, a, b, lam):
    """``p_ab(x | lam) = sum_y p_ab(x, y | lam)``."""
    return k.probs[lam, a, b].sum(axis=1)


def marginal_station2(k, a, b, lam):
    """``p_ab(y | lam) = sum_x p_ab(x, y | lam)``."""
    return k.probs[lam, a, b].sum(axis=0)


def check_parameter_independence(k, tol=DEFAULT_TOL):
    """Is each station's marginal independent of the distant setting?

    Compares ``p_ab(x|lam)`` across ``b`` for every ``(lam, a)`` and
    ``p_ab(y|lam)`` across ``a`` for every ``(lam, b)``. Pairs where either
    side is undefined are skipped. The witness is the first violation in the
    order ``(lam, station, local setting)``.
    """
    m1 = k.probs.sum(axis=4)  # [lam, a, b, x]
    m2 = k.probs.sum(axis=3)  # [lam, a, b, y]
    max_dev = 0.0
    witness = None
    for lam in range(k.n_states):
        for station, local in product((1, 2), (0, 1)):
            if station == 1:
                d0, d1 = m1[lam, local, 0], m1[lam, local, 1]
            else:
                d0, d1 = m2[lam, 0, local], m2[lam, 1, local]
            if np.isnan(d0).any() or np.isnan(d1).any():
                continue
            dev = float(np.max(np.abs(d0 - d1)))
            max_dev = max(max_dev, dev)
            if dev > tol and witness is None:
                witness = {
                    "lambda": k.labels[lam],
                    "station": station,
                    "local_setting": local,
                    "distant_settings": [0, 1],
                    "distributions": [d0, d1],
                    "deviation": dev,
                }
    return _report("parameter_independence", tol, max_dev, witness)


def check_outcome_independence(k, tol=DEFAULT_TOL):
    """Does each joint equal the product of its own marginals?"""
    max_dev = 0.0
    witness = None
    for lam in range(k.n_states):
        for a, b in product((0, 1), repeat=2):
            joint = k.probs[lam, a, b]
            if np.isnan(joint).any():
                continue
            prod = np.outer(joint.sum(axis=1), joint.sum(axis=0))
            dev = float(np.max(np.abs(joint - prod)))
            max_dev = max(max_dev, dev)
            if dev > tol and witness is None:
                witness = {
                    "lambda": k.labels[lam],
                    "settings": [a, b],
                    "joint": joint,
                    "product_of_marginals": prod,
                    "deviation": dev,
                }
    return _report("outcome_independence", tol, max_dev, witness)


def check_factorizability(k, tol=DEFAULT_TOL):
    """Bell factorizability of the conditional kernel.

    If ``p_ab(x, y|lam) = f_a(x|lam) g_b(y|lam)`` then summing out ``y`` shows
    ``f_a`` must be the station-1 marginal, which must then be the same for
    both ``b``. So the only candidates are the marginals taken at the first
    defined distant setting; the kernel factorizes iff those candidates
    reproduce every joint.
    """
    m1 = k.probs.sum(axis=4)
    m2 = k.probs.sum(axis=3)
    defined = k.defined()
    max_dev = 0.0
    witness = None
    for lam in range(k.n_states):
        f = {}
        g = {}
        for a in (0, 1):
            bs = [b for b in (0, 1) if defined[lam, a, b]]
            if bs:
                f[a] = m1[lam, a, bs[0]]
        for b in (0, 1):
            as_ = [a for a in (0, 1) if defined[lam, a, b]]
            if as_:
                g[b] = m2[lam, as_[0], b]
        for a, b in product((0, 1), repeat=2):
            if not defined[lam, a, b]:
                continue
            prod = np.outer(f[a], g[b])
            dev = float(np.max(np.abs(k.probs[lam, a, b] - prod)))
            max_dev = max(max_dev, dev)
            if dev > tol and witness is None:
                witness = {
                    "lambda": k.labels[lam],
                    "settings": [a, b],
                    "joint": k.probs[lam, a, b],
                    "local_product": prod,
                    "deviation": dev,
                }
    return _report("factorizability", tol, max_dev, witness)


def jarrett_equivalence(k, tol=DEFAULT_TOL):
    """True when factorizability agrees with (PI and OI) on ``k``."""
    fact = check_factorizability(k, tol).holds
    pi = check_parameter_independence(k, tol).holds
    oi = check_outcome_independence(k, tol).holds
    return fact == (pi and oi)


def check_distribution_independence(u_dist, v_dist, tol=DEFAULT_TOL):
    """Are the instrument-variable distributions blind to the distant setting?

    ``u_dist`` and ``v_dist`` have shape ``(..., 2, 2, K)``: leading axes
    index whatever the distributions are conditioned on (e.g. the clock
    index), then ``a``, ``b``, then the K values of the station variable.
    ``u_dist`` must not change with ``b`` and ``v_dist`` must not change
    with ``a``.
    """
    u_dist = np.asarray(u_dist, dtype=float)
    v_dist = np.asarray(v_dist, dtype=float)
    lead_u = u_dist.reshape(-1, 2, 2, u_dist.shape[-1])
    lead_v = v_dist.reshape(-1, 2, 2, v_dist.shape[-1])
    shape = u_dist.shape[:-3]
    max_dev = 0.0
    witness = None
    for idx in range(lead_u.shape[0]):
        cond = np.unravel_index(idx, shape) if shape else ()
        cond = [int(c) for c in cond]
        for station, local in product((1, 2), (0, 1)):
            if station == 1:
                d0, d1 = lead_u[idx, local, 0], lead_u[idx, local, 1]
            else:
                d0, d1 = lead_v[idx, 0, local], lead_v[idx, 1, local]
            dev = float(np.max(np.abs(d0 - d1)))
            max_dev = max(max_dev, dev)
            if dev > tol and witness is None:
                witness = {
                    "condition_index": cond,
                    "station": station,
                    "local_setting": local,
                    "distant_settings": [0, 1],
                    "distributions": [d0, d1],
                    "deviation": dev,
                }
    return _report("distribution_independence", tol, max_dev, witness)


def check_weight_independence(k, tol=DEFAULT_TOL):
    """Are the hidden-state weights the same for all four setting pairs?"""
    ref = k.weights[0, 0]
    max_dev = 0.0
    witness = None
    for a, b in product((0, 1), repeat=2):
        diff = np.abs(k.weights[a, b] - ref)
        dev = float(diff.max())
        max_dev = max(max_dev, dev)
        if dev > tol and witness is None:
            lam = int(np.argmax(diff > tol))
            witness = {
                "lambda": k.labels[lam],
                "settings": [[0, 0], [a, b]],
                "weights": [ref[lam], k.weights[a, b, lam]],
                "deviation": dev,
            }
    return _report("weight_independence", tol, max_dev, witness)


def averaged_correlation(rho, a_bar, b_bar):
    """``sum_lam rho(lam) * Abar(lam) * Bbar(lam)`` over a finite grid."""
    rho = np.asarray(rho, dtype=float)
    a_bar = np.asarray(a_bar, dtype=float)
    b_bar = np.asarray(b_bar, dtype=float)
    if np.any(np.abs(a_bar) > 1 + 1e-12) or np.any(np.abs(b_bar) > 1 + 1e-12):
        raise ValueError("averaged outcomes must lie in [-1, 1]")
    if np.any(rho < 0) or not math.isclose(rho.sum(), 1.0, abs_tol=_SUM_TOL):
        raise ValueError("rho must be a probability vector")
    return float(np.sum(rho * a_bar * b_bar))


def station_averages(k):
    """Per-state averaged outcomes ``(Abar[lam, a, b], Bbar[lam, a, b])``."""
    m1 = k.probs.sum(axis=4)
    m2 = k.probs.sum(axis=3)
    return m1 @ OUTCOMES, m2 @ OUTCOMES


def kernel_correlations(k):
    """2x2 table ``E[a, b] = sum_lam w_ab(lam) sum_xy x y p_ab(x, y|lam)``."""
    xy = np.outer(OUTCOMES, OUTCOMES)
    per_state = np.nan_to_num(np.einsum("labxy,xy->lab", k.probs, xy))
    return np.einsum("abl,lab->ab", k.weights, per_state)


def chsh(e00, e01, e10, e11):
    """CHSH statistic ``S = E00 - E01 + E10 + E11``."""
    values = (e00, e01, e10, e11)
    for e in values:
        if not -1 - 1e-12 <= e <= 1 + 1e-12:
            raise ValueError(f"correlation {e!r} outside [-1, 1]")
    return float(e00 - e01 + e10 + e11)


def chsh_from_table(table):
    t = np.asarray(table)
    return chsh(t[0, 0], t[0, 1], t[1, 0], t[1, 1])


RANDOM_KERNEL_KINDS = ("generic", "product", "outcome_dependent", "parameter_dependent")


def random_kernel(rng, kind="generic", n_states=8):
    """Draw a kernel with setting-independent weights from flat simplices.

    kind:
      generic              every joint drawn uniformly from the 4-simplex
      product              f_a(x|lam) g_b(y|lam): factorizable
      outcome_dependent    local marginals, correlation depends on (a, b): PI only
      parameter_dependent  f_ab(x|lam) g_ab(y|lam): OI only
    """
    weights = rng.dirichlet(np.ones(n_states))
    probs = np.empty((n_states, 2, 2, 2, 2))
    if kind == "generic":
        probs[:] = rng.dirichlet(np.ones(4), size=(n_states, 2, 2)).reshape(n_states, 2, 2, 2, 2)
    elif kind == "product":
        f = rng.dirichlet(np.ones(2), size=(n_states, 2))
        g = rng.dirichlet(np.ones(2), size=(n_states, 2))
        probs[:] = np.einsum("lax,lby->labxy", f, g)
    elif kind == "parameter_dependent":
        f = rng.dirichlet(np.ones(2), size=(n_states, 2, 2))
        g = rng.dirichlet(np.ones(2), size=(n_states, 2, 2))
        probs[:] = np.einsum("labx,laby->labxy", f, g)
    elif kind == "outcome_dependent":
        f = rng.dirichlet(np.ones(2), size=(n_states, 2))
        g = rng.dirichlet(np.ones(2), size=(n_states, 2))
        base = np.einsum("lax,lby->labxy", f, g)
        sign = np.outer(OUTCOMES, OUTCOMES)
        # p + c*x*y keeps both marginals; c bounded so every entry stays >= 0
        hi = np.minimum(base[..., 0, 1], base[..., 1, 0])
        lo = -np.minimum(base[..., 0, 0], base[..., 1, 1])
        c = lo + (hi - lo) * rng.random((n_states, 2, 2))
        probs[:] = base + c[..., None, None] * sign
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    return JointKernel(probs, weights, name=f"random-{kind}")

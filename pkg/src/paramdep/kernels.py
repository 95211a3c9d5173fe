"""Reference joint-outcome models used to calibrate the locality checkers.

Two models are provided: the spin singlet, whose correlation is ``-da . db``,
and a local deterministic foil in which a shared angle ``lam`` on the circle
fixes both outcomes.
"""
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .locality import OUTCOMES, JointKernel, outcome_index

__all__ = [
    "as_direction",
    "planar",
    "planar_angle",
    "SettingMap",
    "CHSH_ANGLES",
    "singlet_correlation",
    "singlet_joint",
    "singlet_kernel",
    "local_foil_correlation",
    "local_foil_outcomes",
    "local_foil_kernel",
    "FOIL_GRID_POINTS",
]

_NORM_TOL = 1e-12

#: Planar analyzer angles (degrees) a0, a1, b0, b1 that maximize |CHSH| for the singlet.
CHSH_ANGLES = (0.0, 90.0, 45.0, 135.0)

FOIL_GRID_POINTS = 10_000


def as_direction(vec):
    """Validate a unit 3-vector and return it as a float array."""
    d = np.asarray(vec, dtype=float)
    if d.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {d.shape}")
    if abs(np.linalg.norm(d) - 1.0) > _NORM_TOL:
        raise ValueError(f"direction {d} is not a unit vector")
    return d


def planar(angle_deg):
    """Unit vector in the x-y plane at ``angle_deg`` from the x axis."""
    t = math.radians(angle_deg)
    return np.array([math.cos(t), math.sin(t), 0.0])


def planar_angle(d):
    """Angle (radians) of an in-plane direction."""
    d = as_direction(d)
    if abs(d[2]) > _NORM_TOL:
        raise ValueError("direction does not lie in the x-y plane")
    return math.atan2(d[1], d[0])


@dataclass(frozen=True, eq=False)
class SettingMap:
    """Directions bound to the binary settings of each station."""

    station1: tuple
    station2: tuple

    def __post_init__(self):
        s1 = tuple(as_direction(d) for d in self.station1)
        s2 = tuple(as_direction(d) for d in self.station2)
        if len(s1) != 2 or len(s2) != 2:
            raise ValueError("each station needs exactly two directions")
        object.__setattr__(self, "station1", s1)
        object.__setattr__(self, "station2", s2)

    @classmethod
    def from_angles(cls, a0, a1, b0, b1):
        """Planar settings from four angles in degrees."""
        return cls((planar(a0), planar(a1)), (planar(b0), planar(b1)))

    def direction_a(self, a):
        return self.station1[a]

    def direction_b(self, b):
        return self.station2[b]

    def targets(self):
        """2x2 table of singlet correlations ``-da . db``."""
        t = np.empty((2, 2))
        for a, b in product((0, 1), repeat=2):
            t[a, b] = singlet_correlation(self.station1[a], self.station2[b])
        return t


def singlet_correlation(da, db):
    """``E(a, b) = -da . db``."""
    da, db = as_direction(da), as_direction(db)
    return float(np.clip(-np.dot(da, db), -1.0, 1.0))


def singlet_joint(x, y, da, db):
    """``p(x, y) = (1 - x y da.db) / 4``: unbiased marginals, correlation ``-da.db``."""
    outcome_index(x)
    outcome_index(y)
    c = float(np.dot(as_direction(da), as_direction(db)))
    return (1.0 - x * y * c) / 4.0


def singlet_kernel(settings):
    """Singlet statistics as a one-state kernel (the state is the quantum state)."""
    def joint(a, b, lam):
        da, db = settings.direction_a(a), settings.direction_b(b)
        return np.array([[singlet_joint(x, y, da, db) for y in OUTCOMES] for x in OUTCOMES])

    return JointKernel.from_function(joint, ["singlet"], name="singlet")


def local_foil_correlation(da, db):
    """Closed-form foil correlation ``-1 + 2 delta / pi`` for in-plane directions."""
    delta = abs(planar_angle(da) - planar_angle(db)) % (2 * math.pi)
    delta = min(delta, 2 * math.pi - delta)
    return -1.0 + 2.0 * delta / math.pi


def local_foil_outcomes(lam, alpha, beta):
    """Foil outcomes ``x = sgn cos(lam - alpha)``, ``y = -sgn cos(lam - beta)``.

    Zero cosines count as positive.
    """
    x = np.where(np.cos(lam - alpha) >= 0, 1, -1)
    y = -np.where(np.cos(lam - beta) >= 0, 1, -1)
    return x, y


def local_foil_kernel(settings, n_points=FOIL_GRID_POINTS):
    """The foil on a midpoint grid of ``n_points`` angles, uniform weights."""
    lam = (np.arange(n_points) + 0.5) * (2 * math.pi / n_points)
    probs = np.zeros((n_points, 2, 2, 2, 2))
    for a, b in product((0, 1), repeat=2):
        alpha = planar_angle(settings.direction_a(a))
        beta = planar_angle(settings.direction_b(b))
        x, y = local_foil_outcomes(lam, alpha, beta)
        probs[np.arange(n_points), a, b, (x + 1) // 2, (y + 1) // 2] = 1.0
    return JointKernel(probs, np.full(n_points, 1.0 / n_points), tuple(lam), name="local-foil")

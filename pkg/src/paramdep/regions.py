"""The four-setting toy model on the square ``[0, 4) x [0, 4)``.

Station 1 carries a parameter ``u`` and station 2 a parameter ``v``, both in
``[0, 4)``. Pattern rows ``sigma^i_a(u)`` and ``tau^j_b(v)`` switch unit
intervals on or off depending on the local setting. A clock index
``m = <i, j>`` (16 values) picks a region ``E_m`` of the square, and the
density for settings ``(a, b)`` is

    rho^m_ab(u, v) = sigma^i_a(u) * tau^j_b(v) * [ (u, v) in E_m ]

Regions are unions of unit cells. :func:`synthesize_regions` searches for a
region assignment such that every ``rho^m_ab`` is supported on exactly one
cell, the cell reveals ``(a, b)`` from either coordinate, and the uniform
mixture over ``m`` covers the square evenly for every setting pair.

All mass computations count unit cells exactly; ``u`` and ``v`` only become
real numbers at sampling time.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import NamedTuple, Optional

import numpy as np

__all__ = [
    "PatternTable",
    "DEFAULT_PATTERNS",
    "Cell",
    "CELLS",
    "SETTING_PAIRS",
    "N_CLOCK",
    "clock_pair",
    "clock_flat",
    "sigma",
    "tau",
    "PER_M",
    "J_ONLY",
    "TIERS",
    "RegionConfig",
    "InfeasibilityCertificate",
    "Infeasible",
    "synthesize_regions",
    "density",
    "cell_mass",
    "normalization_check",
    "supported_cell",
    "mixture_density",
    "cell_coverage",
    "infer_settings_from_u",
    "infer_settings_from_v",
    "AttainabilityError",
    "station_distributions",
]

SIDE = 4
N_CLOCK = 16
SETTING_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))

PER_M = "PER-M"
J_ONLY = "J-ONLY"
TIERS = (PER_M, J_ONLY)


class Cell(NamedTuple):
    """Unit square ``[column, column+1) x [row, row+1)``."""

    column: int
    row: int

    def __str__(self):
        return f"{self.column},{self.row}"


CELLS = tuple(Cell(c, r) for c in range(SIDE) for r in range(SIDE))


def clock_pair(m):
    """Flat clock index 0..15 -> 1-based pair ``(i, j)``."""
    if not 0 <= m < N_CLOCK:
        raise ValueError(f"clock index {m} outside 0..15")
    return m // SIDE + 1, m % SIDE + 1


def clock_flat(i, j):
    return (i - 1) * SIDE + (j - 1)


_ENTRIES = ("X", "1-X")


@dataclass(frozen=True)
class PatternTable:
    """Symbolic entries of the sigma and tau rows, one per unit interval.

    Each entry is ``"X"`` (the local setting) or ``"1-X"``.
    """

    sigma: tuple
    tau: tuple

    def __post_init__(self):
        for name in ("sigma", "tau"):
            rows = tuple(tuple(r) for r in getattr(self, name))
            if len(rows) != SIDE or any(len(r) != SIDE for r in rows):
                raise ValueError(f"{name} must be a 4x4 table")
            if any(e not in _ENTRIES for r in rows for e in r):
                raise ValueError(f"{name} entries must be 'X' or '1-X'")
            object.__setattr__(self, name, rows)

    def _rows(self, kind):
        if kind == "sigma":
            return self.sigma
        if kind == "tau":
            return self.tau
        raise ValueError(f"unknown pattern kind {kind!r}")

    def value(self, kind, row, setting, interval):
        """0/1 value of row ``row`` (1-based) at ``setting`` on ``interval``."""
        if setting not in (0, 1):
            raise ValueError(f"setting must be 0 or 1, got {setting!r}")
        entry = self._rows(kind)[row - 1][interval]
        return setting if entry == "X" else 1 - setting

    def support(self, kind, row, setting):
        """Unit intervals where the row is 1."""
        return tuple(k for k in range(SIDE) if self.value(kind, row, setting, k))


DEFAULT_PATTERNS = PatternTable(
    sigma=(
        ("X", "1-X", "X", "1-X"),
        ("1-X", "X", "1-X", "X"),
        ("X", "1-X", "X", "1-X"),
        ("1-X", "X", "1-X", "X"),
    ),
    tau=(
        ("X", "X", "1-X", "1-X"),
        ("X", "1-X", "1-X", "X"),
        ("1-X", "1-X", "X", "X"),
        ("1-X", "X", "X", "1-X"),
    ),
)


def _interval(x):
    if not 0 <= x < SIDE:
        raise ValueError(f"station parameter {x!r} outside [0, 4)")
    return int(x)


def sigma(i, a, u, patterns=DEFAULT_PATTERNS):
    """Station-1 pattern row ``i`` at setting ``a``, evaluated at ``u``."""
    return patterns.value("sigma", i, a, _interval(u))


def tau(j, b, v, patterns=DEFAULT_PATTERNS):
    """Station-2 pattern row ``j`` at setting ``b``, evaluated at ``v``."""
    return patterns.value("tau", j, b, _interval(v))


def _block(patterns, m, a, b):
    """Cells allowed by the pattern rows of ``m`` at ``(a, b)``, in (column, row) order."""
    i, j = clock_pair(m)
    cols = patterns.support("sigma", i, a)
    rows = patterns.support("tau", j, b)
    return tuple(Cell(c, r) for c in cols for r in rows)


@dataclass(frozen=True)
class RegionConfig:
    """Supported cell for every ``(m, a, b)``.

    ``cells[m][2*a + b]`` is a :class:`Cell` (or ``None`` in a deliberately
    broken config). The region ``E_m`` is the union of the four cells of ``m``.
    """

    cells: tuple
    tier: str = PER_M
    patterns: PatternTable = DEFAULT_PATTERNS
    search_nodes: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        cells = tuple(
            tuple(None if c is None else Cell(*c) for c in row) for row in self.cells
        )
        if len(cells) != N_CLOCK or any(len(row) != 4 for row in cells):
            raise ValueError("a region config needs 16 clock rows of 4 cells")
        if self.tier not in TIERS:
            raise ValueError(f"unknown tier {self.tier!r}")
        object.__setattr__(self, "cells", cells)

    def cell(self, m, a, b):
        return self.cells[m][2 * a + b]

    def region(self, m):
        """``E_m`` as a set of cells."""
        return {c for c in self.cells[m] if c is not None}

    def violations(self):
        """Human-readable list of broken invariants (empty for a valid config)."""
        problems = []
        for m in range(N_CLOCK):
            cols, rows = [], []
            for a, b in SETTING_PAIRS:
                c = self.cell(m, a, b)
                if c is None:
                    problems.append(f"m={m} (a,b)=({a},{b}): no cell")
                    continue
                if c not in _block(self.patterns, m, a, b):
                    problems.append(f"m={m} (a,b)=({a},{b}): cell {c} outside pattern support")
                cols.append(c.column)
                rows.append(c.row)
            if len(set(cols)) != len(cols):
                problems.append(f"m={m}: columns not distinct")
            if len(set(rows)) != len(rows):
                problems.append(f"m={m}: rows not distinct")
        for a, b in SETTING_PAIRS:
            used = [self.cell(m, a, b) for m in range(N_CLOCK)]
            if set(used) != set(CELLS):
                problems.append(f"(a,b)=({a},{b}): clock-to-cell map is not a bijection")
        for (m, a, b), mass in normalization_check(self).items():
            problems.append(f"m={m} (a,b)=({a},{b}): mass {mass} != 1")
        return problems

    def is_valid(self):
        return not self.violations()

    def to_text(self):
        """Serialize as a 16-row table; reads back exactly with :meth:`from_text`."""
        lines = ["[regions]", f"tier {self.tier}"]
        for kind in ("sigma", "tau"):
            for n, row in enumerate(self.patterns._rows(kind), start=1):
                lines.append(f"{kind} {n} " + " ".join(row))
        lines.append("# m i j  cell(a,b) as column,row for (a,b) = 00 01 10 11")
        for m in range(N_CLOCK):
            i, j = clock_pair(m)
            entries = ["-" if c is None else str(c) for c in self.cells[m]]
            lines.append(f"{m:2d} {i} {j}  " + "  ".join(entries))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        tier = None
        pats = {"sigma": {}, "tau": {}}
        cells = {}
        in_section = False
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                in_section = line == "[regions]"
                continue
            if not in_section:
                continue
            parts = line.split()
            if parts[0] == "tier":
                tier = parts[1]
            elif parts[0] in pats:
                pats[parts[0]][int(parts[1])] = tuple(parts[2:])
            else:
                if len(parts) != 7:
                    raise ValueError(f"malformed region row: {raw!r}")
                m = int(parts[0])
                if clock_pair(m) != (int(parts[1]), int(parts[2])):
                    raise ValueError(f"clock pair mismatch in row: {raw!r}")
                cells[m] = tuple(
                    None if e == "-" else Cell(*map(int, e.split(","))) for e in parts[3:]
                )
        if tier is None or sorted(cells) != list(range(N_CLOCK)):
            raise ValueError("region section incomplete")
        if any(pats.values()):
            patterns = PatternTable(
                tuple(pats["sigma"][n] for n in range(1, SIDE + 1)),
                tuple(pats["tau"][n] for n in range(1, SIDE + 1)),
            )
        else:
            patterns = DEFAULT_PATTERNS
        return cls(tuple(cells[m] for m in range(N_CLOCK)), tier, patterns)


@dataclass
class InfeasibilityCertificate:
    """Record of an exhausted region search."""

    tier: str
    identifiability: bool
    uniformity: bool
    nodes: int
    exhausted: bool
    max_distinct_cells: int

    def to_text(self):
        return "\n".join(
            [
                "[infeasible]",
                f"tier {self.tier}",
                f"identifiability {self.identifiability}",
                f"uniformity {self.uniformity}",
                f"nodes {self.nodes}",
                f"exhausted {self.exhausted}",
                f"max_distinct_cells_per_setting_pair {self.max_distinct_cells}",
            ]
        ) + "\n"


class Infeasible(Exception):
    """Raised when no region assignment satisfies the requested constraints."""

    def __init__(self, certificate):
        super().__init__(
            f"no {certificate.tier} region config exists "
            f"(exhaustive search, {certificate.nodes} nodes)"
        )
        self.certificate = certificate


def _max_distinct_cells(patterns, tier):
    """Upper bound on distinct cells a single (a, b) can reach over all m.

    Under J-ONLY two clock values with identical sigma supports and the same
    j are forced onto the same cell.
    """
    if tier == PER_M:
        return len(CELLS)
    best = len(CELLS)
    for a, b in SETTING_PAIRS:
        classes = {(patterns.support("sigma", i, a), j) for i in range(1, 5) for j in range(1, 5)}
        best = min(best, len(classes))
    return best


def synthesize_regions(tier=PER_M, patterns=DEFAULT_PATTERNS, identifiability=True, uniformity=True):
    """Exhaustive backtracking search for a :class:`RegionConfig`.

    Variables are the 64 cells ``(m, a, b)`` in lexicographic order, values
    are tried in (column, row) order, so the first solution found is the
    lexicographically smallest. Forward checking prunes domains after every
    assignment; for the bijection constraint each still-unused cell of a
    setting pair must stay reachable by some unassigned clock value.

    ``tier=J_ONLY`` additionally requires ``E_m`` to depend on ``j`` only:
    every cell used by any ``<i', j>`` must fall outside the pattern block
    of ``<i, j>`` unless it is that block's own cell.

    Raises :class:`Infeasible` with a certificate when the tree is exhausted.
    """
    if tier not in TIERS:
        raise ValueError(f"unknown tier {tier!r}; expected one of {TIERS}")
    n_vars = N_CLOCK * 4
    var_m = [v // 4 for v in range(n_vars)]
    var_ab = [SETTING_PAIRS[v % 4] for v in range(n_vars)]
    blocks = [frozenset(_block(patterns, var_m[v], *var_ab[v])) for v in range(n_vars)]
    var_j = [clock_pair(var_m[v])[1] for v in range(n_vars)]

    def compatible(x, cx, y, cy):
        if var_m[x] == var_m[y]:
            if cx == cy:
                return False
            if identifiability and (cx.column == cy.column or cx.row == cy.row):
                return False
        if uniformity and var_ab[x] == var_ab[y] and cx == cy:
            return False
        if tier == J_ONLY and var_j[x] == var_j[y] and cx != cy:
            if cy in blocks[x] or cx in blocks[y]:
                return False
        return True

    peers = [
        [y for y in range(n_vars) if y != x and (
            var_m[x] == var_m[y]
            or (uniformity and var_ab[x] == var_ab[y])
            or (tier == J_ONLY and var_j[x] == var_j[y])
        )]
        for x in range(n_vars)
    ]
    groups = [[v for v in range(n_vars) if var_ab[v] == ab] for ab in SETTING_PAIRS]

    assignment = [None] * n_vars
    nodes = 0

    def coverage_ok(domains, depth):
        if not uniformity:
            return True
        for group in groups:
            used = {assignment[v] for v in group if v < depth}
            reach = set()
            for v in group:
                if v >= depth:
                    reach |= domains[v]
            if len(used) + len(reach & (set(CELLS) - used)) < len(CELLS):
                return False
        return True

    def search(depth, domains):
        nonlocal nodes
        if depth == n_vars:
            return True
        for value in sorted(domains[depth]):
            nodes += 1
            assignment[depth] = value
            pruned = list(domains)
            ok = True
            for y in peers[depth]:
                if y <= depth:
                    continue
                keep = {cy for cy in pruned[y] if compatible(depth, value, y, cy)}
                if not keep:
                    ok = False
                    break
                pruned[y] = keep
            if ok and coverage_ok(pruned, depth + 1) and search(depth + 1, pruned):
                return True
        assignment[depth] = None
        return False

    domains = [set(blocks[v]) for v in range(n_vars)]
    if search(0, domains):
        cells = tuple(tuple(assignment[4 * m: 4 * m + 4]) for m in range(N_CLOCK))
        return RegionConfig(cells, tier, patterns, search_nodes=nodes)
    raise Infeasible(
        InfeasibilityCertificate(
            tier, identifiability, uniformity, nodes, True, _max_distinct_cells(patterns, tier)
        )
    )


def density(m, a, b, u, v, rc):
    """``sigma^i_a(u) tau^j_b(v) kappa_m(u, v)``, a value in {0, 1}."""
    i, j = clock_pair(m)
    s = sigma(i, a, u, rc.patterns)
    t = tau(j, b, v, rc.patterns)
    kappa = int(Cell(int(u), int(v)) in rc.region(m))
    return s * t * kappa


def cell_mass(m, a, b, rc):
    """Integral of ``rho^m_ab`` over the square, by counting unit cells."""
    return Fraction(sum(density(m, a, b, c.column, c.row, rc) for c in CELLS))


def normalization_check(rc):
    """Map of ``(m, a, b) -> mass`` for every combination whose mass is not 1."""
    bad = {}
    for m in range(N_CLOCK):
        for a, b in SETTING_PAIRS:
            mass = cell_mass(m, a, b, rc)
            if mass != 1:
                bad[(m, a, b)] = mass
    return bad


def supported_cell(m, a, b, rc):
    """The single unit cell carrying the mass of ``rho^m_ab``."""
    c = rc.cell(m, a, b)
    if c is None or density(m, a, b, c.column, c.row, rc) != 1:
        raise ValueError(f"no supported cell for m={m}, (a,b)=({a},{b})")
    return c


def mixture_density(a, b, u, v, rc):
    """``(1/16) sum_m rho^m_ab(u, v)`` as an exact fraction."""
    return Fraction(sum(density(m, a, b, u, v, rc) for m in range(N_CLOCK)), N_CLOCK)


def cell_coverage(rc):
    """Array ``[a, b, column, row]`` counting clock values whose density covers the cell."""
    cover = np.zeros((2, 2, SIDE, SIDE), dtype=int)
    for (a, b), c in product(SETTING_PAIRS, CELLS):
        cover[a, b, c.column, c.row] = sum(
            density(m, a, b, c.column, c.row, rc) for m in range(N_CLOCK)
        )
    return cover


class AttainabilityError(ValueError):
    """A station parameter value that no setting pair supports under the given clock index."""


def infer_settings_from_u(m, u, rc):
    """Recover ``(a, b)`` from the clock index and the station-1 parameter."""
    col = _interval(u)
    for a, b in SETTING_PAIRS:
        c = rc.cell(m, a, b)
        if c is not None and c.column == col:
            return a, b
    raise AttainabilityError(f"u={u} (column {col}) not attainable under m={m}")


def infer_settings_from_v(m, v, rc):
    """Recover ``(a, b)`` from the clock index and the station-2 parameter."""
    row = _interval(v)
    for a, b in SETTING_PAIRS:
        c = rc.cell(m, a, b)
        if c is not None and c.row == row:
            return a, b
    raise AttainabilityError(f"v={v} (row {row}) not attainable under m={m}")


def station_distributions(rc, marginalize_clock=False):
    """Exact distributions of the station cells.

    Returns ``(u_dist, v_dist)`` with shape ``(16, 2, 2, 4)`` indexed
    ``[m, a, b, column]`` / ``[m, a, b, row]``; with ``marginalize_clock``
    the clock axis is averaged out, giving shape ``(2, 2, 4)``.
    """
    u_dist = np.zeros((N_CLOCK, 2, 2, SIDE))
    v_dist = np.zeros((N_CLOCK, 2, 2, SIDE))
    for m in range(N_CLOCK):
        for a, b in SETTING_PAIRS:
            for c in CELLS:
                w = density(m, a, b, c.column, c.row, rc)
                u_dist[m, a, b, c.column] += w
                v_dist[m, a, b, c.row] += w
    if marginalize_clock:
        return u_dist.mean(axis=0), v_dist.mean(axis=0)
    return u_dist, v_dist

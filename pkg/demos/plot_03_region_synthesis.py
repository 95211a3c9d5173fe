"""
Synthesizing clock-indexed regions
==================================

For each clock value ``m`` and setting pair the density on the square
``[0, 4)^2`` sits on a single unit cell. The search picks the cells so that
each station can read both settings off ``m`` and its own coordinate, while
the mixture over ``m`` stays uniform.
"""
from paramdep import (
    CELLS,
    J_ONLY,
    Infeasible,
    SETTING_PAIRS,
    mixture_density,
    normalization_check,
    synthesize_regions,
)

rc = synthesize_regions()
print(rc.to_text())
print("search nodes:", rc.search_nodes)
print("normalization offenders:", normalization_check(rc) or "none")

###############################################################################
# Averaging over the clock gives 1/16 on every cell, whatever the settings.

for a, b in SETTING_PAIRS:
    values = {mixture_density(a, b, c.column + 0.5, c.row + 0.5, rc) for c in CELLS}
    print(f"settings ({a}, {b}): mixture densities {sorted(str(v) for v in values)}")

###############################################################################
# Regions that depend on ``j`` only cannot be made uniform with these patterns.

try:
    synthesize_regions(J_ONLY)
except Infeasible as exc:
    print(exc.certificate.to_text())

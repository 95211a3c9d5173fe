"""
Outcome thresholds that reproduce ``-cos``
==========================================

Inside its cell each station answers +1 or -1 by comparing the fractional
part of its coordinate to a threshold. Thresholds chosen from the target
correlation make the clock-averaged product match it exactly.
"""
import numpy as np

from paramdep import (
    CHSH_ANGLES,
    SettingMap,
    build_outcome_functions,
    chsh_from_table,
    model_correlations,
    synthesize_regions,
)

rc = synthesize_regions()
settings = SettingMap.from_angles(*CHSH_ANGLES)
fns = build_outcome_functions(rc, settings)
print(fns.to_text())

table = model_correlations(fns, rc)
print("model E(a, b):\n", table)
print("target -a.b:\n", fns.targets)
print("max deviation:", np.max(np.abs(table - fns.targets)))
print("S =", chsh_from_table(table))

"""
Reference kernels: singlet statistics and a local foil
======================================================

The singlet correlation is ``-cos`` of the angle between the two analyzer
directions. A local deterministic model with a shared angle can only reach
the triangle-wave ``-1 + 2*delta/pi``, which stays inside the CHSH bound.
"""
import numpy as np

from paramdep import (
    CHSH_ANGLES,
    SettingMap,
    chsh_from_table,
    kernel_correlations,
    local_foil_kernel,
    singlet_kernel,
)

settings = SettingMap.from_angles(*CHSH_ANGLES)

###############################################################################
# Correlation tables at the standard CHSH angles.

quantum = kernel_correlations(singlet_kernel(settings))
foil = kernel_correlations(local_foil_kernel(settings))
print("singlet E(a, b):\n", np.round(quantum, 6))
print("local foil E(a, b):\n", np.round(foil, 6))

###############################################################################
# The singlet beats the bound of 2, the local model sits exactly on it.

print("S singlet   =", chsh_from_table(quantum), " (-2*sqrt(2) =", -2 * np.sqrt(2), ")")
print("S local foil =", chsh_from_table(foil))

"""
Checking Parameter and Outcome Independence
===========================================

Any conditional kernel ``P(x, y | a, b, lambda)`` can be tested for the two
halves of Bell factorizability. The singlet keeps its marginals fixed but
correlates the outcomes; the local foil factorizes outright.
"""
import numpy as np

from paramdep import (
    CHSH_ANGLES,
    SettingMap,
    check_factorizability,
    check_outcome_independence,
    check_parameter_independence,
    jarrett_equivalence,
    local_foil_kernel,
    random_kernel,
    singlet_kernel,
)

settings = SettingMap.from_angles(*CHSH_ANGLES)
singlet = singlet_kernel(settings)

for check in (check_parameter_independence, check_outcome_independence, check_factorizability):
    print(check(singlet).to_text())
    print()

print("local foil:", check_factorizability(local_foil_kernel(settings)).verdict)

###############################################################################
# Factorizability and the pair of independence conditions always agree.

rng = np.random.default_rng(0)
kinds = ["generic", "product", "outcome_dependent", "parameter_dependent"]
agree = [jarrett_equivalence(random_kernel(rng, kinds[k % 4])) for k in range(200)]
print("random kernels agreeing:", sum(agree), "of", len(agree))

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st
from scipy import integrate

from paramdep.kernels import (
    SettingMap,
    local_foil_correlation,
    local_foil_kernel,
    local_foil_outcomes,
    planar,
    planar_angle,
    singlet_correlation,
    singlet_kernel,
)
from paramdep.locality import (
    HOLDS,
    VIOLATED,
    RANDOM_KERNEL_KINDS,
    JointKernel,
    averaged_correlation,
    check_distribution_independence,
    check_factorizability,
    check_outcome_independence,
    check_parameter_independence,
    check_weight_independence,
    chsh,
    chsh_from_table,
    jarrett_equivalence,
    kernel_correlations,
    marginal_station1,
    marginal_station2,
    random_kernel,
    station_averages,
)
from paramdep.outcomes import clock_kernel, full_kernel
from paramdep.regions import N_CLOCK, station_distributions


def point_mass_kernel(x, y, n_states=1):
    probs = np.zeros((n_states, 2, 2, 2, 2))
    probs[..., (x + 1) // 2, (y + 1) // 2] = 1
    return JointKernel(probs, np.full(n_states, 1 / n_states))


def test_kernel_validation():
    with pytest.raises(ValueError):
        JointKernel(np.full((1, 2, 2, 2, 2), 0.3), [1.0])
    with pytest.raises(ValueError):
        JointKernel(np.full((2, 2, 2, 2, 2), 0.25), [0.7, 0.7])
    probs = np.full((1, 2, 2, 2, 2), 0.25)
    probs[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        JointKernel(probs, [1.0])


def test_marginals(settings, fns, rc):
    singlet = singlet_kernel(settings)
    for a in (0, 1):
        for b in (0, 1):
            assert marginal_station1(singlet, a, b, 0) == pytest.approx([0.5, 0.5])
            assert marginal_station2(singlet, a, b, 0) == pytest.approx([0.5, 0.5])
    det = point_mass_kernel(1, -1)
    assert marginal_station1(det, 0, 1, 0) == pytest.approx([0, 1])
    assert marginal_station2(det, 0, 1, 0) == pytest.approx([1, 0])

    k = clock_kernel(fns, rc)
    for m in range(N_CLOCK):
        joint = k.joint(0, 1, m)
        brute = [joint[x, 0] + joint[x, 1] for x in (0, 1)]
        assert marginal_station1(k, 0, 1, m) == pytest.approx(brute, abs=1e-15)
        assert marginal_station1(k, 0, 1, m).sum() == pytest.approx(1, abs=1e-12)


def test_singlet_calibration(settings):
    k = singlet_kernel(settings)
    assert check_parameter_independence(k).verdict == HOLDS
    oi = check_outcome_independence(k)
    assert oi.verdict == VIOLATED
    assert oi.witness["deviation"] > 1e-9
    assert check_factorizability(k).verdict == VIOLATED
    assert jarrett_equivalence(k)


def test_local_foil_calibration(settings):
    k = local_foil_kernel(settings, n_points=2000)
    assert check_parameter_independence(k).verdict == HOLDS
    assert check_outcome_independence(k).verdict == HOLDS
    assert check_factorizability(k).verdict == HOLDS
    assert jarrett_equivalence(k)


def clock_level_station1(fns, m, a, b):
    """p(x = +1 | m, a, b) straight from the thresholds and the flip rule."""
    p = fns.p[a, b]
    return p if m not in fns.flip_set else 1 - p


def test_table_model_clock_kernel(fns, rc):
    k = clock_kernel(fns, rc)
    for m in range(N_CLOCK):
        for a in (0, 1):
            for b in (0, 1):
                assert k.joint(a, b, m).sum(axis=1)[1] == pytest.approx(
                    clock_level_station1(fns, m, a, b), abs=1e-12)
    pi = check_parameter_independence(k)
    assert pi.verdict == VIOLATED
    w = pi.witness
    assert w["lambda"] == 0 and w["station"] == 1 and w["local_setting"] == 0
    assert abs(clock_level_station1(fns, 0, 0, 0) - clock_level_station1(fns, 0, 0, 1)) == pytest.approx(
        w["deviation"])
    assert check_outcome_independence(k).verdict == HOLDS
    assert check_factorizability(k).verdict == VIOLATED
    assert jarrett_equivalence(k)


def test_full_state_kernel_moves_dependence_into_weights(fns, rc):
    k = full_kernel(fns, rc)
    assert check_factorizability(k).verdict == HOLDS
    assert check_parameter_independence(k).verdict == HOLDS
    assert check_weight_independence(k).verdict == VIOLATED
    assert kernel_correlations(k) == pytest.approx(fns.targets, abs=1e-12)


def test_outcome_independence_examples():
    assert check_outcome_independence(point_mass_kernel(-1, 1, 3)).verdict == HOLDS
    rng = np.random.default_rng(1)
    assert check_outcome_independence(random_kernel(rng, "product")).verdict == HOLDS


def test_jarrett_on_random_kernels(settings):
    rng = np.random.default_rng(2024)
    seen = set()
    for n in range(200):
        k = random_kernel(rng, RANDOM_KERNEL_KINDS[n % 4])
        pi = check_parameter_independence(k).holds
        oi = check_outcome_independence(k).holds
        fact = check_factorizability(k).holds
        assert fact == (pi and oi)
        seen.add((pi, oi))
    assert seen == {(True, True), (True, False), (False, True), (False, False)}


def test_random_kernel_kinds():
    rng = np.random.default_rng(7)
    verdicts = {
        "product": (HOLDS, HOLDS),
        "outcome_dependent": (HOLDS, VIOLATED),
        "parameter_dependent": (VIOLATED, HOLDS),
        "generic": (VIOLATED, VIOLATED),
    }
    for kind, (pi, oi) in verdicts.items():
        k = random_kernel(rng, kind)
        assert k.n_states == 8
        assert check_parameter_independence(k).verdict == pi
        assert check_outcome_independence(k).verdict == oi
    with pytest.raises(ValueError):
        random_kernel(rng, "nope")


def test_chsh_bound_for_random_local_kernels():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        k = random_kernel(rng, "product")
        worst = max(worst, abs(chsh_from_table(kernel_correlations(k))))
    assert worst <= 2 + 1e-9


def test_chsh_examples(settings):
    assert chsh(0, 0, 0, 0) == 0
    angles = (0, 90, 45, 135)
    e = [[-math.cos(math.radians(angles[a] - angles[2 + b])) for b in (0, 1)] for a in (0, 1)]
    s = chsh(e[0][0], e[0][1], e[1][0], e[1][1])
    assert s == pytest.approx(-2 * math.sqrt(2), abs=1e-12)
    assert chsh_from_table(settings.targets()) == pytest.approx(s, abs=1e-12)
    foil = [[local_foil_correlation(settings.direction_a(a), settings.direction_b(b))
             for b in (0, 1)] for a in (0, 1)]
    assert abs(chsh_from_table(np.array(foil))) <= 2
    with pytest.raises(ValueError):
        chsh(1.5, 0, 0, 0)


def quad_foil(alpha, beta):
    def integrand(lam):
        x, y = local_foil_outcomes(lam, alpha, beta)
        return float(x * y)
    breaks = sorted({(alpha + s * math.pi / 2) % (2 * math.pi) for s in (-1, 1)}
                    | {(beta + s * math.pi / 2) % (2 * math.pi) for s in (-1, 1)})
    val, _ = integrate.quad(integrand, 0, 2 * math.pi, points=breaks, limit=200)
    return val / (2 * math.pi)


def test_averaged_correlation_examples(settings):
    assert averaged_correlation(np.full(5, 0.2), np.ones(5), np.ones(5)) == 1
    assert averaged_correlation([1.0, 0, 0], [0.5, 0, 0], [-0.4, 1, 1]) == pytest.approx(-0.2)
    with pytest.raises(ValueError):
        averaged_correlation([1.0], [1.5], [0.0])

    k = local_foil_kernel(settings)
    abar, bbar = station_averages(k)
    for a in (0, 1):
        for b in (0, 1):
            da, db = settings.direction_a(a), settings.direction_b(b)
            e = averaged_correlation(k.weights[a, b], abar[:, a, b], bbar[:, a, b])
            oracle = quad_foil(planar_angle(da), planar_angle(db))
            assert e == pytest.approx(oracle, abs=1e-3)
            assert e == pytest.approx(local_foil_correlation(da, db), abs=1e-3)


def test_averaged_correlation_converges_with_grid():
    sm = SettingMap.from_angles(0, 0, 37.3, 37.3)
    exact = local_foil_correlation(sm.direction_a(0), sm.direction_b(0))
    errors = []
    for n in (125, 250, 500, 1000, 2000):
        k = local_foil_kernel(sm, n_points=n)
        abar, bbar = station_averages(k)
        errors.append(abs(averaged_correlation(k.weights[0, 0], abar[:, 0, 0], bbar[:, 0, 0]) - exact))
    # four arc boundaries, each misplacing at most one grid point worth 2/n
    for n, err in zip((125, 250, 500, 1000, 2000), errors):
        assert err <= 8 / n


def test_distribution_independence(rc):
    u, v = station_distributions(rc)
    rep = check_distribution_independence(u, v)
    assert rep.verdict == VIOLATED
    m = rep.witness["condition_index"][0]
    d0, d1 = rep.witness["distributions"]
    assert np.argmax(d0) != np.argmax(d1)
    assert rep.witness["station"] == 1 and m == 0

    mixed = check_distribution_independence(*station_distributions(rc, marginalize_clock=True))
    assert mixed.verdict == HOLDS

    flat = np.full((N_CLOCK, 2, 2, 4), 0.25)
    assert check_distribution_independence(flat, flat).verdict == HOLDS


def test_report_serialization(settings):
    rep = check_outcome_independence(singlet_kernel(settings))
    text = rep.to_text()
    assert "verdict = VIOLATED" in text
    lines = dict(line.split(" = ", 1) for line in text.splitlines())
    assert json.loads(lines["witness.settings"]) == [0, 0]
    assert json.loads(lines["witness.joint"])[0][0] == pytest.approx(rep.witness["joint"][0][0])
    json.dumps(rep.to_dict())


def test_witness_is_deterministic():
    rng = np.random.default_rng(5)
    k = random_kernel(rng, "generic")
    first = check_parameter_independence(k).to_dict()
    assert all(check_parameter_independence(k).to_dict() == first for _ in range(3))


@hsettings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(RANDOM_KERNEL_KINDS))
def test_marginals_sum_to_one(seed, kind):
    k = random_kernel(np.random.default_rng(seed), kind)
    for lam in range(k.n_states):
        for a in (0, 1):
            for b in (0, 1):
                assert marginal_station1(k, a, b, lam).sum() == pytest.approx(1, abs=1e-12)
                assert marginal_station2(k, a, b, lam).sum() == pytest.approx(1, abs=1e-12)
    assert jarrett_equivalence(k)

import numpy as np
import numpy.testing as npt
import pytest

from phasecraft import ensembles as ens
from phasecraft.errors import EmptyShell, NotNormalized, SingularMetric


def harmonic(z):
    return 0.5 * np.sum(z**2, axis=1)


def box(half, hbar=1.0):
    return ens.PhaseRegion(bounds=np.array([[-half, half], [-half, half]]), hbar=hbar)


# --- volumes -------------------------------------------------------------------


def test_liouville_unit_box():
    region = ens.PhaseRegion(
        bounds=np.array([[0.0, 1.0], [0.0, 1.0]]), hbar=1.0 / (2.0 * np.pi)
    )
    assert ens.liouville_volume(region) == pytest.approx(1.0)


def test_liouville_angle_action_box():
    region = ens.PhaseRegion(bounds=np.array([[0.0, 2.0 * np.pi], [0.0, 1.0]]), hbar=1.0)
    assert ens.liouville_volume(region) == pytest.approx(1.0)


def test_liouville_product_factorizes():
    r1 = ens.PhaseRegion(bounds=np.array([[0.0, 2.0], [0.0, 3.0]]), hbar=0.7)
    r2 = ens.PhaseRegion(
        bounds=np.array([[0.0, 2.0], [0.0, 0.5], [0.0, 3.0], [0.0, 1.5]]), hbar=0.7
    )
    split = ens.PhaseRegion(bounds=np.array([[0.0, 0.5], [0.0, 1.5]]), hbar=0.7)
    assert ens.liouville_volume(r2) == pytest.approx(
        ens.liouville_volume(r1) * ens.liouville_volume(split)
    )


# --- shells ----------------------------------------------------------------------


def test_shell_normalization_of_unit_observable():
    shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=0.4,
                              samples=50_000, seed=3)
    res = ens.shell_probability(shell, box(2.2), lambda z: np.ones(len(z)))
    assert res["mean"] == 1.0


def test_shell_energy_concentrates():
    shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=0.1,
                              samples=200_000, seed=4)
    res = ens.shell_probability(shell, box(2.2), harmonic)
    assert abs(res["mean"] - 1.0) <= 3.0 * res["stderr_mean"] + 1e-4


def test_harmonic_partition_function_area_law():
    # area between the H = a +/- eps/2 ellipses is 2 pi eps
    eps, hbar = 0.2, 1.0
    shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=eps,
                              samples=400_000, seed=11)
    res = ens.shell_probability(shell, box(2.2, hbar), harmonic)
    want = 2.0 * np.pi * eps / (2.0 * np.pi * hbar)
    assert abs(res["Z"] - want) / want <= 0.05


def test_shell_determinism_under_seed():
    shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=0.3,
                              samples=30_000, seed=7)
    a = ens.shell_probability(shell, box(2.2), harmonic)
    b = ens.shell_probability(shell, box(2.2), harmonic)
    assert a == b


def test_empty_shell_raises():
    shell = ens.ShellEnsemble(observable=harmonic, center=50.0, epsilon=0.01,
                              samples=2_000, seed=0)
    with pytest.raises(EmptyShell):
        ens.shell_probability(shell, box(2.0), harmonic)


def test_shell_to_membrane_richardson():
    # <H^2> on the shell is a^2 + eps^2 / 12: halving eps scales the excess
    # by 4; common random numbers keep the Monte Carlo error correlated
    region = box(2.2)
    means = []
    for eps in (0.8, 0.4, 0.2):
        shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=eps,
                                  samples=400_000, seed=21)
        res = ens.shell_probability(shell, region, lambda z: harmonic(z) ** 2)
        means.append(res["mean"])
    ratio = (means[0] - means[1]) / (means[1] - means[2])
    assert ratio == pytest.approx(4.0, rel=0.3)


def test_invariance_harmonic_full_period():
    shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=0.3,
                              samples=60_000, seed=5)
    out = ens.invariance_check(shell, box(2.2), lambda z: z.copy(), tau=2.0 * np.pi)
    assert out["stationary"]
    assert out["tv_flow"] <= 0.02  # exact recurrence up to integrator error


def test_invariance_harmonic_generic_time():
    shell = ens.ShellEnsemble(observable=harmonic, center=1.0, epsilon=0.3,
                              samples=60_000, seed=6)
    out = ens.invariance_check(shell, box(2.2), lambda z: z.copy(), tau=0.37)
    assert out["stationary"]


def test_invariance_free_on_torus():
    # free streaming with periodic wrap in q preserves the uniform shell
    region = ens.PhaseRegion(bounds=np.array([[0.0, 1.0], [0.5, 1.5]]), hbar=1.0)
    shell = ens.ShellEnsemble(
        observable=lambda z: 0.5 * z[:, 1] ** 2, center=0.5, epsilon=0.2,
        samples=60_000, seed=8,
    )
    batches = ens.shell_samples(shell, region)
    before = np.concatenate(batches)
    after = before.copy()
    after[:, 0] = np.mod(after[:, 0] + after[:, 1] * 0.37, 1.0)
    edges = [np.linspace(region.bounds[i, 0], region.bounds[i, 1], 13) for i in range(2)]
    ha, _ = np.histogramdd(before, bins=edges)
    hb, _ = np.histogramdd(after, bins=edges)
    tv = 0.5 * np.abs(ha / len(before) - hb / len(after)).sum()
    ref = ens.invariance_check(shell, region, lambda z: z.copy(), tau=0.0)
    assert tv <= ref["tv_null_mean"] + 4.0 * ref["tv_null_std"]


# --- entropy ----------------------------------------------------------------------


def test_entropy_point_mass():
    assert ens.entropy_discrete([0.0, 1.0, 0.0]) == 0.0


def test_entropy_uniform():
    for n in (2, 5, 17):
        assert ens.entropy_discrete(np.full(n, 1.0 / n)) == pytest.approx(np.log(n))


def test_entropy_normalization_guard():
    with pytest.raises(NotNormalized):
        ens.entropy_discrete([0.5, 0.6])
    with pytest.raises(NotNormalized):
        ens.entropy_discrete([-0.1, 1.1])


def test_two_level_family():
    assert ens.two_level_entropy(2, 0.5) == pytest.approx(np.log(2.0), abs=1e-14)
    assert ens.two_level_entropy(7, 1.0 / 7.0) == pytest.approx(np.log(7.0), abs=1e-12)
    assert ens.two_level_entropy(5, 1.0) == 0.0
    # direct formula check
    n, q = 4, 0.7
    rest = (1 - q) / (n - 1)
    want = -(q * np.log(q) + (n - 1) * rest * np.log(rest))
    assert ens.two_level_entropy(n, q) == pytest.approx(want)


def test_two_level_monotone_from_uniform():
    n = 6
    qs = np.linspace(1.0 / n, 0.95, 30)
    vals = [ens.two_level_entropy(n, q) for q in qs]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    qs_down = np.linspace(1.0 / n, 0.01, 30)
    vals_down = [ens.two_level_entropy(n, q) for q in qs_down]
    assert all(a >= b - 1e-12 for a, b in zip(vals_down, vals_down[1:]))


def test_uniform_weights_maximize_continuous_entropy():
    rng = np.random.default_rng(9)
    cells = np.full(64, 1.0 / 64)
    uniform = ens.entropy_continuous(np.full(64, 1.0 / 64), cells)
    for _ in range(50):
        w = rng.random(64)
        w /= w.sum()
        assert ens.entropy_continuous(w, cells) <= uniform + 1e-12


# --- induced metric volume ---------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
def test_phase_metric_volume_cancellation(n):
    rng = np.random.default_rng(30 + n)
    for _ in range(100):
        a = rng.normal(size=(n, n))
        g = a @ a.T + n * np.eye(n)
        conn = rng.normal(size=(n, n, n))
        conn = 0.5 * (conn + np.swapaxes(conn, 1, 2))
        p = rng.normal(size=n)
        alpha, beta = np.abs(rng.normal()) + 0.5, np.abs(rng.normal()) + 0.5
        got = ens.phase_metric_volume(g, conn, np.zeros(n), p, alpha, beta)
        assert abs(got - alpha**n * beta**n) <= 1e-10 * (1.0 + abs(got))


def test_phase_metric_volume_flat_case():
    assert ens.phase_metric_volume(
        np.eye(2), np.zeros((2, 2, 2)), np.zeros(2), np.zeros(2), 1.0, 1.0
    ) == pytest.approx(1.0)


def test_phase_metric_volume_rejects_bad_metric():
    with pytest.raises(SingularMetric):
        ens.phase_metric_volume(
            np.diag([1.0, -1.0]), np.zeros((2, 2, 2)), np.zeros(2), np.zeros(2), 1.0, 1.0
        )

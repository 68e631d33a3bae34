"""Phase-space statistical mechanics on axis-aligned boxes.

The dimensionless volume is (2 pi hbar)^-n dq dp.  Shell ensembles are
uniform on {|A - a| <= eps/2} and sampled by rejection from the box with a
counter-based generator, so every result is reproducible from (seed, batch)
alone.  Error bars come from 16 batch means; quoted tolerances are 3 sigma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyShell, NotNormalized, SingularMetric

__all__ = [
    "PhaseRegion",
    "ShellEnsemble",
    "liouville_volume",
    "shell_samples",
    "shell_probability",
    "invariance_check",
    "entropy_discrete",
    "entropy_continuous",
    "two_level_entropy",
    "phase_metric_volume",
]

_N_BATCHES = 16


@dataclass(frozen=True)
class PhaseRegion:
    """Axis-aligned box in (q, p) with the action scale hbar."""

    bounds: np.ndarray  # shape (2n, 2): [low, high] per coordinate
    hbar: float = 1.0

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] % 2 != 0:
            raise ValueError("bounds must be a (2n, 2) array")
        if not np.all(np.isfinite(b)) or np.any(b[:, 1] <= b[:, 0]):
            raise ValueError("box must be finite and nonempty")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bounds", b)

    @property
    def n_dof(self) -> int:
        return self.bounds.shape[0] // 2

    @property
    def box_volume(self) -> float:
        return float(np.prod(self.bounds[:, 1] - self.bounds[:, 0]))


def liouville_volume(region: PhaseRegion) -> float:
    """Box volume in units of (2 pi hbar)^n."""
    return region.box_volume / (2.0 * np.pi * region.hbar) ** region.n_dof


@dataclass(frozen=True)
class ShellEnsemble:
    """Uniform ensemble on {a - eps/2 <= A <= a + eps/2}."""

    observable: Callable[[np.ndarray], np.ndarray]
    center: float
    epsilon: float
    samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("shell width must be positive")
        if self.samples < _N_BATCHES:
            raise ValueError(f"need at least {_N_BATCHES} samples")


def _batch_points(region: PhaseRegion, seed: int, batch: int, count: int) -> np.ndarray:
    """Uniform box points from a Philox stream keyed by (seed, batch)."""
    gen = np.random.Generator(np.random.Philox(key=(np.uint64(seed) << np.uint64(16)) + np.uint64(batch)))
    lo, hi = region.bounds[:, 0], region.bounds[:, 1]
    return lo + (hi - lo) * gen.random((count, region.bounds.shape[0]))


def shell_samples(shell: ShellEnsemble, region: PhaseRegion):
    """Accepted points per batch (rejection from the uniform box)."""
    per_batch = shell.samples // _N_BATCHES
    batches = []
    lo, hi = shell.center - shell.epsilon / 2.0, shell.center + shell.epsilon / 2.0
    for b in range(_N_BATCHES):
        pts = _batch_points(region, shell.seed, b, per_batch)
        vals = np.asarray(shell.observable(pts))
        keep = (vals >= lo) & (vals <= hi)
        batches.append(pts[keep])
    if sum(len(b) for b in batches) == 0:
        raise EmptyShell("no sample hit the shell; widen it or enlarge samples")
    return batches


def shell_probability(shell: ShellEnsemble, region: PhaseRegion,
                      f: Callable[[np.ndarray], np.ndarray]):
    """Monte Carlo (<f>, Z) over the shell with batch-means standard errors.

    Z estimates the dimensionless shell volume, int chi d mu; <f> is the
    shell average int f chi d mu / Z.
    """
    batches = shell_samples(shell, region)
    per_batch = shell.samples // _N_BATCHES
    mu_total = liouville_volume(region)
    z_parts = np.array([len(b) / per_batch * mu_total for b in batches])
    f_parts = np.array(
        [np.mean(np.asarray(f(b))) if len(b) else np.nan for b in batches]
    )
    good = ~np.isnan(f_parts)
    if not np.any(good):
        raise EmptyShell("no sample hit the shell")
    mean_f = float(np.concatenate([np.asarray(f(b)) for b in batches if len(b)]).mean())
    z_val = float(z_parts.mean())
    stderr_f = float(np.std(f_parts[good], ddof=1) / np.sqrt(good.sum())) if good.sum() > 1 else float("inf")
    stderr_z = float(np.std(z_parts, ddof=1) / np.sqrt(len(z_parts)))
    return {"mean": mean_f, "Z": z_val, "stderr_mean": stderr_f, "stderr_Z": stderr_z}


def _flow_rk4(points: np.ndarray, grad: Callable[[np.ndarray], np.ndarray],
              tau: float, dt: float = 0.01) -> np.ndarray:
    """Hamiltonian flow of the observable, vectorized RK4 on all points."""
    n_steps = max(1, int(np.ceil(abs(tau) / dt)))
    h = tau / n_steps
    n_dof = points.shape[1] // 2

    def vf(z):
        g = grad(z)
        return np.concatenate([g[:, n_dof:], -g[:, :n_dof]], axis=1)

    z = points
    for _ in range(n_steps):
        k1 = vf(z)
        k2 = vf(z + 0.5 * h * k1)
        k3 = vf(z + 0.5 * h * k2)
        k4 = vf(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def invariance_check(shell: ShellEnsemble, region: PhaseRegion,
                     grad: Callable[[np.ndarray], np.ndarray],
                     tau: float, bins: int = 12) -> dict:
    """Stationarity statistic of the shell under its own generator's flow.

    Pushes the shell samples through the Hamiltonian flow of the observable
    for time tau and reports the total-variation distance between binned
    densities before and after, together with a same-size split-half noise
    reference.  A stationary ensemble satisfies
    tv_flow <= tv_null_mean + 3 tv_null_std.
    """
    batches = shell_samples(shell, region)
    before = np.concatenate(batches)
    after = _flow_rk4(before, grad, tau)

    edges = [np.linspace(region.bounds[i, 0], region.bounds[i, 1], bins + 1)
             for i in range(region.bounds.shape[0])]

    def tv(a, b):
        ha, _ = np.histogramdd(a, bins=edges)
        hb, _ = np.histogramdd(b, bins=edges)
        ha = ha / max(1, len(a))
        hb = hb / max(1, len(b))
        return 0.5 * float(np.sum(np.abs(ha - hb)))

    tv_flow = tv(before, after)

    # split-half references at the same per-side sample size
    gen = np.random.Generator(np.random.Philox(key=np.uint64(shell.seed) + np.uint64(0xD1F)))
    null = []
    for _ in range(12):
        perm = gen.permutation(len(before))
        half = len(before) // 2
        null.append(tv(before[perm[:half]], before[perm[half:2 * half]]))
    null = np.array(null)
    return {
        "tv_flow": tv_flow,
        "tv_null_mean": float(null.mean()),
        "tv_null_std": float(null.std(ddof=1)),
        "stationary": bool(tv_flow <= null.mean() + 3.0 * null.std(ddof=1) + 1e-12),
    }


def entropy_discrete(p) -> float:
    """Shannon entropy -sum p ln p with the 0 ln 0 = 0 convention."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise NotNormalized("probabilities must be nonnegative")
    if abs(float(p.sum()) - 1.0) > 1.0e-12:
        raise NotNormalized(f"probabilities sum to {p.sum()!r}, not 1")
    mask = p > 0
    return float(-(p[mask] * np.log(p[mask])).sum())


def entropy_continuous(weights, mu_cells) -> float:
    """-int rho ln rho d mu for cellwise-constant densities.

    ``weights`` are cell probabilities, ``mu_cells`` the cells'
    dimensionless volumes; rho_i = w_i / mu_i.
    """
    w = np.asarray(weights, dtype=float)
    mu = np.asarray(mu_cells, dtype=float)
    if w.shape != mu.shape:
        raise ValueError("weights and cell volumes must align")
    if np.any(mu <= 0):
        raise ValueError("cell volumes must be positive")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1.0e-12:
        raise NotNormalized("weights must be a probability vector")
    mask = w > 0
    return float(-(w[mask] * np.log(w[mask] / mu[mask])).sum())


def two_level_entropy(n: int, q: float) -> float:
    """Entropy of the distribution with one state at probability q and the
    remaining n-1 sharing 1-q equally; equals ln n at q = 1/n."""
    if not 0.0 <= q <= 1.0 or n < 2:
        raise ValueError("need n >= 2 and q in [0, 1]")
    rest = (1.0 - q) / (n - 1)
    val = 0.0
    if q > 0:
        val -= q * np.log(q)
    if rest > 0:
        val -= (1.0 - q) * np.log(rest)
    return float(val)


def phase_metric_volume(g, gamma_conn, q, p, alpha: float, beta: float) -> float:
    """Determinant of the configuration-metric-induced block metric on
    momentum phase space, assembled at one point.

    Blocks (per coordinate pair dq, dp):

        [[alpha g + beta W g^-1 W, -beta W g^-1],
         [-beta g^-1 W,             beta g^-1  ]],   W_ra = p_k Gamma^k_ra.

    The determinant equals alpha^n beta^n for every SPD g, symmetric
    connection and momentum: the configuration metric cancels against its
    inverse, leaving the canonical volume up to the constant weights.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("configuration metric must be SPD") from exc
    conn = np.asarray(gamma_conn, dtype=float)
    if conn.shape != (n, n, n):
        raise ValueError("connection coefficients must be (n, n, n)")
    if np.max(np.abs(conn - np.swapaxes(conn, 1, 2))) > 1.0e-12 * (1.0 + np.max(np.abs(conn))):
        raise ValueError("connection must be symmetric in its lower indices")
    p = np.asarray(p, dtype=float)
    ginv = np.linalg.inv(g)
    w = np.einsum("k,kra->ra", p, conn)
    qq = alpha * g + beta * w @ ginv @ w
    qp = -beta * w @ ginv
    pp = beta * ginv
    big = np.block([[qq, qp], [qp.T, pp]])
    return float(np.linalg.det(big))

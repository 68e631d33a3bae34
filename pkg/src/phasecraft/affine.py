"""Deformable (affinely rigid) body mechanics and its lattice reduction.

A configuration is a pair (x, phi) with invertible phi mapping material to
spatial axes.  The two-polar factorization phi = L D R^T with L, R special
orthogonal and D = diag(exp q) splits the motion into two rotors and the
log deformation invariants q.  On the momentum side, with the co-moving
momentum Shat and sigma := R^T Shat R,

    p_a      = sigma_aa
    rho_ab   = sigma_ba exp(q_b - q_a) - sigma_ab exp(q_a - q_b)
    tau_ab   = sigma_ab - sigma_ba
    M = -rho - tau,  N = rho - tau,

which turns the doubly invariant kinetic energy Tr(Shat^2)/2a into a
one-dimensional lattice of the deformation invariants with 1/sinh^2
repulsion (strength M^2) and 1/cosh^2 attraction (strength N^2); the
isotropic d'Alembert model likewise becomes an inverse-square lattice in
Q = exp(q).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import (
    ModelMismatch,
    OrientationReversed,
    Singular,
    SingularConfiguration,
)

__all__ = [
    "AffineState",
    "InertiaModel",
    "TwoPolarState",
    "two_polar",
    "assemble_two_polar",
    "to_two_polar",
    "hamiltonian_standard",
    "standard_internal_energy",
    "hamiltonian_affine",
    "lattice_hamiltonian",
    "lattice_rhs",
    "lattice_dynamics",
    "geodesic_exponential",
    "spin_vorticity",
    "mn_from_rho_tau",
    "rho_tau_from_mn",
    "extended_kinetic_energy",
    "quadratic_internal_energy",
]

_DEGENERACY_TOL = 1.0e-10
_DENOM_FLOOR = 1.0e-14


# ---------------------------------------------------------------------------
# states and models


@dataclass(frozen=True)
class AffineState:
    """Center of mass, internal configuration and their momenta.

    ``sigma_hat`` is the co-moving internal momentum (material indices);
    the spatial view is ``sigma = phi sigma_hat phi^{-1}``.
    """

    phi: np.ndarray
    sigma_hat: np.ndarray
    x: np.ndarray | None = None
    p: np.ndarray | None = None
    sigma: np.ndarray | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        n = phi.shape[0]
        if phi.shape != (n, n):
            raise ValueError("phi must be square")
        if abs(np.linalg.det(phi)) < 1.0e-12:
            raise Singular("phi is numerically singular")
        sh = np.asarray(self.sigma_hat, dtype=float)
        if sh.shape != (n, n):
            raise ValueError("sigma_hat must match phi in shape")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "sigma_hat", sh)
        if self.x is not None:
            object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if self.p is not None:
            object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if self.sigma is not None:
            sig = np.asarray(self.sigma, dtype=float)
            expected = phi @ sh @ np.linalg.inv(phi)
            if np.max(np.abs(sig - expected)) > 1.0e-10 * (1.0 + np.max(np.abs(sig))):
                raise ValueError("sigma and sigma_hat are inconsistent")
            object.__setattr__(self, "sigma", sig)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    def spatial_momentum(self) -> np.ndarray:
        if self.sigma is not None:
            return self.sigma
        return self.phi @ self.sigma_hat @ np.linalg.inv(self.phi)


@dataclass(frozen=True)
class InertiaModel:
    """Inertia data for one of the three kinetic models.

    * ``standard``: mass m and SPD material inertia J (d'Alembert model).
    * ``affine_left`` / ``affine_right``: trace-form coefficients, stored as
      the inverse weights (inv_a, inv_b, inv_c) of
      Tr(S^2)/2a + (Tr S)^2/2b - Tr(V^2)/4c; inv_b and inv_c may vanish.
      They derive from the velocity-side constants via a = I + A,
      b = -(I+A)(I+A+nB)/B, c = (I^2-A^2)/I.
    """

    kind: str
    m: float = 1.0
    J: np.ndarray | None = None
    inv_a: float = 0.0
    inv_b: float = 0.0
    inv_c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("standard", "affine_left", "affine_right"):
            raise ValueError(f"unknown inertia kind {self.kind!r}")
        if self.kind == "standard":
            if self.m <= 0:
                raise ValueError("mass must be positive")
            j = np.asarray(self.J, dtype=float)
            try:
                np.linalg.cholesky(j)
            except np.linalg.LinAlgError as exc:
                raise ValueError("J must be symmetric positive-definite") from exc
            object.__setattr__(self, "J", j)
        else:
            if self.inv_a == 0.0:
                raise ValueError("affine models need a nonzero 1/a")

    @staticmethod
    def standard(m: float, J) -> "InertiaModel":
        return InertiaModel(kind="standard", m=m, J=np.asarray(J, dtype=float))

    @staticmethod
    def affine(
        kind: str,
        a: float | None = None,
        inv_b: float = 0.0,
        inv_c: float = 0.0,
        velocity_constants: tuple[float, float, float] | None = None,
        dim: int | None = None,
    ) -> "InertiaModel":
        """Build from the momentum-side a (plus optional 1/b, 1/c) or from
        the velocity-side triple (I, A, B) with the stated conversion."""
        if velocity_constants is not None:
            big_i, big_a, big_b = velocity_constants
            if dim is None:
                raise ValueError("dim is required with velocity_constants")
            a_eff = big_i + big_a
            if a_eff == 0.0:
                raise ValueError("I + A must be nonzero")
            inv_b_eff = (
                0.0
                if big_b == 0.0
                else -big_b / ((big_i + big_a) * (big_i + big_a + dim * big_b))
            )
            inv_c_eff = 0.0 if big_i == 0.0 else big_i / (big_i**2 - big_a**2)
            if a is not None and abs(a - a_eff) > 1.0e-10 * (1.0 + abs(a)):
                raise ValueError("explicit a disagrees with I + A")
            return InertiaModel(
                kind=kind, inv_a=1.0 / a_eff, inv_b=inv_b_eff, inv_c=inv_c_eff
            )
        if a is None or a == 0.0:
            raise ValueError("a must be nonzero")
        return InertiaModel(kind=kind, inv_a=1.0 / a, inv_b=inv_b, inv_c=inv_c)


@dataclass(frozen=True)
class TwoPolarState:
    """Two rotors L, R, log deformation invariants q (descending) and the
    conjugate momenta: p dual to q, antisymmetric M (repulsive) and N
    (attractive) couplings."""

    L: np.ndarray
    R: np.ndarray
    q: np.ndarray
    p: np.ndarray | None = None
    M: np.ndarray | None = None
    N: np.ndarray | None = None
    degenerate: bool = False

    def __post_init__(self):
        L = np.asarray(self.L, dtype=float)
        R = np.asarray(self.R, dtype=float)
        q = np.asarray(self.q, dtype=float)
        n = len(q)
        for name, mat in (("L", L), ("R", R)):
            if np.max(np.abs(mat.T @ mat - np.eye(n))) > 1.0e-10:
                raise ValueError(f"{name} is not orthogonal")
            if np.linalg.det(mat) < 0:
                raise ValueError(f"{name} must have determinant +1")
        if np.any(np.diff(q) > 0):
            raise ValueError("q must be sorted in descending order")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "q", q)
        for name in ("p", "M", "N"):
            val = getattr(self, name)
            if val is None:
                continue
            val = np.asarray(val, dtype=float)
            object.__setattr__(self, name, val)
            if name in ("M", "N") and np.max(np.abs(val + val.T)) > 1.0e-12 * (
                1.0 + np.max(np.abs(val))
            ):
                raise ValueError(f"{name} must be antisymmetric")

    @property
    def n(self) -> int:
        return len(self.q)


# ---------------------------------------------------------------------------
# kinematics: the two-polar factorization


def two_polar(phi) -> TwoPolarState:
    """Canonical two-polar factorization phi = L diag(exp q) R^T.

    Deformation invariants are sorted descending; det L = det R = +1 and the
    leading entries of the first n-1 columns of L are nonnegative (the last
    column's sign is then fixed by the determinant).  States with invariants
    closer than 1e-10 are returned with the ``degenerate`` flag set.
    """
    phi = np.asarray(phi, dtype=float)
    det = np.linalg.det(phi)
    if abs(det) < 1.0e-12:
        raise Singular("phi is numerically singular")
    if det < 0:
        raise OrientationReversed("two_polar expects det phi > 0")

    u, s, vt = np.linalg.svd(phi)
    v = vt.T
    if np.linalg.det(u) < 0:  # det u = det v here since det phi > 0
        u[:, -1] *= -1.0
        v[:, -1] *= -1.0
    n = phi.shape[0]
    for col in range(n - 1):
        lead = u[:, col][np.nonzero(np.abs(u[:, col]) > 1.0e-12)[0]]
        if lead.size and lead[0] < 0:
            u[:, col] *= -1.0
            v[:, col] *= -1.0
    if np.linalg.det(u) < 0:
        u[:, -1] *= -1.0
        v[:, -1] *= -1.0

    q = np.log(s)
    degenerate = bool(np.any(np.diff(q) > -_DEGENERACY_TOL)) if n > 1 else False
    return TwoPolarState(L=u, R=v, q=q, degenerate=degenerate)


def assemble_two_polar(L, q, R) -> np.ndarray:
    """Inverse of the kinematic factorization: phi = L diag(exp q) R^T."""
    return np.asarray(L) @ np.diag(np.exp(np.asarray(q, dtype=float))) @ np.asarray(R).T


def to_two_polar(state: AffineState) -> TwoPolarState:
    """Full point transformation (phi, sigma_hat) -> (L, q, R; p, M, N)."""
    kin = two_polar(state.phi)
    sigma = kin.R.T @ state.sigma_hat @ kin.R
    q = kin.q
    p = np.diag(sigma).copy()
    n = len(q)
    rho = np.zeros((n, n))
    tau = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            rho[a, b] = sigma[b, a] * np.exp(q[b] - q[a]) - sigma[a, b] * np.exp(
                q[a] - q[b]
            )
            tau[a, b] = sigma[a, b] - sigma[b, a]
            rho[b, a] = -rho[a, b]
            tau[b, a] = -tau[a, b]
    m_mat, n_mat = mn_from_rho_tau(rho, tau)
    return replace(kin, p=p, M=m_mat, N=n_mat)


def mn_from_rho_tau(rho_hat, tau_hat) -> tuple[np.ndarray, np.ndarray]:
    """(rho, tau) -> (M, N) = (-rho - tau, rho - tau)."""
    rho = np.asarray(rho_hat, dtype=float)
    tau = np.asarray(tau_hat, dtype=float)
    return -rho - tau, rho - tau


def rho_tau_from_mn(m_mat, n_mat) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`mn_from_rho_tau`."""
    m = np.asarray(m_mat, dtype=float)
    n = np.asarray(n_mat, dtype=float)
    return 0.5 * (n - m), -0.5 * (m + n)


def spin_vorticity(state: AffineState, g=None, eta=None) -> tuple[np.ndarray, np.ndarray]:
    """Metric-skew parts of the momenta: spin S (spatial) and vorticity V
    (material): S = Sigma - g-transpose(Sigma), V = Shat - eta-transpose(Shat)."""
    n = state.n
    g = np.eye(n) if g is None else np.asarray(g, dtype=float)
    eta = np.eye(n) if eta is None else np.asarray(eta, dtype=float)
    sigma = state.spatial_momentum()
    ginv = np.linalg.inv(g)
    etainv = np.linalg.inv(eta)
    spin = sigma - ginv @ sigma.T @ g
    vort = state.sigma_hat - etainv @ state.sigma_hat.T @ eta
    return spin, vort


# ---------------------------------------------------------------------------
# energies


def standard_internal_energy(inertia: InertiaModel, state: AffineState, g=None) -> float:
    """Internal part of the d'Alembert kinetic energy,
    (1/2) J^-1_AB P^A_i P^B_j g^ij with P = sigma_hat phi^-1."""
    if inertia.kind != "standard":
        raise ModelMismatch("standard energy called on a non-standard model")
    n = state.n
    ginv = np.eye(n) if g is None else np.linalg.inv(np.asarray(g, dtype=float))
    p_mat = state.sigma_hat @ np.linalg.inv(state.phi)
    jinv = np.linalg.inv(inertia.J)
    return 0.5 * float(np.einsum("AB,Ai,Bj,ij->", jinv, p_mat, p_mat, ginv))


def hamiltonian_standard(inertia: InertiaModel, state: AffineState, g=None) -> float:
    """Full d'Alembert Hamiltonian: translational (1/2m) g^ij p_i p_j plus
    the internal term; nonnegative for SPD data."""
    total = standard_internal_energy(inertia, state, g=g)
    if state.p is not None:
        n = state.n
        ginv = np.eye(n) if g is None else np.linalg.inv(np.asarray(g, dtype=float))
        total += 0.5 / inertia.m * float(state.p @ ginv @ state.p)
    return total


def hamiltonian_affine(inertia: InertiaModel, sigma, eta=None) -> float:
    """Affinely invariant internal energy
    Tr(S^2)/2a + (Tr S)^2/2b - Tr(V^2)/4c.

    For ``affine_left`` pass the co-moving momentum; for ``affine_right``
    the spatial one.  The metric (eta or g) only enters the 1/c term.
    """
    if inertia.kind not in ("affine_left", "affine_right"):
        raise ModelMismatch("affine energy called on a non-affine model")
    s = np.asarray(sigma, dtype=float)
    n = s.shape[0]
    metric = np.eye(n) if eta is None else np.asarray(eta, dtype=float)
    val = 0.5 * inertia.inv_a * float(np.trace(s @ s))
    val += 0.5 * inertia.inv_b * float(np.trace(s)) ** 2
    if inertia.inv_c != 0.0:
        skew = s - np.linalg.inv(metric) @ s.T @ metric
        val -= 0.25 * inertia.inv_c * float(np.trace(skew @ skew))
    return val


def lattice_hamiltonian(
    variant: str,
    params: dict,
    lat: TwoPolarState,
    dilatation_k: float = 0.0,
    dilatation_center: float = 0.0,
) -> float:
    """Lattice form of the invariant kinetic energies on (q, p, M, N).

    * ``hyperbolic``: p^2/2a + M^2/(32a sinh^2 dq/2) - N^2/(32a cosh^2 dq/2)
    * ``trigonometric``: same with sin/cos and both couplings repulsive-signed
    * ``calogero``: P^2/2I + M^2/(8I (Qa-Qb)^2) + N^2/(8I (Qa+Qb)^2),
      with Q = exp(q) and P_a = exp(-q_a) p_a.

    ``dilatation_k`` adds the optional harmonic well k/2 (mean(q) - c)^2 that
    stabilizes the free dilatational mode.  Double sums run over all (a, b),
    a != b, matching the printed normalization.
    """
    q = lat.q
    p = lat.p if lat.p is not None else np.zeros_like(q)
    m_mat = lat.M if lat.M is not None else np.zeros((lat.n, lat.n))
    n_mat = lat.N if lat.N is not None else np.zeros((lat.n, lat.n))

    if variant == "hyperbolic":
        a = float(params["a"])
        val = float(p @ p) / (2.0 * a)
        val += _pair_sum(q, m_mat, n_mat, a, kind="hyperbolic")
    elif variant == "trigonometric":
        a = float(params["a"])
        val = float(p @ p) / (2.0 * a)
        val += _pair_sum(q, m_mat, n_mat, a, kind="trigonometric")
    elif variant == "calogero":
        inertia = float(params["I"])
        big_p = np.exp(-q) * p
        big_q = np.exp(q)
        val = float(big_p @ big_p) / (2.0 * inertia)
        for a_idx in range(lat.n):
            for b_idx in range(lat.n):
                if a_idx == b_idx:
                    continue
                diff = big_q[a_idx] - big_q[b_idx]
                if abs(diff) < _DENOM_FLOOR:
                    raise SingularConfiguration("coincident deformation invariants")
                val += m_mat[a_idx, b_idx] ** 2 / (8.0 * inertia * diff**2)
                val += n_mat[a_idx, b_idx] ** 2 / (
                    8.0 * inertia * (big_q[a_idx] + big_q[b_idx]) ** 2
                )
    else:
        raise ValueError(f"unknown lattice variant {variant!r}")

    if dilatation_k != 0.0:
        val += 0.5 * dilatation_k * (float(np.mean(q)) - dilatation_center) ** 2
    return val


def _pair_sum(q, m_mat, n_mat, a: float, kind: str) -> float:
    val = 0.0
    n = len(q)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            half = 0.5 * (q[i] - q[j])
            if kind == "hyperbolic":
                rep, att = np.sinh(half), np.cosh(half)
                sign = -1.0
            else:
                rep, att = np.sin(half), np.cos(half)
                sign = 1.0
            if abs(rep) < _DENOM_FLOOR or abs(att) < _DENOM_FLOOR:
                raise SingularConfiguration("lattice denominator underflow")
            val += m_mat[i, j] ** 2 / (32.0 * a * rep**2)
            val += sign * n_mat[i, j] ** 2 / (32.0 * a * att**2)
    return val


# ---------------------------------------------------------------------------
# lattice dynamics


def _lattice_gradients(variant, params, lat, dilatation_k, dilatation_center):
    """Analytic dH/dq, dH/dp and the skew gradients dH/dM, dH/dN.

    dH/dM_ab collects both orderings of the double sum, i.e. it is the
    derivative with respect to the independent a < b coordinate, extended
    antisymmetrically.
    """
    q, p = lat.q, lat.p
    m_mat, n_mat = lat.M, lat.N
    n = lat.n
    dq = np.zeros(n)
    dp = np.zeros(n)
    dm = np.zeros((n, n))
    dn = np.zeros((n, n))

    if variant in ("hyperbolic", "trigonometric"):
        a = float(params["a"])
        dp[:] = p / a
        hyper = variant == "hyperbolic"
        rep_f, att_f = (np.sinh, np.cosh) if hyper else (np.sin, np.cos)
        att_sign = -1.0 if hyper else 1.0
        for i in range(n):
            for j in range(i + 1, n):
                half = 0.5 * (q[i] - q[j])
                rep, att = rep_f(half), att_f(half)
                if abs(rep) < _DENOM_FLOOR or abs(att) < _DENOM_FLOOR:
                    raise SingularConfiguration("lattice denominator underflow")
                dm[i, j] = m_mat[i, j] / (8.0 * a * rep**2)
                dn[i, j] = att_sign * n_mat[i, j] / (8.0 * a * att**2)
                # d/dq_i of the pair terms, both orderings included; the
                # same closed form covers sinh/cosh and sin/cos.
                dpair = (
                    -m_mat[i, j] ** 2 * att / (16.0 * a * rep**3)
                    + n_mat[i, j] ** 2 * rep / (16.0 * a * att**3)
                )
                dq[i] += dpair
                dq[j] -= dpair
                dm[j, i] = -dm[i, j]
                dn[j, i] = -dn[i, j]
    elif variant == "calogero":
        inertia = float(params["I"])
        big_q = np.exp(q)
        dp[:] = np.exp(-2.0 * q) * p / inertia
        dq[:] = -np.exp(-2.0 * q) * p**2 / inertia
        for i in range(n):
            for j in range(i + 1, n):
                diff = big_q[i] - big_q[j]
                total = big_q[i] + big_q[j]
                if abs(diff) < _DENOM_FLOOR:
                    raise SingularConfiguration("coincident deformation invariants")
                dm[i, j] = m_mat[i, j] / (2.0 * inertia * diff**2)
                dn[i, j] = n_mat[i, j] / (2.0 * inertia * total**2)
                dm[j, i] = -dm[i, j]
                dn[j, i] = -dn[i, j]
                dq[i] += (
                    -m_mat[i, j] ** 2 * big_q[i] / (2.0 * inertia * diff**3)
                    - n_mat[i, j] ** 2 * big_q[i] / (2.0 * inertia * total**3)
                )
                dq[j] += (
                    +m_mat[i, j] ** 2 * big_q[j] / (2.0 * inertia * diff**3)
                    - n_mat[i, j] ** 2 * big_q[j] / (2.0 * inertia * total**3)
                )
    else:
        raise ValueError(f"unknown lattice variant {variant!r}")

    if dilatation_k != 0.0:
        dq += dilatation_k * (float(np.mean(q)) - dilatation_center) / n
    return dq, dp, dm, dn


def _lattice_rhs_raw(variant, params, q, p, m_mat, n_mat, dil_k, dil_c):
    lat = _RawLattice(q, p, m_mat, n_mat)
    dq_h, dp_h, dm_h, dn_h = _lattice_gradients(variant, params, lat, dil_k, dil_c)
    rho, tau = rho_tau_from_mn(m_mat, n_mat)
    g_rho = -dm_h + dn_h
    g_tau = -dm_h - dn_h
    rho_dot = rho @ g_rho - g_rho @ rho
    tau_dot = tau @ g_tau - g_tau @ tau
    m_dot, n_dot = mn_from_rho_tau(rho_dot, tau_dot)
    return dp_h, -dq_h, m_dot, n_dot


class _RawLattice:
    """Cheap (q, p, M, N) carrier for inner integrator stages."""

    __slots__ = ("q", "p", "M", "N", "n")

    def __init__(self, q, p, m_mat, n_mat):
        self.q, self.p, self.M, self.N = q, p, m_mat, n_mat
        self.n = len(q)


def lattice_rhs(variant: str, params: dict, lat: TwoPolarState,
                dilatation_k: float = 0.0, dilatation_center: float = 0.0):
    """Time derivatives (dq, dp, dM, dN) of the lattice chart.

    (q, p) are canonical; rho and tau obey rotor coalgebra brackets, so with
    skew gradients G_rho = dH/drho, G_tau = dH/dtau the momenta evolve by
    commutators drho/dt = [rho, G_rho], dtau/dt = [tau, G_tau] (orientation
    fixed against the exponential-solution flow of the doubly invariant
    model), pushed through the linear change to (M, N).
    """
    return _lattice_rhs_raw(
        variant, params, lat.q, lat.p, lat.M, lat.N, dilatation_k, dilatation_center
    )


def lattice_dynamics(
    variant: str,
    params: dict,
    lat: TwoPolarState,
    dt: float,
    steps: int,
    sample_every: int = 1,
    dilatation_k: float = 0.0,
    dilatation_center: float = 0.0,
) -> list[TwoPolarState]:
    """RK4 flow of the lattice Hamiltonian in the (q, p, M, N) chart.

    The rotor configurations L, R are carried along unchanged (the chart
    closes on the momenta alone).  Raises SingularConfiguration when two
    invariants collide or cross.
    """
    if lat.p is None or lat.M is None or lat.N is None:
        raise ValueError("lattice dynamics needs p, M and N")
    out = [lat]
    q, p = lat.q.copy(), lat.p.copy()
    m_mat, n_mat = lat.M.copy(), lat.N.copy()

    def rhs(qv, pv, mv, nv):
        return _lattice_rhs_raw(
            variant, params, qv, pv, mv, nv, dilatation_k, dilatation_center
        )

    for k in range(steps):
        k1 = rhs(q, p, m_mat, n_mat)
        k2 = rhs(q + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1],
                 m_mat + 0.5 * dt * k1[2], n_mat + 0.5 * dt * k1[3])
        k3 = rhs(q + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1],
                 m_mat + 0.5 * dt * k2[2], n_mat + 0.5 * dt * k2[3])
        k4 = rhs(q + dt * k3[0], p + dt * k3[1],
                 m_mat + dt * k3[2], n_mat + dt * k3[3])
        q = q + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p = p + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        m_mat = m_mat + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        n_mat = n_mat + (dt / 6.0) * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        if np.any(np.diff(q) > 0):
            raise SingularConfiguration("deformation invariants crossed")
        if (k + 1) % sample_every == 0 or k == steps - 1:
            out.append(
                TwoPolarState(
                    L=lat.L, R=lat.R, q=q, p=p,
                    M=0.5 * (m_mat - m_mat.T), N=0.5 * (n_mat - n_mat.T),
                    degenerate=lat.degenerate,
                )
            )
    return out


# ---------------------------------------------------------------------------
# exponential solutions and auxiliary energies


def geodesic_exponential(phi0, generator, t: float, comoving: bool = True) -> np.ndarray:
    """phi(t) = phi0 exp(Ehat t) (co-moving generator) or exp(E t) phi0.

    Both forms describe the same curve when E = phi0 Ehat phi0^{-1}.
    """
    phi0 = np.asarray(phi0, dtype=float)
    if abs(np.linalg.det(phi0)) < 1.0e-12:
        raise Singular("phi0 is numerically singular")
    gen = np.asarray(generator, dtype=float)
    if comoving:
        return phi0 @ scipy.linalg.expm(t * gen)
    return scipy.linalg.expm(t * gen) @ phi0


def quadratic_internal_energy(inertia4, omega_hat) -> float:
    """T_int = (1/2) L^B_A^D_C Ohat^A_B Ohat^C_D for a raw rank-4 inertia."""
    lten = np.asarray(inertia4, dtype=float)
    om = np.asarray(omega_hat, dtype=float)
    return 0.5 * float(np.einsum("BADC,AB,CD->", lten, om, om))


def extended_kinetic_energy(phi, vhat, omega_hat, constants, eta=None, g=None) -> float:
    """Most general orthogonally invariant kinetic energy plus the two-sided
    trace terms, evaluated on co-moving velocities.

    ``constants`` maps m1, m2, I1..I4, A, B; missing keys default to zero.
    """
    phi = np.asarray(phi, dtype=float)
    n = phi.shape[0]
    eta = np.eye(n) if eta is None else np.asarray(eta, dtype=float)
    g = np.eye(n) if g is None else np.asarray(g, dtype=float)
    green = phi.T @ g @ phi
    green_inv = np.linalg.inv(green)
    eta_inv = np.linalg.inv(eta)
    v = np.asarray(vhat, dtype=float)
    om = np.asarray(omega_hat, dtype=float)
    c = {k: float(constants.get(k, 0.0)) for k in
         ("m1", "m2", "I1", "I2", "I3", "I4", "A", "B")}

    val = 0.5 * float(v @ (c["m1"] * green + c["m2"] * eta) @ v)
    val += 0.5 * c["I1"] * float(np.einsum("KL,MN,KM,LN->", green, green_inv, om, om))
    val += 0.5 * c["I2"] * float(np.einsum("KL,MN,KM,LN->", eta, eta_inv, om, om))
    val += 0.5 * c["I3"] * float(np.einsum("KL,MN,KM,LN->", green, eta_inv, om, om))
    val += 0.5 * c["I4"] * float(np.einsum("KL,MN,KM,LN->", eta, green_inv, om, om))
    val += 0.5 * c["A"] * float(np.trace(om @ om))
    val += 0.5 * c["B"] * float(np.trace(om)) ** 2
    return val

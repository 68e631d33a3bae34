"""Scenario runner: validates JSON scenarios, runs the requested module and
writes deterministic artifacts plus a content-hashed manifest.

    phasecraft <euler|affine|ensemble|wigner|cohomology|selftest|report>
               [scenario.json] [--out DIR] [--seed N]

Time series go to CSV, reports to JSON, 2-D fields to raw little-endian
float64 with a JSON sidecar.  Reruns with the same scenario and seed
produce byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import affine, ensembles, forms, rigid, wigner
from .algebra import BilinearForm, GroupElement, algebra_from_json
from .errors import IoError, PhasecraftError, SchemaError
from .fixtures import fixture, fixture_names

_FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# scenario parsing


_SCHEMAS = {
    "euler": {
        "required": {"initial", "t_end"},
        "optional": {
            "algebra", "metric", "principal_moments", "chirality",
            "potential", "dt", "method", "sample_every", "tolerances", "seed",
        },
    },
    "affine": {
        "required": {"model", "initial", "t_end"},
        "optional": {"constants", "dt", "sample_every", "tolerances", "seed"},
    },
    "ensemble": {
        "required": {"observable", "a", "epsilon", "box", "samples", "seed"},
        "optional": {"hbar", "expectation", "flow_time", "tolerances"},
    },
    "wigner": {
        "required": {"state", "grid"},
        "optional": {"hbar", "tolerances", "seed"},
    },
    "cohomology": {
        "required": {"algebra"},
        "optional": {"omega", "tolerances", "seed"},
    },
}


def parse_scenario(path: str, subcommand: str) -> dict:
    """Load and validate a scenario; unknown keys are rejected by name."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read scenario {path!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})"
        ) from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: scenario must be a JSON object")

    if subcommand == "cohomology" and "dim" in doc and "structure" in doc:
        # bare algebra document
        return {"algebra": doc}

    schema = _SCHEMAS[subcommand]
    known = schema["required"] | schema["optional"]
    for key in doc:
        if key not in known:
            raise SchemaError(f"{path}: unknown key {key!r} for {subcommand}")
    missing = schema["required"] - doc.keys()
    if missing:
        raise SchemaError(f"{path}: missing required keys {sorted(missing)}")
    return doc


def _resolve_algebra(spec):
    if isinstance(spec, dict):
        return algebra_from_json(json.dumps(spec))
    if isinstance(spec, str):
        if spec in fixture_names():
            return fixture(spec)
        if os.path.exists(spec):
            with open(spec, "r", encoding="utf-8") as fh:
                return algebra_from_json(fh.read())
        raise SchemaError(
            f"unknown algebra {spec!r}; fixtures: {fixture_names()}"
        )
    raise SchemaError("algebra must be a fixture name, path or inline document")


# ---------------------------------------------------------------------------
# artifact helpers


class _Artifacts:
    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.records = []

    def _register(self, name: str, payload: bytes):
        path = os.path.join(self.out_dir, name)
        with open(path, "wb") as fh:
            fh.write(payload)
        self.records.append(
            {
                "name": name,
                "sha256": hashlib.sha256(payload).hexdigest(),
                "bytes": len(payload),
            }
        )

    def write_json(self, name: str, doc) -> None:
        payload = (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()
        self._register(name, payload)

    def write_csv(self, name: str, header: list[str], rows) -> None:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_FLOAT_FMT % v for v in row))
        self._register(name, ("\n".join(lines) + "\n").encode())

    def write_array(self, name: str, arr: np.ndarray) -> None:
        self._register(name, np.ascontiguousarray(arr, dtype="<f8").tobytes())

    def finish(self, extra: dict | None = None) -> dict:
        manifest = {"files": sorted(self.records, key=lambda r: r["name"])}
        if extra:
            manifest.update(extra)
        payload = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
        path = os.path.join(self.out_dir, "manifest.json")
        with open(path, "wb") as fh:
            fh.write(payload)
        return manifest


def _check(name: str, value: float, bound: float) -> dict:
    return {
        "name": name,
        "value": value,
        "bound": bound,
        "pass": bool(value <= bound),
    }


# ---------------------------------------------------------------------------
# subcommand runners


def _run_euler(scn: dict, art: _Artifacts) -> list[dict]:
    dt = float(scn.get("dt", 1.0e-3))
    method = scn.get("method", "lie_midpoint")
    t_end = float(scn["t_end"])
    steps = max(1, int(round(t_end / dt)))
    sample_every = int(scn.get("sample_every", max(1, steps // 200)))

    if scn.get("principal_moments") is not None:
        model = rigid.so3_model(
            scn["principal_moments"],
            chirality=scn.get("chirality", "left"),
            potential=_builtin_potential(scn.get("potential", "none")),
        )
        tag = "special-orthogonal"
    else:
        alg = _resolve_algebra(scn.get("algebra", "so3"))
        if alg.basis is None:
            raise SchemaError(
                f"algebra {alg.label!r} has no matrix basis; reconstruction "
                "needs one (use a fixture with matrices or supply basis)"
            )
        if scn.get("metric") is None:
            raise SchemaError("euler needs either principal_moments or a metric")
        metric = BilinearForm(np.asarray(scn["metric"], dtype=float))
        model = rigid.InvariantModel(
            alg, metric, scn.get("chirality", "left"),
            potential=_builtin_potential(scn.get("potential", "none")),
        )
        tag = "special-orthogonal" if alg.label == "so3" else "general-linear"

    init = scn["initial"]
    g0 = np.asarray(init.get("g", np.eye(model.algebra.basis[0].shape[0])), dtype=float)
    state = rigid.BodyState(GroupElement(g0, tag=tag), np.asarray(init["sigma"], dtype=float))
    traj = rigid.integrate(model, state, dt, steps, method=method, sample_every=sample_every)
    report = rigid.conservation_report(model, traj)

    n = model.algebra.dim
    header = ["t"] + [f"sigma_{i+1}" for i in range(n)] + ["energy"]
    has_casimir = "casimir" in traj.diagnostics
    if has_casimir:
        header.append("casimir_1")
    header += ["energy_drift", "momentum_drift"]
    rows = []
    e_series = traj.diagnostics["energy"]
    m_series = traj.diagnostics["momentum_map"]
    e_scale = 1.0 + abs(e_series[0])
    m_scale = 1.0 + float(np.max(np.abs(m_series[0])))
    for k, st in enumerate(traj.states):
        row = [st.time, *st.sigma, e_series[k]]
        if has_casimir:
            row.append(traj.diagnostics["casimir"][k])
        row.append(abs(e_series[k] - e_series[0]) / e_scale)
        row.append(float(np.max(np.abs(m_series[k] - m_series[0]))) / m_scale)
        rows.append(row)
    art.write_csv("euler.csv", header, rows)

    tol = scn.get("tolerances", {})
    checks = [
        _check("energy_drift", report["energy_drift"], float(tol.get("energy_drift", 1.0e-8))),
        _check("momentum_drift", report["momentum_map_drift"], float(tol.get("momentum_drift", 1.0e-6))),
    ]
    if has_casimir:
        checks.append(
            _check("casimir_drift", report["casimir_drift"], float(tol.get("casimir_drift", 1.0e-10)))
        )
    art.write_json("conservation.json", {"report": report, "checks": checks})
    return checks


def _builtin_potential(name: str):
    if name in (None, "none"):
        return None
    if name == "trace_alignment":
        # uniform torque toward the identity attitude
        return lambda g: -float(np.trace(g.matrix))
    raise SchemaError(f"unknown builtin potential {name!r}")


def _run_affine(scn: dict, art: _Artifacts) -> list[dict]:
    model = scn["model"]
    constants = scn.get("constants", {})
    dt = float(scn.get("dt", 1.0e-3))
    t_end = float(scn["t_end"])
    steps = max(1, int(round(t_end / dt)))
    sample_every = int(scn.get("sample_every", max(1, steps // 200)))
    init = scn["initial"]

    if "phi" in init:
        state = affine.AffineState(
            phi=np.asarray(init["phi"], dtype=float),
            sigma_hat=np.asarray(init["sigma_hat"], dtype=float),
            x=np.asarray(init["x"], dtype=float) if "x" in init else None,
            p=np.asarray(init["p"], dtype=float) if "p" in init else None,
        )
        lat = affine.to_two_polar(state)
    else:
        lat = affine.TwoPolarState(
            L=np.asarray(init.get("L", np.eye(len(init["q"]))), dtype=float),
            R=np.asarray(init.get("R", np.eye(len(init["q"]))), dtype=float),
            q=np.asarray(init["q"], dtype=float),
            p=np.asarray(init["p"], dtype=float),
            M=np.asarray(init["M"], dtype=float),
            N=np.asarray(init["N"], dtype=float),
        )

    if model == "standard":
        if abs(float(constants.get("J_iso", 1.0))) <= 0:
            raise SchemaError("standard model needs isotropic inertia J_iso > 0")
        variant, params = "calogero", {"I": float(constants.get("J_iso", 1.0))}
    elif model in ("affine_left", "affine_right"):
        if float(constants.get("inv_b", 0.0)) != 0.0 or float(constants.get("inv_c", 0.0)) != 0.0:
            raise SchemaError(
                "dynamics is implemented for the trace-form term only; "
                "set inv_b = inv_c = 0"
            )
        variant, params = "hyperbolic", {"a": float(constants.get("a", 1.0))}
    elif model in ("lattice_hyperbolic", "lattice_trigonometric", "lattice_calogero"):
        variant = model.removeprefix("lattice_")
        params = (
            {"I": float(constants.get("I", 1.0))}
            if variant == "calogero"
            else {"a": float(constants.get("a", 1.0))}
        )
    else:
        raise SchemaError(f"unknown affine model {model!r}")

    states = affine.lattice_dynamics(variant, params, lat, dt, steps, sample_every=sample_every)
    n = lat.n
    header = (
        ["t"] + [f"q_{i+1}" for i in range(n)] + ["energy", "m_norm", "n_norm"]
    )
    energies = [affine.lattice_hamiltonian(variant, params, s) for s in states]
    times = [0.0] + [dt * sample_every * (k + 1) for k in range(len(states) - 2)] + [t_end]
    rows = []
    for t, s, e in zip(times, states, energies):
        rows.append([t, *s.q, e, float(np.linalg.norm(s.M)), float(np.linalg.norm(s.N))])
    art.write_csv("affine.csv", header, rows)

    tol = scn.get("tolerances", {})
    e_drift = max(abs(e - energies[0]) for e in energies) / (1.0 + abs(energies[0]))
    checks = [
        _check("energy_drift", e_drift / max(t_end, 1.0), float(tol.get("energy_rate", 1.0e-7)))
    ]
    if n == 2:
        m_drift = max(abs(s.M[0, 1] - lat.M[0, 1]) for s in states)
        n_drift = max(abs(s.N[0, 1] - lat.N[0, 1]) for s in states)
        checks.append(_check("m_drift", m_drift, float(tol.get("coupling_drift", 1.0e-10))))
        checks.append(_check("n_drift", n_drift, float(tol.get("coupling_drift", 1.0e-10))))
    art.write_json(
        "conservation.json",
        {"energy_initial": energies[0], "energy_drift": e_drift, "checks": checks},
    )
    return checks


def _run_ensemble(scn: dict, art: _Artifacts) -> list[dict]:
    box = np.asarray(scn["box"], dtype=float)
    region = ensembles.PhaseRegion(bounds=box, hbar=float(scn.get("hbar", 1.0)))
    n_dof = region.n_dof

    def build_observable(spec):
        if spec == "harmonic":
            return (lambda z: 0.5 * np.sum(z**2, axis=1)), (lambda z: z.copy())
        if isinstance(spec, dict) and "quadratic" in spec:
            qmat = np.asarray(spec["quadratic"], dtype=float)
            return (
                lambda z: 0.5 * np.einsum("zi,ij,zj->z", z, qmat, z),
                lambda z: z @ qmat.T,
            )
        raise SchemaError("observable must be 'harmonic' or {'quadratic': matrix}")

    observable, grad = build_observable(scn["observable"])
    shell = ensembles.ShellEnsemble(
        observable=observable,
        center=float(scn["a"]),
        epsilon=float(scn["epsilon"]),
        samples=int(scn["samples"]),
        seed=int(scn["seed"]),
    )
    f_fun, _ = build_observable(scn.get("expectation", scn["observable"]))
    result = ensembles.shell_probability(shell, region, f_fun)

    batches = ensembles.shell_samples(shell, region)
    pts = np.concatenate(batches)
    hist, _ = np.histogramdd(pts, bins=[8] * (2 * n_dof))
    weights = (hist / hist.sum()).ravel()
    cell_mu = ensembles.liouville_volume(region) / weights.size
    entropy = ensembles.entropy_continuous(weights, np.full(weights.size, cell_mu))

    out = {
        "Z": result["Z"],
        "stderr_Z": result["stderr_Z"],
        "expectation": {"mean": result["mean"], "stderr": result["stderr_mean"]},
        "entropy": entropy,
        "accepted": int(sum(len(b) for b in batches)),
    }
    checks = []
    if scn.get("flow_time") is not None:
        inv = ensembles.invariance_check(shell, region, grad, float(scn["flow_time"]))
        out["invariance"] = inv
        checks.append(
            _check(
                "flow_drift",
                inv["tv_flow"],
                inv["tv_null_mean"] + 3.0 * inv["tv_null_std"],
            )
        )
    out["checks"] = checks
    art.write_json("ensemble.json", out)
    return checks


def _run_wigner(scn: dict, art: _Artifacts) -> list[dict]:
    grid = scn["grid"]
    n = int(grid["N"])
    qmin, qmax = float(grid["qmin"]), float(grid["qmax"])
    hbar = float(scn.get("hbar", 1.0))
    state = scn["state"]
    kind = state["kind"] if isinstance(state, dict) else state
    if kind == "ho-ground":
        psi = wigner.ho_ground(n, qmin, qmax, hbar=hbar)
    elif kind == "ho-excited":
        psi = wigner.ho_excited(int(state.get("k", 1)), n, qmin, qmax, hbar=hbar)
    elif kind == "gaussian":
        psi = wigner.gaussian_packet(float(state.get("sigma", 1.0)), n, qmin, qmax, hbar=hbar)
    elif kind == "cat":
        psi = wigner.cat_state(float(state.get("separation", 4.0)), n, qmin, qmax, hbar=hbar)
    else:
        raise SchemaError(f"unknown state kind {kind!r}")
    psi = psi.normalized()
    w = wigner.wigner_transform(psi)
    pos, mom = wigner.marginals(w)

    art.write_array("wigner.f64", w.values)
    art.write_json(
        "wigner.json",
        {
            "shape": list(w.values.shape),
            "dq": w.dq, "dp": w.dp, "q0": w.q0, "p0": w.p0, "hbar": w.hbar,
            "layout": "row-major float64 little-endian, q index first",
        },
    )
    art.write_csv(
        "marginals.csv",
        ["q", "position_density", "p", "momentum_density"],
        [[q, pd, p, md] for q, pd, p, md in zip(w.q_grid, pos, w.p_grid, mom)],
    )
    pos_err = float(np.max(np.abs(pos - np.abs(psi.psi) ** 2)))
    mom_err = float(np.max(np.abs(mom - np.abs(psi.fourier()) ** 2)))
    tol = scn.get("tolerances", {})
    checks = [
        _check("position_marginal", pos_err, float(tol.get("marginal", 1.0e-8))),
        _check("momentum_marginal", mom_err, float(tol.get("marginal", 1.0e-8))),
        _check("mass_defect", abs(w.integral() - 1.0), float(tol.get("mass", 1.0e-8))),
    ]
    art.write_json("wigner_checks.json", {"checks": checks})
    return checks


def _run_cohomology(scn: dict, art: _Artifacts) -> list[dict]:
    alg = _resolve_algebra(scn["algebra"])
    report = {
        "label": alg.label,
        "dim": alg.dim,
        "Z1": len(forms.cocycle_space(alg, 1)),
        "B1": len(forms.coboundary_space(alg, 1)),
        "H1": forms.cohomology_dim(alg, 1),
        "Z2": len(forms.cocycle_space(alg, 2)),
        "B2": len(forms.coboundary_space(alg, 2)),
        "H2": forms.cohomology_dim(alg, 2),
    }
    if scn.get("omega") is not None:
        coeffs = np.zeros((alg.dim, alg.dim))
        for i, j, val in scn["omega"]["pairs"]:
            coeffs[int(i), int(j)] = float(val)
            coeffs[int(j), int(i)] = -float(val)
        omega = forms.KForm(2, coeffs)
        basis, codim = forms.radical(alg, omega)
        report["radical"] = {
            "basis": [list(v) for v in basis],
            "codim": codim,
        }
    art.write_json("cohomology.json", report)
    return []


# ---------------------------------------------------------------------------
# selftest: a deterministic battery with one manifest


def _run_selftest(seed: int, art: _Artifacts) -> list[dict]:
    rng = np.random.default_rng(seed)
    checks = []

    # bracket identities on the rotation coalgebra
    from .brackets import PoissonStructure, ScalarField, bracket, jacobi_residual

    so3 = fixture("so3")
    struct = PoissonStructure.lie_poisson(so3)
    fields = []
    for _ in range(3):
        amat = rng.normal(size=(3, 3))
        amat = 0.5 * (amat + amat.T)
        bvec = rng.normal(size=3)
        fields.append(
            ScalarField(3, lambda z, A=amat, b=bvec: 0.5 * z @ A @ z + b @ z,
                        lambda z, A=amat, b=bvec: A @ z + b)
        )
    pts = [rng.normal(size=3) for _ in range(5)]
    resid = jacobi_residual(struct, *fields, pts)
    checks.append(_check("jacobi_so3", resid, 1.0e-6))

    # free top conservation
    model = rigid.so3_model((1.0, 2.0, 3.0))
    st = rigid.BodyState(
        GroupElement(np.eye(3), tag="special-orthogonal"), np.array([1.0, 1.0, 1.0])
    )
    traj = rigid.integrate(model, st, 1.0e-3, 2000, sample_every=100)
    rep = rigid.conservation_report(model, traj)
    checks.append(_check("top_energy_drift", rep["energy_drift"], 1.0e-8))
    checks.append(_check("top_casimir_drift", rep["casimir_drift"], 1.0e-10))

    # affine / lattice equivalence on random states
    worst = 0.0
    for _ in range(20):
        phi = rng.normal(size=(3, 3))
        if np.linalg.det(phi) < 0:
            phi[:, 0] *= -1
        if affine.two_polar(phi).degenerate:
            continue
        sh = rng.normal(size=(3, 3))
        inert = affine.InertiaModel.affine("affine_left", a=1.0)
        h_aff = affine.hamiltonian_affine(inert, sh)
        lat = affine.to_two_polar(affine.AffineState(phi=phi, sigma_hat=sh))
        h_lat = affine.lattice_hamiltonian("hyperbolic", {"a": 1.0}, lat)
        worst = max(worst, abs(h_aff - h_lat) / (1.0 + abs(h_aff)))
    checks.append(_check("lattice_equivalence", worst, 1.0e-8))

    # cohomology fixtures
    checks.append(_check("H2_so3", abs(forms.cohomology_dim(so3, 2)), 0.0))
    checks.append(_check("H2_galilei_minus_1", abs(forms.cohomology_dim(fixture("galilei"), 2) - 1), 0.0))

    # phase metric volume
    gmat = rng.normal(size=(2, 2))
    gmat = gmat @ gmat.T + 2.0 * np.eye(2)
    conn = rng.normal(size=(2, 2, 2))
    conn = 0.5 * (conn + np.swapaxes(conn, 1, 2))
    vol = ensembles.phase_metric_volume(gmat, conn, np.zeros(2), rng.normal(size=2), 1.3, 0.7)
    checks.append(_check("phase_volume", abs(vol - 1.3**2 * 0.7**2), 1.0e-10))

    # grid transform and star identities
    psi = wigner.ho_ground(128, -8.0, 8.0)
    w = wigner.wigner_transform(psi)
    pos, mom = wigner.marginals(w)
    checks.append(
        _check("marginal_err",
               float(np.max(np.abs(pos - np.abs(psi.psi) ** 2))), 1.0e-8)
    )
    one = wigner.phase_grid_constant(1.0, w)
    unit_err = float(np.max(np.abs(wigner.star_product(one, w).values - w.values)))
    checks.append(_check("star_unit", unit_err, 1.0e-8))

    # shell ensemble determinism statistic
    region = ensembles.PhaseRegion(bounds=np.array([[-2.0, 2.0], [-2.0, 2.0]]), hbar=1.0)
    shell = ensembles.ShellEnsemble(
        observable=lambda z: 0.5 * np.sum(z**2, axis=1),
        center=1.0, epsilon=0.3, samples=40_000, seed=seed,
    )
    res = ensembles.shell_probability(shell, region, lambda z: 0.5 * np.sum(z**2, axis=1))
    checks.append(
        _check("shell_mean_offset", abs(res["mean"] - 1.0), 3.0 * res["stderr_mean"] + 1.0e-3)
    )

    # symmetric top invariant component
    sym = rigid.so3_model((2.0, 2.0, 1.0))
    st_sym = rigid.BodyState(
        GroupElement(np.eye(3), tag="special-orthogonal"), np.array([0.8, 0.3, 0.6])
    )
    traj_sym = rigid.integrate(sym, st_sym, 1.0e-3, 2000, sample_every=200)
    checks.append(_check(
        "symmetric_top_axis_drift",
        max(abs(s.sigma[2] - 0.6) for s in traj_sym.states), 1.0e-8,
    ))

    # stationary spins and the killing degeneracy
    crit = rigid.stationary_spins_so3((1.0, 2.0, 3.0), 1.0)
    axis_defect = 0.0
    for p in crit.points:
        ordered = np.sort(np.abs(p))
        axis_defect = max(axis_defect, float(ordered[0]), float(ordered[1]),
                          float(abs(ordered[2] - 1.0)))
    checks.append(_check("stationary_axis_points", axis_defect, 1.0e-12))
    killing = rigid.InvariantModel(fixture("so3"), BilinearForm(2.0 * np.eye(3)), "left")
    worst_eq = max(
        float(np.max(np.abs(rigid.relative_equilibria_residual(killing, rng.normal(size=3)))))
        for _ in range(200)
    )
    checks.append(_check("killing_equilibria_residual", worst_eq, 1.0e-14))

    # short dissociation-threshold run (couplings conserved, regimes split)
    def pair_run(n12, q0, p0, steps):
        lat = affine.TwoPolarState(
            L=np.eye(2), R=np.eye(2), q=np.array([q0, -q0]), p=np.array([p0, -p0]),
            M=np.array([[0.0, 1.0], [-1.0, 0.0]]),
            N=np.array([[0.0, n12], [-n12, 0.0]]),
        )
        states = affine.lattice_dynamics("hyperbolic", {"a": 1.0}, lat, 1e-3, steps,
                                         sample_every=100)
        seps = np.array([s.q[0] - s.q[1] for s in states])
        drift = max(abs(s.N[0, 1] - n12) for s in states)
        return seps, drift

    seps_b, drift_b = pair_run(1.2, 1.5, 0.0, 10_000)
    checks.append(_check("bound_pair_separation", float(seps_b.max()), 6.0))
    seps_s, drift_s = pair_run(0.8, 3.0, -0.5, 10_000)
    imin = int(np.argmin(seps_s))
    checks.append(_check(
        "scattering_monotone", float(-np.min(np.diff(seps_s[imin:]), initial=0.0)), 1.0e-12
    ))
    checks.append(_check("pair_coupling_drift", max(drift_b, drift_s), 1.0e-10))

    # entropy closed forms
    ent_defect = abs(ensembles.entropy_discrete(np.full(11, 1.0 / 11)) - np.log(11.0))
    ent_defect = max(ent_defect, abs(ensembles.two_level_entropy(2, 0.5) - np.log(2.0)))
    checks.append(_check("entropy_closed_forms", ent_defect, 1.0e-14))

    # free propagation width and composition rule
    psi0 = wigner.gaussian_packet(1.0, 256, -25.6, 25.6)
    out = wigner.propagate_free(psi0, 1.0)
    var = float(np.sum(out.q_grid**2 * np.abs(out.psi) ** 2) * out.dx)
    checks.append(_check("free_spread_width", abs(var - 1.25), 1.0e-6))
    comp = wigner.compose_characteristic(
        lambda x, z: (x - z) ** 2 / 0.8, lambda z, y: (z - y) ** 2 / 1.8,
        np.linspace(-8.0, 8.0, 2001),
    )
    (got,) = comp(0.7, -0.4)
    checks.append(_check("characteristic_composition", abs(got - 1.1**2 / 2.6), 1.0e-10))

    # darboux chart at a few off-pole points
    from .brackets import darboux_so3

    worst_chart = 0.0
    for _ in range(20):
        z = rng.normal(size=3)
        if z[0] ** 2 + z[1] ** 2 < 0.1 or z @ z < 0.1:
            continue
        h = 1e-6 * (1.0 + np.linalg.norm(z))
        grads = []
        for comp_idx in range(3):
            g_vec = np.zeros(3)
            for i in range(3):
                zp, zm = z.copy(), z.copy()
                zp[i] += h
                zm[i] -= h
                g_vec[i] = (darboux_so3(zp)[comp_idx] - darboux_so3(zm)[comp_idx]) / (2 * h)
            grads.append(g_vec)
        gamma = struct.matrix(z)
        worst_chart = max(
            worst_chart,
            abs(grads[0] @ gamma @ grads[1] - 1.0),
            abs(grads[0] @ gamma @ grads[2]),
            abs(grads[1] @ gamma @ grads[2]),
        )
    checks.append(_check("darboux_chart", worst_chart, 1.0e-8))

    art.write_json("selftest.json", {"seed": seed, "checks": checks})
    return checks


# ---------------------------------------------------------------------------
# reporting and entry point


def report_summary(manifest_path: str) -> int:
    """Print a pass/fail table for every check recorded next to a manifest."""
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read manifest {manifest_path!r}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(manifest_path))
    rows = []
    for rec in manifest.get("files", []):
        if not rec["name"].endswith(".json"):
            continue
        with open(os.path.join(base, rec["name"]), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for chk in doc.get("checks", []):
            rows.append((rec["name"], chk))
    if not rows:
        print("no runs")
        return 0
    width = max(len(c["name"]) for _, c in rows) + 2
    failed = 0
    for fname, chk in rows:
        status = "ok" if chk["pass"] else "FAIL"
        if not chk["pass"]:
            failed += 1
        print(
            f"{status:4s} {chk['name']:<{width}s} value={chk['value']:.3e} "
            f"bound={chk['bound']:.3e}  ({fname})"
        )
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    return 1 if failed else 0


_RUNNERS = {
    "euler": _run_euler,
    "affine": _run_affine,
    "ensemble": _run_ensemble,
    "wigner": _run_wigner,
    "cohomology": _run_cohomology,
}


def run(subcommand: str, scenario_path: str | None, out_dir: str, seed: int | None) -> int:
    art = _Artifacts(out_dir)
    extra = {"subcommand": subcommand}
    if seed is not None:
        extra["seed"] = seed
    if subcommand == "selftest":
        checks = _run_selftest(seed if seed is not None else 0, art)
    else:
        scn = parse_scenario(scenario_path, subcommand)
        if seed is not None:
            scn.setdefault("seed", seed)
        scn_text = json.dumps(scn, sort_keys=True).encode()
        extra["scenario_sha256"] = hashlib.sha256(scn_text).hexdigest()
        checks = _RUNNERS[subcommand](scn, art)
    art.finish(extra)
    bad = [c for c in checks if not c["pass"]]
    for c in bad:
        print(f"FAIL {c['name']}: value {c['value']:.3e} exceeds bound {c['bound']:.3e}",
              file=sys.stderr)
    return 1 if bad else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phasecraft", description="phase-space mechanics scenario runner"
    )
    parser.add_argument(
        "subcommand",
        choices=["euler", "affine", "ensemble", "wigner", "cohomology", "selftest", "report"],
    )
    parser.add_argument("scenario", nargs="?", help="scenario JSON (or manifest for report)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        if args.subcommand == "report":
            if not args.scenario:
                raise SchemaError("report needs a manifest path")
            return report_summary(args.scenario)
        if args.subcommand != "selftest" and not args.scenario:
            raise SchemaError(f"{args.subcommand} needs a scenario file")
        return run(args.subcommand, args.scenario, args.out, args.seed)
    except PhasecraftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

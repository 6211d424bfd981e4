"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (collected in the terminal summary)
before asserting.
"""

import io

import numpy as np
import pytest

from gwpwigner import brackets as br
from gwpwigner import checks, cli
from gwpwigner import geometry as g
from gwpwigner.config import serialize_config, torsional_config
from gwpwigner.dynamics import SimParams
from gwpwigner.egorov import GaussianState, sample
from gwpwigner.experiment import (
    TORSIONAL_N,
    egorov_curves,
    energy_drift,
    gated_convergence_point,
    hagedorn_trajectory,
    loglog_slope,
    min_width_eigenvalue,
    propagate_all,
    torsional_initial,
)
from gwpwigner.integrators import StepperConfig, moment_splitting_step, splitting_step
from gwpwigner.potentials import QuadraticPotential, TorsionalPotential

from oracles import exact_linear_flow

HBARS = (0.2, 0.1, 0.05)
SEED = 1
REF_CFG = StepperConfig(dt=0.01, t_final=5.0, record_stride=10)


def random_spd(rng, d):
    X = rng.standard_normal((d, d))
    return X @ X.T + 0.5 * np.eye(d)


@pytest.fixture(scope="module")
def convergence_points():
    z0, C0 = torsional_initial()
    return {
        h: gated_convergence_point(z0, C0, SimParams(h), TorsionalPotential(), REF_CFG, TORSIONAL_N, SEED)
        for h in HBARS
    }


# --- 1, 2: torsional reproduction ---------------------------------------------

@pytest.mark.parametrize("hbar", HBARS)
def test_c1_error_ordering(convergence_points, acceptance, hbar):
    pt = convergence_points[hbar]
    ok = pt.err_semi < pt.err_cl and pt.resolved(3.0)
    acceptance(
        f"C1[hbar={hbar}] error ordering",
        ok,
        f"err_semi={pt.err_semi:.4g} err_cl={pt.err_cl:.4g} se={pt.mc_se:.3g} N={pt.n_samples}",
    )
    assert pt.resolved(3.0), "Monte-Carlo noise not resolved even after escalation"
    assert pt.err_semi < pt.err_cl


def test_c2_convergence_rate(convergence_points, acceptance):
    a, b = convergence_points[0.2], convergence_points[0.05]
    s_semi = loglog_slope(a.hbar, a.err_semi, b.hbar, b.err_semi)
    s_cl = loglog_slope(a.hbar, a.err_cl, b.hbar, b.err_cl)
    gated = a.resolved(3.0) and b.resolved(3.0)
    ok = gated and s_semi >= 1.3 and s_semi > s_cl
    acceptance("C2 convergence rate", ok, f"slope_semi={s_semi:.3f} slope_cl={s_cl:.3f}")
    assert gated
    assert s_semi >= 1.3
    assert s_semi > s_cl


# --- 3: corrected potential ---------------------------------------------------

def test_c3_corrected_potential(acceptance):
    z0, C0 = torsional_initial()
    params, pot = SimParams(0.1), TorsionalPotential()
    cfg = StepperConfig(0.01, 5.0, 1)
    traj = propagate_all(z0, C0, params, pot, cfg)
    eg = egorov_curves(GaussianState(z0, g.sigma(C0), 0.1), params, pot, cfg, TORSIONAL_N, SEED)
    assert np.allclose(traj.t, eg.t)
    dev_semi = float(np.mean(np.abs(traj.V_hbar - eg.mean_V)))
    dev_cl = float(np.mean(np.abs(traj.V_cl - eg.mean_V)))
    ok = dev_semi <= 0.5 * dev_cl
    acceptance("C3 corrected potential", ok, f"mean|Vhbar-<V>|={dev_semi:.4g} mean|V_cl-<V>|={dev_cl:.4g}")
    assert ok


# --- 4: quadratic exactness and intertwining -----------------------------------

@pytest.mark.parametrize("d", [1, 2])
def test_c4a_intertwining(acceptance, d):
    rng = np.random.default_rng(100 + d)
    pot, params = QuadraticPotential(random_spd(rng, d)), SimParams(0.1)
    z, C = rng.standard_normal(2 * d), g.random_siegel(rng, d)
    zm, Sig = z.copy(), g.sigma(C)
    worst = 0.0
    for _ in range(10_000):
        z, C = splitting_step(z, C, 0.01, params, pot)
        zm, Sig = moment_splitting_step(zm, Sig, 0.01, params, pot)
        worst = max(worst, np.max(np.abs(g.sigma(C) - Sig)))
    ok = worst <= 1e-11
    acceptance(f"C4a[d={d}] per-step sigma(C_n) vs Sigma_n", ok, f"max={worst:.3g}")
    assert ok


def _quadratic_error(dt, K, z0, C0, mass=1.0, T=1.0):
    n = int(round(T / dt))
    pot, params = QuadraticPotential(K), SimParams(0.1, mass)
    z, C = z0, C0
    for _ in range(n):
        z, C = splitting_step(z, C, dt, params, pot)
    M = exact_linear_flow(K, mass, n * dt)
    Cx = g.moebius(M, C0)
    return max(np.max(np.abs(z - M @ z0)), np.max(np.abs(C.A - Cx.A)), np.max(np.abs(C.B - Cx.B)))


@pytest.mark.parametrize("d", [1, 2])
def test_c4b_second_order(acceptance, d):
    rng = np.random.default_rng(200 + d)
    K, z0, C0 = random_spd(rng, d), rng.standard_normal(2 * d), g.random_siegel(rng, d)
    ratio = _quadratic_error(0.02, K, z0, C0) / _quadratic_error(0.01, K, z0, C0)
    ok = 3.5 <= ratio <= 4.5
    acceptance(f"C4b[d={d}] splitting vs exact linear flow", ok, f"ratio={ratio:.4f}")
    assert ok


def _hagedorn_mismatch(dt, pot, z0, C0, T=1.0):
    params = SimParams(0.1)
    traj = propagate_all(z0, C0, params, pot, StepperConfig(dt, T, 1))
    S = hagedorn_trajectory(traj.z, np.linalg.cholesky(g.sigma(C0)), dt, params, pot)
    return max(np.max(np.abs(Sn @ Sn.T - Sig)) for Sn, Sig in zip(S, traj.Sigma))


@pytest.mark.parametrize("d", [1, 2])
def test_c4c_hagedorn_second_order(acceptance, d):
    rng = np.random.default_rng(300 + d)
    pot = QuadraticPotential(random_spd(rng, d))
    z0, C0 = rng.standard_normal(2 * d), g.random_siegel(rng, d)
    e1, e2 = _hagedorn_mismatch(0.02, pot, z0, C0), _hagedorn_mismatch(0.01, pot, z0, C0)
    ratio = e1 / e2
    ok = 3.5 <= ratio <= 4.5
    acceptance(f"C4c[d={d}] Hagedorn S S^T vs Sigma_n", ok, f"ratio={ratio:.4f} err(dt=0.01)={e2:.3g}")
    assert ok


# --- 5: geometry suite --------------------------------------------------------

GEOMETRY = {
    "equivariance": 1e-10,
    "left_action": 1e-10,
    "poisson_map_fd": 1e-6,
    "kks_pullback": 1e-9,
    "momentum_map_fd": 1e-6,
    "collective_energy": 1e-12,
    "symplecticity": 1e-9,
}


@pytest.fixture(scope="module")
def geometry_results():
    return {r.name: r for r in checks.run_checks(seed=0, n_instances=100, names=list(GEOMETRY))}


@pytest.mark.parametrize("name", list(GEOMETRY))
def test_c5_geometry_suite(geometry_results, acceptance, name):
    r = geometry_results[name]
    assert r.tol == GEOMETRY[name]
    acceptance(f"C5[{name}]", r.passed, f"max={r.max_residual:.3g} tol={r.tol:g}")
    assert r.passed


# --- 6: Jacobi-dual composite, ensemble, alpha restriction ------------------

def test_c6a_composite_closed_form(acceptance):
    rng = np.random.default_rng(600)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        z, Sig, hbar = rng.standard_normal(2 * d), g.sigma(g.random_siegel(rng, d)), rng.uniform(0.05, 1.0)
        alpha, mean, mu = br.iota(br.untangle(br.moment_map_gaussian(GaussianState(z, Sig, hbar))))
        worst = max(worst, abs(alpha - 1.0), np.max(np.abs(mean - z)), np.max(np.abs(mu - hbar * Sig / 4)))
    ok = worst <= 1e-12
    acceptance("C6a composite = (1, z, hbar Sigma/4)", ok, f"max={worst:.3g}")
    assert ok


def test_c6b_ensemble_agreement(acceptance):
    z0, C0 = torsional_initial()
    state = GaussianState(z0, g.sigma(C0), 0.1)
    e = sample(state, TORSIONAL_N, seed=SEED)
    m_e, m_g = br.moment_map_ensemble(e), br.moment_map_gaussian(state)
    X = e.samples
    J = g.symplectic_unit(2)
    # per-sample contributions whose means are lambda and Pi_sym
    lam_i = X @ J  # rows are (J^T zeta)^T
    pis_i = 0.5 * np.einsum("ni,nj->nij", X, X)
    n = X.shape[0]
    z_lam = np.abs(m_e.lam - m_g.lam) / (lam_i.std(axis=0, ddof=1) / np.sqrt(n))
    z_pi = np.abs(m_e.Pi_sym - m_g.Pi_sym) / (pis_i.std(axis=0, ddof=1) / np.sqrt(n))
    worst = float(max(z_lam.max(), z_pi.max()))
    ok = worst <= 5.0 and abs(m_e.alpha - 1.0) <= 1e-12
    acceptance("C6b ensemble within 5 SE", ok, f"max |diff|/SE={worst:.3f} N={n}")
    assert ok


def test_c6c_alpha_one_restriction(acceptance):
    rng = np.random.default_rng(602)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 3))
        z, Sig, hbar = rng.standard_normal(2 * d), g.sigma(g.random_siegel(rng, d)), rng.uniform(0.05, 1.0)
        P, Q, a = g.random_sym(rng, 2 * d), g.random_sym(rng, 2 * d), rng.standard_normal(2 * d)
        F = lambda z, S: np.sin(a @ z) + np.sum(P * S)
        G = lambda z, S: z[0] * z[d] + np.sum(Q * S) ** 2
        lhs = br.bracket_moments(F, G, z, Sig, hbar)
        rhs = br.bracket_moments_alpha(lambda al, z, S: F(z, S), lambda al, z, S: G(z, S), 1.0, z, Sig, hbar)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok = worst <= 1e-12
    acceptance("C6c alpha=1 restriction", ok, f"max={worst:.3g}")
    assert ok


# --- 7: conservation and stability --------------------------------------------

def test_c7_conservation(acceptance):
    z0, C0 = torsional_initial()
    traj = propagate_all(z0, C0, SimParams(0.1), TorsionalPotential(), StepperConfig(0.01, 10.0, 1))
    drift = energy_drift(traj)
    dev = np.abs(traj.H - traj.H[0]) / abs(traj.H[0])
    half = len(traj.t) // 2
    first, second = float(dev[: half + 1].max()), float(dev[half:].max())
    bmin = min_width_eigenvalue(traj)
    ok = drift <= 1e-3 and second < 2.0 * first and bmin > 0
    acceptance(
        "C7 energy drift and width positivity",
        ok,
        f"drift={drift:.3g} max[0,5]={first:.3g} max[5,10]={second:.3g} min eig B={bmin:.3g}",
    )
    assert drift <= 1e-3
    assert second < 2.0 * first, "secular growth of the energy error"
    assert bmin > 0


# --- 8: determinism -----------------------------------------------------------

@pytest.mark.parametrize(
    "command,kw",
    [
        ("propagate", dict(record_stride=1)),
        ("egorov", dict(n_samples=2000, seed=SEED)),
        ("convergence", dict(hbar=(0.2, 0.1), n_samples=2000, seed=SEED)),
        ("check", dict()),
    ],
)
def test_c8_determinism(tmp_path, acceptance, command, kw):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(serialize_config(torsional_config(**kw)))
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        argv = [command, "--config", str(cfg), "--output", str(path), "--quiet"]
        if command == "check":
            argv += ["--instances", "20"]
        code = cli.main(argv, stdout=io.StringIO(), stderr=io.StringIO())
        assert code == 0
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    acceptance(f"C8[{command}] byte-identical output", ok, f"{len(outs[0])} bytes")
    assert ok

import numpy as np
import pytest
import scipy.linalg

from srsim.numerics import InfeasibleError
from srsim.psm import (_jop_iteration, dual_search, jop_step, sop_active_step,
                       sop_passive_step)
from srsim.system import PhaseState, ScenarioConfig, linearize_theta
from tests.test_system import random_scenario, random_state


def make_lin(rng, m, k, **cfg_kw):
    cfg = random_scenario(rng, m=m, k=k)
    for key, val in cfg_kw.items():
        cfg = cfg.with_(**{key: val})
    ch = cfg.channels()
    phase, beam = random_state(rng, cfg, psi_scale=0.0)
    lin = linearize_theta(cfg, ch, beam)
    return cfg, lin


def grid_passive_m2(lin, psi, pts=629):
    """Exhaustive sweep of both passive phases at ~1e-2 rad resolution,
    evaluated through the exact objective."""
    alphas = np.linspace(0, 2 * np.pi, pts, endpoint=False)
    A, B = np.meshgrid(alphas, alphas, indexing="ij")
    th1 = np.exp(1j * A).ravel()
    th2 = np.exp(1j * B).ravel()
    thetas = np.stack([th1, th2], axis=0) + psi[:, None]

    num = np.abs(lin.t_aib.conj() @ thetas + lin.l_ab) ** 2
    jam = lin.P_mib @ np.conj(thetas) + lin.t_mb[:, None]
    den = np.sum(np.abs(jam) ** 2, axis=0) + lin.sigma_b2
    rb = np.log2(1.0 + num / den)

    w = lin.P_aim @ thetas + lin.t_am[:, None]
    L = scipy.linalg.cholesky(lin.R_nj, lower=True)
    sol = scipy.linalg.solve_triangular(L, w, lower=True)
    rm = np.log2(1.0 + np.sum(np.abs(sol) ** 2, axis=0))
    return float(np.max(rb - rm))


class TestSopPassiveStep:
    def test_matches_phase_grid_m2(self):
        rng = np.random.default_rng(100)
        cfg, lin = make_lin(rng, m=2, k=0)
        psi = np.zeros(2, dtype=complex)
        phi0 = np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
        phi, _ = sop_passive_step(lin, psi, phi0, cfg, np.random.default_rng(1))
        achieved = lin.objective_bits(phi)
        oracle = grid_passive_m2(lin, psi)
        assert achieved >= oracle - 1e-3
        assert achieved <= oracle + 5e-3

    def test_unit_modulus_exactly(self):
        rng = np.random.default_rng(101)
        cfg, lin = make_lin(rng, m=6, k=2)
        phi0 = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        psi = np.where(cfg.active_mask, 30.0 + 10.0j, 0.0)
        phi, _ = sop_passive_step(lin, psi, phi0, cfg, np.random.default_rng(2))
        passive = ~cfg.active_mask
        assert np.max(np.abs(np.abs(phi[passive]) - 1.0)) < 1e-14
        assert np.abs(phi[cfg.active_mask]).max(initial=0.0) == 0.0

    def test_never_worse_than_start(self):
        rng = np.random.default_rng(102)
        for _ in range(5):
            cfg, lin = make_lin(rng, m=5, k=1)
            phi0 = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
            psi = np.where(cfg.active_mask, 20.0 - 5.0j, 0.0)
            phi, _ = sop_passive_step(lin, psi, phi0, cfg, np.random.default_rng(3))
            theta0 = np.where(cfg.active_mask, psi, phi0)
            assert (lin.objective_bits(phi + psi)
                    >= lin.objective_bits(theta0) - 1e-12)


def grid_active_k1(lin, phi, act_idx, pts=301):
    amps = np.linspace(0, np.sqrt(lin.p_rmax / lin.d_bar[act_idx]), pts)
    phases = np.linspace(0, 2 * np.pi, pts, endpoint=False)
    best = -np.inf
    for a in amps:
        for t in phases:
            theta = phi.copy()
            theta[act_idx] = a * np.exp(1j * t)
            val = lin.objective_bits(theta)
            if val > best:
                best = val
    return best


class TestSopActiveStep:
    def test_matches_amplitude_phase_grid_k1(self):
        rng = np.random.default_rng(103)
        cfg, lin = make_lin(rng, m=4, k=1)
        phi = np.where(cfg.active_mask, 0.0,
                       np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
        psi0 = np.zeros(4, dtype=complex)
        psi, _ = sop_active_step(lin, phi, psi0, cfg)
        achieved = lin.objective_bits(phi + psi)
        oracle = grid_active_k1(lin, phi, cfg.active_set[0])
        assert achieved >= oracle - 1e-3

    def test_vanishing_budget_forces_zero(self):
        rng = np.random.default_rng(104)
        cfg, lin = make_lin(rng, m=4, k=1, p_rmax_dbm=-300.0)
        lin = linearize_theta(cfg, cfg.channels(),
                              random_state(rng, cfg, psi_scale=0.0)[1])
        phi = np.where(cfg.active_mask, 0.0,
                       np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
        psi, _ = sop_active_step(lin, phi, np.zeros(4, dtype=complex), cfg)
        assert lin.power(psi) <= lin.p_rmax * (1 + 1e-8)
        assert np.abs(psi).max() < 1e-140

    def test_power_feasible_at_exit(self):
        rng = np.random.default_rng(105)
        for _ in range(5):
            cfg, lin = make_lin(rng, m=5, k=2)
            phi = np.where(cfg.active_mask, 0.0,
                           np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
            psi, _ = sop_active_step(lin, phi, np.zeros(5, dtype=complex), cfg)
            assert lin.power(psi) <= lin.p_rmax * (1 + 1e-8)
            assert np.abs(psi[~cfg.active_mask]).max(initial=0.0) == 0.0

    def test_infeasible_start_rejected(self):
        rng = np.random.default_rng(106)
        cfg, lin = make_lin(rng, m=4, k=1)
        i = cfg.active_set[0]
        psi_bad = np.zeros(4, dtype=complex)
        psi_bad[i] = 10.0 * np.sqrt(lin.p_rmax / lin.d_bar[i])
        phi = np.where(cfg.active_mask, 0.0, 1.0 + 0j)
        with pytest.raises(InfeasibleError):
            sop_active_step(lin, phi, psi_bad, cfg)


class TestDualSearch:
    def test_scalar_hand_case(self):
        # power(mu) = 4 / (1 + mu)^2 = 1  =>  mu = 1
        mu = dual_search(np.array([2.0 + 0j]), np.array([1.0]),
                         np.array([1.0]), 1.0)
        assert mu == pytest.approx(1.0, abs=1e-8)

    def test_rejects_inactive_budget(self):
        with pytest.raises(ValueError):
            dual_search(np.array([0.1 + 0j]), np.array([1.0]),
                        np.array([1.0]), 10.0)

    def test_power_monotone_decreasing(self):
        rng = np.random.default_rng(107)
        q = rng.normal(size=3) + 1j * rng.normal(size=3)
        Q = rng.uniform(0.5, 2.0, 3)
        D = rng.uniform(0.5, 2.0, 3)
        mus = np.linspace(0.0, 50.0, 200)
        power = [float(np.sum(np.abs(q) ** 2 * D / (Q + m * D) ** 2)) for m in mus]
        assert np.all(np.diff(power) < 0)

    def test_matches_mu_grid(self):
        rng = np.random.default_rng(108)
        q = 3.0 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        Q = rng.uniform(0.5, 2.0, 2)
        D = rng.uniform(0.5, 2.0, 2)
        p_max = 0.5
        mu = dual_search(q, Q, D, p_max)

        def g(m):
            return float(-np.sum(np.abs(q) ** 2 / (Q + m * D)) - m * p_max)

        grid = np.linspace(1e-9, 10 * mu + 1.0, 2_000_001)
        vals = -np.sum(np.abs(q[:, None]) ** 2 / (Q[:, None] + grid[None, :] * D[:, None]),
                       axis=0) - grid * p_max
        assert g(mu) >= np.max(vals) - 1e-6


class TestJopStep:
    def test_unconstrained_branch_keeps_budget_slack(self):
        rng = np.random.default_rng(109)
        cfg, lin = make_lin(rng, m=5, k=1, p_rmax_dbm=80.0)
        lin = linearize_theta(cfg, cfg.channels(),
                              random_state(rng, cfg, psi_scale=0.0)[1])
        theta0 = np.where(cfg.active_mask, 0.1 + 0j,
                          np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
        theta, info = _jop_iteration(lin, theta0, cfg)
        assert info["mu"] == 0.0 and not info["binding"]

    def test_binding_branch_activates_power(self):
        rng = np.random.default_rng(110)
        cfg, lin = make_lin(rng, m=5, k=1, p_rmax_dbm=-30.0)
        lin = linearize_theta(cfg, cfg.channels(),
                              random_state(rng, cfg, psi_scale=0.0)[1])
        theta0 = np.where(cfg.active_mask, 0.0 + 0j,
                          np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
        theta, info = _jop_iteration(lin, theta0, cfg)
        if info["kept_previous"]:
            pytest.skip("surrogate step was rejected by the safeguard")
        assert info["binding"]
        assert lin.power(theta) <= lin.p_rmax * (1 + 1e-6)
        assert lin.power(theta) >= lin.p_rmax * (1 - 1e-3)

    def test_passive_phases_from_linear_coefficient(self):
        rng = np.random.default_rng(111)
        cfg, lin = make_lin(rng, m=5, k=1)
        theta0 = np.where(cfg.active_mask, 1.0 + 0j,
                          np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
        theta, info = _jop_iteration(lin, theta0, cfg)
        if info["kept_previous"]:
            pytest.skip("surrogate step was rejected by the safeguard")
        passive = ~cfg.active_mask
        assert np.max(np.abs(np.abs(theta[passive]) - 1.0)) < 1e-14

    def test_objective_never_degrades(self):
        rng = np.random.default_rng(112)
        for _ in range(10):
            cfg, lin = make_lin(rng, m=6, k=2)
            theta0 = np.where(cfg.active_mask, 5.0 + 2.0j,
                              np.exp(1j * rng.uniform(0, 2 * np.pi, 6)))
            if lin.power(theta0) > lin.p_rmax:
                theta0 = np.where(cfg.active_mask, 0.0, theta0)
            theta, _ = jop_step(lin, theta0, cfg)
            assert lin.objective_bits(theta) >= lin.objective_bits(theta0) - 1e-9

    def test_k0_pure_passive_update(self):
        rng = np.random.default_rng(113)
        cfg, lin = make_lin(rng, m=5, k=0)
        theta0 = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
        theta, _ = jop_step(lin, theta0, cfg)
        assert np.max(np.abs(np.abs(theta) - 1.0)) < 1e-14
        assert lin.power(theta) == 0.0


class TestSurrogateBounds:
    """The five majorization/minorization facts the phase designs rely on."""

    def test_log_trace_tangent_majorizes(self):
        rng = np.random.default_rng(114)
        n = 5
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        L = a @ a.conj().T + 0.1 * np.eye(n)
        for _ in range(100):
            za = rng.normal(size=n) + 1j * rng.normal(size=n)
            zb = rng.normal(size=n) + 1j * rng.normal(size=n)
            Wt = np.outer(za, za.conj()) + 0.01 * np.eye(n)
            W = np.outer(zb, zb.conj()) + 0.01 * np.eye(n)
            t0 = np.trace(L @ Wt).real
            lhs = np.log(np.trace(L @ W).real)
            rhs = np.log(t0) + np.trace(L @ (W - Wt)).real / t0
            assert lhs <= rhs + 1e-10
            # tangent is exact at the anchor
            rhs_eq = np.log(t0) + np.trace(L @ (Wt - Wt)).real / t0
            assert rhs_eq == pytest.approx(np.log(t0), abs=1e-14)

    def test_ratio_lemma_minorizes(self):
        rng = np.random.default_rng(115)
        at = rng.normal() + 1j * rng.normal()
        bt = abs(rng.normal()) + 0.5
        c = abs(at) ** 2 / (bt * (bt + abs(at) ** 2))
        anchor = np.log(1 + abs(at) ** 2 / bt)
        for _ in range(100):
            a = rng.normal() + 1j * rng.normal()
            b = abs(rng.normal()) + 0.1
            lhs = (anchor + 2 * np.real(np.conj(at) * a) / bt
                   - abs(at) ** 2 / bt - c * (b + abs(a) ** 2))
            assert lhs <= np.log(1 + abs(a) ** 2 / b) + 1e-10
        # equality at the anchor point
        eq = (anchor + 2 * abs(at) ** 2 / bt - abs(at) ** 2 / bt
              - c * (bt + abs(at) ** 2))
        assert eq == pytest.approx(anchor, abs=1e-12)

    def test_top_eigenvalue_relaxation(self):
        rng = np.random.default_rng(116)
        n = 6
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Q1 = (a @ a.conj().T) / n
        lam = float(np.linalg.eigvalsh(Q1)[-1])
        tt = rng.normal(size=n) + 1j * rng.normal(size=n)
        gap = lam * np.eye(n) - Q1
        for _ in range(100):
            th = rng.normal(size=n) + 1j * rng.normal(size=n)
            lhs = (-lam * np.vdot(th, th).real
                   + 2 * np.real(tt.conj() @ gap @ th)
                   - np.real(tt.conj() @ gap @ tt))
            rhs = -np.real(th.conj() @ Q1 @ th)
            assert lhs <= rhs + 1e-9
        lhs_eq = (-lam * np.vdot(tt, tt).real
                  + 2 * np.real(tt.conj() @ gap @ tt)
                  - np.real(tt.conj() @ gap @ tt))
        assert lhs_eq == pytest.approx(-np.real(tt.conj() @ Q1 @ tt), abs=1e-9)

    def test_schur_complement_biconditional(self):
        rng = np.random.default_rng(117)
        n = 4
        for _ in range(100):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            UL = a @ a.conj().T + 0.2 * np.eye(n)
            c = rng.normal(size=n) + 1j * rng.normal(size=n)
            quad = float(np.real(c.conj() @ np.linalg.solve(UL, c)))
            gamma = quad + rng.normal() * 0.5
            E = np.zeros((n + 1, n + 1), dtype=complex)
            E[:n, :n] = UL
            E[:n, n] = c
            E[n, :n] = c.conj()
            E[n, n] = gamma
            psd = np.linalg.eigvalsh(E)[0] >= -1e-10 * max(1.0, np.abs(E).max())
            assert psd == (gamma >= quad - 1e-10 * max(1.0, abs(quad)))

    def test_logdet_tangent_majorizes(self):
        rng = np.random.default_rng(118)
        n = 4
        for _ in range(100):
            a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            S1 = a @ a.conj().T + 0.1 * np.eye(n)
            S2 = b @ b.conj().T + 0.1 * np.eye(n)
            lhs = np.linalg.slogdet(S2)[1]
            rhs = (np.linalg.slogdet(S1)[1]
                   + np.trace(np.linalg.solve(S1, S2 - S1)).real)
            assert lhs <= rhs + 1e-9


class TestFeasibilityPreservation:
    def test_accepted_states_stay_feasible(self):
        rng = np.random.default_rng(119)
        for _ in range(5):
            cfg, lin = make_lin(rng, m=5, k=2)
            phi0 = np.where(cfg.active_mask, 0.0,
                            np.exp(1j * rng.uniform(0, 2 * np.pi, 5)))
            theta = phi0.copy()
            for _ in range(3):
                theta, _ = jop_step(lin, theta, cfg)
                passive = ~cfg.active_mask
                assert np.max(np.abs(np.abs(theta[passive]) - 1.0)) < 1e-12
                assert lin.power(theta) <= lin.p_rmax + 1e-8

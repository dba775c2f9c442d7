import numpy as np
import pytest

from srsim.numerics import (ConvexQcqpProblem, DiagSdpLogProblem,
                            InfeasibleError, LmiQpProblem, audit_diag_sdp,
                            audit_lmi_qp, audit_qcqp, gaussian_randomize,
                            solve_convex_qcqp, solve_diag_sdp_log,
                            solve_lmi_qp)

TOL = 1e-8


# ---------------------------------------------------------------------------
# independent grid oracles


def grid_elliptope_real3(C, S, levels=3, pts=101):
    """Exhaustive search over real symmetric 3x3 unit-diagonal PSD matrices
    parameterized by their three off-diagonal entries."""
    lo = np.array([-1.0, -1.0, -1.0])
    hi = np.array([1.0, 1.0, 1.0])
    tr_c, tr_s = np.trace(C).real, np.trace(S).real
    best_x, best_val = None, -np.inf
    for _ in range(levels):
        axes = [np.linspace(lo[i], hi[i], pts) for i in range(3)]
        A, B, G = np.meshgrid(*axes, indexing="ij")
        det = 1 + 2 * A * B * G - A**2 - B**2 - G**2
        mask = (det >= 0) & (np.abs(A) <= 1) & (np.abs(B) <= 1) & (np.abs(G) <= 1)
        tcw = tr_c + 2 * (C[0, 1].real * A + C[0, 2].real * B + C[1, 2].real * G)
        tsw = tr_s + 2 * (S[0, 1].real * A + S[0, 2].real * B + S[1, 2].real * G)
        val = np.where(mask & (tcw > 0), np.log(np.maximum(tcw, 1e-300)) - tsw, -np.inf)
        idx = np.unravel_index(np.argmax(val), val.shape)
        if val[idx] > best_val:
            best_val = float(val[idx])
            best_x = np.array([A[idx], B[idx], G[idx]])
        width = (hi - lo) * 2.5 / pts
        lo = np.maximum(best_x - width, -1.0)
        hi = np.minimum(best_x + width, 1.0)
    return best_val


def grid_elliptope_complex2(C, S, pts=281, levels=3):
    """Search over 2x2 Hermitian unit-diagonal PSD matrices; the single free
    off-diagonal entry sweeps the closed unit disc."""
    tr_c, tr_s = np.trace(C).real, np.trace(S).real
    r_lo, r_hi, t_lo, t_hi = 0.0, 1.0, 0.0, 2 * np.pi
    best = -np.inf
    for _ in range(levels):
        r = np.linspace(r_lo, r_hi, pts)
        t = np.linspace(t_lo, t_hi, pts)
        R, T = np.meshgrid(r, t, indexing="ij")
        w = R * np.exp(1j * T)
        tcw = tr_c + 2 * (C[1, 0] * w).real
        tsw = tr_s + 2 * (S[1, 0] * w).real
        val = np.where(tcw > 0, np.log(np.maximum(tcw, 1e-300)) - tsw, -np.inf)
        idx = np.unravel_index(np.argmax(val), val.shape)
        best = max(best, float(val[idx]))
        rc, tc = R[idx], T[idx]
        dr, dt = (r_hi - r_lo) * 2.5 / pts, (t_hi - t_lo) * 2.5 / pts
        r_lo, r_hi = max(rc - dr, 0.0), min(rc + dr, 1.0)
        t_lo, t_hi = tc - dt, tc + dt
    return best


def lmi_gamma_floor(p: LmiQpProblem, psi):
    """Minimal feasible slack via the Schur complement, independent of the
    solver: gamma >= c(psi)^H UL(psi)^{-1} c(psi)."""
    E = p.lmi(np.atleast_1d(psi), 0.0)
    ul, c = E[:-1, :-1], E[:-1, -1]
    if np.linalg.eigvalsh((ul + ul.conj().T) / 2)[0] <= 0:
        return np.inf
    return float(np.real(c.conj() @ np.linalg.solve(ul, c)))


def grid_lmi_qp_1d(p: LmiQpProblem, amp_hi, pts=251, levels=3):
    a_lo, a_hi, t_lo, t_hi = 0.0, amp_hi, 0.0, 2 * np.pi
    best = np.inf
    for _ in range(levels):
        best_pt = None
        for a in np.linspace(a_lo, a_hi, pts):
            for t in np.linspace(t_lo, t_hi, pts):
                psi = np.array([a * np.exp(1j * t)])
                if (p.d_bar * abs(psi[0]) ** 2).sum() > p.p_max:
                    continue
                g = lmi_gamma_floor(p, psi)
                if not np.isfinite(g):
                    continue
                val = p.objective(psi, g)
                if val < best:
                    best, best_pt = val, (a, t)
        if best_pt is None:
            break
        da, dt = (a_hi - a_lo) * 2.5 / pts, (t_hi - t_lo) * 2.5 / pts
        a_lo, a_hi = max(best_pt[0] - da, 0.0), best_pt[0] + da
        t_lo, t_hi = best_pt[1] - dt, best_pt[1] + dt
    return best


def grid_qcqp_complex2(p: ConvexQcqpProblem, pts=31, levels=4):
    lo = -1.05 * np.ones(4)
    hi = 1.05 * np.ones(4)
    best = -np.inf
    for _ in range(levels):
        axes = [np.linspace(lo[i], hi[i], pts) for i in range(4)]
        X1, Y1, X2, Y2 = np.meshgrid(*axes, indexing="ij")
        v1 = X1 + 1j * Y1
        v2 = X2 + 1j * Y2
        n2 = np.abs(v1) ** 2 + np.abs(v2) ** 2
        T, t = p.T2, p.t_lin
        quad = (T[0, 0].real * np.abs(v1) ** 2 + T[1, 1].real * np.abs(v2) ** 2
                + 2 * (T[0, 1] * (v1.conj() * v2)).real)
        lin = 2 * (t[0].conjugate() * v1 + t[1].conjugate() * v2).real
        ok = n2 <= p.radius**2
        if p.quad_vs_lin is not None:
            B, w, d = p.quad_vs_lin
            bq = (B[0, 0].real * np.abs(v1) ** 2 + B[1, 1].real * np.abs(v2) ** 2
                  + 2 * (B[0, 1] * (v1.conj() * v2)).real)
            rhs = d + 2 * (w[0].conjugate() * v1 + w[1].conjugate() * v2).real
            ok &= bq <= rhs
        val = np.where(ok, lin - quad, -np.inf)
        idx = np.unravel_index(np.argmax(val), val.shape)
        best = max(best, float(val[idx]))
        center = np.array([X1[idx], Y1[idx], X2[idx], Y2[idx]])
        width = (hi - lo) * 2.5 / pts
        lo, hi = center - width, center + width
    return best


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


# ---------------------------------------------------------------------------


class TestDiagSdpLog:
    def test_constant_objective_on_feasible_set(self):
        p = DiagSdpLogProblem(C_log=np.eye(2), C_lin=[(np.zeros((2, 2)), 1.0)])
        W, obj = solve_diag_sdp_log(p, TOL)
        assert obj == pytest.approx(np.log(2.0), abs=1e-6)
        assert audit_diag_sdp(p, W, 1e-7)["psd"]

    def test_pure_linear_drives_to_rank_one_corner(self):
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        p = DiagSdpLogProblem(C_log=np.eye(2), C_lin=[(C, -1.0)])
        W, obj = solve_diag_sdp_log(p, TOL)
        # analytic optimum over W = [[1, w], [w*, 1]], |w| <= 1: w = 1
        assert np.trace(C @ W).real == pytest.approx(2.0, abs=1e-3)
        assert obj == pytest.approx(np.log(2.0) + 2.0, abs=1e-3)
        assert np.abs(np.diag(W) - 1.0).max() < TOL

    def test_matches_real_grid_oracle_n3(self):
        rng = np.random.default_rng(21)
        a = rng.normal(size=(3, 3))
        C = a @ a.T / 3 + 0.5 * np.eye(3)
        S = 0.4 * rng.normal(size=(3, 3))
        S = (S + S.T) / 2
        p = DiagSdpLogProblem(C_log=C.astype(complex),
                              C_lin=[(S.astype(complex), 1.0)])
        W, obj = solve_diag_sdp_log(p, TOL)
        oracle = grid_elliptope_real3(C, S)
        assert obj == pytest.approx(oracle, abs=1e-3)

    def test_matches_complex_disc_oracle_n2(self):
        rng = np.random.default_rng(22)
        C = random_hermitian(rng, 2, 0.5) + np.eye(2)
        S = random_hermitian(rng, 2, 0.5)
        p = DiagSdpLogProblem(C_log=C, C_lin=[(S, 1.0)])
        W, obj = solve_diag_sdp_log(p, TOL)
        oracle = grid_elliptope_complex2(C, S)
        assert obj == pytest.approx(oracle, abs=1e-3)

    def test_rejects_nonpositive_log_domain(self):
        from srsim.numerics import DomainError
        p = DiagSdpLogProblem(C_log=-np.eye(2), C_lin=[])
        with pytest.raises(DomainError):
            solve_diag_sdp_log(p, TOL)

    def test_iteration_cap_carries_best_iterate(self):
        from srsim.numerics import IterationError
        rng = np.random.default_rng(25)
        C = random_hermitian(rng, 5) + 6 * np.eye(5)
        S = random_hermitian(rng, 5, 0.5)
        p = DiagSdpLogProblem(C_log=C, C_lin=[(S, 1.0)])
        with pytest.raises(IterationError) as err:
            solve_diag_sdp_log(p, TOL, max_iter=2)
        assert err.value.best is not None
        assert err.value.best.shape == (5, 5)
        assert err.value.residuals["gap"] > 0

    def test_deterministic(self):
        rng = np.random.default_rng(23)
        C = random_hermitian(rng, 4) + 3 * np.eye(4)
        S = random_hermitian(rng, 4, 0.3)
        p = DiagSdpLogProblem(C_log=C, C_lin=[(S, 1.0)])
        W1, o1 = solve_diag_sdp_log(p, TOL)
        W2, o2 = solve_diag_sdp_log(p, TOL)
        assert np.array_equal(W1, W2) and o1 == o2

    def test_feasibility_audit_random_instances(self):
        rng = np.random.default_rng(24)
        for n in (3, 5, 9):
            C = random_hermitian(rng, n) + (n + 1.0) * np.eye(n)
            S = random_hermitian(rng, n, 0.5)
            p = DiagSdpLogProblem(C_log=C, C_lin=[(S, 1.0)])
            W, _ = solve_diag_sdp_log(p, TOL)
            checks = audit_diag_sdp(p, W, 1e-7)
            assert checks["psd"] and checks["unit_diag"]


def make_lmi_problem(Q, q, c_gamma, R, t_am, cols, w_anchor, c0, d_bar, p_max):
    """Assemble the LMI pencil in the layout the phase optimizer uses."""
    k = len(q)
    n = R.shape[0]
    m = n + 1
    h = np.ones(n, dtype=complex) / np.sqrt(n)
    hh = np.outer(h, h.conj())
    E0 = np.zeros((m, m), dtype=complex)
    E0[:-1, :-1] = R - c0 * hh
    E0[:-1, -1] = t_am
    E0[-1, :-1] = t_am.conj()
    lmi_re = np.zeros((k, m, m), dtype=complex)
    lmi_im = np.zeros((k, m, m), dtype=complex)
    for j in range(k):
        lmi_re[j, :-1, :-1] = 2 * w_anchor[j].real * hh
        lmi_re[j, :-1, -1] = cols[:, j]
        lmi_re[j, -1, :-1] = cols[:, j].conj()
        lmi_im[j, :-1, :-1] = 2 * w_anchor[j].imag * hh
        lmi_im[j, :-1, -1] = 1j * cols[:, j]
        lmi_im[j, -1, :-1] = (1j * cols[:, j]).conj()
    lmi_gamma = np.zeros((m, m), dtype=complex)
    lmi_gamma[-1, -1] = 1.0
    return LmiQpProblem(Q=Q, q=q, c_gamma=c_gamma, lmi_const=E0,
                        lmi_re=lmi_re, lmi_im=lmi_im, lmi_gamma=lmi_gamma,
                        d_bar=d_bar, p_max=p_max)


class TestLmiQp:
    def test_pure_quadratic_with_loose_power(self):
        # no psi coupling in the pencil: psi -> 0, gamma at its Schur floor
        t = np.array([0.6, 0.8], dtype=complex)
        p = make_lmi_problem(Q=np.eye(1, dtype=complex), q=np.zeros(1, dtype=complex),
                             c_gamma=1.0, R=np.eye(2, dtype=complex), t_am=t,
                             cols=np.zeros((2, 1), dtype=complex),
                             w_anchor=np.zeros(1, dtype=complex), c0=0.0,
                             d_bar=np.array([1.0]), p_max=1e6)
        psi, gamma, obj = solve_lmi_qp(p, TOL)
        assert np.abs(psi[0]) < 1e-4
        assert gamma == pytest.approx(1.0, abs=1e-3)  # ||t||^2
        assert obj == pytest.approx(1.0, abs=1e-3)

    def _one_dim_instance(self, tight: bool):
        rng = np.random.default_rng(31 if tight else 30)
        R = random_hermitian(rng, 2, 0.2) + 2 * np.eye(2)
        t = rng.normal(size=2) + 1j * rng.normal(size=2)
        cols = (rng.normal(size=(2, 1)) + 1j * rng.normal(size=(2, 1)))
        q = np.array([3.0 + 1.0j]) if tight else np.array([0.2 - 0.1j])
        return make_lmi_problem(
            Q=np.array([[1.5]], dtype=complex), q=q, c_gamma=0.8, R=R, t_am=t,
            cols=cols, w_anchor=np.array([0.1 + 0.05j]), c0=0.05,
            d_bar=np.array([2.0]), p_max=1.0 if tight else 25.0)

    def test_matches_two_dim_grid(self):
        p = self._one_dim_instance(tight=False)
        psi, gamma, obj = solve_lmi_qp(p, TOL)
        oracle = grid_lmi_qp_1d(p, amp_hi=np.sqrt(p.p_max / p.d_bar[0]))
        assert obj == pytest.approx(oracle, abs=1e-3)
        assert audit_lmi_qp(p, psi, gamma, 1e-6)["lmi_psd"]

    def test_tight_budget_complementary_slackness(self):
        p = self._one_dim_instance(tight=True)
        psi, gamma, obj = solve_lmi_qp(p, TOL)
        power = float(np.sum(p.d_bar * np.abs(psi) ** 2))
        assert power == pytest.approx(p.p_max, abs=1e-6 * max(1.0, p.p_max))
        oracle = grid_lmi_qp_1d(p, amp_hi=np.sqrt(p.p_max / p.d_bar[0]))
        assert obj == pytest.approx(oracle, abs=1e-3)

    def test_negative_budget_rejected(self):
        p = self._one_dim_instance(tight=True)
        p.p_max = -1.0
        with pytest.raises(InfeasibleError):
            solve_lmi_qp(p, TOL)


class TestConvexQcqp:
    def test_aligned_cap_active(self):
        rng = np.random.default_rng(40)
        t = rng.normal(size=3) + 1j * rng.normal(size=3)
        t = t / np.linalg.norm(t)
        p = ConvexQcqpProblem(T2=np.eye(3, dtype=complex), t_lin=t)
        v, obj = solve_convex_qcqp(p, TOL)
        # along t: maximize 2a - a^2 on [0, 1] -> a = 1
        assert obj == pytest.approx(1.0, abs=1e-6)
        assert np.allclose(v, t, atol=1e-5)

    def test_zero_linear_term(self):
        p = ConvexQcqpProblem(T2=np.eye(2, dtype=complex),
                              t_lin=np.zeros(2, dtype=complex))
        v, obj = solve_convex_qcqp(p, TOL)
        assert np.linalg.norm(v) < 1e-6
        assert obj == pytest.approx(0.0, abs=1e-8)

    def test_matches_grid_n2(self):
        rng = np.random.default_rng(41)
        T2 = random_hermitian(rng, 2, 0.3) + 1.2 * np.eye(2)
        t = 0.7 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        b_dir = rng.normal(size=2) + 1j * rng.normal(size=2)
        B = np.outer(b_dir, b_dir.conj()) / 2
        v_ref = rng.normal(size=2) + 1j * rng.normal(size=2)
        v_ref = 0.9 * v_ref / np.linalg.norm(v_ref)
        w = 0.8 * v_ref
        d = -0.8 * float(np.vdot(v_ref, v_ref).real)
        # scale the coupling so the reference point is strictly feasible
        rhs_ref = d + 2 * float((w.conj() @ v_ref).real)
        B = B * (0.3 * rhs_ref / float(np.real(v_ref.conj() @ B @ v_ref)))
        p = ConvexQcqpProblem(T2=T2, t_lin=t, quad_vs_lin=(B, w, d))
        v, obj = solve_convex_qcqp(p, TOL, v0=v_ref)
        oracle = grid_qcqp_complex2(p)
        assert obj == pytest.approx(oracle, abs=1e-3)
        assert all(audit_qcqp(p, v, 1e-6).values())

    def test_outputs_respect_constraints(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            T2 = random_hermitian(rng, n, 0.3) + 1.1 * np.eye(n)
            t = rng.normal(size=n) + 1j * rng.normal(size=n)
            p = ConvexQcqpProblem(T2=T2, t_lin=t)
            v, _ = solve_convex_qcqp(p, TOL)
            assert np.linalg.norm(v) <= 1.0 + TOL


class TestGaussianRandomize:
    def test_rank_one_recovery(self):
        rng = np.random.default_rng(50)
        m = 5
        phi0 = np.exp(1j * rng.uniform(0, 2 * np.pi, m))
        lift = np.concatenate([phi0, [1.0 + 0j]])
        W = np.outer(lift, lift.conj())
        L = np.outer(lift, lift.conj())

        def score(phi):
            z = np.concatenate([phi, [1.0 + 0j]])
            return float(np.real(z.conj() @ L @ z))

        phi = gaussian_randomize(W, 8, score, rng_seed=1)
        assert np.allclose(phi, phi0, atol=1e-10)
        assert score(phi) == pytest.approx(score(phi0), rel=1e-12)

    def test_unit_modulus_projection(self):
        rng = np.random.default_rng(51)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        W = a @ a.conj().T
        d = np.sqrt(np.diag(W).real)
        W = W / np.outer(d, d)
        phi = gaussian_randomize(W, 32, lambda p: 0.0, rng_seed=2)
        assert np.max(np.abs(np.abs(phi) - 1.0)) < 1e-14

    def test_beats_uniform_phase_baseline(self):
        rng = np.random.default_rng(52)
        m = 2
        L = random_hermitian(rng, m + 1) + (m + 2.0) * np.eye(m + 1)

        def score(phi):
            z = np.concatenate([phi, [1.0 + 0j]])
            return float(np.real(z.conj() @ L @ z))

        # shape the sampler by the lifted relaxation optimum, as the phase
        # optimizer does; its solution is near rank-one for a linear cost
        p = DiagSdpLogProblem(C_log=np.eye(m + 1), C_lin=[(L, -1.0)])
        W, _ = solve_diag_sdp_log(p, TOL)
        best = gaussian_randomize(W, 100, score, rng_seed=3)
        baseline = max(score(np.exp(1j * rng.uniform(0, 2 * np.pi, m)))
                       for _ in range(1000))
        assert score(best) >= baseline - 1e-9

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            gaussian_randomize(np.eye(3), 0, lambda p: 0.0, rng_seed=1)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(53)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        W = a @ a.conj().T
        d = np.sqrt(np.diag(W).real)
        W = W / np.outer(d, d)
        s = lambda p: float(np.sum(p.real))
        p1 = gaussian_randomize(W, 64, s, rng_seed=77)
        p2 = gaussian_randomize(W, 64, s, rng_seed=77)
        assert np.array_equal(p1, p2)

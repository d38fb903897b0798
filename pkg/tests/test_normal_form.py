import math

import numpy as np
import pytest

from dnlslab.cole_hopf import exact_solve, gauge0
from dnlslab.dynamics import integrate_rk4, rhs_interaction, sup_l2_distance
from dnlslab.errors import (
    ComplexityBudget,
    DomainError,
    NotContracting,
    SmallnessViolated,
    ZeroFrequency,
)
from dnlslab.normal_form import (
    A_s,
    C_s,
    M_interaction,
    NFSeries,
    contraction_time_bound,
    delta1,
    finite_nf_residual,
    fl_estimate_bound,
    fl_lipschitz_bound,
    modulation_phi,
    nf_I,
    nf_N,
    nf_R,
    nf_series,
    picard_solve,
    series_tail_bound,
    sup_I_bound,
    sup_N_bound,
    sup_R_bound,
)
from dnlslab.spectral import (
    FLParams,
    SpectralState,
    fl_norm,
    l2_norm,
    make_state,
    random_state,
    zero_state,
)

from oracles import nf_tuple_sum


def two_cosine(norm, K):
    eps = norm / math.sqrt(2.0)
    return make_state({1: eps, -1: eps}, K)


class TestModulation:
    def test_pair(self):
        assert modulation_phi((1, 2)) == 4

    def test_opposite_pair(self):
        assert modulation_phi((3, -3)) == -18

    def test_triple(self):
        assert modulation_phi((1, 2, 3)) == 36 - 14

    def test_singleton_vanishes(self):
        assert modulation_phi((7,)) == 0

    def test_zero_rejected(self):
        with pytest.raises(ZeroFrequency):
            modulation_phi((1, 0, 2))


class TestConstants:
    def test_C_s(self):
        assert C_s(0.0, 5) == 1.0
        assert C_s(-1.0, 5) == 1.0
        assert C_s(0.5, 4) == 2.0

    def test_A_0_is_one(self):
        assert A_s(0.0) == 1.0

    def test_delta1_l2(self):
        # ln(5/4) / (4 Z_{0,2})
        assert delta1(FLParams(0, 2)) == pytest.approx(0.0307563719166398, abs=1e-12)

    def test_horizon_positive(self):
        assert contraction_time_bound(FLParams(0, 2), 0.1) > 1.0


class TestOperators:
    def test_N1_is_minus_v(self, small_state):
        v = small_state.to_interaction()
        out = nf_N(v, 1, t=0.3, K_out=6)
        assert np.array_equal(out.coeffs, -v.coeffs)

    def test_N2_hand_value(self):
        # v = a e^{ix} + b e^{2ix}, t = 0: N^2_3 = (3/4) * 2 * (a/1)(b/2) = 3ab/4
        a, b = 0.3 + 0.1j, -0.2 + 0.4j
        v = make_state({1: a, 2: b}, K=3).to_interaction()
        out = nf_N(v, 2, t=0.0)
        assert out[3] == pytest.approx(0.75 * a * b, rel=1e-14)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_fast_vs_tuple_sum_N(self, rng, n):
        K = 4
        v = random_state(K, rng, target_norm=0.6, time=0.0)
        t = float(rng.uniform(0, 2))
        expected = nf_tuple_sum(v.coeffs, K, t, n, "N")
        got = nf_N(v.to_interaction(), n, t=t).coeffs
        scale = max(np.max(np.abs(expected)), 1e-300)
        assert np.max(np.abs(got - expected)) <= 1e-12 * scale

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_fast_vs_tuple_sum_I(self, rng, n):
        K = 4
        v = random_state(K, rng, target_norm=0.6)
        t = float(rng.uniform(0, 2))
        expected = nf_tuple_sum(v.coeffs, K, t, n, "I")
        got = nf_I(v.to_interaction(), n, t=t).coeffs
        scale = max(np.max(np.abs(expected)), 1e-300)
        assert np.max(np.abs(got - expected)) <= 1e-12 * scale

    def test_direct_method_matches_fast(self, rng):
        K = 5
        v = random_state(K, rng, target_norm=0.5).to_interaction()
        for n in (2, 3):
            d = nf_N(v, n, t=0.7, method="direct")
            f = nf_N(v, n, t=0.7, method="fast")
            assert np.max(np.abs(d.coeffs - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))
            d = nf_I(v, n, t=0.7, method="direct")
            f = nf_I(v, n, t=0.7, method="fast")
            assert np.max(np.abs(d.coeffs - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs))

    def test_permutation_invariance_of_tuple_sum(self, rng):
        K, n, t = 3, 3, 0.41
        v = random_state(K, rng, target_norm=0.8)
        base = nf_tuple_sum(v.coeffs, K, t, n, "N")
        order = rng.permutation((2 * K) ** n)
        shuffled = nf_tuple_sum(v.coeffs, K, t, n, "N", tuple_order=order)
        assert np.max(np.abs(base - shuffled)) <= 1e-13 * np.max(np.abs(base))

    def test_complexity_budget(self, rng):
        v = random_state(16, rng).to_interaction()
        with pytest.raises(ComplexityBudget):
            nf_N(v, 3, method="direct")
        with pytest.raises(ComplexityBudget):
            nf_I(random_state(4, rng).to_interaction(), 6, method="direct")

    def test_I_requires_n_at_least_two(self, rng):
        with pytest.raises(DomainError):
            nf_I(random_state(4, rng).to_interaction(), 1)

    def test_I2_equals_rhs(self, rng):
        for _ in range(10):
            v = random_state(int(rng.integers(2, 16)), rng, target_norm=0.7,
                             time=float(rng.uniform(0, 3))).to_interaction()
            lhs = nf_I(v, 2, K_out=v.K).coeffs
            rhs = rhs_interaction(v).coeffs
            assert np.max(np.abs(lhs - rhs)) <= 1e-13 * max(np.max(np.abs(rhs)), 1e-300)

    def test_resonant_tuples_contribute_zero(self, rng):
        # the i Phi_n weight annihilates every resonant tuple individually
        from itertools import product as iproduct

        K = 4
        v = random_state(K, rng, target_norm=0.9)
        t = 0.23
        for n in (2, 3, 4):
            acc = 0.0
            nonzero = [k for k in range(-K, K + 1) if k != 0]
            for tup in iproduct(nonzero, repeat=n):
                phi = sum(tup) ** 2 - sum(x * x for x in tup)
                if phi == 0:
                    term = 1j * phi * np.exp(1j * phi * t)
                    for x in tup:
                        term *= v.coeffs[x + K] / x
                    acc += term
            assert acc == 0.0


class TestRCorrection:
    def test_rec_vs_direct_formula(self, rng):
        # R^2 = -(i/4) M N^1 must equal (i/4) v_k sum_m e^{-2im^2 t} v_m v_{-m}
        v = random_state(8, rng, target_norm=0.5, time=0.9).to_interaction()
        got = nf_R(v, 2).coeffs
        k = v.k_grid.astype(float)
        u = np.exp(-1j * k * k * v.time) * v.coeffs
        M = np.sum(u * u[::-1])
        direct = 0.25j * v.coeffs * M
        assert np.max(np.abs(got - direct)) <= 1e-15 * max(np.max(np.abs(direct)), 1e-300)

    def test_vanishes_when_M_zero(self, rng):
        v = make_state({1: 1.0, 2: 0.5}, K=4).to_interaction()  # no opposite pairs
        assert M_interaction(v) == 0.0
        for n in (2, 3, 4):
            assert np.all(nf_R(v, n).coeffs == 0)

    def test_sup_bound_along_trajectory(self):
        phi = two_cosine(0.05, 16)
        traj = integrate_rk4(phi.to_interaction(), 1.0, 1e-3, stride=50)
        C0 = max(l2_norm(s.to_physical()) for s in traj.states)
        for s in traj.states[::5]:
            for n in (2, 3, 4):
                r = nf_R(s, n)
                assert np.max(np.abs(r.coeffs)) <= sup_R_bound(n, C0) * (1 + 1e-9)


class TestRecursionConsistency:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_chain_rule_identity(self, rng, n):
        # B^{n+1} := -(chain-rule derivative of N^n along the flow) satisfies
        # B^{n+1} - R^n = I^{n+1}.  The substituted slot must range over the
        # full quadratic image [-2K, 2K]: dv/dt is nonzero there even where
        # v itself vanishes.
        K = 3
        t = 0.31
        v = random_state(K, rng, target_norm=0.5, time=t).to_interaction()
        nonzero = [k for k in range(-K, K + 1) if k != 0]

        # untruncated interaction right-hand side over the image
        dv_ext = {}
        for kappa in range(-2 * K, 2 * K + 1):
            if kappa == 0:
                continue
            acc = 0.0
            for m1 in nonzero:
                m2 = kappa - m1
                if m2 == 0 or abs(m2) > K:
                    continue
                acc += (
                    np.exp(1j * (kappa**2 - m1**2 - m2**2) * t)
                    * v.coeffs[m1 + K]
                    * v.coeffs[m2 + K]
                )
            dv_ext[kappa] = 0.5j * kappa * acc

        from itertools import product as iproduct

        K_out = (n + 1) * K
        chain = np.zeros(2 * K_out + 1, dtype=complex)
        extended = [k for k in range(-2 * K, 2 * K + 1) if k != 0]
        for slot in range(n):
            ranges = [extended if j == slot else nonzero for j in range(n)]
            for tup in iproduct(*ranges):
                s = sum(tup)
                if s == 0 or abs(s) > K_out:
                    continue
                phi = s * s - sum(x * x for x in tup)
                term = np.exp(1j * phi * t)
                for j, x in enumerate(tup):
                    term *= (dv_ext[x] if j == slot else v.coeffs[x + K]) / x
                chain[s + K_out] += term
        ks = np.arange(-K_out, K_out + 1, dtype=float)
        chain *= (-1.0) ** n * ks / (2.0 ** (n - 1) * math.factorial(n))

        B = -chain
        R = nf_R(v, n, K_out=K_out).coeffs
        I_next = nf_I(v, n + 1, K_out=K_out).coeffs
        err = np.max(np.abs(B - R - I_next))
        assert err <= 1e-12 * max(np.max(np.abs(I_next)), 1e-300)


class TestFLEstimates:
    @pytest.mark.parametrize("params", [FLParams(0, 2), FLParams(0.5, 4), FLParams(0, 1)])
    def test_norm_and_lipschitz_bounds(self, rng, params):
        for _ in range(40):
            K = int(rng.integers(2, 12))
            v = random_state(K, rng, decay=float(rng.uniform(0.5, 1.5)))
            w = random_state(K, rng, decay=float(rng.uniform(0.5, 1.5)))
            t = float(rng.uniform(0, 2))
            nv, nw = fl_norm(v, params), fl_norm(w, params)
            for n in range(2, 7):
                Nv = nf_N(v.to_interaction(), n, t=t)
                assert fl_norm(Nv, params) <= fl_estimate_bound(params, n, nv) * (1 + 1e-9)
                Nw = nf_N(w.to_interaction(), n, t=t)
                diff = SpectralState(
                    K=Nv.K, coeffs=Nv.coeffs - Nw.coeffs, time=t, representation="v"
                )
                dv = SpectralState(K=K, coeffs=v.coeffs - w.coeffs)
                bound = fl_lipschitz_bound(params, n, nv, nw) * fl_norm(dv, params)
                assert fl_norm(diff, params) <= bound * (1 + 1e-9)


class TestSupBounds:
    def test_I_and_N_bounds_along_trajectory(self):
        phi = two_cosine(0.05, 16)
        traj = integrate_rk4(phi.to_interaction(), 1.0, 1e-3, stride=100)
        C0 = max(l2_norm(s.to_physical()) for s in traj.states)
        for s in traj.states:
            for n in (2, 3, 4, 5):
                In = nf_I(s, n, K_out=s.K)
                for k in (1, 2, 5):
                    assert abs(In[k]) <= sup_I_bound(n, k, C0) * (1 + 1e-9)
                Nn = nf_N(s, n, K_out=s.K)
                assert np.max(np.abs(Nn.coeffs)) <= sup_N_bound(n, C0) * (1 + 1e-9)


class TestFiniteResidual:
    def test_zero_trajectory(self):
        traj = integrate_rk4(zero_state(8).to_interaction(), 0.1, 1e-3, stride=10)
        rep = finite_nf_residual(traj, 2, 1)
        assert rep.sup_residual == 0.0

    def test_identity_within_fd_error(self):
        phi = two_cosine(0.05, 16)
        traj = integrate_rk4(phi.to_interaction(), 1.0, 1e-3, stride=10)
        for n in (2, 3, 4):
            rep = finite_nf_residual(traj, n, 1)
            assert rep.sup_residual <= rep.fd_error + 1e-10

    def test_remainder_decays(self):
        phi = two_cosine(0.05, 16)
        traj = integrate_rk4(phi.to_interaction(), 1.0, 1e-3, stride=10)
        rep = finite_nf_residual(traj, 6, 1)
        sups = [rep.sup_I[j] for j in range(2, 8)]
        assert all(s > 0 for s in sups)
        # factorial-type decay: wide steps down across two orders
        assert sups[2] < sups[0] / 9
        assert sups[4] < sups[2] / 9
        for j in range(2, 8):
            assert rep.sup_I[j] <= rep.sup_I_bounds[j]


class TestSeries:
    def test_zero_state(self):
        s = nf_series(zero_state(6).to_interaction(), 8)
        assert s.tail_bound == 0.0
        assert all(np.all(t.coeffs == 0) for t in s.terms)

    def test_tail_bound_small_data(self):
        v = two_cosine(0.05, 8).to_interaction()
        s = nf_series(v, 8)
        assert s.tail_bound < 1e-12

    def test_tail_bound_closed_form(self):
        # closed form equals a long partial sum of the bound terms
        C0, N_max = 0.3, 6
        direct = sum(sup_N_bound(n, C0) for n in range(N_max + 1, 60))
        assert series_tail_bound(N_max, C0) == pytest.approx(direct, rel=1e-12)

    def test_series_matches_gauge_exponential(self, rng):
        # sum_n N^n_k(v(t)) = 2k e^{ik^2 t} (e^{-(i/2)J(u)})_k
        for _ in range(5):
            K = 8
            u = random_state(K, rng, target_norm=0.1, time=float(rng.uniform(0, 1)))
            v = u.to_interaction()
            series = nf_series(v, 14, K_out=K).total(n_from=1)
            W = gauge0(u)
            ks = np.arange(-K, K + 1)
            expected = np.array(
                [2.0 * k * np.exp(1j * float(k) ** 2 * u.time) * W.coefficient(k) for k in ks]
            )
            expected[K] = 0.0
            assert np.max(np.abs(series.coeffs - expected)) <= 1e-10

    def test_json_round_trippable(self, small_state):
        s = nf_series(small_state.to_interaction(), 4)
        obj = s.to_json()
        assert obj["N_max"] == 4
        assert set(obj["terms"]) == {"1", "2", "3", "4"}


class TestPicard:
    def test_zero_data_one_sweep(self):
        traj, rep = picard_solve(zero_state(8), 1.0, quad_nodes=16)
        assert rep.iterations == 1
        assert all(np.all(s.coeffs == 0) for s in traj.states)

    def test_smallness_precondition(self):
        phi = two_cosine(0.05, 8)  # above delta1 ~ 0.0308
        with pytest.raises(SmallnessViolated):
            picard_solve(phi, 0.5, quad_nodes=32)

    def test_small_data_matches_exact(self):
        phi = two_cosine(0.02, 16)
        traj, rep = picard_solve(phi, 1.0, N_max=10, quad_nodes=100, tol=1e-11)
        assert rep.smallness_ok and rep.horizon_ok
        assert max(rep.contraction_factors) <= 0.5 + 0.05
        errs = []
        for i in range(0, len(traj), 10):
            u_ex = exact_solve(phi, float(traj.times[i]))
            errs.append(
                np.linalg.norm(traj.states[i].to_physical().coeffs - u_ex.coeffs)
            )
        assert max(errs) <= 1e-8

    def test_divergence_detected(self):
        phi = two_cosine(5.0, 6)
        with pytest.raises(NotContracting):
            picard_solve(phi, 2.0, quad_nodes=32, override_smallness=True, max_iter=40)

    def test_quadrature_refinement_reported(self):
        phi = two_cosine(0.02, 8)
        traj, rep = picard_solve(phi, 1.0, quad_nodes=32, tol=1e-9)
        assert rep.quad_nodes >= 32
        assert rep.quad_error < 1e-10

    def test_warns_when_overridden(self):
        phi = two_cosine(0.05, 8)
        with pytest.warns(UserWarning):
            traj, rep = picard_solve(
                phi, 0.5, quad_nodes=32, override_smallness=True, refine_quadrature=False
            )
        assert not rep.smallness_ok

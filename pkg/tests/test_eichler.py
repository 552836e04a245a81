import cmath
import math
from fractions import Fraction

import pytest

from dedekindsym import eichler as ei
from dedekindsym import modforms as mf
from dedekindsym import symbols as sy
from dedekindsym.errors import DomainError, NonConvergence
from dedekindsym.series import COMPLEX, POLY, Alphabet, TruncSeries

CFG = ei.IntegratorConfig(trunc=2)
INF = ei.INF


def h_pair():
    return ei.HAssignment.letters({"A": mf.eisenstein(4), "B": mf.eisenstein(6)})


def h_e4():
    return ei.HAssignment.letters({"A": mf.eisenstein(4)})


def h_delta():
    return ei.HAssignment.letters({"A": mf.delta_form()})


class TestHAssignment:
    def test_letters_weights(self):
        h = h_pair()
        assert h.alphabet.weights == (2, 4)

    def test_weight_mismatch(self):
        ab = Alphabet([("A", 4)])
        with pytest.raises(ValueError):
            ei.HAssignment(ab, {"A": mf.eisenstein(4)})  # needs weight 6

    def test_level_two_rejected(self):
        ab = Alphabet([("A", 2)])
        with pytest.raises(ValueError):
            ei.HAssignment(ab, {"A": mf.eisenstein_gamma02(4)})

    def test_word_assignment(self):
        ab = Alphabet([("A", 2), ("B", 4)])
        h = ei.HAssignment(ab, {"A": mf.eisenstein(4), "AB": mf.eisenstein(8)})
        assert h.form("AB").weight == 8
        assert h.form("BA") is None


class TestTangentialBasePoint:
    def test_validation(self):
        ei.TangentialBasePoint(Fraction(1, 2), INF)
        with pytest.raises(ValueError):
            ei.TangentialBasePoint(INF, INF)
        with pytest.raises(ValueError):
            ei.TangentialBasePoint(0.5, INF)


class TestOmega:
    def test_zero_assignment(self):
        ab = Alphabet([("A", 2)])
        h = ei.HAssignment(ab, {})
        assert ei.omega(h, 1j, (2.0, 1.0)).coeffs == {}

    def test_single_letter_value(self):
        h = h_e4()
        tau = 0.3 + 1.2j
        q, p = 5.0, 3.0
        val = ei.omega(h, tau, (q, p)).coeff((0,))
        want = mf.form_value(mf.eisenstein(4), tau) * (q - p * tau) ** 2
        assert abs(val - want) < 1e-12 * abs(want)

    def test_gamma_invariance_at_S(self):
        # Omega(S tau) with slashed polynomial and Jacobian equals Omega(tau)
        h = h_pair()
        tau = 0.4 + 0.9j
        s_tau = -1 / tau
        om_moved = ei.omega(h, s_tau, None)
        om_here = ei.omega(h, tau, None)
        X, Y = 2.0, 3.0
        for w in om_here.coeffs:
            slashed = om_moved.coeff(w).subs_linear(((0, -1), (1, 0))) * (1 / tau ** 2)
            assert abs(slashed.evaluate(X, Y) - om_here.coeff(w).evaluate(X, Y)) < 1e-10


class TestIInfinity:
    def test_equal_endpoints(self):
        h = h_pair()
        assert ei.i_infinity(h, 1j, 1j, (2.0, 1.0), 2) == TruncSeries.one(h.alphabet, 2, COMPLEX)

    def test_composition_exact(self):
        h = h_pair()
        xy = (3.0, 2.0)
        a, b, c = 1j, 2.5 + 0.5j, -1 + 4j
        lhs = ei.i_infinity(h, a, b, xy, 2) * ei.i_infinity(h, b, c, xy, 2)
        rhs = ei.i_infinity(h, a, c, xy, 2)
        assert lhs.max_abs_diff(rhs) < 1e-13

    def test_length_one_antiderivative(self):
        h = h_e4()
        X, Y, w = 5.0, 3.0, 2
        a0 = 1 / 240
        t0, t1 = 1j, 2 + 3j
        got = ei.i_infinity(h, t0, t1, (X, Y), 1).coeff((0,))
        want = a0 * ((X - Y * t1) ** (w + 1) - (X - Y * t0) ** (w + 1)) / (-(w + 1) * Y)
        assert abs(got - want) < 1e-13

    def test_symbolic_matches_numeric(self):
        h = h_pair()
        X, Y = 3.0, 2.0
        sym = ei.i_infinity(h, 1j, 0.5 + 2j, None, 2)
        num = ei.i_infinity(h, 1j, 0.5 + 2j, (X, Y), 2)
        for w in set(sym.coeffs) | set(num.coeffs):
            assert abs(sym.coeff(w).evaluate(X, Y) - num.coeff(w)) < 1e-11

    def test_cusp_forms_contribute_nothing(self):
        h = h_delta()
        out = ei.i_infinity(h, 1j, 5j, (2.0, 1.0), 2)
        assert out == TruncSeries.one(h.alphabet, 2, COMPLEX)


class TestINumeric:
    def test_equal_endpoints(self):
        h = h_e4()
        assert ei.i_numeric(h, 1j, 1j, (2.0, 1.0), CFG) == TruncSeries.one(h.alphabet, 2, COMPLEX)

    def test_composition(self):
        h = h_e4()
        xy = (2.0, 1.0)
        a, b, c = 0.3 + 0.9j, -0.2 + 1.7j, 0.5 + 2.5j
        lhs = ei.i_numeric(h, a, b, xy, CFG) * ei.i_numeric(h, b, c, xy, CFG)
        rhs = ei.i_numeric(h, a, c, xy, CFG)
        assert lhs.max_abs_diff(rhs) < 1e-10

    def test_inverse_path(self):
        h = h_pair()
        xy = (2.0, 1.0)
        fwd = ei.i_numeric(h, 0.5j, 1 + 2j, xy, CFG)
        back = ei.i_numeric(h, 1 + 2j, 0.5j, xy, CFG)
        assert (fwd * back).max_abs_diff(TruncSeries.one(h.alphabet, 2, COMPLEX)) < 1e-10

    def test_grouplike(self):
        h = h_pair()
        out = ei.i_numeric(h, 0.5j, 1 + 2j, (2.0, 1.0), CFG)
        assert out.is_grouplike(1e-10).ok

    def test_rejects_lower_half_plane(self):
        h = h_e4()
        with pytest.raises(ValueError):
            ei.i_numeric(h, 1j, 1 - 1j, (2.0, 1.0), CFG)


class TestRegToCusp:
    def test_length_zero_is_one(self):
        out = ei.reg_to_cusp(h_pair(), 1j, Fraction(0), (2.0, 1.0), CFG)
        assert out.coeff(()) == 1

    def test_cusp_form_termwise_oracle(self):
        # a0 = 0 so I_inf = 1 and the value is the plain improper integral,
        # computed independently by termwise closed-form antiderivatives
        h = h_delta()
        cfg = ei.IntegratorConfig(trunc=1)
        X, Y, w = 3.0, 2.0, 10
        tau0 = 1j
        got = ei.reg_to_cusp(h, tau0, Fraction(0), (X, Y), cfg).coeff((0,))
        pre = [math.comb(w, j) * (X - Y * tau0) ** (w - j) * (-1j * Y) ** j * math.factorial(j)
               for j in range(w + 1)]
        want = 0j
        for n in range(1, 60):
            an = mf.delta_coeff(n)
            c = 2 * math.pi * n
            want += an * cmath.exp(2j * math.pi * n * tau0) * sum(pre[j] / c ** (j + 1) for j in range(w + 1))
        want *= 1j
        assert abs(got - want) < 1e-11

    def test_doubling_decay_rate(self):
        # truncated-at-T values converge like exp(-2 pi T)
        h = h_delta()
        cfg = ei.IntegratorConfig(trunc=1)
        xy = (2.0, 1.0)

        def partial(t):
            return ei.i_numeric(h, 1j, t * 1j, xy, cfg)

        d1 = partial(2.0).max_abs_diff(partial(4.0))
        d2 = partial(4.0).max_abs_diff(partial(8.0))
        # exp(-2 pi T) decay, against the polynomial growth of (X - Y t)^(w+1)
        assert d2 < d1 * math.exp(-2 * math.pi * 2) * 2 ** 12

    def test_direction_enters_only_through_i_inf(self):
        h = h_pair()
        xy = (2.0, 1.0)
        r0 = ei.reg_to_cusp(h, 1j, Fraction(0), xy, CFG)
        r1 = ei.reg_to_cusp(h, 1j, Fraction(1, 2), xy, CFG)
        bridge = ei.i_infinity(h, 0.0, 0.5, xy, 2)
        assert (r0 * bridge).max_abs_diff(r1) < 1e-11


class TestPullback:
    def test_identity(self):
        h = h_pair()
        s = ei.i_infinity(h, 1j, 2j, None, 2)
        out = ei.pullback((1, 0, 0, 1), s)
        X, Y = 2.0, 3.0
        for w in s.coeffs:
            assert abs(out.coeff(w).evaluate(X, Y) - s.coeff(w).evaluate(X, Y)) < 1e-14

    def test_S_swaps(self):
        h = h_pair()
        s = ei.i_infinity(h, 1j, 2j, None, 2)
        out = ei.pullback((0, -1, 1, 0), s)
        X, Y = 2.0, 3.0
        for w in s.coeffs:
            assert abs(out.coeff(w).evaluate(X, Y) - s.coeff(w).evaluate(-Y, X)) < 1e-12

    def test_T_translates(self):
        h = h_pair()
        s = ei.i_infinity(h, 1j, 2j, None, 2)
        out = ei.pullback((1, 1, 0, 1), s)
        X, Y = 2.0, 3.0
        for w in s.coeffs:
            assert abs(out.coeff(w).evaluate(X, Y) - s.coeff(w).evaluate(X + Y, Y)) < 1e-12

    def test_numeric_mode_rejected(self):
        h = h_pair()
        s = ei.i_infinity(h, 1j, 2j, (2.0, 1.0), 2)
        with pytest.raises(ValueError):
            ei.pullback((1, 1, 0, 1), s)


class TestFullIntegral:
    def test_matches_build_D(self):
        h = h_pair()
        p, q = 3, 2
        tb0 = ei.TangentialBasePoint(Fraction(q, p), INF)
        tb1 = ei.TangentialBasePoint(INF, Fraction(q, p))
        fi = ei.full_integral(h, tb0, tb1, (p, q), CFG)
        assert fi.max_abs_diff(ei.build_D(h, p, q, CFG)) < 1e-12

    def test_matches_build_F_through_cusp_zero_chart(self):
        h = h_pair()
        p, q = 3, 2
        tb0 = ei.TangentialBasePoint(Fraction(q, p), INF)
        tb1 = ei.TangentialBasePoint(Fraction(q, p), Fraction(0))
        fi = ei.full_integral(h, tb0, tb1, (p, q), CFG)
        assert fi.max_abs_diff(ei.build_F(h, p, q, CFG)) < 1e-12

    def test_reverse_composes_to_one(self):
        h = h_pair()
        p, q = 3, 2
        tb0 = ei.TangentialBasePoint(Fraction(q, p), INF)
        tb1 = ei.TangentialBasePoint(INF, Fraction(q, p))
        fwd = ei.full_integral(h, tb0, tb1, (p, q), CFG)
        back = ei.full_integral(h, tb1, tb0, (p, q), CFG)
        assert (fwd * back).max_abs_diff(TruncSeries.one(h.alphabet, 2, COMPLEX)) < 1e-12

    def test_tau1_independence(self):
        h = h_pair()
        p, q = 3, 2
        tb0 = ei.TangentialBasePoint(Fraction(q, p), INF)
        tb1 = ei.TangentialBasePoint(INF, Fraction(q, p))
        base = ei.full_integral(h, tb0, tb1, (p, q), CFG)
        for tau1 in (1.5j, 0.4 + 1.2j):
            alt = ei.full_integral(h, tb0, tb1, (p, q), CFG, tau1=tau1)
            assert base.max_abs_diff(alt) < 1e-9

    def test_modular_property_at_T(self):
        # I(T tau, ->T(s) at T(inf)) slashed by T equals I(tau, ->s at inf)
        h = h_pair()
        X, Y = 2.0, 3.0
        lhs = ei.reg_to_cusp(h, 0.3 + 1.1j, Fraction(1, 3), (X + Y, Y), CFG)
        rhs = ei.reg_to_cusp(h, -0.7 + 1.1j, Fraction(-2, 3), (X, Y), CFG)
        assert lhs.max_abs_diff(rhs) < 1e-9

    def test_gamma_choice_independence(self):
        h = h_pair()
        p, q = 3, 2
        r, s = mf._solve_unimodular(q, p)

        def build_with(r1, s1):
            assert q * s1 - p * r1 == 1
            head = ei.reg_to_cusp(h, 1j, Fraction(q, p), (complex(q), complex(p)), CFG)
            chart = (1.0 + 0j, 0j)
            bridge = ei._bridge(h, (s1, -r1, -p, q), chart, CFG)
            tail = ei.reg_to_cusp(h, 1j, Fraction(-s1, p), chart, CFG)
            return head.inverse() * bridge.inverse() * tail

        assert build_with(r, s).max_abs_diff(build_with(r + q, s + p)) < 1e-11


class TestBuilders:
    def test_E_components(self):
        h = h_pair()
        p, q = 3, 5
        e = ei.build_E(h, p, q, 2)
        a1 = 1 / 240
        a2 = -1 / 504
        assert abs(e.coeff((0,)) - a1 / (p * q)) < 1e-15
        assert abs(e.coeff((1,)) - a2 / (p * q)) < 1e-15
        assert abs(e.coeff((0, 1)) - a1 * a2 / (2 * (p * q) ** 2)) < 1e-16
        assert abs(e.coeff((0, 0)) - a1 ** 2 / (2 * (p * q) ** 2)) < 1e-16

    def test_cusp_only_E_is_one(self):
        h = h_delta()
        assert ei.build_E(h, 3, 5, 2) == TruncSeries.one(h.alphabet, 2, COMPLEX)

    def test_cusp_only_F_is_psi_of_D(self):
        h = h_delta()
        cfg = ei.IntegratorConfig(trunc=1)
        p, q = 2, 3
        f = ei.build_F(h, p, q, cfg)
        want = ei.build_D(h, p, q, cfg) * ei.build_D(h, -q, p, cfg).inverse()
        assert f.max_abs_diff(want) < 1e-10

    def test_delta_length1_orientation(self):
        # build_D runs from i-infinity down to the cusp; the closed form runs
        # up from the cusp, so the two agree after the orientation constant -1
        h = h_delta()
        cfg = ei.IntegratorConfig(trunc=1)
        for p, q in [(2, 3), (3, 2), (1, 2)]:
            b = ei.build_D(h, p, q, cfg).coeff((0,))
            c = mf.dedekind_symbol_length1(mf.delta_form(), p, q)
            assert abs(-b - c) < 1e-10

    def test_domain_errors(self):
        h = h_pair()
        with pytest.raises(DomainError):
            ei.build_D(h, 1, 0, CFG)
        with pytest.raises(DomainError):
            ei.build_E(h, 2, 4, 2)

    def test_F_length1_laurent_structure(self):
        # length-1 components fit Laurent polynomials over the degree box:
        # the associated function psi(D) carries the extra a_0/(pq) term,
        # which the E factor cancels exactly inside F
        from math import gcd

        h = h_e4()
        cfg = ei.IntegratorConfig(trunc=1)
        f_samples, m_samples = [], []
        for p in range(1, 7):
            n = 0
            for q in range(-6, 7):
                if q and gcd(p, q) == 1 and n < 6:
                    f_samples.append(((p, q), ei.build_F(h, p, q, cfg).coeff((0,))))
                    m = (ei.build_D(h, p, q, cfg) * ei.build_D(h, -q, p, cfg).inverse())
                    m_samples.append(((p, q), m.coeff((0,))))
                    n += 1
        homogeneous = {(-1, 3), (0, 2), (1, 1), (2, 0), (3, -1)}
        fit, residual = mf.laurent_fit(f_samples, ((-1, 3), (-1, 3)))
        assert residual < 1e-8
        assert set(fit.prune(1e-8).coeffs) == homogeneous
        fit_m, residual_m = mf.laurent_fit(m_samples, ((-1, 3), (-1, 3)))
        assert residual_m < 1e-8
        survivors_m = fit_m.prune(1e-8).coeffs
        assert set(survivors_m) == homogeneous | {(-1, -1)}
        assert abs(survivors_m[(-1, -1)] + 1 / 240) < 1e-8  # -a_0(E4): orientation -1


class TestOmegaInf:
    def test_constant_terms_only(self):
        h = h_pair()
        tau = 0.3 + 1.1j
        q, p = 3.0, 2.0
        out = ei.omega_inf(h, tau, (q, p))
        assert abs(out.coeff((0,)) - (1 / 240) * (q - p * tau) ** 2) < 1e-15
        assert abs(out.coeff((1,)) - (-1 / 504) * (q - p * tau) ** 4) < 1e-13

    def test_cusp_form_gives_zero(self):
        assert ei.omega_inf(h_delta(), 1j, (2.0, 1.0)).coeffs == {}


class TestTruncationThree:
    def test_reciprocity_identity_at_length_three(self):
        h = h_pair()
        cfg = ei.IntegratorConfig(trunc=3)
        p, q = 3, 2
        d = ei.build_D(h, p, q, cfg)
        assert d.is_grouplike(1e-9).ok
        lhs = d * ei.build_E(h, p, q, 3) * ei.build_D(h, -q, p, cfg).inverse()
        assert lhs.max_abs_diff(ei.build_F(h, p, q, cfg)) < 1e-9


class TestSL2Word:
    def test_reconstruction(self):
        import random

        rng = random.Random(3)
        for _ in range(30):
            mat = (1, 0, 0, 1)
            for _ in range(rng.randint(1, 6)):
                which = rng.choice(["T", "S"])
                step = (1, rng.randint(-3, 3), 0, 1) if which == "T" else (0, -1, 1, 0)
                mat = ei._mat_mul(mat, step)
            rebuilt = (1, 0, 0, 1)
            for kind, n in ei.sl2_word(mat):
                gen = (1, n, 0, 1) if kind == "T" else (0, -1, 1, 0)
                rebuilt = ei._mat_mul(rebuilt, gen)
            assert rebuilt == mat or rebuilt == tuple(-x for x in mat)

"""Regularized iterated Eichler integrals of level-one modular forms.

The series-valued connection form is

    Omega_h(tau) = sum_B B h(B) (X - Y tau)^w(B) dtau,

and I(a, b) denotes its Chen series along a path from a to b, so that
I(a,b) I(b,c) = I(a,c) and d/dtau I(tau, s) = -Omega(tau) I(tau, s).
Endpoints at cusps are regularized through tangential base points: the
value at the cusp i-infinity with direction datum s is

    I(tau, s at inf) = lim_{eps -> i inf} I(tau, eps) I_inf(eps, s),

where I_inf uses the constant Fourier terms only.  The limit is computed
without catastrophic cancellation by propagating RI(tau, eps) =
I(tau, eps) I_inf(eps, tau), which satisfies the ordinary differential
equation RI' = RI * Theta with the conjugated cuspidal form

    Theta(eps) = I_inf(tau, eps) (Omega - Omega_inf)(eps) I_inf(eps, tau)

whose coefficients decay like exp(-2 pi Im eps).  Rational cusps are
reached through the unimodular change of chart gamma(inf) = cusp, which
acts on the numeric evaluation point (X, Y) linearly; bridges between
charts are decomposed into unit horizontal segments at height one so that
no quadrature ever runs near the real axis.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from math import comb, gcd

import numpy as np

from .errors import DomainError, NonConvergence
from .modforms import LaurentPoly, _solve_unimodular, form_value
from .series import COMPLEX, POLY, Alphabet, TruncSeries

INF = float("inf")

_S_MAT = (0, -1, 1, 0)
_ID_MAT = (1, 0, 0, 1)


# ---------------------------------------------------------------------------
# Assignments of modular forms to words

class HAssignment:
    """Map from nonempty words to level-one modular forms.

    The form attached to a word B must have weight w(B) + 2.  Assigning
    forms only to single letters gives the usual case; longer words are
    allowed and simply contribute extra terms to the connection form.
    """

    def __init__(self, alphabet, forms):
        self.alphabet = alphabet
        self.forms = {}
        for word, form in forms.items():
            w = alphabet.word(word)
            if not w:
                raise ValueError("cannot assign a form to the empty word")
            if form.level != 1:
                raise ValueError("iterated integrals are implemented for level-one forms")
            need = alphabet.word_weight(w) + 2
            if form.weight != need:
                raise ValueError(f"word {alphabet.word_name(w)!r} needs weight {need}, got {form.weight}")
            self.forms[w] = form

    @classmethod
    def letters(cls, assignments):
        """Build alphabet and assignment from {letter_name: form}; letter
        weights are inferred as form weight - 2."""
        alphabet = Alphabet((name, form.weight - 2) for name, form in assignments.items())
        return cls(alphabet, {name: form for name, form in assignments.items()})

    def form(self, word):
        return self.forms.get(self.alphabet.word(word))

    def words(self):
        return sorted(self.forms, key=lambda w: (len(w), w))

    def constant_terms(self):
        return {w: complex(f.coeff(0)) for w, f in self.forms.items()}


@dataclass(frozen=True)
class TangentialBasePoint:
    """Tangential base point written ->base_direction: the point sits at the
    cusp ``direction`` (the subscript) and ``base`` is the rational datum
    fixing the regularization branch."""

    base: object
    direction: object

    def __post_init__(self):
        for v in (self.base, self.direction):
            if v != INF and not isinstance(v, (int, Fraction)):
                raise ValueError("tangential data must be rational or infinity")
        if self.base == self.direction:
            raise ValueError("base and direction must differ")


@dataclass(frozen=True)
class IntegratorConfig:
    trunc: int = 2
    tol: float = 1e-10          # acceptance tolerance for the height doubling
    quad_tol: float = 5e-13     # panel acceptance tolerance
    t0: float = 4.0
    t_cap: float = 64.0
    nodes: int = 16
    max_depth: int = 12
    fourier_tol: float = 1e-16

    def with_trunc(self, trunc):
        return replace(self, trunc=trunc)


# ---------------------------------------------------------------------------
# Scalar polynomial helpers (coefficients are complex numbers or LaurentPoly)

def _poly_mul(u, v):
    out = [0] * (len(u) + len(v) - 1)
    for i, ui in enumerate(u):
        if ui == 0:
            continue
        for j, vj in enumerate(v):
            if vj == 0:
                continue
            out[i + j] = out[i + j] + ui * vj
    return out


def _poly_antideriv(u):
    return [0] + [c / (k + 1) for k, c in enumerate(u)]


def _poly_eval(u, x):
    acc = 0
    for c in reversed(u):
        acc = acc * x + c
    return acc


def _xy_factor_poly(X, Y, w):
    """(X - Y t)^w as a polynomial in t."""
    return [comb(w, k) * X ** (w - k) * (-Y) ** k if k else X ** w for k in range(w + 1)]


# ---------------------------------------------------------------------------
# Exact iterated integrals of the constant-term form

def _i_inf_polys(h, tau0, xy, trunc):
    """Per-word polynomials M_W(t) with I_inf(tau0, t) = sum M_W(t) W.

    Exact antiderivative recursion; coefficients are complex for numeric
    (X, Y) and LaurentPoly for the symbolic mode (xy None).
    """
    if xy is None:
        X, Y = LaurentPoly.monomial(1, 0), LaurentPoly.monomial(0, 1)
        one = LaurentPoly.const(1.0)
    else:
        X, Y = complex(xy[0]), complex(xy[1])
        one = 1.0 + 0j
    g = {}
    for w, a0 in h.constant_terms().items():
        if len(w) <= trunc and a0 != 0:
            g[w] = [a0 * c for c in _xy_factor_poly(X, Y, h.alphabet.word_weight(w))]
    polys = {(): [one]}
    for word in h.alphabet.iter_words(trunc, min_len=1):
        rhs = [0]
        for k in range(1, len(word) + 1):
            tail = word[len(word) - k:]
            if tail in g and word[: len(word) - k] in polys:
                rhs = _poly_add(rhs, _poly_mul(polys[word[: len(word) - k]], g[tail]))
        prim = _poly_antideriv(rhs)
        prim[0] = prim[0] - _poly_eval(prim, tau0)
        polys[word] = prim
    return polys


def _poly_add(u, v):
    if len(u) < len(v):
        u, v = v, u
    out = list(u)
    for k, c in enumerate(v):
        out[k] = out[k] + c
    return out


def i_infinity(h, tau0, tau1, xy=None, trunc=2):
    """I_inf(tau0, tau1): iterated integrals of the constant-term form.

    Polynomial in the endpoints, hence valid anywhere in the plane and
    path-independent; used by the cusp regularization.
    """
    polys = _i_inf_polys(h, complex(tau0), xy, trunc)
    kind = POLY if xy is None else COMPLEX
    coeffs = {w: _poly_eval(p, complex(tau1)) for w, p in polys.items()}
    return TruncSeries(h.alphabet, trunc, coeffs, kind)


# ---------------------------------------------------------------------------
# Numeric Chen transfer along straight segments

_NODE_CACHE = {}


def _node_matrices(n):
    got = _NODE_CACHE.get(n)
    if got is None:
        x, w = np.polynomial.legendre.leggauss(n)
        V = np.polynomial.legendre.legvander(x, n)
        A = V[:, :n]
        B = np.zeros((n, n))
        B[:, 0] = x + 1.0
        for k in range(1, n):
            B[:, k] = (V[:, k + 1] - V[:, k - 1]) / (2 * k + 1)
        S = 0.5 * (B @ np.linalg.inv(A))      # cumulative integral, [0,1] scale
        got = ((x + 1.0) / 2.0, w / 2.0, S)
        _NODE_CACHE[n] = got
    return got


_FORM_VALUES = {}


def _fval(form, z, tol=1e-16):
    key = (form, z, tol)
    v = _FORM_VALUES.get(key)
    if v is None:
        v = form_value(form, z, tol)
        _FORM_VALUES[key] = v
    return v


def _series_from(h, coeffs, trunc):
    return TruncSeries(h.alphabet, trunc, coeffs, COMPLEX)


def _series_scale(series):
    # panel acceptance is relative to the largest transfer coefficient
    return max((abs(c) for w, c in series.coeffs.items() if w), default=0.0) + 1.0


def _transfer_from_values(h, vals, cfg):
    """Chen transfer of one panel from per-word 1-form values at the nodes.

    vals: {word: complex ndarray over nodes}, already including the
    d tau / d u jacobian.  Returns the transfer as a TruncSeries.
    """
    u, w, S = _node_matrices(cfg.nodes)
    n = cfg.nodes
    M = {(): np.ones(n, dtype=complex)}
    end = {(): 1.0 + 0j}
    for word in h.alphabet.iter_words(cfg.trunc, min_len=1):
        rhs = np.zeros(n, dtype=complex)
        hit = False
        for k in range(1, len(word) + 1):
            head, tail = word[: len(word) - k], word[len(word) - k:]
            if tail in vals and head in M:
                rhs += M[head] * vals[tail]
                hit = True
        if hit:
            M[word] = S @ rhs
            end[word] = w @ rhs
        else:
            M[word] = np.zeros(n, dtype=complex)
    return _series_from(h, end, cfg.trunc)


def _omega_values(h, points, xy, jac, cfg):
    X, Y = complex(xy[0]), complex(xy[1])
    vals = {}
    for word, form in h.forms.items():
        if len(word) > cfg.trunc:
            continue
        wt = h.alphabet.word_weight(word)
        vals[word] = np.array([_fval(form, z, cfg.fourier_tol) * (X - Y * z) ** wt * jac for z in points])
    return vals


def _chen_straight(h, z0, z1, xy, cfg, depth=0):
    """Adaptive Chen transfer I(z0, z1) along the straight segment."""
    u, _, _ = _node_matrices(cfg.nodes)

    def panel(a, b):
        jac = b - a
        pts = [a + jac * uj for uj in u]
        return _transfer_from_values(h, _omega_values(h, pts, xy, jac, cfg), cfg)

    whole = panel(z0, z1)
    mid = (z0 + z1) / 2
    comp = panel(z0, mid) * panel(mid, z1)
    if whole.max_abs_diff(comp) <= cfg.quad_tol * _series_scale(comp):
        return comp
    if depth >= cfg.max_depth:
        raise NonConvergence(f"panel refinement exhausted between {z0:.3g} and {z1:.3g}")
    return (_chen_straight(h, z0, mid, xy, cfg, depth + 1)
            * _chen_straight(h, mid, z1, xy, cfg, depth + 1))


def omega(h, tau, xy=None, trunc=2):
    """The connection form coefficient at tau: word B reads h(B)(tau) (X - Y tau)^w(B)."""
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    if xy is None:
        X, Y = LaurentPoly.monomial(1, 0), LaurentPoly.monomial(0, 1)
        kind = POLY
    else:
        X, Y = complex(xy[0]), complex(xy[1])
        kind = COMPLEX
    coeffs = {}
    for word, form in h.forms.items():
        if len(word) > trunc:
            continue
        wt = h.alphabet.word_weight(word)
        coeffs[word] = _fval(form, tau) * (X - Y * tau) ** wt
    return TruncSeries(h.alphabet, trunc, coeffs, kind)


def omega_inf(h, tau, xy=None, trunc=2):
    """The constant-term variant: word B reads a_0(h(B)) (X - Y tau)^w(B)."""
    if xy is None:
        X, Y = LaurentPoly.monomial(1, 0), LaurentPoly.monomial(0, 1)
        kind = POLY
    else:
        X, Y = complex(xy[0]), complex(xy[1])
        kind = COMPLEX
    tau = complex(tau)
    coeffs = {}
    for word, a0 in h.constant_terms().items():
        if len(word) <= trunc and a0 != 0:
            coeffs[word] = a0 * (X - Y * tau) ** h.alphabet.word_weight(word)
    return TruncSeries(h.alphabet, trunc, coeffs, kind)


def i_numeric(h, tau0, tau1, xy, cfg=IntegratorConfig()):
    """Chen series I(tau0, tau1) along the straight segment, numeric (X, Y)."""
    tau0, tau1 = complex(tau0), complex(tau1)
    if tau0.imag <= 0 or tau1.imag <= 0:
        raise ValueError("endpoints must lie in the open upper half-plane")
    if tau0 == tau1:
        return TruncSeries.one(h.alphabet, cfg.trunc, COMPLEX)
    return _chen_straight(h, tau0, tau1, xy, cfg)


# ---------------------------------------------------------------------------
# Regularization at the cusp i-infinity

def _ri_limit(h, tau, xy, cfg):
    """RI(tau, i inf) = lim I(tau, eps) I_inf(eps, tau), via the conjugated
    cuspidal form; heights double from t0 until the result is stable."""
    tau = complex(tau)
    polys = _i_inf_polys(h, tau, xy, cfg.trunc)
    X, Y = complex(xy[0]), complex(xy[1])
    cusp_words = [(w, f, h.alphabet.word_weight(w), complex(f.coeff(0)))
                  for w, f in h.forms.items() if len(w) <= cfg.trunc]

    def theta_values(points, jac):
        per_node = []
        for z in points:
            s_inf = _series_from(h, {w: _poly_eval(p, z) for w, p in polys.items()}, cfg.trunc)
            cusp = _series_from(h, {w: (_fval(f, z, cfg.fourier_tol) - a0) * (X - Y * z) ** wt
                                    for w, f, wt, a0 in cusp_words}, cfg.trunc)
            per_node.append(s_inf * cusp * s_inf.inverse())
        out = {}
        for word in h.alphabet.iter_words(cfg.trunc, min_len=1):
            col = np.array([ser.coeff(word) for ser in per_node])
            if np.any(col):
                out[word] = col * jac
        return out

    def theta_transfer(y0, y1, depth=0):
        u, _, _ = _node_matrices(cfg.nodes)

        def panel(a, b):
            jac = 1j * (b - a)
            pts = [complex(tau.real, a + (b - a) * uj) for uj in u]
            return _transfer_from_values(h, theta_values(pts, jac), cfg)

        whole = panel(y0, y1)
        mid = (y0 + y1) / 2
        comp = panel(y0, mid) * panel(mid, y1)
        if whole.max_abs_diff(comp) <= cfg.quad_tol * _series_scale(comp):
            return comp
        if depth >= cfg.max_depth:
            raise NonConvergence(f"panel refinement exhausted on heights [{y0:.3g}, {y1:.3g}]")
        return theta_transfer(y0, mid, depth + 1) * theta_transfer(mid, y1, depth + 1)

    t = max(cfg.t0, 2.0 * tau.imag)
    ri = theta_transfer(tau.imag, t)
    while True:
        step = theta_transfer(t, 2.0 * t)
        nxt = ri * step
        if nxt.max_abs_diff(ri) <= cfg.tol * _series_scale(nxt):
            return nxt
        ri = nxt
        t *= 2.0
        if t > cfg.t_cap:
            raise NonConvergence(f"height doubling did not stabilize below T = {cfg.t_cap}")


def reg_to_cusp(h, tau, direction, xy, cfg=IntegratorConfig()):
    """I(tau, ->direction_inf): regularized integral from tau in the upper
    half-plane to the tangential base point at i-infinity."""
    direction = Fraction(direction)
    return _ri_limit(h, tau, xy, cfg) * i_infinity(h, tau, float(direction), xy, cfg.trunc)


# ---------------------------------------------------------------------------
# Charts at rational cusps

def _mat_mul(m, n):
    a, b, c, d = m
    e, f, g, k = n
    return (a * e + b * g, a * f + b * k, c * e + d * g, c * f + d * k)


def _mat_inv(m):
    a, b, c, d = m
    return (d, -b, -c, a)


def _mat_apply_xy(m, xy):
    a, b, c, d = m
    X, Y = xy
    return (a * X + b * Y, c * X + d * Y)


def _mat_mobius(m, z):
    a, b, c, d = m
    if z == INF:
        return INF if c == 0 else Fraction(a, c)
    z = Fraction(z)
    den = c * z + d
    if den == 0:
        return INF
    return (a * z + b) / den


def sl2_word(m):
    """Decompose an SL2(Z) matrix as T^{n1} S T^{n2} S ... T^{nk} up to sign.

    Both generators act trivially on our even-weight coefficients when
    negated, so the sign is irrelevant to the integrals.
    """
    a, b, c, d = m
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    out = []
    while c != 0:
        n = round(Fraction(a, c))
        out.append(("T", n))
        out.append(("S", 0))
        # m = T^n S m'  =>  m' = S^{-1} T^{-n} m
        a, b, c, d = c, d, n * c - a, n * d - b
    out.append(("T", a * b))
    return out


def pullback(mat, series):
    """Substitute (X, Y) -> (a X + b Y, c X + d Y) in the coefficients of a
    symbolic-mode series."""
    if series.kind != POLY:
        raise ValueError("pullback needs a symbolic-polynomial series")
    a, b, c, d = mat
    sub = ((a, b), (c, d))
    out = {w: coef.subs_linear(sub) for w, coef in series.coeffs.items()}
    return TruncSeries(series.alphabet, series.trunc, out, POLY)


def _bridge(h, mat, xy, cfg):
    """I(i, mat(i)) at the numeric point xy, as a product of unit horizontal
    transfers at height one (S steps fix i and cost nothing)."""
    acc = TruncSeries.one(h.alphabet, cfg.trunc, COMPLEX)
    cur = _ID_MAT
    for kind, n in sl2_word(mat):
        if kind == "S":
            cur = _mat_mul(cur, _S_MAT)
            continue
        step = 1 if n > 0 else -1
        t_step = (1, step, 0, 1)
        for _ in range(abs(n)):
            v = _mat_apply_xy(_mat_inv(cur), xy)
            acc = acc * _chen_straight(h, 1j, 1j + step, v, cfg)
            cur = _mat_mul(cur, t_step)
    return acc


def _piece_to_tangential(h, tau1, tb, xy, cfg):
    """I(tau1, tb) at the numeric point xy = (X, Y)."""
    loc = tb.direction
    if loc == INF:
        return reg_to_cusp(h, tau1, tb.base, xy, cfg)
    loc = Fraction(loc)
    gam = _gamma_for_cusp(loc.numerator, loc.denominator)
    return _piece_via_chart(h, tau1, gam, tb.base, xy, cfg)


def _gamma_for_cusp(cn, cd):
    r, s = _solve_unimodular(cn, cd)
    return (cn, r, cd, s)


def _piece_via_chart(h, tau1, gam, direction, xy, cfg):
    # I(tau1, ->direction_cusp) = I(sigma, ->u_inf) at gamma^{-1} xy, where
    # sigma = gamma^{-1} tau1 and u = gamma^{-1} direction; the leg from
    # sigma to the chart anchor i goes through the generator bridge.
    inv = _mat_inv(gam)
    u = _mat_mobius(inv, direction)
    if u == INF:
        raise DomainError("tangential direction coincides with the cusp")
    v = _mat_apply_xy(inv, (complex(xy[0]), complex(xy[1])))
    tail = reg_to_cusp(h, 1j, u, v, cfg)
    sigma = _mat_mobius_c(inv, complex(tau1))
    if abs(sigma - 1j) < 1e-15:
        head = TruncSeries.one(h.alphabet, cfg.trunc, COMPLEX)
    elif complex(tau1) == 1j:
        # sigma = gamma^{-1}(i): reach the anchor through generator bridges
        head = _bridge(h, inv, v, cfg).inverse()
    else:
        head = i_numeric(h, sigma, 1j, v, cfg)
    return head * tail


def _mat_mobius_c(m, z):
    a, b, c, d = m
    return (a * z + b) / (c * z + d)


def full_integral(h, tb0, tb1, pair, cfg=IntegratorConfig(), tau1=1j):
    """I(tb0, tb1) between two tangential base points, at (X, Y) = (q, p)."""
    p, q = pair
    xy = (complex(q), complex(p))
    left = _piece_to_tangential(h, tau1, tb0, xy, cfg)
    right = _piece_to_tangential(h, tau1, tb1, xy, cfg)
    return left.inverse() * right


# ---------------------------------------------------------------------------
# The three constructors

def _validate_pair(p, q):
    p, q = int(p), int(q)
    if gcd(p, q) != 1:
        raise DomainError(f"({p}, {q}) is not coprime")
    if p * q == 0:
        raise DomainError("constructors need pq != 0")
    return p, q


def build_D(h, p, q, cfg=IntegratorConfig()):
    """The symbol series: I from ->(q/p) at i-infinity to ->inf at q/p, at (X,Y)=(q,p).

    The cusp-side piece is computed entirely in the chart gamma(inf) = q/p
    with gamma = [[q, r], [p, s]], where the numeric point pulls back to
    (1, 0) exactly.
    """
    p, q = _validate_pair(p, q)
    xy = (complex(q), complex(p))
    head = reg_to_cusp(h, 1j, Fraction(q, p), xy, cfg)
    r, s = _solve_unimodular(q, p)
    gam_inv = (s, -r, -p, q)
    u = Fraction(-s, p)
    chart_xy = (1.0 + 0j, 0j)
    bridge = _bridge(h, gam_inv, chart_xy, cfg)
    tail = reg_to_cusp(h, 1j, u, chart_xy, cfg)
    return head.inverse() * bridge.inverse() * tail


def build_F(h, p, q, cfg=IntegratorConfig()):
    """The reciprocity series: I from ->(q/p) at i-infinity to ->(q/p) at 0.

    The cusp-zero chart is gamma = S, which fixes the anchor i, so no
    bridge is needed; the numeric point pulls back to (p, -q).
    """
    p, q = _validate_pair(p, q)
    xy = (complex(q), complex(p))
    head = reg_to_cusp(h, 1j, Fraction(q, p), xy, cfg)
    tail = reg_to_cusp(h, 1j, Fraction(-p, q), (complex(p), complex(-q)), cfg)
    return head.inverse() * tail


def build_E(h, p, q, trunc=2):
    """exp(sum_letters A_i a_0(h(A_i)) / (p q)): the constant-term correction."""
    p, q = _validate_pair(p, q)
    coeffs = {}
    for i, name in enumerate(h.alphabet.names):
        form = h.form((i,))
        if form is not None:
            a0 = complex(form.coeff(0))
            if a0:
                coeffs[(i,)] = a0 / (p * q)
    return TruncSeries(h.alphabet, trunc, coeffs, COMPLEX).exp()


def symbol_fn(h, cfg=IntegratorConfig()):
    """Wrap build_D as a SymbolFn evaluator (memoized per pair)."""
    from .symbols import SymbolFn

    return SymbolFn(lambda p, q: build_D(h, p, q, cfg), h.alphabet, cfg.trunc,
                    COMPLEX, almost=True, name="D_h")


def clear_caches():
    _FORM_VALUES.clear()

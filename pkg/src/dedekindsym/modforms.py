"""Closed-form number-theoretic oracles.

Bernoulli numbers, divisor sums, Fourier coefficients of Eisenstein series
and of the discriminant cusp form, polylogarithms and Hurwitz zeta via
Euler-Maclaurin, the regularized weight-2k period integral of a level-one
modular form, the Eisenstein reciprocity law, the double-sum pieces S2/S3,
and the closed forms for the second Eisenstein series on Gamma_0(2).
"""

import cmath
import math
from collections import namedtuple
from fractions import Fraction
from math import comb, factorial, gcd

import numpy as np

from .errors import DomainError, NonConvergence

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Bernoulli numbers and polynomials

_BERNOULLI = [Fraction(1)]


def bernoulli(n):
    """B_n as an exact rational, with the B_1 = -1/2 convention."""
    if n < 0:
        raise ValueError("n must be >= 0")
    while len(_BERNOULLI) <= n:
        m = len(_BERNOULLI)
        # B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k
        acc = sum(Fraction(comb(m + 1, k)) * _BERNOULLI[k] for k in range(m))
        _BERNOULLI.append(-acc / (m + 1))
    return _BERNOULLI[n]


def bernoulli_poly(n, x):
    """B_n(x) = sum_k C(n,k) B_k x^(n-k); exact when x is rational."""
    x = Fraction(x) if not isinstance(x, Fraction) else x
    return sum(Fraction(comb(n, k)) * bernoulli(k) * x ** (n - k) for k in range(n + 1))


# ---------------------------------------------------------------------------
# Divisor sums and Fourier coefficients

def sigma(k, n):
    """Divisor power sum sigma_k(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d ** k
            e = n // d
            if e != d:
                total += e ** k
        d += 1
    return total


def eisenstein_coeff(k2, n):
    """Fourier coefficient of the Hecke-normalized Eisenstein series of weight 2k."""
    if k2 < 4 or k2 % 2:
        raise ValueError("weight must be an even integer >= 4")
    if n == 0:
        return -bernoulli(k2) / (2 * k2)
    return Fraction(sigma(k2 - 1, n))


_DELTA_COEFFS = [0, 1]


def _eta24(n_max):
    # q-expansion of prod (1-q^n)^24 up to q^n_max, via the pentagonal series
    e = [0] * (n_max + 1)
    e[0] = 1
    k = 1
    while k * (3 * k - 1) // 2 <= n_max:
        for m in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if m <= n_max:
                e[m] += (-1) ** k
        k += 1

    def polymul(u, v):
        out = [0] * (n_max + 1)
        for i, ui in enumerate(u):
            if ui:
                for j, vj in enumerate(v[: n_max + 1 - i]):
                    if vj:
                        out[i + j] += ui * vj
        return out

    e2 = polymul(e, e)
    e4 = polymul(e2, e2)
    e8 = polymul(e4, e4)
    e16 = polymul(e8, e8)
    return polymul(e16, e8)


def delta_coeff(n):
    """Ramanujan tau(n), from the truncated product expansion of q*prod(1-q^m)^24."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n >= len(_DELTA_COEFFS):
        n_max = max(2 * n, 64)
        e24 = _eta24(n_max)
        _DELTA_COEFFS[:] = [0] + e24[:n_max]  # tau(m) = coeff of q^(m-1)
    return _DELTA_COEFFS[n]


def load_coefficient_cache(directory):
    """Warm the tau table from directory/tau.json if present."""
    import json
    import os

    path = os.path.join(directory, "tau.json")
    if os.path.exists(path):
        with open(path) as fh:
            stored = json.load(fh)
        if len(stored) > len(_DELTA_COEFFS):
            _DELTA_COEFFS[:] = stored


def save_coefficient_cache(directory):
    import json
    import os

    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "tau.json"), "w") as fh:
        json.dump(_DELTA_COEFFS, fh)


# ---------------------------------------------------------------------------
# Modular form descriptors

class ModularFormSpec:
    """A form descriptor with an exact Fourier-coefficient provider.

    kinds: "eisenstein" (level 1, Hecke normalized), "cusp_delta",
    "eisenstein_gamma02" (the second Eisenstein series for Gamma_0(2),
    supported on even q-powers).
    """

    __slots__ = ("kind", "weight", "name", "_cache")

    def __init__(self, kind, weight, name):
        self.kind = kind
        self.weight = weight
        self.name = name
        self._cache = {}

    def __eq__(self, other):
        return isinstance(other, ModularFormSpec) and (self.kind, self.weight) == (other.kind, other.weight)

    def __hash__(self):
        return hash((self.kind, self.weight))

    def __repr__(self):
        return f"ModularFormSpec({self.name})"

    @property
    def level(self):
        return 2 if self.kind == "eisenstein_gamma02" else 1

    @property
    def is_cusp(self):
        return self.kind == "cusp_delta"

    def coeff(self, n):
        c = self._cache.get(n)
        if c is None:
            if self.kind == "eisenstein":
                c = eisenstein_coeff(self.weight, n)
            elif self.kind == "cusp_delta":
                c = Fraction(delta_coeff(n)) if n else Fraction(0)
            else:  # gamma02 second form: a_0 and even powers only
                if n == 0:
                    c = -bernoulli(self.weight) / (2 * self.weight)
                elif n % 2:
                    c = Fraction(0)
                else:
                    c = Fraction(sigma(self.weight - 1, n // 2))
            self._cache[n] = c
        return c


def eisenstein(k2):
    if k2 < 4 or k2 % 2:
        raise ValueError("weight must be an even integer >= 4")
    return ModularFormSpec("eisenstein", k2, f"E{k2}")


def delta_form():
    return ModularFormSpec("cusp_delta", 12, "Delta")


def eisenstein_gamma02(k2):
    if k2 < 4 or k2 % 2:
        raise ValueError("weight must be an even integer >= 4")
    return ModularFormSpec("eisenstein_gamma02", k2, f"E{k2},2")


_FORM_NAMES = {"E4": lambda: eisenstein(4), "E6": lambda: eisenstein(6),
               "E8": lambda: eisenstein(8), "E10": lambda: eisenstein(10),
               "E12": lambda: eisenstein(12), "E14": lambda: eisenstein(14),
               "Delta": delta_form}


def form_by_name(name):
    """Resolve names like E4, E6, Delta, E6,2 to descriptors."""
    if name in _FORM_NAMES:
        return _FORM_NAMES[name]()
    if name.startswith("E") and name.endswith(",2"):
        return eisenstein_gamma02(int(name[1:-2]))
    if name.startswith("E"):
        return eisenstein(int(name[1:]))
    raise ValueError(f"unknown modular form name {name!r}")


# ---------------------------------------------------------------------------
# Evaluation of level-one forms anywhere in the upper half-plane

def sl2_reduce(tau):
    """Move tau into the standard fundamental domain.

    Returns (tau_reduced, (c, d)) where tau_reduced = g(tau) and (c, d) is
    the bottom row of g, so that f(tau) = f(tau_reduced) * (c tau + d)^(-k).
    """
    z = complex(tau)
    if z.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    a, b, c, d = 1, 0, 0, 1
    for _ in range(10_000):
        n = round(z.real)
        if n:
            z -= n
            a, b = a - n * c, b - n * d
        if abs(z) < 1.0 - 1e-14:
            z = -1.0 / z
            a, b, c, d = -c, -d, a, b
        else:
            return z, (c, d)
    raise NonConvergence("fundamental-domain reduction did not terminate")


def _fourier_sum(form, z, tol=1e-16, cap=600, cusp_only=False):
    # q-series at a point with Im z large enough that it converges quickly
    q = cmath.exp(2j * math.pi * z)
    qn = 1.0 + 0j
    total = 0j if cusp_only else complex(form.coeff(0))
    absq = abs(q)
    for n in range(1, cap + 1):
        qn *= q
        a = float(form.coeff(n))
        total += a * qn
        # crude tail bound: coefficients grow at most like n^(weight)
        if (n ** form.weight) * absq ** n / (1.0 - absq) < tol:
            return total
    raise NonConvergence(f"Fourier series for {form.name} needs more than {cap} terms at Im={z.imag:.3g}")


def form_value(form, tau, tol=1e-16):
    """f(tau) for any tau in the upper half-plane, via fundamental-domain reduction."""
    if form.level == 2:
        # the second Gamma_0(2) Eisenstein series is E_{2k} at 2*tau
        return form_value(eisenstein(form.weight), 2 * complex(tau), tol)
    z, (c, d) = sl2_reduce(tau)
    val = _fourier_sum(form, z, tol)
    if c == 0 and d == 1:
        return val
    return val * (c * complex(tau) + d) ** (-form.weight)


def form_cusp_value(form, tau, tol=1e-16):
    """f(tau) - a_0, computed without cancellation when tau is already high."""
    tau = complex(tau)
    if form.level == 1 and abs(tau.real) <= 0.5 + 1e-12 and tau.imag >= 0.8:
        return _fourier_sum(form, tau, tol, cusp_only=True)
    return form_value(form, tau, tol) - complex(form.coeff(0))


# ---------------------------------------------------------------------------
# Zeta functions and polylogarithms

_EM_N, _EM_J = 40, 14


def _hurwitz_em(s, a):
    # Euler-Maclaurin for real s > 1, a > 0
    N = _EM_N
    total = sum((n + a) ** (-s) for n in range(N))
    x = N + a
    total += x ** (1.0 - s) / (s - 1.0) + 0.5 * x ** (-s)
    rising = s
    for j in range(1, _EM_J + 1):
        total += float(bernoulli(2 * j)) / factorial(2 * j) * rising * x ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return total


def zeta(s):
    """Riemann zeta at an integer or real argument (s = 1 is rejected)."""
    if s == 1:
        raise DomainError("zeta has a pole at s = 1")
    if isinstance(s, int) or float(s).is_integer():
        s = int(s)
        if s == 0:
            return -0.5
        if s < 0:
            return float(-bernoulli(1 - s) / (1 - s))
        if s % 2 == 0:
            k = s // 2
            return float((-1) ** (k + 1) * bernoulli(s) / (2 * factorial(s))) * TWO_PI ** s
    if s < 1:
        raise ValueError("real non-integer s < 1 is out of scope")
    return _hurwitz_em(float(s), 1.0)


def hurwitz_zeta(s, a):
    """Hurwitz zeta.  Exact rational for integer s <= 0 and rational a; float for real s > 1."""
    if s == 1:
        raise DomainError("Hurwitz zeta has a pole at s = 1")
    if (isinstance(s, int) or float(s).is_integer()) and s <= 0:
        m = -int(s)
        return -bernoulli_poly(m + 1, Fraction(a)) / (m + 1)
    a = float(a)
    if a <= 0:
        raise ValueError("a must be positive")
    if s < 1:
        raise ValueError("real non-integer s < 1 is out of scope")
    return _hurwitz_em(float(s), a)


def polylog(s, z, tol=1e-12, max_terms=5_000_000):
    """Li_s(z) = sum z^n / n^s for integer s >= 2 and |z| <= 1."""
    if s < 2:
        raise ValueError("polylog implemented for integer s >= 2")
    z = complex(z)
    r = abs(z)
    if r > 1 + 1e-12:
        raise ValueError("polylog needs |z| <= 1")
    if z == 0:
        return 0j
    if abs(z - 1.0) < 1e-14:
        return complex(zeta(s))
    if r < 1.0 - 1e-9:
        # geometric tail bound
        n = 64
        while r ** n / ((1 - r) * n ** s) > tol and n < max_terms:
            n *= 2
    else:
        # Dirichlet-test tail bound ~ 4 / (|1-z| N^s) on the unit circle
        n = max(64, int((4.0 / (tol * abs(1.0 - z))) ** (1.0 / s)) + 1)
    if n > max_terms:
        raise NonConvergence(f"polylog needs {n} terms, above the cap {max_terms}")
    idx = np.arange(1, n + 1)
    powers = np.cumprod(np.full(n, z, dtype=complex))
    return complex(np.sum(powers / idx.astype(float) ** s))


# ---------------------------------------------------------------------------
# The length-one symbol of a level-one modular form

def _solve_unimodular(q, p):
    """(r, s) with q*s - p*r = 1, |r| minimal, ties broken toward s >= 0."""
    if gcd(p, q) != 1:
        raise ValueError("(p, q) must be coprime")
    # extended gcd: find s0, r0 with q*s0 - p*r0 = 1
    old_r, r = q, p
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    sign = 1 if old_r > 0 else -1
    s0, r0 = sign * old_s, -sign * old_t  # q*s0 - p*r0 = 1
    if q == 0:
        return r0, s0
    # shift (r, s) -> (r + k q, s + k p) to minimize |r|
    k = round(-r0 / q)
    best = None
    for kk in (k - 1, k, k + 1):
        r1, s1 = r0 + kk * q, s0 + kk * p
        key = (abs(r1), 0 if s1 >= 0 else 1)
        if best is None or key < best[0]:
            best = (key, (r1, s1))
    return best[1]


def fourier_cutoff(form, height, tol, cap=400):
    """Smallest n with the remaining Fourier tail below tol; NonConvergence past cap."""
    decay = math.exp(-TWO_PI * height)
    # |sigma_{2k-1}(n)| <= zeta(2k-1) n^(2k-1); |tau(n)| <= d(n) n^(11/2) <= n^(13/2)
    bound_exp = 6.5 if form.is_cusp else form.weight - 1
    for n in range(1, cap + 1):
        t = 2.0 * (n + 1) ** bound_exp * decay ** (n + 1) / (1.0 - decay)
        if t < tol:
            return n
    raise NonConvergence(f"Fourier cutoff above cap {cap} at height {height:.4g}")


def dedekind_symbol_length1(form, p, q, height=None, tol=1e-12, cap=400):
    """Regularized period integral of a level-one form against (p tau - q)^(w).

    Three pieces: the cuspidal integral up from tau0 = q/p + i*height, the
    cusp-side integral computed through the modular substitution that maps
    q/p to i-infinity, and the closed-form boundary terms of the constant
    coefficient.  The value does not depend on the choice of tau0; the
    default height 1/|p| makes the Fourier heights of the two integral
    pieces equal.
    """
    if form.level != 1:
        raise ValueError("length-one symbol implemented for level-one forms")
    p, q = int(p), int(q)
    if gcd(p, q) != 1 or p * q == 0:
        raise DomainError("(p, q) must be coprime with pq != 0")
    w = form.weight - 2
    a0 = complex(form.coeff(0))
    if height is None:
        height = 1.0 / abs(p)
    tau0 = q / p + 1j * height

    # piece 1: int_{tau0}^{i inf} (f - a0)(p tau - q)^w dtau, termwise
    base = p * tau0 - q
    pre = [comb(w, j) * base ** (w - j) * (1j * p) ** j * factorial(j) for j in range(w + 1)]
    m1 = fourier_cutoff(form, height, tol * 1e-3, cap)
    s1 = 0j
    for n in range(1, m1 + 1):
        an = float(form.coeff(n))
        if an:
            c = TWO_PI * n
            s1 += an * cmath.exp(2j * math.pi * n * tau0) * sum(pre[j] / c ** (j + 1) for j in range(w + 1))
    s1 *= 1j

    # piece 2: int_{q/p}^{tau0} (f - a0 (p tau - q)^(-w-2))(p tau - q)^w dtau,
    # pulled through gamma(inf) = q/p where the integrand becomes f(sigma) - a0
    r, s = _solve_unimodular(q, p)
    sigma0 = (s * tau0 - r) / (q - p * tau0)
    m2 = fourier_cutoff(form, sigma0.imag, tol * 1e-3, cap)
    s2 = 0j
    for n in range(1, m2 + 1):
        an = float(form.coeff(n))
        if an:
            s2 += an * cmath.exp(2j * math.pi * n * sigma0) / (2j * math.pi * n)

    # piece 3: boundary terms of the constant coefficient
    s3 = -a0 * (base ** (w + 1) / ((w + 1) * p) + 1.0 / (p * base))
    return s1 + s2 + s3


def psi_length1(form, p, q, **kw):
    """Associated scalar reciprocity function D(p,q) - D(-q,p) of the length-one symbol."""
    return dedekind_symbol_length1(form, p, q, **kw) - dedekind_symbol_length1(form, -q, p, **kw)


# ---------------------------------------------------------------------------
# The Eisenstein reciprocity law

ReciprocityCheck = namedtuple("ReciprocityCheck", "lhs rhs diff")


def reciprocity_law_check(k2, p, tol=1e-12):
    """Both sides of the weight-2k Eisenstein reciprocity law at q = 1.

    The left side is the twisted polylogarithm sum at the p-th root of
    unity; the right side is the Bernoulli/zeta closed form.  The two are
    computed by independent code paths and the discrepancy is returned.
    """
    if k2 < 4 or k2 % 2:
        raise ValueError("weight must be an even integer >= 4")
    if p < 2:
        raise ValueError("p must be >= 2")
    xi = cmath.exp(2j * math.pi / p)
    lhs = sum(n * polylog(k2 - 1, xi ** n, tol) for n in range(1, p))

    bsum = Fraction(0)
    for n in range(-1, k2, 2):
        bsum += bernoulli(n + 1) * bernoulli(k2 - n - 1) / (factorial(n + 1) * factorial(k2 - n - 1)) * Fraction(p) ** (1 - n)
    two_pi_i = (2j * math.pi) ** (k2 - 1)
    rhs = (-two_pi_i / 2 * complex(bsum)
           - two_pi_i * float(bernoulli(k2)) / (2 * k2 * factorial(k2 - 2)) * float(p) ** (2 - k2)
           + zeta(k2 - 1) / 2 * (float(p) ** (3 - k2) - p))
    return ReciprocityCheck(lhs, rhs, abs(lhs - rhs))


# ---------------------------------------------------------------------------
# L-values and the Gamma_0(2) closed forms

def eisenstein_L(k2, s, level=1):
    """L(E_{2k,level}, s) = sum sigma_{2k-1}(n) / (level*n)^s, by continuation.

    Factorizes as zeta(s) zeta(s - 2k + 1); the value at s = 1 is the finite
    limit zeta'(2 - 2k), and s = 2k (the actual pole) is rejected.
    """
    if level not in (1, 2):
        raise ValueError("level must be 1 or 2")
    if s == k2:
        raise DomainError(f"L(E_{k2}, s) has a pole at s = {k2}")
    if s == 1:
        # lim_{s->1} zeta(s) zeta(s-2k+1) = zeta'(2-2k)
        k = k2 // 2
        val = (-1) ** (k - 1) * factorial(k2 - 2) * zeta(k2 - 1) / (2 * TWO_PI ** (k2 - 2))
    else:
        val = zeta(s) * zeta(s - k2 + 1)
    return val * (2.0 ** (-s) if level == 2 else 1.0)


def s2_s3(a, b, p, q, tol=1e-12):
    """The two Hurwitz-zeta/polylogarithm double sums attached to weights (2a, 2b)."""
    if a < 2 or b < 2:
        raise ValueError("a, b must be >= 2")
    if gcd(p, q) != 1 or p < 1:
        raise DomainError("(p, q) must be coprime with p >= 1")
    big = 2 * a + 2 * b - 2
    pref = factorial(big - 1) / TWO_PI ** big
    li = []
    for l in range(1, p + 1):
        z = cmath.exp(2j * math.pi * l * q / p)
        li.append(polylog(big, z, tol))
    sign = (-1) ** (a + b)

    def one(aa, bb):
        coef = sign * float(bernoulli(2 * aa)) / (4 * aa * (2 * aa - 1)) * float(p) ** (2 * bb - 3) * pref
        tot = 0j
        for l in range(1, p + 1):
            tot += _hurwitz_em(2 * aa - 1, l / p) * li[l - 1]
        return coef * tot

    return one(a, b), one(b, a)


def gamma02_delta(k2, p, q):
    """The parity-split constant: 2^(2k-1) zeta(2k-1)/p^(2k-2) for even p, zeta(2k-1)/p^(2k-2) for odd p."""
    if gcd(p, q) != 1 or p * q == 0:
        raise DomainError("(p, q) must be coprime with pq != 0")
    p = abs(p)
    z = zeta(k2 - 1)
    if p % 2 == 0:
        return 2 ** (k2 - 1) * z / p ** (k2 - 2)
    return z / p ** (k2 - 2)


def gamma02_D(k2, p, q, tol=1e-12):
    """Closed form for the identity-coset symbol of the second Gamma_0(2) Eisenstein series.

    The residue sum in the derivation requires a positive modulus, so a
    negative p is folded through the (p, q) -> (-p, -q) symmetry of the
    underlying integral.
    """
    if gcd(p, q) != 1 or p * q == 0:
        raise DomainError("(p, q) must be coprime with pq != 0")
    if p < 0:
        p, q = -p, -q
    s = k2 - 1
    bracket = complex(zeta(s)) - 0.5 * gamma02_delta(k2, p, q)
    for l in range(1, p):
        z = cmath.exp(4j * math.pi * l * q / p)
        bracket += (l / p) * polylog(s, z, tol)
    return p ** (k2 - 2) * factorial(k2 - 2) / (4j * math.pi) ** s * bracket


def gamma02_F(k2, p, q):
    """Closed form for the identity-coset reciprocity function of the same form."""
    if gcd(p, q) != 1 or p * q == 0:
        raise DomainError("(p, q) must be coprime with pq != 0")
    tot = 0j
    for r in range(k2 - 1):
        tot += (1j ** (1 - r) * comb(k2 - 2, r) * 2.0 ** (-r - 1)
                * eisenstein_L(k2, r + 1) * float(p) ** r * float(q) ** (k2 - 2 - r))
    bk = float(bernoulli(k2))
    tot -= bk / (2 * k2 * (k2 - 1)) * (q ** (k2 - 1) / p + p ** (k2 - 1) / q)
    tot -= bk / (2 * k2) / (p * q)
    return tot


# ---------------------------------------------------------------------------
# Laurent polynomials in (p, q) and least-squares structure fits

class LaurentPoly:
    """sum c_{ij} p^i q^j with integer exponents of either sign."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        clean = {}
        for (i, j), c in (coeffs or {}).items():
            c = complex(c)
            if c != 0:
                clean[(int(i), int(j))] = c
        self.coeffs = clean

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, i, j, c=1.0):
        return cls({(i, j): c})

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return self == LaurentPoly.const(other)

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly.const(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return LaurentPoly({k: c * other for k, c in self.coeffs.items()})
        out = {}
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return LaurentPoly({k: c / scalar for k, c in self.coeffs.items()})

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers of a general Laurent polynomial")
        out = LaurentPoly.const(1.0)
        for _ in range(n):
            out = out * self
        return out

    def evaluate(self, p, q):
        return sum(c * complex(p) ** i * complex(q) ** j for (i, j), c in self.coeffs.items())

    def subs_linear(self, m):
        """Substitute (p, q) -> (a p + b q, c p + d q) for m = ((a, b), (c, d)).

        Exact for polynomial exponents; negative exponents are supported only
        when the corresponding image is a monomial (e.g. the (p,q)->(-q,p) map).
        """
        (a, b), (c, d) = m
        total = LaurentPoly({})
        for (i, j), coef in self.coeffs.items():
            term = LaurentPoly.const(coef)
            for e, (u, v) in ((i, (a, b)), (j, (c, d))):
                if e >= 0:
                    term = term * LaurentPoly({(1, 0): u, (0, 1): v}) ** e
                elif u != 0 and v != 0:
                    raise ValueError("negative exponent under a non-monomial substitution")
                elif u != 0:
                    term = term * LaurentPoly({(e, 0): float(u) ** e})
                else:
                    term = term * LaurentPoly({(0, e): float(v) ** e})
            total = total + term
        return total

    def homogeneous_degrees(self):
        return sorted({i + j for i, j in self.coeffs})

    def prune(self, tol):
        return LaurentPoly({k: c for k, c in self.coeffs.items() if abs(c) > tol})

    def __repr__(self):
        if not self.coeffs:
            return "LaurentPoly(0)"
        parts = [f"({c:.6g})*p^{i}*q^{j}" for (i, j), c in sorted(self.coeffs.items())]
        return "LaurentPoly(" + " + ".join(parts) + ")"


def laurent_fit(samples, box, rank_tol=1e-10):
    """Least-squares fit of ((p,q), value) samples over a box of monomials p^i q^j.

    box is ((imin, imax), (jmin, jmax)).  Returns (LaurentPoly, residual)
    where the residual is the largest absolute deviation at the samples.
    Rank deficiency raises, naming the unresolvable monomials.
    """
    (imin, imax), (jmin, jmax) = box
    monomials = [(i, j) for i in range(imin, imax + 1) for j in range(jmin, jmax + 1)]
    if len(samples) < len(monomials):
        raise ValueError(f"need at least {len(monomials)} samples, got {len(samples)}")
    A = np.array([[float(p) ** i * float(q) ** j for (i, j) in monomials] for (p, q), _ in samples],
                 dtype=complex)
    y = np.array([complex(v) for _, v in samples])
    scale = np.max(np.abs(A), axis=0)
    if np.any(scale == 0):
        dead = [monomials[k] for k in np.nonzero(scale == 0)[0]]
        raise ValueError(f"monomials vanish on all samples: {dead}")
    As = A / scale
    u_, sv, vt = np.linalg.svd(As, full_matrices=False)
    if sv[-1] < rank_tol * sv[0]:
        null = np.abs(vt[-1])
        dead = [monomials[k] for k in np.argsort(null)[::-1][:3]]
        raise ValueError(f"rank-deficient design matrix; entangled monomials near {dead}")
    coef, *_ = np.linalg.lstsq(As, y, rcond=None)
    coef = coef / scale
    fit = LaurentPoly({m: c for m, c in zip(monomials, coef)})
    residual = max(abs(fit.evaluate(p, q) - complex(v)) for (p, q), v in samples)
    return fit, residual

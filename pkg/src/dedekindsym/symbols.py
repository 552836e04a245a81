"""(Almost) multiple Dedekind symbols and multiple reciprocity functions.

Evaluator objects map a coprime pair (p, q) to a truncated series with
constant term 1.  The two directions of the normalized-symbol bijection
are ``psi`` (D -> associated function) and ``delta`` (continued-fraction
construction of the normalized symbol); ``bullet`` is the induced product
of reciprocity functions, and ``decompose`` peels a shuffled function into
exponentials of scalar factors, one word at a time.
"""

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import contfrac
from .errors import DomainError, NotShuffled
from .series import RATIONAL, TruncSeries

# ---------------------------------------------------------------------------
# Orbits of the defining relations

def orbit_key(p, q):
    """Canonical representative of the orbit of (p, q) under
    D(p,q) = D(p,p+q) and D(p,-q) = D(-p,q), respecting the almost domain.

    Negation folds p positive; translation by p reduces q modulo p for
    p >= 2, while for p = 1 the sign of q is the only invariant (the
    translation chain cannot cross q = 0 on the almost domain).
    """
    if gcd(p, q) != 1:
        raise ValueError("(p, q) must be coprime")
    if p == 0:
        return (0, 1)
    if p < 0:
        p, q = -p, -q
    if p == 1:
        return (1, 1) if q >= 1 else (1, -1)
    return (p, q % p)


def sample_pairs(n, seed, bound=30, distinct=True):
    """Deterministic coprime pairs with p, q != 0 and |p|, |q| <= bound."""
    import random

    rng = random.Random(seed)
    out = []
    seen = set()
    while len(out) < n:
        p = rng.randint(-bound, bound)
        q = rng.randint(-bound, bound)
        if p == 0 or q == 0 or gcd(p, q) != 1:
            continue
        if distinct and (p, q) in seen:
            continue
        seen.add((p, q))
        out.append((p, q))
    return out


# ---------------------------------------------------------------------------
# Evaluator objects

class _SeriesFn:
    """Memoized map (p, q) -> TruncSeries with constant term 1.

    memo: "literal" caches by the pair itself, "sign" folds (p,q) ~ (-p,-q)
    and "orbit" folds the full defining-relation orbit.  Only functions
    whose axioms hold by construction should use the folded modes, else
    axiom verification would be vacuous.
    """

    __slots__ = ("_func", "alphabet", "trunc", "kind", "almost", "memo_mode", "_memo", "name")

    def __init__(self, func, alphabet, trunc, kind=RATIONAL, almost=True,
                 memo="literal", name=""):
        self._func = func
        self.alphabet = alphabet
        self.trunc = trunc
        self.kind = kind
        self.almost = almost
        self.memo_mode = memo
        self._memo = {}
        self.name = name

    def _key(self, p, q):
        if self.memo_mode == "orbit":
            return orbit_key(p, q)
        if self.memo_mode == "sign":
            return (p, q) if p > 0 or (p == 0 and q > 0) else (-p, -q)
        return (p, q)

    def __call__(self, p, q):
        p, q = int(p), int(q)
        if gcd(p, q) != 1:
            raise DomainError(f"({p}, {q}) is not coprime")
        if self.almost and p * q == 0:
            raise DomainError(f"almost functions are undefined at ({p}, {q})")
        key = self._key(p, q)
        val = self._memo.get(key)
        if val is None:
            val = self._func(p, q)
            if val.coeff(()) != 1:
                raise ValueError(f"{type(self).__name__} evaluation must have constant term 1")
            self._memo[key] = val
        return val


class SymbolFn(_SeriesFn):
    """Multiple Dedekind symbol evaluator."""

    __slots__ = ("normalized",)

    def __init__(self, func, alphabet, trunc, kind=RATIONAL, almost=True,
                 memo="literal", name="", normalized=False):
        super().__init__(func, alphabet, trunc, kind, almost, memo, name)
        self.normalized = normalized


class RecipFn(_SeriesFn):
    """Multiple reciprocity function evaluator."""

    __slots__ = ()


def _remap_fn(fn, cls, alphabet, index_map, **flags):
    return cls(lambda p, q: fn(p, q).remap(alphabet, index_map),
               alphabet, fn.trunc, fn.kind, fn.almost, **flags)


def _merge(f, g):
    """Embed two evaluators into the union of their alphabets."""
    if f.alphabet == g.alphabet:
        return f, g
    big, mf, mg = f.alphabet.union(g.alphabet)
    return (_remap_fn(f, type(f), big, mf), _remap_fn(g, type(g), big, mg))


# ---------------------------------------------------------------------------
# The bijection

def psi(d):
    """Associated function F(p,q) = D(p,q) D(-q,p)^(-1) of a symbol."""
    return RecipFn(lambda p, q: d(p, q) * d(-q, p).inverse(),
                   d.alphabet, d.trunc, d.kind, d.almost, name=f"psi({d.name})")


def delta(f):
    """Normalized almost Dedekind symbol of an almost reciprocity function.

    Uses the unique continued-fraction representation with a_i >= 2 for
    i >= 1: the value at (p, q) is the ordered product of F(p_i, q_i)^(-1)
    over the proper tails.  Integer values of q/p short-circuit to 1, and
    negative integers to F(1,1)^(-1) (F(1,1) = 1 is not available on the
    almost domain).
    """
    one = TruncSeries.one(f.alphabet, f.trunc, f.kind)

    def ev(p, q):
        if p < 0:
            p, q = -p, -q
        if p == 1:
            if q >= 1:
                return one
            return f(1, 1).inverse()
        seq = contfrac.canonical(p, q)
        acc = one
        for pi, qi in contfrac.tails(seq)[1:]:
            acc = acc * f(pi, qi).inverse()
        return acc

    return SymbolFn(ev, f.alphabet, f.trunc, f.kind, almost=True,
                    memo="sign", name=f"delta({f.name})", normalized=True)


def delta_full(f, rep):
    """Product of F(p_i, q_i)^(-1) over the proper tails of an arbitrary
    continued-fraction representation; needs F defined on all of U."""
    one = TruncSeries.one(f.alphabet, f.trunc, f.kind)
    acc = one
    for pi, qi in contfrac.tails(rep)[1:]:
        acc = acc * f(pi, qi).inverse()
    return acc


def normalize(d):
    """The unique normalized symbol with the same associated function."""
    const_inv = d(1, 1).inverse()
    return SymbolFn(lambda p, q: d(p, q) * const_inv,
                    d.alphabet, d.trunc, d.kind, d.almost,
                    name=f"normalize({d.name})", normalized=True)


# ---------------------------------------------------------------------------
# The induced product

def bullet(f, g):
    """Product of reciprocity functions through their normalized symbols:
    (F * G)(p,q) = D(p,q) G(p,q) D^(-1)(-q,p) with D = delta(F)."""
    f, g = _merge(f, g)
    d = delta(f)
    return RecipFn(lambda p, q: d(p, q) * g(p, q) * d(-q, p).inverse(),
                   f.alphabet, min(f.trunc, g.trunc), f.kind,
                   almost=f.almost or g.almost, name=f"({f.name} . {g.name})")


def bullet_inverse(f):
    """Inverse under the product: D^(-1)(p,q) D(-q,p) with D = delta(F)."""
    d = delta(f)
    return RecipFn(lambda p, q: d(p, q).inverse() * d(-q, p),
                   f.alphabet, f.trunc, f.kind, f.almost, name=f"inv({f.name})")


def embed_exp(f, letter, alphabet, trunc, kind=RATIONAL, almost=True):
    """exp(f(p,q) * letter): the group-like one-letter embedding of a scalar
    reciprocity function."""
    idx = (alphabet.index(letter),)

    def ev(p, q):
        return TruncSeries.term(alphabet, trunc, idx, f(p, q), kind).exp()

    return RecipFn(ev, alphabet, trunc, kind, almost, name=f"exp({letter})")


def embed_exp_symbol(d, letter, alphabet, trunc, kind=RATIONAL, almost=True):
    """The analogous embedding of a scalar Dedekind symbol."""
    idx = (alphabet.index(letter),)

    def ev(p, q):
        return TruncSeries.term(alphabet, trunc, idx, d(p, q), kind).exp()

    return SymbolFn(ev, alphabet, trunc, kind, almost, name=f"exp({letter})")


def from_components(fs, alphabet, trunc, kind=RATIONAL, almost=True):
    """Bullet product of one-letter exponentials, in alphabet order; the
    length-1 components of the result are exactly the given scalars."""
    acc = None
    for letter in alphabet.names:
        if letter not in fs:
            continue
        part = embed_exp(fs[letter], letter, alphabet, trunc, kind, almost)
        acc = part if acc is None else bullet(acc, part)
    if acc is None:
        raise ValueError("no components given")
    return acc


# ---------------------------------------------------------------------------
# Axiom verification

@dataclass
class VerifyRow:
    axiom: str
    word: str
    pair: tuple
    violation: float


class VerifyReport:
    def __init__(self, rows, exact):
        self.rows = rows
        self.exact = exact

    def worst(self):
        return max((r.violation for r in self.rows), default=0.0)

    def passed(self, tol=None):
        if self.exact:
            return self.worst() == 0.0
        return self.worst() <= (1e-9 if tol is None else tol)

    def worst_by_axiom(self):
        out = {}
        for r in self.rows:
            if r.axiom not in out or r.violation > out[r.axiom].violation:
                out[r.axiom] = r
        return out

    def to_records(self):
        return [{"axiom": r.axiom, "word": r.word, "pair": list(r.pair),
                 "violation": r.violation} for r in self.rows]

    def __repr__(self):
        lines = [f"{a}: worst {r.violation:.3g} at word {r.word or '1'}, pair {r.pair}"
                 for a, r in sorted(self.worst_by_axiom().items())]
        return "VerifyReport(\n  " + "\n  ".join(lines or ["empty"]) + "\n)"


def _series_rows(axiom, lhs, rhs, pair, alphabet, rows):
    for w in set(lhs.coeffs) | set(rhs.coeffs):
        diff = abs(complex(lhs.coeff(w)) - complex(rhs.coeff(w)))
        if diff:
            rows.append(VerifyRow(axiom, alphabet.word_name(w), pair, diff))


def verify_mds(d, samples):
    """Componentwise worst violations of the two symbol axioms at the samples.

    The translation axiom is skipped at pairs with p + q = 0, where the
    almost axioms leave it undefined.
    """
    rows = []
    for p, q in samples:
        _series_rows("MDS1", d(p, -q), d(-p, q), (p, q), d.alphabet, rows)
        if p + q != 0:
            _series_rows("MDS2", d(p, q), d(p, p + q), (p, q), d.alphabet, rows)
    return VerifyReport(rows, exact=d.kind == RATIONAL)


def verify_mrf(f, samples):
    """Componentwise worst violations of the three reciprocity axioms."""
    rows = []
    for p, q in samples:
        one = TruncSeries.one(f.alphabet, f.trunc, f.kind)
        _series_rows("MRF1", f(p, -q), f(-p, q), (p, q), f.alphabet, rows)
        _series_rows("MRF2", f(p, q) * f(-q, p), one, (p, q), f.alphabet, rows)
        if p + q != 0:
            _series_rows("MRF3", f(p, p + q) * f(p + q, q), f(p, q), (p, q), f.alphabet, rows)
    return VerifyReport(rows, exact=f.kind == RATIONAL)


# ---------------------------------------------------------------------------
# Random generation (orbit-keyed, so the symbol axioms hold by construction)

def _hash_fraction(seed, key, word):
    h = hashlib.sha256(f"{seed}|{key}|{word}".encode()).digest()
    num = int.from_bytes(h[:4], "big") % 19 - 9
    den = int.from_bytes(h[4:8], "big") % 9 + 1
    return Fraction(num, den)


def random_symbol(alphabet, trunc, seed):
    """Seeded symbol with an independent rational coefficient per
    (orbit, word); deterministic in the seed."""

    def ev(p, q):
        key = orbit_key(p, q)
        coeffs = {(): Fraction(1)}
        for w in alphabet.iter_words(trunc, min_len=1):
            coeffs[w] = _hash_fraction(seed, key, w)
        return TruncSeries(alphabet, trunc, coeffs, RATIONAL)

    return SymbolFn(ev, alphabet, trunc, RATIONAL, almost=True,
                    memo="orbit", name=f"random({seed})")


def random_scalar_symbol(seed):
    """Seeded scalar Dedekind symbol (p, q) -> Fraction."""
    return lambda p, q: _hash_fraction(seed, orbit_key(p, q), "scalar")


def scalar_psi(d):
    """Scalar associated function f(p,q) = d(p,q) - d(-q,p)."""
    return lambda p, q: d(p, q) - d(-q, p)


def power_difference_rf(m, c=1):
    """f(p,q) = c (p^(2m) - q^(2m)): a reciprocity function on all of U,
    used to exercise the representation-independent construction."""
    c = Fraction(c)

    def f(p, q):
        return c * (Fraction(p) ** (2 * m) - Fraction(q) ** (2 * m))

    return f


# ---------------------------------------------------------------------------
# Constructive decomposition

class Decomposition:
    """Ordered exponential factors exp(c_w(p,q) w), words of length 1..depth.

    Peeling at a pair: walk the words in canonical order, set c_w to the
    gap between the target component and the running product, then right-
    multiply the running product by exp(c_w w).  The running product then
    agrees with the target on all components of length <= depth.
    """

    def __init__(self, target, depth, tol):
        if depth > target.trunc:
            raise ValueError("depth exceeds the truncation length")
        self.target = target
        self.depth = depth
        self.tol = tol
        self.words = [w for w in target.alphabet.iter_words(depth, min_len=1)]
        self.words.sort(key=lambda w: (len(w), w))
        self._peeled = {}

    def _check_grouplike(self, series, pair):
        rep = series.is_grouplike(self.tol)
        if not rep.ok:
            raise NotShuffled(f"input is not shuffled at {pair}: violation {rep.worst:.3g} at {rep.witness}")

    def _peel(self, p, q):
        got = self._peeled.get((p, q))
        if got is None:
            t = self.target(p, q)
            self._check_grouplike(t, (p, q))
            current = TruncSeries.one(t.alphabet, self.target.trunc, t.kind)
            cs = {}
            for w in self.words:
                c = t.coeff(w) - current.coeff(w)
                cs[w] = c
                current = current * TruncSeries.term(t.alphabet, self.target.trunc, w, c, t.kind).exp()
            got = (cs, current)
            self._peeled[(p, q)] = got
        return got

    def coefficient(self, word, p, q):
        """The scalar factor c_w at (p, q); a Dedekind symbol in (p, q)."""
        return self._peel(p, q)[0][self.target.alphabet.word(word)]

    def scalar_fn(self, word):
        word = self.target.alphabet.word(word)
        return lambda p, q: self._peel(p, q)[0][word]

    def factors(self, p, q):
        """Ordered (word, coefficient) factors at (p, q)."""
        cs = self._peel(p, q)[0]
        return [(w, cs[w]) for w in self.words]

    def reconstruction(self, p, q):
        return self._peel(p, q)[1]

    def residual(self, p, q):
        """Largest gap between the reconstruction and the target on words of
        length <= depth."""
        t = self.target(p, q)
        rec = self.reconstruction(p, q)
        worst = 0.0
        for w in self.words:
            worst = max(worst, abs(complex(t.coeff(w)) - complex(rec.coeff(w))))
        return worst


def decompose(m, depth, tol=1e-9):
    """Peel a shuffled reciprocity function (or its normalized symbol).

    A RecipFn is converted to its normalized symbol through delta; a
    SymbolFn is normalized.  Raises NotShuffled lazily when an evaluation
    point fails the group-like test at the given tolerance.
    """
    if isinstance(m, SymbolFn):
        target = m if m.normalized else normalize(m)
    elif isinstance(m, RecipFn):
        target = delta(m)
    else:
        raise TypeError("decompose expects a SymbolFn or RecipFn")
    return Decomposition(target, depth, tol)

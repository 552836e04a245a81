"""Minus (negative-regular) continued fractions <a0,...,an>.

<x0,...,xn> = x0 - 1/(x1 - 1/(... - 1/xn)).  The numerator/denominator
pair of a sequence is produced by the recursion

    P0(x0) = 1,  Q0(x0) = x0,
    P(n+1)(x0..x(n+1)) = Qn(x1..x(n+1)),
    Q(n+1)(x0..x(n+1)) = x0 Qn(x1..x(n+1)) - Pn(x1..x(n+1)),

so the sequence evaluates to the coprime pair (p, q) = (Pn, Qn) with
value q/p.  Every rational with positive denominator has a unique
canonical representation with a_i >= 2 for i >= 1.

The moves t1/t2/t3 (and inverses) rewrite a sequence without changing
the rational number it represents.
"""

from collections import namedtuple
from fractions import Fraction
from math import gcd

from .errors import DivisionByZeroTail

CoprimePair = namedtuple("CoprimePair", "p q")


class CFSeq:
    """Immutable, nonempty integer sequence a0,...,an."""

    __slots__ = ("entries",)

    def __init__(self, entries):
        entries = tuple(int(a) for a in entries)
        if not entries:
            raise ValueError("continued-fraction sequence must be nonempty")
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __eq__(self, other):
        return isinstance(other, CFSeq) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"CFSeq{list(self.entries)}"

    def is_canonical(self):
        return all(a >= 2 for a in self.entries[1:])


def evaluate(s):
    """Coprime pair (p, q) with <a0,...,an> = q/p.

    Raises DivisionByZeroTail when the nested fraction is undefined, i.e.
    when P vanishes for some tail.
    """
    entries = s.entries if isinstance(s, CFSeq) else tuple(s)
    p, q = 1, entries[-1]
    for i in range(len(entries) - 2, -1, -1):
        if q == 0:
            # tail <a(i+1),...,an> evaluates to 0: the enclosing 1/tail is undefined
            raise DivisionByZeroTail(f"tail at index {i + 1} of {list(entries)} evaluates to 0")
        p, q = q, entries[i] * q - p
    if p == 0:
        raise DivisionByZeroTail(f"{list(entries)} has vanishing denominator")
    assert gcd(p, q) == 1
    return CoprimePair(p, q)


def tails(s):
    """Pairs (p_i, q_i) with q_i/p_i = <a_i,...,a_n>, i = 0..n."""
    entries = s.entries if isinstance(s, CFSeq) else tuple(s)
    out = [CoprimePair(1, entries[-1])]
    for i in range(len(entries) - 2, -1, -1):
        p, q = out[-1]
        if q == 0:
            raise DivisionByZeroTail(f"tail at index {i + 1} of {list(entries)} evaluates to 0")
        out.append(CoprimePair(q, entries[i] * q - p))
    out.reverse()
    if out[0].p == 0:
        raise DivisionByZeroTail(f"{list(entries)} has vanishing denominator")
    return out


def canonical(p, q):
    """The unique sequence with evaluate -> (p, q) and a_i >= 2 for i >= 1.

    Requires gcd(p, q) = 1 and p >= 1 (callers canonicalize the sign of the
    pair first).  Integers q/p come out as the single entry [q/p].
    """
    p, q = int(p), int(q)
    if p <= 0:
        raise ValueError("canonical continued fractions need p >= 1")
    if gcd(p, q) != 1:
        raise ValueError("(p, q) must be coprime")
    entries = []
    while True:
        a = -((-q) // p)  # ceil(q/p)
        entries.append(a)
        if a * p == q:
            return CFSeq(entries)
        # remainder x = 1/(a - q/p) = p/(a p - q), a value > 1
        p, q = a * p - q, p


def _checked(entries):
    seq = CFSeq(entries)
    evaluate(seq)  # moves must produce evaluable sequences
    return seq


def move_t1(s, i, eps):
    """(..., a_i, a_{i+1}, ...) -> (..., a_i + eps, eps, a_{i+1} + eps, ...), eps = ±1."""
    if eps not in (1, -1):
        raise ValueError("eps must be ±1")
    a = s.entries
    if not 0 <= i <= len(a) - 2:
        raise ValueError("t1 needs an index i in 0..n-1")
    return _checked(a[:i] + (a[i] + eps, eps, a[i + 1] + eps) + a[i + 2:])


def move_t1_inverse(s, i):
    """Remove the ±1 at position i+1, subtracting it from both neighbours."""
    a = s.entries
    if not 1 <= i + 1 <= len(a) - 2:
        raise ValueError("t1 inverse needs an interior position")
    eps = a[i + 1]
    if eps not in (1, -1):
        raise ValueError("entry to remove must be ±1")
    return _checked(a[:i] + (a[i] - eps, a[i + 2] - eps) + a[i + 3:])


def move_t2(s, i, b, c):
    """Split a_i = b + c into (..., b, 0, c, ...)."""
    a = s.entries
    if not 0 <= i <= len(a) - 1:
        raise ValueError("t2 index out of range")
    if b + c != a[i]:
        raise ValueError(f"need b + c = a_i, got {b} + {c} != {a[i]}")
    return _checked(a[:i] + (b, 0, c) + a[i + 1:])


def move_t2_inverse(s, i):
    """Collapse (..., b, 0, c, ...) with the 0 at position i+1 back to (..., b+c, ...)."""
    a = s.entries
    if not 0 <= i <= len(a) - 3 or a[i + 1] != 0:
        raise ValueError("t2 inverse needs a zero at position i+1")
    return _checked(a[:i] + (a[i] + a[i + 2],) + a[i + 3:])


def move_t3(s, eps):
    """(..., a_n) -> (..., a_n + eps, eps), eps = ±1."""
    if eps not in (1, -1):
        raise ValueError("eps must be ±1")
    a = s.entries
    return _checked(a[:-1] + (a[-1] + eps, eps))


def move_t3_inverse(s):
    a = s.entries
    if len(a) < 2 or a[-1] not in (1, -1):
        raise ValueError("t3 inverse needs a trailing ±1")
    return _checked(a[:-2] + (a[-2] - a[-1],))


def value(s):
    """The rational q/p as an exact Fraction (for move-invariance checks)."""
    p, q = evaluate(s)
    return Fraction(q, p)

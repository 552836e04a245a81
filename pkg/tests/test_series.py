import json
import random
from fractions import Fraction
from math import comb

import pytest

from dedekindsym.errors import NotInvertible
from dedekindsym.series import (COMPLEX, RATIONAL, Alphabet, TruncSeries, Word,
                                concat, shuffle_words)

AB = Alphabet.simple("ab")


def rand_series(rng, alphabet=AB, trunc=3, unit=True):
    coeffs = {(): Fraction(1) if unit else Fraction(rng.randint(1, 5))}
    for w in alphabet.iter_words(trunc, min_len=1):
        coeffs[w] = Fraction(rng.randint(-6, 6), rng.randint(1, 6))
    return TruncSeries(alphabet, trunc, coeffs)


def brute_mul(s, t):
    """Independent convolution oracle: loop over target words and splittings."""
    trunc = min(s.trunc, t.trunc)
    out = {}
    for w in s.alphabet.iter_words(trunc):
        acc = Fraction(0)
        for k in range(len(w) + 1):
            acc += s.coeff(w[:k]) * t.coeff(w[k:])
        if acc:
            out[w] = acc
    return out


class TestAlphabetWord:
    def test_alphabet_validation(self):
        with pytest.raises(ValueError):
            Alphabet([("a", 2), ("a", 4)])
        with pytest.raises(ValueError):
            Alphabet([("a", 3)])
        with pytest.raises(ValueError):
            Alphabet([("a", 0)])

    def test_word_length_weight(self):
        ab = Alphabet([("a", 2), ("b", 4)])
        w = Word(ab, "ab")
        assert w.length == 2 and w.weight == 6
        empty = Word(ab, ())
        assert empty.length == 0 and empty.weight == 0

    def test_concat(self):
        a, b = Word(AB, "a"), Word(AB, "b")
        empty = Word(AB, ())
        assert concat(empty, a) == a
        assert concat(a, b) == Word(AB, "ab")
        assert concat(Word(AB, "ab"), Word(AB, "a")).length == 3

    def test_concat_alphabet_mismatch(self):
        other = Alphabet.simple("xy")
        with pytest.raises(ValueError):
            concat(Word(AB, "a"), Word(other, "x"))


class TestMul:
    def test_one_plus_a_times_one_plus_b(self):
        s = TruncSeries(AB, 3, {(): 1, "a": 1})
        t = TruncSeries(AB, 3, {(): 1, "b": 1})
        assert (s * t).coeffs == {(): 1, (0,): 1, (1,): 1, (0, 1): 1}

    def test_difference_of_squares_truncated(self):
        s = TruncSeries(AB, 2, {(): 1, "a": 1})
        t = TruncSeries(AB, 2, {(): 1, "a": -1})
        assert (s * t).coeffs == {(): 1, (0, 0): -1}

    def test_against_brute_force(self):
        rng = random.Random(5)
        for _ in range(25):
            s, t = rand_series(rng, trunc=4), rand_series(rng, trunc=4)
            assert (s * t).coeffs == brute_mul(s, t)

    def test_associativity_random(self):
        rng = random.Random(17)
        for _ in range(100):
            s, t, u = (rand_series(rng, trunc=4) for _ in range(3))
            assert ((s * t) * u).coeffs == (s * (t * u)).coeffs

    def test_min_truncation(self):
        s = rand_series(random.Random(0), trunc=4)
        t = rand_series(random.Random(1), trunc=2)
        assert (s * t).trunc == 2


class TestInverse:
    def test_geometric(self):
        s = TruncSeries(AB, 3, {(): 1, "a": 1})
        assert s.inverse().coeffs == {(): 1, (0,): -1, (0, 0): 1, (0, 0, 0): -1}

    def test_inverse_of_one(self):
        one = TruncSeries.one(AB, 3)
        assert one.inverse() == one

    def test_solved_by_lengths(self):
        s = TruncSeries(AB, 2, {(): 1, "a": 1, "ab": 1})
        inv = s.inverse()
        assert inv.coeffs == {(): 1, (0,): -1, (0, 0): 1, (0, 1): -1}
        assert (s * inv) == TruncSeries.one(AB, 2)

    def test_round_trip_random(self):
        rng = random.Random(3)
        for _ in range(30):
            s = rand_series(rng)
            assert (s * s.inverse()) == TruncSeries.one(AB, 3)

    def test_scalar_constant_term(self):
        s = TruncSeries(AB, 2, {(): Fraction(2), "a": 1})
        assert (s * s.inverse()) == TruncSeries.one(AB, 2)

    def test_zero_constant_term(self):
        with pytest.raises(NotInvertible):
            TruncSeries(AB, 2, {"a": 1}).inverse()


class TestShuffle:
    def test_two_letters(self):
        out = shuffle_words((0,), (1,))
        assert sorted(out) == [(0, 1), (1, 0)]

    def test_a_with_bc(self):
        out = shuffle_words((0,), (1, 2))
        assert sorted(out) == [(0, 1, 2), (1, 0, 2), (1, 2, 0)]

    def test_cardinality(self):
        abc = Alphabet.simple("abc")
        rng = random.Random(9)
        for _ in range(40):
            lu, lv = rng.randint(0, 3), rng.randint(0, 3)
            u = tuple(rng.randrange(3) for _ in range(lu))
            v = tuple(rng.randrange(3) for _ in range(lv))
            assert len(shuffle_words(u, v)) == comb(lu + lv, lu)

    def test_word_objects(self):
        out = shuffle_words(Word(AB, "a"), Word(AB, "b"))
        assert Word(AB, "ab") in out and Word(AB, "ba") in out


class TestGroupLike:
    def test_exponential_is_grouplike(self):
        a = Alphabet.simple("a")
        s = TruncSeries(a, 4, {"a": Fraction(2, 3)}).exp()
        assert s.coeff("aa") == Fraction(2, 9)  # x^2/2
        assert s.is_grouplike().ok

    def test_missing_cross_terms(self):
        s = TruncSeries(AB, 2, {(): 1, "a": 1, "b": 1})
        rep = s.is_grouplike()
        assert not rep.ok and rep.worst == 1
        # the (a, b) pair violates: S^a S^b = 1 but S^{ab} + S^{ba} = 0
        assert s.coeff("a") * s.coeff("b") == 1
        assert s.coeff("ab") + s.coeff("ba") == 0

    def test_product_and_inverse_closure(self):
        rng = random.Random(31)
        for _ in range(10):
            s = TruncSeries(AB, 3, {"a": Fraction(rng.randint(-4, 4), rng.randint(1, 4)),
                                    "b": Fraction(rng.randint(-4, 4), rng.randint(1, 4))}).exp()
            t = TruncSeries(AB, 3, {"a": Fraction(rng.randint(-4, 4), rng.randint(1, 4)),
                                    "b": Fraction(rng.randint(-4, 4), rng.randint(1, 4))}).exp()
            assert s.is_grouplike().ok and t.is_grouplike().ok
            assert (s * t).is_grouplike().ok
            assert s.inverse().is_grouplike().ok


class TestExpLog:
    def test_exp_coefficients(self):
        a = Alphabet.simple("a")
        x = Fraction(3, 5)
        s = TruncSeries(a, 4, {"a": x}).exp()
        fact = 1
        for n in range(1, 5):
            fact *= n
            assert s.coeff((0,) * n) == x ** n / fact

    def test_log_one_plus_a(self):
        a = Alphabet.simple("a")
        s = TruncSeries(a, 3, {(): 1, "a": 1})
        assert s.log().coeffs == {(0,): Fraction(1), (0, 0): Fraction(-1, 2),
                                  (0, 0, 0): Fraction(1, 3)}

    def test_round_trips(self):
        rng = random.Random(7)
        for _ in range(20):
            s = rand_series(rng)
            body = TruncSeries(AB, 3, {w: c for w, c in s.coeffs.items() if w})
            assert body.exp().log() == body
            assert s.log().exp() == s

    def test_log_exp_letters(self):
        s = TruncSeries(AB, 3, {"a": Fraction(2), "b": Fraction(-1, 3)})
        out = s.exp().log()
        assert out.coeff("a") == 2 and out.coeff("b") == Fraction(-1, 3)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            TruncSeries.one(AB, 2).exp()
        with pytest.raises(ValueError):
            TruncSeries.zero(AB, 2).log()


class TestSerialization:
    def test_rational_bit_exact(self):
        rng = random.Random(13)
        s = rand_series(rng)
        rt = TruncSeries.loads(s.dumps())
        assert rt == s

    def test_complex_round_trip(self):
        s = TruncSeries(AB, 2, {(): 1, "a": 0.1234567890123456789 + 1e-300j,
                                "ab": -2.5 + 3.25j}, kind=COMPLEX)
        rt = TruncSeries.from_record(s.to_record())
        assert rt == s

    def test_record_shape(self):
        s = TruncSeries(AB, 2, {(): 1, "ab": Fraction(-3, 7)})
        rec = s.to_record()
        assert rec["trunc"] == 2 and rec["kind"] == RATIONAL
        entry = [e for e in rec["entries"] if e["word"] == ["a", "b"]][0]
        assert entry["num"] == -3 and entry["den"] == 7
        json.dumps(rec)  # json-serializable

import numpy as np
import pytest

from hiddengibbs import (
    Alphabet,
    AmalgamationMap,
    EnumerationCapError,
    enumerate_words,
    periodic_orbit_words,
)
from hiddengibbs.symbols import (
    Word,
    cyclic_window_ranks,
    digit_matrix,
    window_ranks,
    word_from_rank,
)


def test_alphabet_rejects_single_symbol():
    with pytest.raises(ValueError):
        Alphabet(["a"])


def test_alphabet_rejects_duplicates():
    with pytest.raises(ValueError):
        Alphabet(["a", "a", "b"])


def test_enumerate_words_binary_length2(alpha2):
    labels = [w.label() for w in enumerate_words(alpha2, 2)]
    assert labels == ["00", "01", "10", "11"]


def test_enumerate_words_ternary_length3(alpha3):
    words = enumerate_words(alpha3, 3)
    assert len(words) == 27
    assert words[0].label() == "000"
    assert words[-1].label() == "222"


def test_enumeration_cap(alpha2):
    with pytest.raises(EnumerationCapError):
        enumerate_words(alpha2, 30, cap=1000)


def test_enumeration_order_stable(alpha3):
    first = [w.letters for w in enumerate_words(alpha3, 4)]
    second = [w.letters for w in enumerate_words(alpha3, 4)]
    assert first == second == sorted(first)


def test_periodic_orbit_words_fixed_points(alpha2):
    labels = [w.label() for w in periodic_orbit_words(alpha2, 1)]
    assert labels == ["0", "1"]


def test_periodic_orbit_words_period2_lists_points_not_orbits(alpha2):
    labels = [w.label() for w in periodic_orbit_words(alpha2, 2)]
    # 01 and 10 generate the same orbit but are distinct periodic points
    assert "01" in labels and "10" in labels
    assert len(labels) == 4


def test_periodic_orbit_words_count(alpha3):
    assert len(periodic_orbit_words(alpha3, 2)) == 9


def test_word_rank_roundtrip(alpha3):
    for rank in range(27):
        w = word_from_rank(alpha3, rank, 3)
        assert w.rank() == rank


def test_subword_and_concat(alpha2):
    w = alpha2.parse("01101")
    assert w.sub(1, 3).label() == "110"
    assert len(w.sub(1, 3)) == 3
    a, b, c = alpha2.parse("01"), alpha2.parse("10"), alpha2.parse("1")
    assert a.concat(b).concat(c).label() == a.concat(b.concat(c)).label()


def test_cyclic_window(alpha2):
    w = alpha2.parse("011")
    assert w.cyclic_window(2, 4).label() == "1011"
    assert w.extend_periodic(7).label() == "0110110"


def test_amalgamate_word(amap32, alpha3):
    assert amap32.apply(alpha3.parse("0212")).label() == "0111"


def test_amalgamation_must_shrink(alpha3):
    with pytest.raises(ValueError):
        AmalgamationMap(alpha3, Alphabet(["a", "b", "c"]), {"0": "a", "1": "b", "2": "c"})


def test_amalgamation_surjective(alpha3, alpha2):
    with pytest.raises(ValueError, match="1"):
        AmalgamationMap(alpha3, alpha2, {"0": "0", "1": "0", "2": "0"})


def test_amalgamate_two_to_one():
    src = Alphabet(["0", "1", "2"])
    tgt = Alphabet(["x", "y"])
    amap = AmalgamationMap(src, tgt, {"0": "x", "1": "x", "2": "y"})
    assert amap.apply(src.parse("22")).label() == "yy"


def test_fiber_examples(amap32, alpha2):
    assert [w.label() for w in amap32.fiber(alpha2.parse("01"))] == ["01", "02"]
    assert [w.label() for w in amap32.fiber(alpha2.parse("00"))] == ["00"]
    assert [w.label() for w in amap32.fiber(alpha2.parse("11"))] == [
        "11",
        "12",
        "21",
        "22",
    ]


def test_fiber_partitions_source_words(amap32, alpha2, alpha3):
    n = 3
    seen = []
    for b in enumerate_words(alpha2, n):
        fib = amap32.fiber(b)
        for v in fib:
            assert amap32.apply(v).letters == b.letters
        seen.extend(v.letters for v in fib)
    assert sorted(seen) == [w.letters for w in enumerate_words(alpha3, n)]


def test_fiber_ranks_match_fiber(amap32, alpha2):
    b = alpha2.parse("101")
    ranks = amap32.fiber_ranks(b)
    assert list(ranks) == [w.rank() for w in amap32.fiber(b)]


def test_shift_commutes_with_amalgamation(amap32, alpha3):
    w = alpha3.parse("0211201")
    assert amap32.apply(w).sub(2, 5).letters == amap32.apply(w.sub(2, 5)).letters


def test_digit_matrix_matches_enumeration(alpha3):
    digits = digit_matrix(3, 3)
    listed = np.array([w.letters for w in enumerate_words(alpha3, 3)])
    assert np.array_equal(digits, listed)


def test_window_ranks_against_direct(alpha3):
    digits = digit_matrix(3, 5)
    got = window_ranks(digits, 2, 3)
    for i in (0, 7, 100, 242):
        w = word_from_rank(alpha3, i, 5)
        direct = [w.sub(j, j + 1).rank() for j in range(4)]
        assert list(got[i]) == direct


def test_cyclic_window_ranks_against_word(alpha2):
    digits = digit_matrix(2, 4)
    got = cyclic_window_ranks(digits, 3, 2)
    for i in range(16):
        w = word_from_rank(alpha2, i, 4)
        direct = [w.cyclic_window(j, 3).rank() for j in range(4)]
        assert list(got[i]) == direct


def test_word_validation(alpha2):
    with pytest.raises(Exception):
        Word(alpha2, (0, 2))
    with pytest.raises(ValueError):
        Word(alpha2, ())

import random

import pytest

from heapnull import pathalg as pa
from heapnull.pathalg import BAR0, BAR1, BOTTOM, CAR, CDR


def test_reduce_examples():
    assert pa.reduce((BAR0, CAR)) == ()
    assert pa.reduce((CDR, BAR1, CDR)) == (CDR,)
    assert pa.reduce((BAR0, CDR)) is BOTTOM
    assert pa.reduce((CAR, BAR0)) == (CAR, BAR0)


def test_reverse_examples():
    assert pa.reverse((CAR, CDR)) == (BAR1, BAR0)
    assert pa.reverse(()) == ()


def test_reverse_involution():
    rng = random.Random(3)
    for _ in range(500):
        p = tuple(rng.choice(pa.ALPHABET) for _ in range(rng.randrange(10)))
        assert pa.reverse(pa.reverse(p)) == p


def test_concat_examples():
    assert pa.concat((CDR,), (CAR,)) == (CDR, CAR)
    assert pa.concat({(), (CDR,)}, {(CAR,)}) == {(CAR,), (CDR, CAR)}
    assert pa.concat((CDR,), BOTTOM) is BOTTOM


def test_canonical_shape():
    assert pa.is_canonical((CDR, BAR0))
    assert pa.is_canonical((CAR, CDR))
    assert not pa.is_canonical((BAR0, CAR))
    assert pa.is_forward((CAR, CDR)) and not pa.is_forward((CAR, BAR1))


@pytest.mark.parametrize("text", ["e", "10", "1 0~", "0~ 1~", "_|_"])
def test_text_round_trip(text):
    assert pa.fmt(pa.parse(text)) == text


def test_bad_text():
    with pytest.raises(ValueError):
        pa.parse("2")

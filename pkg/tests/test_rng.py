import pytest

from intertext.rng import MASK64, Xoshiro256StarStar, splitmix64

# Published reference outputs of the splitmix64 algorithm for seed 0.
SPLITMIX64_SEED0 = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
]

# Frozen first outputs of this generator (splitmix64-seeded xoshiro256**),
# pinned so any change to the stream is caught: splits and initializations
# derived from it must stay stable across releases and implementations.
XOSHIRO_SEED0 = [0x99EC5F36CB75F2B4, 0xBF6E1F784956452A, 0x1A5F849D4933E6E0]
XOSHIRO_SEED42 = [0x15780B2E0C2EC716, 0x6104D9866D113A7E, 0xAE17533239E499A1]


def test_splitmix64_reference_vectors():
    assert splitmix64(0, 4) == SPLITMIX64_SEED0


def test_splitmix64_seed_range():
    with pytest.raises(ValueError):
        splitmix64(-1, 1)
    with pytest.raises(ValueError):
        splitmix64(2 ** 64, 1)
    assert len(splitmix64(MASK64, 2)) == 2


def test_xoshiro_frozen_streams():
    gen = Xoshiro256StarStar(0)
    assert [gen.next_u64() for _ in range(3)] == XOSHIRO_SEED0
    gen = Xoshiro256StarStar(42)
    assert [gen.next_u64() for _ in range(3)] == XOSHIRO_SEED42


def test_xoshiro_outputs_in_range():
    gen = Xoshiro256StarStar(123)
    for _ in range(1000):
        assert 0 <= gen.next_u64() <= MASK64


def test_next_float_unit_interval():
    gen = Xoshiro256StarStar(9)
    values = [gen.next_float() for _ in range(2000)]
    assert all(0.0 <= v < 1.0 for v in values)
    # crude uniformity: mean of U(0,1) draws concentrates near 0.5
    assert abs(sum(values) / len(values) - 0.5) < 0.05


def test_next_below_bounds_and_errors():
    gen = Xoshiro256StarStar(5)
    for _ in range(500):
        assert 0 <= gen.next_below(7) < 7
    with pytest.raises(ValueError):
        gen.next_below(0)
    with pytest.raises(ValueError):
        gen.next_below(-3)


def test_uniform_bounds():
    gen = Xoshiro256StarStar(17)
    for _ in range(500):
        v = gen.uniform(-0.25, 0.75)
        assert -0.25 <= v < 0.75


def test_fill_uniform_matches_uniform_calls_bitwise():
    a = Xoshiro256StarStar(31)
    b = Xoshiro256StarStar(31)
    filled = a.fill_uniform(257, -0.05, 0.05)
    singles = [b.uniform(-0.05, 0.05) for _ in range(257)]
    assert filled == singles
    # both generators advanced identically
    assert a.next_u64() == b.next_u64()


def test_shuffle_frozen_and_permutation():
    items = list(range(8))
    Xoshiro256StarStar(7).shuffle(items)
    assert items == [1, 3, 7, 5, 4, 0, 6, 2]
    big = list(range(500))
    Xoshiro256StarStar(8).shuffle(big)
    assert sorted(big) == list(range(500))
    assert big != list(range(500))


def test_shuffle_deterministic_and_seed_sensitive():
    one = list(range(50))
    two = list(range(50))
    other = list(range(50))
    Xoshiro256StarStar(99).shuffle(one)
    Xoshiro256StarStar(99).shuffle(two)
    Xoshiro256StarStar(100).shuffle(other)
    assert one == two
    assert one != other


def test_seed_validation():
    with pytest.raises(ValueError):
        Xoshiro256StarStar(-1)
    with pytest.raises(ValueError):
        Xoshiro256StarStar(2 ** 64)
    Xoshiro256StarStar(MASK64)

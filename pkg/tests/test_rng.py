"""Generator conformance: the shuffle stream must match the published
SplitMix64 reference outputs bit-for-bit (plans replay across machines)."""

from hypothesis import given
from hypothesis import strategies as st

from evalbench.rng import SplitMix64, fisher_yates

MASK = (1 << 64) - 1


def reference_splitmix64(seed: int, count: int) -> list[int]:
    # independent transliteration of the published algorithm
    out = []
    state = seed & MASK
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


def test_reference_vector_seed_zero():
    rng = SplitMix64(0)
    assert [rng.next_uint64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


@given(st.integers(min_value=0, max_value=MASK))
def test_matches_reference_implementation(seed):
    rng = SplitMix64(seed)
    assert [rng.next_uint64() for _ in range(8)] == reference_splitmix64(seed, 8)


@given(st.integers(min_value=0, max_value=MASK), st.integers(min_value=1, max_value=1000))
def test_below_respects_bound(seed, bound):
    rng = SplitMix64(seed)
    assert all(0 <= rng.below(bound) < bound for _ in range(50))


@given(st.lists(st.integers(), max_size=40), st.integers(min_value=0, max_value=MASK))
def test_fisher_yates_is_permutation(items, seed):
    shuffled = fisher_yates(items, SplitMix64(seed))
    assert sorted(shuffled) == sorted(items)
    again = fisher_yates(items, SplitMix64(seed))
    assert shuffled == again

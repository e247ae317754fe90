import numpy as np
from hypothesis import given, settings, strategies as st

from cipherid import machines
from cipherid.alphabet import LETTERS, to_ints
from cipherid.machines import m209
from cipherid.machines.m209 import LEGAL_LUG_PAIRS, N_BARS, WHEEL_SIZES, M209Key


def blank_key(lugs=None, active=()):
    pins = [[False] * n for n in WHEEL_SIZES]
    for wheel, pin in active:
        pins[wheel][pin] = True
    return M209Key(tuple(map(tuple, pins)), tuple(lugs or [(0, 0)] * N_BARS), (0,) * 6)


def test_wheel_sizes():
    assert WHEEL_SIZES == (26, 25, 23, 21, 19, 17)
    key = machines.sample_key("m209", 1)
    assert tuple(len(w) for w in key.pins) == WHEEL_SIZES
    assert len(key.lugs) == 27 and all(len(b) == 2 for b in key.lugs)


def test_all_pins_inactive_is_atbash():
    key = blank_key(lugs=[(1, 2)] * N_BARS)
    assert m209.encrypt(key, LETTERS) == LETTERS[::-1]
    assert m209.encrypt(key, "ABC") == "ZYX"


def test_single_contact_gives_displacement_one():
    lugs = [(1, 0)] + [(0, 0)] * (N_BARS - 1)
    key = blank_key(lugs, active=[(0, 0)])
    d = m209.displacements([key], 2)[0]
    assert d.tolist() == [1, 0]       # wheel 1 advances after the first letter


def test_bar_with_two_engaged_lugs_counts_once():
    lugs = [(1, 2)] + [(0, 0)] * (N_BARS - 1)
    key = blank_key(lugs, active=[(0, 0), (1, 0)])
    assert m209.displacements([key], 1)[0, 0] == 1


def test_full_engagement_gives_27():
    lugs = [(0, 1)] * N_BARS
    key = blank_key(lugs, active=[(0, p) for p in range(26)])
    assert set(m209.displacements([key], 50)[0].tolist()) == {27}


def test_displacement_range_over_million_letters():
    keys = [machines.sample_key("m209", s) for s in range(100)]
    d = m209.displacements(keys, 10_000)
    assert d.min() >= 0 and d.max() <= 27


def test_displacement_matches_direct_count():
    # Direct per-letter simulation of bars and pins as an oracle.
    key = machines.sample_key("m209", 7)
    L = 400
    expected = []
    for t in range(L):
        exposed = [key.pins[w][(key.positions[w] + t) % WHEEL_SIZES[w]] for w in range(6)]
        expected.append(sum(any(lug and exposed[lug - 1] for lug in bar) for bar in key.lugs))
    assert m209.displacements([key], L)[0].tolist() == expected


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), text=st.text(alphabet=LETTERS, max_size=300))
def test_self_inverse(seed, text):
    key = machines.sample_key("m209", seed)
    assert m209.encrypt(key, m209.encrypt(key, text)) == text


def test_sampled_pins_about_half_active():
    fractions = []
    for seed in range(100):
        key = machines.sample_key("m209", seed)
        pins = np.concatenate([np.array(w, dtype=float) for w in key.pins])
        fractions.append(pins.mean())
    assert abs(np.mean(fractions) - 0.5) <= 0.05


def test_sampled_lugs_are_legal():
    for seed in range(200):
        key = machines.sample_key("m209", seed)
        assert all(tuple(sorted(b)) in LEGAL_LUG_PAIRS for b in key.lugs)
        assert machines.validate_key(key) == []


def test_lug_out_of_range_reported():
    key = blank_key(lugs=[(7, 0)] + [(0, 0)] * (N_BARS - 1))
    assert "lug out of range" in machines.validate_key(key)


def test_ciphertext_depends_on_plaintext_reversed():
    key = machines.sample_key("m209", 3)
    p = to_ints("HELLO")
    d = m209.displacements([key], 5)[0]
    assert to_ints(m209.encrypt(key, "HELLO")).tolist() == ((25 - p + d) % 26).tolist()

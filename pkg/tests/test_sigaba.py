import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cipherid import machines
from cipherid.alphabet import LETTERS, format_perm, is_permutation
from cipherid.machines import sigaba
from cipherid.machines.base import KeyValidationError, RotorSetting
from cipherid.machines.wiring import default_wiring

CSP889 = [
    "YCHLQSUGBDIXNZKERPVJTAWFOM", "INPXBWETGUYSAOCHVLDMQKZJFR", "WNDRIOZPTAXHFJYQBMSVEKUCGL",
    "TZGHOBKRVUXLQDMPNFWCJYEIAS", "YWTAHRQJVLCEXUNGBIPZMSDFOK", "QSLRBTEKOGAICFWYVMHJNXZUDP",
    "CHJDQIGNBSAKVTUOXFWLEPRMZY", "CDFAJXTIMNBEQHSUGRYLWZKVPO", "XHFESZDNRBCGKQIJLTVMUOYAPW",
    "EZJQXMOGYTCSFRIUPVNADLHWBK",
]


def test_rotor_bank_matches_published_set():
    wset = default_wiring("sigaba")
    assert [format_perm(wset.get("rotor", str(i)).wiring) for i in range(10)] == CSP889
    for i in range(5):
        assert is_permutation(wset.get("index", str(i)).wiring, 10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), text=st.text(alphabet=LETTERS, max_size=300))
def test_round_trip(seed, text):
    key = machines.sample_key("sigaba", seed)
    assert sigaba.decrypt(key, sigaba.encrypt(key, text)) == text


def test_step_counts_between_one_and_four():
    keys = [machines.sample_key("sigaba", s) for s in range(10)]
    steps = sigaba.trace(keys, 10_000)["steps"].sum(axis=2)
    assert set(np.unique(steps).tolist()) <= {1, 2, 3, 4}


def test_index_rotors_never_move():
    keys = [machines.sample_key("sigaba", s) for s in range(5)]
    idx = sigaba.trace(keys, 2_000)["index_positions"]
    assert np.all(idx == idx[:, :1])


def test_control_rotors_odometer():
    pos = sigaba.control_positions(np.zeros((1, 5), dtype=np.int64), 26 * 26 + 2)[0]
    fast, medium, slow = pos[:, sigaba.FAST], pos[:, sigaba.MEDIUM], pos[:, sigaba.SLOW]
    assert fast[:27].tolist() == list(range(26)) + [0]
    assert medium[14] == 0 and medium[15] == 1          # fast leaves O -> medium steps
    assert np.all(pos[:, 0] == 0) and np.all(pos[:, 4] == 0)
    assert slow.max() >= 1


def test_cipher_positions_follow_steps():
    key = machines.sample_key("sigaba", 11)
    tr = sigaba.trace([key], 200)
    steps, pos = tr["steps"][0].astype(int), tr["cipher_positions"][0]
    assert np.array_equal((pos[1:] - pos[:-1]) % 26, steps[:-1])


def test_duplicate_rotor_rejected():
    key = sigaba.default_key()
    dup = machines.SigabaKey(key.cipher_rotors, (RotorSetting("0"),) + key.control_rotors[1:], key.index_rotors)
    assert "duplicate rotor selection" in machines.validate_key(dup)
    with pytest.raises(KeyValidationError):
        sigaba.encrypt(dup, "ABC")


def test_sampled_key_draws_from_shared_bank():
    for seed in range(50):
        key = machines.sample_key("sigaba", seed)
        names = [r.name for r in (*key.cipher_rotors, *key.control_rotors)]
        assert sorted(names, key=int) == [str(i) for i in range(10)]
        assert machines.validate_key(key) == []


def test_reversed_rotor_changes_output():
    key = sigaba.default_key()
    flipped = machines.SigabaKey(
        (RotorSetting("0", True),) + key.cipher_rotors[1:], key.control_rotors, key.index_rotors)
    assert sigaba.encrypt(key, "AAAAAAAAAA") != sigaba.encrypt(flipped, "AAAAAAAAAA")

"""Purple (Angooki Taipu B) stepping-switch machine.

The plugboard string lists the letter wired to each of the 26 internal
contacts; contacts 0-5 feed the sixes switch and contacts 6-25 the cascade
of three twenties switches (physical order 1, 2, 3). The output side uses
the same plugboard in reverse. With the default plugboard the sixes are
the vowels AEIOUY.

Every switch has 25 positions. After each letter the sixes switch steps
and exactly one twenties switch steps: the slow one when the sixes switch
and the medium switch are both at position 24, otherwise the medium one
when the sixes switch is at 24, otherwise the fast one.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..alphabet import LETTERS
from .base import KeyValidationError, check_position, inverse, single
from .wiring import default_wiring

DEFAULT_PLUGBOARD = "AEIOUYBCDFGHJKLMNPQRSTVWXZ"
N_POSITIONS = 25


@dataclass(frozen=True)
class PurpleKey:
    plugboard: str = DEFAULT_PLUGBOARD
    sixes: int = 0
    twenties: tuple = (0, 0, 0)   # positions of physical switches 1, 2, 3
    motion: tuple = (1, 2, 3)     # switch numbers acting as (fast, medium, slow)

    cipher = "purple"

    def to_dict(self):
        return {"plugboard": self.plugboard, "sixes": self.sixes,
                "twenties": list(self.twenties), "motion": list(self.motion)}

    @classmethod
    def from_dict(cls, d):
        return cls(plugboard=d.get("plugboard", DEFAULT_PLUGBOARD), sixes=int(d.get("sixes", 0)),
                   twenties=tuple(int(v) for v in d.get("twenties", (0, 0, 0))),
                   motion=tuple(int(v) for v in d.get("motion", (1, 2, 3))))


@lru_cache(maxsize=None)
def switch_tables(wset=None):
    """Return (sixes (25, 6, 6), twenties (3, 25, 20, 20)) permutation tables."""
    wset = wset or default_wiring("purple")
    six = wset.of_kind("sixes")
    sixes = np.stack([six[f"{p:02d}"].array() for p in range(N_POSITIONS)])
    twenties = np.stack([
        np.stack([wset.of_kind(f"twenties{s}")[f"{p:02d}"].array() for p in range(N_POSITIONS)])
        for s in (1, 2, 3)
    ])
    return sixes, twenties


def validate(key):
    problems = []
    if sorted(key.plugboard) != list(LETTERS):
        problems.append("plugboard not a permutation")
    check_position(key.sixes, N_POSITIONS, "sixes position", problems)
    if len(key.twenties) != 3:
        problems.append("need three twenties positions")
    for p in key.twenties:
        check_position(p, N_POSITIONS, "twenties position", problems)
    if sorted(key.motion) != [1, 2, 3]:
        problems.append("motion assignment not a bijection")
    return problems


def switch_positions(six0, tw0, motion, length):
    """Positions in force for each letter: sixes (n, L) and twenties (n, L, 3)."""
    n = six0.shape[0]
    rows = np.arange(n)
    fast, medium, slow = motion[:, 0], motion[:, 1], motion[:, 2]
    six, tw = six0.copy(), tw0.copy()
    six_out = np.empty((n, length), dtype=np.int64)
    tw_out = np.empty((n, length, 3), dtype=np.int64)
    last = N_POSITIONS - 1
    for t in range(length):
        six_out[:, t] = six
        tw_out[:, t] = tw
        six_at = six == last
        med_at = tw[rows, medium] == last
        mover = np.where(six_at & med_at, slow, np.where(six_at, medium, fast))
        tw[rows, mover] = (tw[rows, mover] + 1) % N_POSITIONS
        six = (six + 1) % N_POSITIONS
    return six_out, tw_out


def encrypt_batch(keys, x, decrypt=False, wiring=None):
    sixes, twenties = switch_tables(wiring)
    n = len(keys)
    board = np.empty((n, 26), dtype=np.int64)
    for i, key in enumerate(keys):
        problems = validate(key)
        if problems:
            raise KeyValidationError("purple", problems)
        board[i] = [LETTERS.index(c) for c in key.plugboard]
    six0 = np.array([k.sixes for k in keys], dtype=np.int64)
    tw0 = np.array([k.twenties for k in keys], dtype=np.int64).reshape(n, 3)
    motion = np.array([k.motion for k in keys], dtype=np.int64).reshape(n, 3) - 1
    six_pos, tw_pos = switch_positions(six0, tw0, motion, x.shape[1])

    rows = np.arange(n)[:, None]
    contact = inverse(board)[rows, x]
    is_six = contact < 6
    if decrypt:
        sixes, twenties = inverse(sixes), inverse(twenties)
    out = np.where(is_six, sixes[six_pos, np.minimum(contact, 5)], 0)
    j = np.maximum(contact - 6, 0)
    order = (2, 1, 0) if decrypt else (0, 1, 2)
    for s in order:
        j = twenties[s][tw_pos[:, :, s], j]
    out = np.where(is_six, out, j + 6)
    return board[rows, out]


def decrypt_batch(keys, x, wiring=None):
    return encrypt_batch(keys, x, decrypt=True, wiring=wiring)


def encrypt(key, text, wiring=None):
    return single(encrypt_batch, key, text, wiring=wiring)


def decrypt(key, text, wiring=None):
    return single(encrypt_batch, key, text, decrypt=True, wiring=wiring)


def sample_key(rng):
    plugboard = "".join(LETTERS[i] for i in rng.permutation(26))
    sixes = int(rng.integers(0, N_POSITIONS))
    twenties = tuple(int(v) for v in rng.integers(0, N_POSITIONS, size=3))
    motion = tuple(int(v) + 1 for v in rng.permutation(3))
    return PurpleKey(plugboard, sixes, twenties, motion)

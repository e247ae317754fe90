"""M-209 lug-and-pin machine.

Each of the 27 drum bars carries two lugs; a lug in position k (1-6) sits
opposite wheel k and 0 means disengaged. A bar counts towards the
displacement when one of its lugs faces a wheel whose current pin is
active. The letter equation is the reversed-alphabet (Beaufort) form
``c = (25 - p + d) mod 26``, so enciphering twice restores the text. All
six wheels advance one pin after each letter.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .base import KeyValidationError, single

WHEEL_SIZES = (26, 25, 23, 21, 19, 17)
N_BARS = 27

# Legal (unordered) lug pairs on one bar: both neutral, one neutral, or two
# different wheels.
LEGAL_LUG_PAIRS = ((0, 0),) + tuple((0, k) for k in range(1, 7)) + tuple(combinations(range(1, 7), 2))


@dataclass(frozen=True)
class M209Key:
    pins: tuple          # six tuples of bools, lengths WHEEL_SIZES
    lugs: tuple          # 27 pairs of ints in 0..6
    positions: tuple = (0, 0, 0, 0, 0, 0)

    cipher = "m209"

    def to_dict(self):
        return {
            "pins": ["".join("1" if p else "0" for p in wheel) for wheel in self.pins],
            "lugs": [list(b) for b in self.lugs],
            "positions": list(self.positions),
        }

    @classmethod
    def from_dict(cls, d):
        pins = tuple(tuple(c == "1" for c in w) if isinstance(w, str) else tuple(bool(v) for v in w)
                     for w in d["pins"])
        return cls(pins=pins, lugs=tuple(tuple(int(v) for v in b) for b in d["lugs"]),
                   positions=tuple(int(p) for p in d.get("positions", (0,) * 6)))


def validate(key):
    problems = []
    if len(key.pins) != 6 or tuple(len(w) for w in key.pins) != WHEEL_SIZES:
        problems.append("wheel lengths must be 26,25,23,21,19,17")
    if len(key.lugs) != N_BARS or any(len(b) != 2 for b in key.lugs):
        problems.append("need 27 bars with two lugs each")
    else:
        if any(not 0 <= v <= 6 for b in key.lugs for v in b):
            problems.append("lug out of range")
        if any(b[0] == b[1] != 0 for b in key.lugs):
            problems.append("two lugs of one bar on the same wheel")
    if len(key.positions) != 6:
        problems.append("need six wheel positions")
    else:
        for p, size in zip(key.positions, WHEEL_SIZES):
            if not 0 <= p < size:
                problems.append("wheel position out of range")
                break
    return problems


def displacement_table(lugs):
    """Displacement for each of the 64 active-pin patterns of one key."""
    masks = np.zeros(N_BARS, dtype=np.int64)
    for b, pair in enumerate(lugs):
        for lug in pair:
            if lug:
                masks[b] |= 1 << (lug - 1)
    patterns = np.arange(64)[:, None]
    return ((patterns & masks[None, :]) != 0).sum(axis=1)


def displacements(keys, length):
    """Per-letter displacement, shape ``(n, length)``, values in 0..27."""
    n = len(keys)
    table = np.empty((n, 64), dtype=np.int64)
    pattern = np.zeros((n, length), dtype=np.int64)
    t = np.arange(length)
    for i, key in enumerate(keys):
        problems = validate(key)
        if problems:
            raise KeyValidationError("m209", problems)
        table[i] = displacement_table(key.lugs)
        for w, (size, pins) in enumerate(zip(WHEEL_SIZES, key.pins)):
            active = np.array(pins, dtype=np.int64)
            pattern[i] |= active[(key.positions[w] + t) % size] << w
    return np.take_along_axis(table, pattern, axis=1)


def encrypt_batch(keys, x):
    d = displacements(keys, x.shape[1])
    return (25 - x + d) % 26


def encrypt(key, text):
    return single(encrypt_batch, key, text)


decrypt = encrypt
decrypt_batch = encrypt_batch


def sample_key(rng):
    pins = tuple(tuple(bool(v) for v in rng.integers(0, 2, size=size)) for size in WHEEL_SIZES)
    choice = rng.integers(0, len(LEGAL_LUG_PAIRS), size=N_BARS)
    lugs = tuple(LEGAL_LUG_PAIRS[c] for c in choice)
    positions = tuple(int(rng.integers(0, size)) for size in WHEEL_SIZES)
    return M209Key(pins=pins, lugs=lugs, positions=positions)

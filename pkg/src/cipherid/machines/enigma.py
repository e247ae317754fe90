"""Enigma I: plugboard, two stators, three stepping rotors and a reflector."""

from dataclasses import dataclass

import numpy as np

from ..alphabet import LETTERS
from .base import (
    KeyValidationError, check_position, check_reflector, check_wiring, inverse,
    resolve, single, through,
)
from .wiring import default_wiring

ROTOR_BANK = ("I", "II", "III", "IV", "V")
DEFAULT_STECKER_PAIRS = 10


@dataclass(frozen=True)
class EnigmaKey:
    """Rotors are listed left to right (slow, medium, fast).

    Each rotor/reflector/stator entry is either a wiring-file name or an
    explicit 26-letter wiring string.
    """

    rotors: tuple = ("I", "II", "III")
    positions: tuple = (0, 0, 0)
    rings: tuple = (0, 0, 0)
    stecker: tuple = ()
    reflector: str = "B"
    stators: tuple = ("ETW", "ETW")

    cipher = "enigma"

    def to_dict(self):
        return {
            "rotors": list(self.rotors), "positions": list(self.positions),
            "rings": list(self.rings), "stecker": list(self.stecker),
            "reflector": self.reflector, "stators": list(self.stators),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            rotors=tuple(d["rotors"]), positions=tuple(d["positions"]),
            rings=tuple(d.get("rings", (0, 0, 0))), stecker=tuple(d.get("stecker", ())),
            reflector=d.get("reflector", "B"), stators=tuple(d.get("stators", ("ETW", "ETW"))),
        )


def stecker_table(pairs):
    table = np.arange(26)
    for pair in pairs:
        a, b = LETTERS.index(pair[0]), LETTERS.index(pair[1])
        table[a], table[b] = b, a
    return table


def validate(key, wiring=None):
    wset = wiring or default_wiring("enigma")
    problems = []
    if len(key.rotors) != 3 or len(key.positions) != 3 or len(key.rings) != 3:
        return ["need exactly three rotors, positions and rings"]
    for ref in key.rotors:
        check_wiring(wset, "rotor", ref, "rotor", problems)
    named = [r for r in key.rotors if len(r) != 26]
    if len(set(named)) != len(named):
        problems.append("rotor used twice")
    for p in key.positions:
        check_position(p, 26, "rotor position", problems)
    for r in key.rings:
        check_position(r, 26, "ring setting", problems)
    if len(key.stators) != 2:
        problems.append("need exactly two stators")
    for ref in key.stators:
        check_wiring(wset, "stator", ref, "stator", problems)
    check_reflector(wset, key.reflector, problems)
    seen = set()
    if len(key.stecker) > 13:
        problems.append("more than 13 stecker pairs")
    for pair in key.stecker:
        if len(pair) != 2 or not all(c in LETTERS for c in pair) or pair[0] == pair[1]:
            problems.append(f"malformed stecker pair {pair!r}")
            continue
        if seen & set(pair):
            problems.append("stecker pairs not disjoint")
        seen |= set(pair)
    return problems


def _tables(keys, wset):
    n = len(keys)
    fwd = np.empty((n, 3, 26), dtype=np.int64)
    notch = np.zeros((n, 3, 26), dtype=bool)
    stat = np.empty((n, 2, 26), dtype=np.int64)
    refl = np.empty((n, 26), dtype=np.int64)
    plug = np.empty((n, 26), dtype=np.int64)
    for i, key in enumerate(keys):
        problems = validate(key, wset)
        if problems:
            raise KeyValidationError("enigma", problems)
        for j, ref in enumerate(key.rotors):
            fwd[i, j], notches = resolve(wset, "rotor", ref)
            notch[i, j, list(notches)] = True
        for j, ref in enumerate(key.stators):
            stat[i, j], _ = resolve(wset, "stator", ref)
        refl[i], _ = resolve(wset, "reflector", key.reflector)
        plug[i] = stecker_table(key.stecker)
    pos = np.array([k.positions for k in keys], dtype=np.int64).reshape(n, 3)
    rings = np.array([k.rings for k in keys], dtype=np.int64).reshape(n, 3)
    return fwd, notch, stat, refl, plug, pos, rings


def rotor_positions(pos0, notch, length):
    """Positions in effect for each of `length` keypresses, shape ``(n, length, 3)``.

    The rotors step before each letter is enciphered; the medium rotor
    steps when either the fast rotor or the medium rotor itself sits at a
    notch (the double step).
    """
    n = pos0.shape[0]
    rows = np.arange(n)
    pos = pos0.copy()
    out = np.empty((n, length, 3), dtype=np.int64)
    for t in range(length):
        m_at = notch[rows, 1, pos[:, 1]]
        f_at = notch[rows, 2, pos[:, 2]]
        pos[:, 0] += m_at
        pos[:, 1] += m_at | f_at
        pos[:, 2] += 1
        pos %= 26
        out[:, t] = pos
    return out


def encrypt_batch(keys, x, wiring=None):
    wset = wiring or default_wiring("enigma")
    fwd, notch, stat, refl, plug, pos0, rings = _tables(keys, wset)
    inv = inverse(fwd)
    shifts = rotor_positions(pos0, notch, x.shape[1]) - rings[:, None, :]
    stat_inv = inverse(stat)

    y = through(plug, x)
    for j in range(2):
        y = through(stat[:, j], y)
    for j in (2, 1, 0):
        y = through(fwd[:, j], y, shifts[:, :, j])
    y = through(refl, y)
    for j in (0, 1, 2):
        y = through(inv[:, j], y, shifts[:, :, j])
    for j in (1, 0):
        y = through(stat_inv[:, j], y)
    return through(plug, y)


def encrypt(key, text, wiring=None):
    return single(encrypt_batch, key, text, wiring=wiring)


decrypt = encrypt
decrypt_batch = encrypt_batch


def sample_key(rng, stecker_pairs=DEFAULT_STECKER_PAIRS, randomize_rotors=True):
    if randomize_rotors:
        rotors = tuple(str(r) for r in rng.choice(ROTOR_BANK, size=3, replace=False))
    else:
        rotors = ("I", "II", "III")
    positions = tuple(int(p) for p in rng.integers(0, 26, size=3))
    letters = rng.permutation(26)[: 2 * stecker_pairs]
    stecker = tuple(sorted(
        "".join(sorted(LETTERS[a] + LETTERS[b])) for a, b in zip(letters[0::2], letters[1::2])
    ))
    return EnigmaKey(rotors=rotors, positions=positions, stecker=stecker)

"""Sigaba (ECM Mark II).

Five cipher rotors encipher the letter. Five control rotors and five index
rotors decide which cipher rotors move: the control bank is driven at four
fixed inputs (F, G, H, I), its 26 outputs are bundled into index inputs 1-9
(index input 0 is never driven), and the ten index outputs are OR-ed in
pairs onto the five cipher-rotor step magnets. Four driven lines and a
permuting index bank mean between one and four cipher rotors step per
letter.

Control rotors 0 and 4 never move; rotor 2 is fast, rotor 3 medium and
rotor 1 slow, each carrying the next one when it leaves position O. Index
rotors are set by hand and never step.
"""

from dataclasses import dataclass

import numpy as np

from .base import (
    KeyValidationError, RotorSetting, check_position, inverse, reversed_wiring, single, through,
)
from .wiring import default_wiring

CONTROL_INPUTS = (5, 6, 7, 8)  # F G H I

# Control output letter -> index input line.
INDEX_INPUT = np.array(
    [9, 1, 2, 3, 3, 4, 4, 4, 5, 5, 5, 6, 6, 6, 6, 7, 7, 7, 7, 7, 8, 8, 8, 8, 8, 8],
    dtype=np.int64,
)
# Index output line -> cipher rotor it steps: {1,2}, {3,4}, {5,6}, {7,8}, {9,0}.
STEP_LINE = np.array([4, 0, 0, 1, 1, 2, 2, 3, 3, 4], dtype=np.int64)

FAST, MEDIUM, SLOW = 2, 3, 1
CARRY_POSITION = 14  # O


@dataclass(frozen=True)
class SigabaKey:
    cipher_rotors: tuple
    control_rotors: tuple
    index_rotors: tuple

    cipher = "sigaba"

    def to_dict(self):
        return {
            "cipher_rotors": [r.to_list() for r in self.cipher_rotors],
            "control_rotors": [r.to_list() for r in self.control_rotors],
            "index_rotors": [r.to_list() for r in self.index_rotors],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(*(tuple(RotorSetting.from_list(v) for v in d[f])
                     for f in ("cipher_rotors", "control_rotors", "index_rotors")))


def default_key():
    return SigabaKey(
        cipher_rotors=tuple(RotorSetting(str(i)) for i in range(5)),
        control_rotors=tuple(RotorSetting(str(i)) for i in range(5, 10)),
        index_rotors=tuple(RotorSetting(str(i)) for i in range(5)),
    )


def validate(key, wiring=None):
    wset = wiring or default_wiring("sigaba")
    problems = []
    if len(key.cipher_rotors) != 5 or len(key.control_rotors) != 5 or len(key.index_rotors) != 5:
        return ["need five cipher, five control and five index rotors"]
    bank, index_bank = wset.of_kind("rotor"), wset.of_kind("index")
    names = [r.name for r in (*key.cipher_rotors, *key.control_rotors)]
    for name in names:
        if name not in bank:
            problems.append(f"unknown rotor {name!r}")
    if len(set(names)) != len(names):
        problems.append("duplicate rotor selection")
    for r in (*key.cipher_rotors, *key.control_rotors):
        check_position(r.position, 26, "rotor position", problems)
    inames = [r.name for r in key.index_rotors]
    for name in inames:
        if name not in index_bank:
            problems.append(f"unknown index rotor {name!r}")
    if len(set(inames)) != len(inames):
        problems.append("duplicate index rotor")
    for r in key.index_rotors:
        check_position(r.position, 10, "index position", problems)
    return problems


def _wiring(wset, kind, setting):
    w = wset.get(kind, setting.name).array()
    return reversed_wiring(w) if setting.reversed else w


def _tables(keys, wset):
    n = len(keys)
    cip = np.empty((n, 5, 26), dtype=np.int64)
    ctl = np.empty((n, 5, 26), dtype=np.int16)
    index_perm = np.empty((n, 10), dtype=np.int64)
    cip_pos = np.empty((n, 5), dtype=np.int64)
    ctl_pos = np.empty((n, 5), dtype=np.int16)
    cache = {}

    def wiring(kind, setting):
        k = (kind, setting.name, setting.reversed)
        if k not in cache:
            cache[k] = _wiring(wset, kind, setting)
        return cache[k]

    for i, key in enumerate(keys):
        problems = validate(key, wset)
        if problems:
            raise KeyValidationError("sigaba", problems)
        for j, r in enumerate(key.cipher_rotors):
            cip[i, j] = wiring("rotor", r)
            cip_pos[i, j] = r.position
        for j, r in enumerate(key.control_rotors):
            ctl[i, j] = wiring("rotor", r)
            ctl_pos[i, j] = r.position
        # Index rotors never move, so the bank collapses to one permutation.
        perm = np.arange(10)
        for r in key.index_rotors:
            w = wiring("index", r)
            perm = (w[(perm + r.position) % 10] - r.position) % 10
        index_perm[i] = perm
    return cip, ctl, index_perm, cip_pos, ctl_pos


def control_positions(pos0, length):
    """Control-rotor positions in force while each letter is processed."""
    n = pos0.shape[0]
    pos = pos0.copy()
    out = np.empty((n, length, 5), dtype=pos0.dtype)
    for t in range(length):
        out[:, t] = pos
        m_step = pos[:, FAST] == CARRY_POSITION
        s_step = m_step & (pos[:, MEDIUM] == CARRY_POSITION)
        pos[:, FAST] += 1
        pos[:, MEDIUM] += m_step
        pos[:, SLOW] += s_step
        pos %= 26
    return out


def _trace(keys, length, wset):
    cip, ctl, index_perm, cip_pos, ctl_pos = _tables(keys, wset)
    n = len(keys)
    cpos = control_positions(ctl_pos, length)

    lines = np.broadcast_to(np.array(CONTROL_INPUTS, dtype=np.int16), (n, length, 4))
    for j in range(5):
        lines = through(ctl[:, j], lines, cpos[:, :, j, None])
    index_out = through(index_perm, INDEX_INPUT[lines], size=10)
    steps = np.zeros((n, length, 5), dtype=bool)
    rows = np.arange(n)[:, None, None]
    steps[rows, np.arange(length)[None, :, None], STEP_LINE[index_out]] = True

    moved = np.cumsum(steps, axis=1) - steps
    cipher_positions = (cip_pos[:, None, :] + moved) % 26
    return cip, cipher_positions, steps, cpos


def trace(keys, length, wiring=None):
    """Stepping trajectory for a batch of keys.

    Returns a dict with ``steps`` (n, L, 5) booleans saying which cipher
    rotors step after each letter, ``cipher_positions`` (n, L, 5) in force
    for each letter, ``control_positions`` (n, L, 5) and
    ``index_positions`` (n, L, 5).
    """
    wset = wiring or default_wiring("sigaba")
    _, cipher_positions, steps, cpos = _trace(keys, length, wset)
    index_pos = np.array([[r.position for r in k.index_rotors] for k in keys], dtype=np.int64)
    return {
        "steps": steps,
        "cipher_positions": cipher_positions,
        "control_positions": cpos,
        "index_positions": np.broadcast_to(index_pos[:, None, :], (len(keys), length, 5)),
    }


def encrypt_batch(keys, x, wiring=None, decrypt=False):
    cip, pos, _, _ = _trace(keys, x.shape[1], wiring or default_wiring("sigaba"))
    y = x
    if decrypt:
        inv = inverse(cip)
        for j in (4, 3, 2, 1, 0):
            y = through(inv[:, j], y, pos[:, :, j])
    else:
        for j in range(5):
            y = through(cip[:, j], y, pos[:, :, j])
    return y


def decrypt_batch(keys, x, wiring=None):
    return encrypt_batch(keys, x, wiring=wiring, decrypt=True)


def encrypt(key, text, wiring=None):
    return single(encrypt_batch, key, text, wiring=wiring)


def decrypt(key, text, wiring=None):
    return single(encrypt_batch, key, text, wiring=wiring, decrypt=True)


def sample_key(rng, wiring=None):
    wset = wiring or default_wiring("sigaba")
    bank = sorted(wset.of_kind("rotor"), key=int)
    order = rng.permutation(len(bank))[:10]
    flips = rng.integers(0, 2, size=10)
    positions = rng.integers(0, 26, size=10)
    slots = [RotorSetting(bank[o], bool(f), int(p)) for o, f, p in zip(order, flips, positions)]
    ibank = sorted(wset.of_kind("index"), key=int)
    iorder = rng.permutation(len(ibank))[:5]
    ipos = rng.integers(0, 10, size=5)
    index = tuple(RotorSetting(ibank[o], False, int(p)) for o, p in zip(iorder, ipos))
    return SigabaKey(tuple(slots[:5]), tuple(slots[5:]), index)

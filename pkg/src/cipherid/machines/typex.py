"""Typex: two stators and three multi-notch stepping rotors around a reflector.

Every rotor slot may hold its rotor reversed. The stators never move; the
medium rotor steps whenever the fast rotor sits on one of its notches and
the slow rotor steps when the medium rotor both steps and sits on a notch.
With nine notches per rotor the medium and slow rotors move several times
per revolution of their neighbour.
"""

from dataclasses import dataclass

import numpy as np

from .base import (
    KeyValidationError, RotorSetting, check_position, check_reflector, inverse, resolve,
    reversed_wiring, single, through,
)
from .wiring import default_wiring


@dataclass(frozen=True)
class TypexKey:
    """Stators in signal order; stepping rotors left to right (slow, medium, fast)."""

    stators: tuple = (RotorSetting("A"), RotorSetting("B"))
    rotors: tuple = (RotorSetting("C"), RotorSetting("D"), RotorSetting("E"))
    reflector: str = "R"

    cipher = "typex"

    def to_dict(self):
        return {
            "stators": [s.to_list() for s in self.stators],
            "rotors": [r.to_list() for r in self.rotors],
            "reflector": self.reflector,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            stators=tuple(RotorSetting.from_list(s) for s in d["stators"]),
            rotors=tuple(RotorSetting.from_list(r) for r in d["rotors"]),
            reflector=d.get("reflector", "R"),
        )


def validate(key, wiring=None):
    wset = wiring or default_wiring("typex")
    problems = []
    if len(key.stators) != 2:
        problems.append("need exactly two stators")
    if len(key.rotors) != 3:
        problems.append("need exactly three stepping rotors")
    bank = wset.of_kind("rotor")
    names = [s.name for s in (*key.stators, *key.rotors)]
    for name in names:
        if name not in bank:
            problems.append(f"unknown rotor {name!r}")
    if len(set(names)) != len(names):
        problems.append("rotor used twice")
    for s in (*key.stators, *key.rotors):
        check_position(s.position, 26, "rotor position", problems)
    for s in key.rotors:
        if s.name in bank and len(bank[s.name].notches) < 2:
            problems.append(f"stepping rotor {s.name!r} needs several notches")
    check_reflector(wset, key.reflector, problems)
    return problems


def _slot(wset, setting):
    wiring, notches = resolve(wset, "rotor", setting.name)
    mask = np.zeros(26, dtype=bool)
    mask[list(notches)] = True
    if setting.reversed:
        wiring = reversed_wiring(wiring)
        mask = mask[(-np.arange(26)) % 26]
    return wiring, mask


def _tables(keys, wset):
    n = len(keys)
    stat = np.empty((n, 2, 26), dtype=np.int64)
    stat_pos = np.empty((n, 2), dtype=np.int64)
    fwd = np.empty((n, 3, 26), dtype=np.int64)
    notch = np.empty((n, 3, 26), dtype=bool)
    pos0 = np.empty((n, 3), dtype=np.int64)
    refl = np.empty((n, 26), dtype=np.int64)
    for i, key in enumerate(keys):
        problems = validate(key, wset)
        if problems:
            raise KeyValidationError("typex", problems)
        for j, s in enumerate(key.stators):
            stat[i, j], _ = _slot(wset, s)
            stat_pos[i, j] = s.position
        for j, s in enumerate(key.rotors):
            fwd[i, j], notch[i, j] = _slot(wset, s)
            pos0[i, j] = s.position
        refl[i], _ = resolve(wset, "reflector", key.reflector)
    return stat, stat_pos, fwd, notch, pos0, refl


def rotor_positions(pos0, notch, length):
    """Stepping-rotor positions for each keypress, shape ``(n, length, 3)``."""
    n = pos0.shape[0]
    rows = np.arange(n)
    pos = pos0.copy()
    out = np.empty((n, length, 3), dtype=np.int64)
    for t in range(length):
        m_step = notch[rows, 2, pos[:, 2]]
        s_step = m_step & notch[rows, 1, pos[:, 1]]
        pos[:, 0] += s_step
        pos[:, 1] += m_step
        pos[:, 2] += 1
        pos %= 26
        out[:, t] = pos
    return out


def encrypt_batch(keys, x, wiring=None):
    wset = wiring or default_wiring("typex")
    stat, stat_pos, fwd, notch, pos0, refl = _tables(keys, wset)
    shifts = rotor_positions(pos0, notch, x.shape[1])
    stat_inv, inv = inverse(stat), inverse(fwd)

    y = x
    for j in range(2):
        y = through(stat[:, j], y, stat_pos[:, j, None])
    for j in (2, 1, 0):
        y = through(fwd[:, j], y, shifts[:, :, j])
    y = through(refl, y)
    for j in (0, 1, 2):
        y = through(inv[:, j], y, shifts[:, :, j])
    for j in (1, 0):
        y = through(stat_inv[:, j], y, stat_pos[:, j, None])
    return y


def encrypt(key, text, wiring=None):
    return single(encrypt_batch, key, text, wiring=wiring)


decrypt = encrypt
decrypt_batch = encrypt_batch


def sample_key(rng, wiring=None):
    wset = wiring or default_wiring("typex")
    bank = sorted(wset.of_kind("rotor"))
    names = rng.choice(bank, size=5, replace=False)
    flips = rng.integers(0, 2, size=5)
    positions = rng.integers(0, 26, size=5)
    slots = [RotorSetting(str(nm), bool(f), int(p)) for nm, f, p in zip(names, flips, positions)]
    refl = sorted(wset.of_kind("reflector"))[0]
    return TypexKey(stators=tuple(slots[:2]), rotors=tuple(slots[2:]), reflector=refl)

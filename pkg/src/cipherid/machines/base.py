"""Shared machinery for the simulators: key errors and vectorized rotor maps.

All simulators are batched: a batch is an ``(n, L)`` integer array holding n
messages of equal length, each enciphered under its own key. Per-message
tables are stacked into ``(n, size)`` arrays so a substitution is a single
fancy-indexing gather.
"""

from dataclasses import dataclass

import numpy as np

from ..alphabet import LETTERS, is_permutation, parse_perm, to_ints, to_text


class KeyValidationError(ValueError):
    """Raised when a key violates its machine's invariants."""

    def __init__(self, cipher, violations):
        self.cipher = cipher
        self.violations = list(violations)
        super().__init__(f"invalid {cipher} key: " + "; ".join(self.violations))


@dataclass(frozen=True)
class RotorSetting:
    """One rotor slot: wiring name, orientation and starting position."""

    name: str
    reversed: bool = False
    position: int = 0

    def to_list(self):
        return [self.name, bool(self.reversed), int(self.position)]

    @classmethod
    def from_list(cls, v):
        return cls(str(v[0]), bool(v[1]), int(v[2]))


def inverse(perm):
    """Inverse of a permutation (or stack of permutations along the last axis)."""
    return np.argsort(perm, axis=-1)


def reversed_wiring(wiring):
    """Wiring seen when a rotor is inserted back to front."""
    wiring = np.asarray(wiring)
    n = wiring.shape[-1]
    inv = inverse(wiring)
    idx = (-np.arange(n)) % n
    return (-inv[..., idx]) % n


def through(table, x, shift=None, size=26):
    """Pass a batch through per-message tables, optionally offset by `shift`.

    `table` is ``(n, size)``; `x` is ``(n, ...)`` and `shift` broadcasts to it.
    """
    base = (np.arange(table.shape[0], dtype=np.intp) * size).reshape((-1,) + (1,) * (np.ndim(x) - 1))
    flat = table.reshape(-1)
    if shift is None:
        return flat.take(base + x)
    idx = x + shift
    idx %= size
    out = flat.take(idx + base)
    out -= shift
    out %= size
    return out


def is_explicit_wiring(ref, size=26):
    return isinstance(ref, str) and len(ref) == size and ref.isalpha()


def resolve(wset, kind, ref):
    """Return (wiring array, notches) for a named element or an explicit wiring."""
    if is_explicit_wiring(ref):
        return parse_perm(ref), ()
    elem = wset.get(kind, ref)
    return elem.array(), elem.notches


def check_wiring(wset, kind, ref, label, problems):
    if is_explicit_wiring(ref):
        if not is_permutation(parse_perm(ref), 26):
            problems.append(f"{label} wiring not a bijection")
    elif ref not in wset.of_kind(kind):
        problems.append(f"unknown {label} {ref!r}")


def check_reflector(wset, ref, problems):
    local = []
    check_wiring(wset, "reflector", ref, "reflector", local)
    problems.extend(local)
    if local:
        return
    wiring, _ = resolve(wset, "reflector", ref)
    if not np.array_equal(wiring[wiring], np.arange(26)):
        problems.append("reflector not an involution")
    if np.any(wiring == np.arange(26)):
        problems.append("reflector fixed point")


def check_position(value, modulus, label, problems):
    if not isinstance(value, (int, np.integer)) or not 0 <= value < modulus:
        problems.append(f"{label} out of range")


def as_batch(texts):
    """Stack equal-length A-Z strings into an ``(n, L)`` array."""
    if isinstance(texts, np.ndarray):
        return texts.astype(np.int64, copy=False)
    rows = [to_ints(t) for t in texts]
    if len({len(r) for r in rows}) > 1:
        raise ValueError("batched messages must share one length")
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.stack(rows).astype(np.int64)


def single(fn, key, text, **kw):
    """Run a batched simulator on one message."""
    if text == "":
        return ""
    out = fn([key], as_batch([text]), **kw)
    return to_text(out[0])


__all__ = [
    "KeyValidationError", "RotorSetting", "LETTERS", "inverse", "reversed_wiring", "through",
    "resolve", "check_wiring", "check_reflector", "check_position", "as_batch", "single",
]

"""Letter/integer conversions shared by every module (A=0 .. Z=25)."""

import hashlib

import numpy as np

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"

# Class order used for labels, one-hot targets and tie-breaking.
CIPHERS = ("enigma", "m209", "purple", "sigaba", "typex")
CIPHER_NAMES = {
    "enigma": "Enigma",
    "m209": "M-209",
    "purple": "Purple",
    "sigaba": "Sigaba",
    "typex": "Typex",
}


def to_ints(text):
    """Convert an A-Z string to a uint8 array of letter indices."""
    try:
        raw = text.encode("ascii")
    except UnicodeEncodeError:
        raw = b"\xff"
    arr = np.frombuffer(raw, dtype=np.uint8) - ord("A")
    if arr.size and arr.max() > 25:
        bad = next(c for c in text if c not in LETTERS)
        raise ValueError(f"symbol {bad!r} is outside A-Z")
    return arr.astype(np.uint8)


def to_text(values):
    arr = np.asarray(values, dtype=np.uint8)
    return (arr + ord("A")).tobytes().decode("ascii")


def parse_perm(text, size=26):
    """Parse a permutation written over the first `size` symbols.

    Sizes up to 26 use letters; size 10 uses digits.
    """
    if size == 10:
        vals = [int(c) for c in text]
    else:
        vals = [LETTERS.index(c) for c in text.upper()]
    return np.array(vals, dtype=np.int64)


def format_perm(perm):
    perm = list(perm)
    if len(perm) == 10:
        return "".join(str(v) for v in perm)
    return "".join(LETTERS[v] for v in perm)


def is_permutation(perm, size):
    perm = np.asarray(perm)
    return perm.shape == (size,) and np.array_equal(np.sort(perm), np.arange(size))


def derive_seed(seed, *labels):
    """Deterministic named sub-seed; stable across platforms and runs."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "little") >> 1

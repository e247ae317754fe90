"""Simulators for Enigma, M-209, Purple, Sigaba and Typex.

Every machine offers ``encrypt(key, text)`` / ``decrypt(key, text)`` on
A-Z strings plus batched ``encrypt_batch(keys, x)`` on ``(n, L)`` integer
arrays. The helpers here dispatch on the key's ``cipher`` tag.
"""

from typing import Union

import numpy as np

from ..alphabet import CIPHERS
from . import enigma, m209, purple, sigaba, typex
from .base import KeyValidationError, RotorSetting, as_batch
from .enigma import EnigmaKey
from .m209 import M209Key
from .purple import PurpleKey
from .sigaba import SigabaKey
from .typex import TypexKey

MachineKey = Union[EnigmaKey, M209Key, PurpleKey, SigabaKey, TypexKey]

MODULES = {"enigma": enigma, "m209": m209, "purple": purple, "sigaba": sigaba, "typex": typex}
KEY_TYPES = {"enigma": EnigmaKey, "m209": M209Key, "purple": PurpleKey, "sigaba": SigabaKey, "typex": TypexKey}

# Spellings accepted wherever a cipher label is read.
_ALIASES = {"m-209": "m209", "ecm": "sigaba", "ecm-mark-ii": "sigaba"}


class UnknownCipherError(ValueError):
    pass


def canonical(cipher):
    name = str(cipher).strip().lower()
    name = _ALIASES.get(name, name)
    if name not in MODULES:
        raise UnknownCipherError(f"unknown cipher {cipher!r}; expected one of {', '.join(CIPHERS)}")
    return name


def module_for(key_or_cipher):
    if isinstance(key_or_cipher, str):
        return MODULES[canonical(key_or_cipher)]
    return MODULES[key_or_cipher.cipher]


def sample_key(cipher, seed, **options):
    """Draw a random key for `cipher`, reproducibly from `seed`.

    Enigma accepts ``stecker_pairs`` (default 10) and ``randomize_rotors``.
    """
    name = canonical(cipher)
    rng = np.random.default_rng(seed)
    return MODULES[name].sample_key(rng, **options)


def validate_key(key):
    """Return the list of violated key invariants (empty when the key is sound)."""
    if type(key) not in KEY_TYPES.values():
        return [f"not a machine key: {type(key).__name__}"]
    return module_for(key).validate(key)


def encrypt(key, text):
    return module_for(key).encrypt(key, text)


def decrypt(key, text):
    return module_for(key).decrypt(key, text)


def encrypt_batch(keys, x):
    """Encipher an ``(n, L)`` batch; all keys must belong to one machine."""
    mods = {k.cipher for k in keys}
    if len(mods) != 1:
        raise ValueError("a batch must use a single machine")
    return MODULES[mods.pop()].encrypt_batch(list(keys), as_batch(x))


def decrypt_batch(keys, x):
    mods = {k.cipher for k in keys}
    if len(mods) != 1:
        raise ValueError("a batch must use a single machine")
    return MODULES[mods.pop()].decrypt_batch(list(keys), as_batch(x))


def key_to_record(key):
    return {"cipher": key.cipher, **key.to_dict()}


def key_from_record(record):
    record = dict(record)
    name = canonical(record.pop("cipher"))
    try:
        return KEY_TYPES[name].from_dict(record)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise KeyValidationError(name, [f"malformed key record: {exc}"]) from exc


__all__ = [
    "MachineKey", "EnigmaKey", "M209Key", "PurpleKey", "SigabaKey", "TypexKey", "RotorSetting",
    "KeyValidationError", "UnknownCipherError", "canonical", "sample_key", "validate_key",
    "encrypt", "decrypt", "encrypt_batch", "decrypt_batch", "key_to_record", "key_from_record",
]

"""Reader/writer for wiring data files.

Format (one element per line, ``#`` starts a comment)::

    machine: enigma
    version: 1
    rotor I EKMFLGDQVZNTOWYHXUSPAIBRCJ Q
    reflector B YRUHQSLDPXNGOKMIEBFZCWVJAT

Each element line is ``<kind> <name> <permutation> [<notch letters>]``. The
permutation is written over the first n symbols of the alphabet (digits for
n = 10), index i mapping to the i-th symbol of the string.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from ..alphabet import LETTERS, format_perm, is_permutation

FORMAT_VERSION = 1


class WiringFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    kind: str
    name: str
    wiring: tuple
    notches: tuple = ()

    @property
    def size(self):
        return len(self.wiring)

    def array(self):
        return np.array(self.wiring, dtype=np.int64)


@dataclass(frozen=True)
class WiringSet:
    machine: str
    version: int
    elements: tuple = field(default_factory=tuple)

    def of_kind(self, kind):
        return {e.name: e for e in self.elements if e.kind == kind}

    def get(self, kind, name):
        try:
            return self.of_kind(kind)[name]
        except KeyError:
            raise KeyError(f"no {kind} named {name!r} in {self.machine} wiring") from None


def _decode(text, lineno):
    if text.isdigit():
        vals = [int(c) for c in text]
    else:
        if not text.isalpha():
            raise WiringFormatError(f"line {lineno}: bad permutation {text!r}")
        vals = [LETTERS.index(c) for c in text.upper()]
    if not is_permutation(vals, len(vals)):
        raise WiringFormatError(f"line {lineno}: {text!r} is not a permutation")
    return tuple(vals)


def parse_wiring(text):
    header = {}
    elements = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].endswith(":"):
            header[parts[0][:-1]] = " ".join(parts[1:])
            continue
        if len(parts) not in (3, 4):
            raise WiringFormatError(f"line {lineno}: expected 'kind name wiring [notches]'")
        kind, name, perm = parts[:3]
        wiring = _decode(perm, lineno)
        notches = ()
        if len(parts) == 4:
            notches = tuple(sorted(LETTERS.index(c) for c in parts[3].upper()))
            if any(n >= len(wiring) for n in notches):
                raise WiringFormatError(f"line {lineno}: notch outside rotor")
        elements.append(Element(kind, name, wiring, notches))
    if "machine" not in header:
        raise WiringFormatError("missing 'machine:' header")
    version = int(header.get("version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        raise WiringFormatError(f"unsupported wiring file version {version}")
    return WiringSet(header["machine"], version, tuple(elements))


def format_wiring(wset):
    lines = [f"machine: {wset.machine}", f"version: {wset.version}"]
    for e in wset.elements:
        line = f"{e.kind} {e.name} {format_perm(e.wiring)}"
        if e.notches:
            line += " " + "".join(LETTERS[n] for n in e.notches)
        lines.append(line)
    return "\n".join(lines) + "\n"


def read_wiring(path):
    return parse_wiring(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def default_wiring(machine):
    text = resources.files(__package__).joinpath("data", f"{machine}.txt").read_text("utf-8")
    wset = parse_wiring(text)
    if wset.machine != machine:
        raise WiringFormatError(f"data file for {machine} declares machine {wset.machine}")
    return wset

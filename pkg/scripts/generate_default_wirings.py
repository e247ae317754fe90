"""Regenerate the seeded Typex and Purple default wiring tables.

No authentic Typex wirings are public and the Purple reconstruction tables
are not bundled, so both machines ship fixed pseudo-random tables with the
historical structure. The output is committed; rerunning reproduces it.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cipherid.machines.wiring import Element, WiringSet, format_wiring  # noqa: E402

DATA = Path(__file__).resolve().parents[1] / "src" / "cipherid" / "machines" / "data"


def involution_without_fixed_points(rng, n=26):
    order = rng.permutation(n)
    perm = np.empty(n, dtype=int)
    for a, b in zip(order[0::2], order[1::2]):
        perm[a], perm[b] = b, a
    return perm


def typex(seed=1937):
    rng = np.random.default_rng(seed)
    elements = []
    for name in "ABCDEFGH":
        wiring = rng.permutation(26)
        notches = np.sort(rng.choice(26, size=9, replace=False))
        elements.append(Element("rotor", name, tuple(int(v) for v in wiring), tuple(int(v) for v in notches)))
    refl = involution_without_fixed_points(rng)
    elements.append(Element("reflector", "R", tuple(int(v) for v in refl)))
    return WiringSet("typex", 1, tuple(elements))


def purple(seed=1939):
    rng = np.random.default_rng(seed)
    elements = []
    for pos in range(25):
        elements.append(Element("sixes", f"{pos:02d}", tuple(int(v) for v in rng.permutation(6))))
    for switch in (1, 2, 3):
        for pos in range(25):
            perm = rng.permutation(20)
            elements.append(Element(f"twenties{switch}", f"{pos:02d}", tuple(int(v) for v in perm)))
    return WiringSet("purple", 1, tuple(elements))


def main():
    header = {
        "typex": "# Typex defaults: seeded random rotors (seed 1937), 9 notches each.\n",
        "purple": "# Purple defaults: seeded random switch tables (seed 1939).\n"
                  "# sixes: 25 permutations of 6; twentiesN: 25 permutations of 20 per switch.\n",
    }
    for wset in (typex(), purple()):
        path = DATA / f"{wset.machine}.txt"
        path.write_text(header[wset.machine] + format_wiring(wset), encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

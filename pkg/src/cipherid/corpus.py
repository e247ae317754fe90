"""Plaintext corpus: normalization to A-Z and window sampling."""

import ast
import hashlib
import sysconfig
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_KEEP = bytes(range(ord("A"), ord("Z") + 1))
# Fold a-z to A-Z, drop every other byte.
_UPPER = bytes.maketrans(b"abcdefghijklmnopqrstuvwxyz", b"ABCDEFGHIJKLMNOPQRSTUVWXYZ")
_DROP = bytes(b for b in range(256) if b not in _KEEP and not (ord("a") <= b <= ord("z")))


class EmptyCorpusError(ValueError):
    pass


class InsufficientCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizedCorpus:
    letters: str
    # Provenance only: two corpora with the same letters compare equal.
    source_digest: str = field(default="", compare=False)

    @property
    def length(self):
        return len(self.letters)

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class PlaintextWindow:
    text: str
    offset: int

    @property
    def length(self):
        return len(self.text)


def normalize(raw):
    """Keep only ASCII letters, uppercased, in their original order.

    Accepts str or bytes. Non-ASCII code points (accented letters, other
    scripts) are dropped, never transliterated.
    """
    if isinstance(raw, str):
        data = raw.encode("utf-8")
    else:
        data = bytes(raw)
        data.decode("utf-8")  # must be text
    digest = hashlib.sha256(data).hexdigest()
    # UTF-8 multi-byte sequences never contain ASCII bytes, so a bytewise
    # filter drops non-ASCII characters whole.
    letters = data.translate(_UPPER, _DROP).decode("ascii")
    if not letters:
        raise EmptyCorpusError("corpus contains no A-Z letters after normalization")
    return NormalizedCorpus(letters, digest)


def load_corpus(path):
    return normalize(Path(path).read_bytes())


def sample_windows(corpus, count, length, mode="fixed", seed=0):
    """Cut `count` windows of `length` letters from the corpus.

    ``fixed`` takes consecutive non-overlapping windows from offset 0 and
    ignores the seed; ``random`` draws offsets uniformly (windows may
    overlap) from a generator seeded with `seed`.
    """
    if count < 1 or length < 1:
        raise ValueError("count and length must be positive")
    if corpus.length < length:
        raise InsufficientCorpusError(
            f"corpus has {corpus.length} letters, fewer than one window of {length}")
    if mode == "fixed":
        if count * length > corpus.length:
            raise InsufficientCorpusError(
                f"{count} fixed windows of {length} need {count * length} letters, "
                f"corpus has {corpus.length}")
        offsets = np.arange(count) * length
    elif mode == "random":
        rng = np.random.default_rng(seed)
        offsets = rng.integers(0, corpus.length - length + 1, size=count)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
    letters = corpus.letters
    return [PlaintextWindow(letters[o:o + length], int(o)) for o in offsets]


def builtin_text():
    """English prose shipped with the Python installation.

    Concatenates the interpreter's reference documentation and the
    docstrings of the standard library, about 1.4 million letters. Used as
    a stand-in when no external corpus file is available.
    """
    from pydoc_data import topics

    parts = [topics.topics[k] for k in sorted(topics.topics)]
    root = Path(sysconfig.get_paths()["stdlib"])
    for path in sorted(root.rglob("*.py")):
        rel = path.relative_to(root).parts
        if any(p in ("test", "tests", "site-packages", "dist-packages", "idlelib") for p in rel):
            continue
        try:
            tree = ast.parse(path.read_text(encoding="utf-8"))
        except (SyntaxError, UnicodeDecodeError, ValueError):
            continue
        for node in ast.walk(tree):
            if isinstance(node, (ast.Module, ast.ClassDef, ast.FunctionDef, ast.AsyncFunctionDef)):
                doc = ast.get_docstring(node)
                if doc:
                    parts.append(doc)
    return "\n".join(parts)


__all__ = [
    "NormalizedCorpus", "PlaintextWindow", "EmptyCorpusError", "InsufficientCorpusError",
    "normalize", "load_corpus", "sample_windows", "builtin_text",
]

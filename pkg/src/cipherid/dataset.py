"""Labeled ciphertext datasets for the four plaintext/key scenarios.

A dataset on disk is a directory with three files:

``messages.jsonl``
    one JSON object per line: cipher, scenario, plaintext_id, key_id, text
``keys.jsonl``
    one key record per line, referenced by key_id
``manifest.txt``
    ``name = value`` lines (counts, length, seeds, corpus digest, version)

``plaintext_id`` is the corpus offset of the plaintext window, so any
message can be checked against the corpus it was generated from.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import machines
from .alphabet import CIPHERS, derive_seed, to_text
from .corpus import sample_windows

GENERATOR_VERSION = 1
SCENARIOS = ("fixed-fixed", "random-fixed", "fixed-random", "random-random")
FIXED_KEY_SEED = 0

MESSAGES_FILE = "messages.jsonl"
KEYS_FILE = "keys.jsonl"
MANIFEST_FILE = "manifest.txt"


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    plaintext_mode: str
    key_mode: str

    def __post_init__(self):
        if self.plaintext_mode not in ("fixed", "random") or self.key_mode not in ("fixed", "random"):
            raise ValueError(f"invalid scenario {self.plaintext_mode}-{self.key_mode}")

    @property
    def name(self):
        return f"{self.plaintext_mode}-{self.key_mode}"

    @classmethod
    def parse(cls, name):
        if isinstance(name, Scenario):
            return name
        if name not in SCENARIOS:
            raise ValueError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}")
        return cls(*name.split("-"))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Message:
    cipher: str
    scenario: str
    text: str
    plaintext_id: int
    key_id: int

    @property
    def length(self):
        return len(self.text)


@dataclass(frozen=True)
class Manifest:
    scenario: str
    per_cipher: int
    length: int
    seed: int
    counts: dict
    corpus_digest: str = ""
    generator_version: int = GENERATOR_VERSION

    def is_balanced(self):
        return len(set(self.counts.values())) == 1 and set(self.counts) == set(CIPHERS)


@dataclass(frozen=True)
class Dataset:
    messages: tuple
    manifest: Manifest
    keys: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.messages)

    def texts(self):
        return [m.text for m in self.messages]

    def labels(self):
        """Class index of every message in the fixed cipher order."""
        return np.array([CIPHERS.index(m.cipher) for m in self.messages], dtype=np.int64)

    def subset(self, indices):
        return Dataset(tuple(self.messages[i] for i in indices), self.manifest, self.keys)


def _generate_cipher(cipher, corpus, scenario, per_cipher, length, seed, fixed_windows):
    if scenario.plaintext_mode == "fixed":
        windows = fixed_windows
    else:
        windows = sample_windows(corpus, per_cipher, length, "random", derive_seed(seed, "plaintext", cipher))
    base = CIPHERS.index(cipher)
    if scenario.key_mode == "fixed":
        key = machines.sample_key(cipher, FIXED_KEY_SEED)
        keys = [key] * per_cipher
        key_ids = [base] * per_cipher
    else:
        keys = [machines.sample_key(cipher, derive_seed(seed, "key", cipher, i)) for i in range(per_cipher)]
        key_ids = [base * per_cipher + i for i in range(per_cipher)]
    x = np.stack([np.frombuffer(w.text.encode("ascii"), dtype=np.uint8) - 65 for w in windows])
    y = machines.encrypt_batch(keys, x.astype(np.int64))
    messages = [
        Message(cipher, scenario.name, to_text(y[i]), windows[i].offset, key_ids[i])
        for i in range(per_cipher)
    ]
    return messages, dict(zip(key_ids, keys))


def generate(corpus, scenario, per_cipher, length=1000, seed=0, threads=1):
    """Encrypt `per_cipher` windows under each of the five machines.

    Fixed plaintext shares one set of consecutive corpus windows across all
    ciphers; random plaintext draws fresh windows per (cipher, message).
    Fixed keys use ``sample_key(cipher, 0)`` for every message of a cipher;
    random keys draw one key per message from a named sub-seed. Output order
    is ciphers in class order, then message index, whatever `threads` is.
    """
    scenario = Scenario.parse(scenario)
    if per_cipher < 1:
        raise ValueError("per_cipher must be at least 1")
    fixed_windows = None
    if scenario.plaintext_mode == "fixed":
        fixed_windows = sample_windows(corpus, per_cipher, length, "fixed")

    def job(cipher):
        return _generate_cipher(cipher, corpus, scenario, per_cipher, length, seed, fixed_windows)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, CIPHERS))
    else:
        results = [job(c) for c in CIPHERS]
    messages, keys = [], {}
    for msgs, ks in results:
        messages.extend(msgs)
        keys.update(ks)
    manifest = Manifest(
        scenario=scenario.name, per_cipher=per_cipher, length=length, seed=seed,
        counts={c: per_cipher for c in CIPHERS}, corpus_digest=corpus.source_digest,
    )
    return Dataset(tuple(messages), manifest, keys)


def verify(dataset, corpus):
    """Indices of messages that do not decrypt to their corpus window."""
    bad = []
    for i, m in enumerate(dataset.messages):
        plain = corpus.letters[m.plaintext_id:m.plaintext_id + m.length]
        if machines.decrypt(dataset.keys[m.key_id], m.text) != plain:
            bad.append(i)
    return bad


# -- persistence -------------------------------------------------------------

def _format_manifest(manifest):
    lines = [
        f"generator_version = {manifest.generator_version}",
        f"scenario = {manifest.scenario}",
        f"per_cipher = {manifest.per_cipher}",
        f"length = {manifest.length}",
        f"seed = {manifest.seed}",
        f"corpus_digest = {manifest.corpus_digest}",
    ]
    lines += [f"count.{c} = {n}" for c, n in manifest.counts.items()]
    return "\n".join(lines) + "\n"


def parse_manifest(text, source="manifest"):
    values, counts = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DatasetFormatError(f"{source} line {lineno}: expected 'name = value'")
        name, value = (s.strip() for s in line.split("=", 1))
        if name.startswith("count."):
            counts[name[len("count."):]] = value
        else:
            values[name] = value
    try:
        return Manifest(
            scenario=values["scenario"], per_cipher=int(values["per_cipher"]),
            length=int(values["length"]), seed=int(values["seed"]),
            counts={c: int(n) for c, n in counts.items()},
            corpus_digest=values.get("corpus_digest", ""),
            generator_version=int(values.get("generator_version", GENERATOR_VERSION)),
        )
    except KeyError as exc:
        raise DatasetFormatError(f"{source}: missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise DatasetFormatError(f"{source}: {exc}") from None


def _dump(record):
    return json.dumps(record, separators=(",", ":"))


def save(dataset, path):
    """Write the dataset directory; returns the directory path."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / MESSAGES_FILE, "w", encoding="utf-8", newline="\n") as f:
        for m in dataset.messages:
            f.write(_dump({"cipher": m.cipher, "scenario": m.scenario, "plaintext_id": m.plaintext_id,
                           "key_id": m.key_id, "text": m.text}) + "\n")
    with open(path / KEYS_FILE, "w", encoding="utf-8", newline="\n") as f:
        for key_id in sorted(dataset.keys):
            f.write(_dump({"key_id": key_id, **machines.key_to_record(dataset.keys[key_id])}) + "\n")
    (path / MANIFEST_FILE).write_text(_format_manifest(dataset.manifest), encoding="utf-8")
    return path


def _read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            if not line.endswith("\n"):
                raise DatasetFormatError(f"{path.name} record {lineno}: truncated record")
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"{path.name} record {lineno}: {exc.msg}") from None
            if not isinstance(record, dict):
                raise DatasetFormatError(f"{path.name} record {lineno}: not an object")
            yield lineno, record


def load_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_FILE
    return parse_manifest(path.read_text(encoding="utf-8"), source=path.name)


def load(path):
    path = Path(path)
    manifest = load_manifest(path)
    messages = []
    for lineno, rec in _read_jsonl(path / MESSAGES_FILE):
        try:
            msg = Message(str(rec["cipher"]), str(rec["scenario"]), str(rec["text"]),
                          int(rec["plaintext_id"]), int(rec["key_id"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"{MESSAGES_FILE} record {lineno}: bad or missing field {exc}") from None
        if msg.cipher not in CIPHERS:
            raise DatasetFormatError(f"{MESSAGES_FILE} record {lineno}: unknown cipher {msg.cipher!r}")
        if msg.length != manifest.length:
            raise DatasetFormatError(
                f"{MESSAGES_FILE} record {lineno}: text has {msg.length} letters, expected {manifest.length}")
        messages.append(msg)
    expected = sum(manifest.counts.values())
    if len(messages) != expected:
        raise DatasetFormatError(
            f"{MESSAGES_FILE}: {len(messages)} records, manifest expects {expected} "
            f"(record {len(messages) + 1} missing)")
    keys = {}
    keys_path = path / KEYS_FILE
    if keys_path.exists():
        for lineno, rec in _read_jsonl(keys_path):
            try:
                key_id = int(rec.pop("key_id"))
                keys[key_id] = machines.key_from_record(rec)
            except (KeyError, ValueError) as exc:
                raise DatasetFormatError(f"{KEYS_FILE} record {lineno}: {exc}") from None
    return Dataset(tuple(messages), manifest, keys)

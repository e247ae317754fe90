"""Command-line entry point: ``cipherid gen | run | machine | features | inspect``.

Settings come from an optional YAML config file (``--config``); flags
override file values. Commands that write output also write the resolved
settings next to it as ``config.resolved.yaml``. The output directory
defaults to ``$CIPHERID_OUTPUT_DIR`` when set.

Exit codes: 0 success, 1 experiment failure, 2 usage or validation error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import classifiers, corpus, dataset, evaluation, features, machines
from .alphabet import CIPHERS

log = logging.getLogger("cipherid")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
OUTPUT_ENV = "CIPHERID_OUTPUT_DIR"
RESOLVED_CONFIG = "config.resolved.yaml"

DEFAULTS = {
    "corpus": None,
    "builtin_corpus": False,
    "dataset": None,
    "scenario": "random-random",
    "per_cipher": 1000,
    "length": 1000,
    "seed": 0,
    "features": list(features.KINDS),
    "models": list(classifiers.FAMILIES),
    "study": "suite",
    "lengths": [1000, 300, 50],
    "hyperparameters": {},
    "out": None,
    "threads": 1,
    "save_models": False,
}


class UsageError(Exception):
    """Bad flags, config or input files; maps to exit code 2."""


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _int_list(text):
    try:
        return [int(s) for s in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="cipherid", description="Rotor-machine ciphertext identification")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML config file; flags override its values")
        sp.add_argument("--corpus", help="plaintext corpus file")
        sp.add_argument("--builtin-corpus", action="store_true", default=None,
                        help="use the text shipped with the Python installation as corpus")
        sp.add_argument("--scenario", choices=dataset.SCENARIOS)
        sp.add_argument("--per-cipher", type=int)
        sp.add_argument("--length", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV})")

    g = sub.add_parser("gen", help="generate a labeled ciphertext dataset")
    common(g)

    r = sub.add_parser("run", help="run the scenario suite or the length study")
    common(r)
    r.add_argument("--dataset", help="existing dataset directory (otherwise generated inline)")
    r.add_argument("--study", choices=("suite", "length"))
    r.add_argument("--feature", "--features", dest="features", type=_csv_list)
    r.add_argument("--models", type=_csv_list)
    r.add_argument("--lengths", type=_int_list)
    r.add_argument("--save-models", action="store_true", default=None)
    r.add_argument("--dry-run", action="store_true", help="validate and print the plan, write nothing")

    m = sub.add_parser("machine", help="encrypt or decrypt stdin with one machine")
    m.add_argument("cipher")
    src = m.add_mutually_exclusive_group(required=True)
    src.add_argument("--seed", type=int, help="use sample_key(cipher, seed)")
    src.add_argument("--keyfile", help="key record (YAML or JSON)")
    mode = m.add_mutually_exclusive_group(required=True)
    mode.add_argument("--encrypt", action="store_true")
    mode.add_argument("--decrypt", action="store_true")
    m.add_argument("--show-key", action="store_true", help="print the key record to stderr")

    f = sub.add_parser("features", help="dump a feature matrix as CSV")
    f.add_argument("--dataset", required=True)
    f.add_argument("--kind", choices=features.KINDS, required=True)
    f.add_argument("--length", type=int, help="truncate messages first")
    f.add_argument("--out", required=True, help="CSV file to write")

    i = sub.add_parser("inspect", help="print a dataset manifest or a report file")
    i.add_argument("path")
    return p


# -- configuration -------------------------------------------------------------

def load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"--config: {path} is not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"--config: {path} must hold a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise UsageError(f"--config: unknown keys {', '.join(unknown)}")
    return data


def resolve(args):
    """Defaults, then config file, then flags."""
    cfg = dict(DEFAULTS)
    if os.environ.get(OUTPUT_ENV):
        cfg["out"] = os.environ[OUTPUT_ENV]
    cfg.update(load_config(getattr(args, "config", None)))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    for key in ("features", "models"):
        if isinstance(cfg[key], str):
            cfg[key] = _csv_list(cfg[key])
    return cfg


def validate(cfg, command):
    problems = []
    if cfg["scenario"] not in dataset.SCENARIOS:
        problems.append(f"--scenario: unknown scenario {cfg['scenario']!r}")
    for key in ("per_cipher", "length", "threads"):
        if not isinstance(cfg[key], int) or cfg[key] < 1:
            problems.append(f"--{key.replace('_', '-')}: must be a positive integer")
    if not isinstance(cfg["seed"], int):
        problems.append("--seed: must be an integer")
    needs_corpus = command == "gen" or (command == "run" and not cfg["dataset"])
    if needs_corpus and not cfg["builtin_corpus"]:
        if not cfg["corpus"]:
            problems.append("--corpus: no corpus path given (or pass --builtin-corpus)")
        elif not Path(cfg["corpus"]).is_file():
            problems.append(f"--corpus: file not found: {cfg['corpus']}")
    if command == "run":
        if cfg["dataset"] and not (Path(cfg["dataset"]) / dataset.MANIFEST_FILE).is_file():
            problems.append(f"--dataset: no dataset manifest in {cfg['dataset']}")
        bad = [k for k in cfg["features"] if k not in features.KINDS]
        if bad:
            problems.append(f"--feature: unknown kinds {', '.join(bad)}")
        bad = [m for m in cfg["models"] if m not in classifiers.FAMILIES]
        if bad:
            problems.append(f"--models: unknown families {', '.join(bad)}")
        if cfg["study"] not in ("suite", "length"):
            problems.append(f"--study: unknown study {cfg['study']!r}")
        if cfg["study"] == "length":
            if len(cfg["features"]) != 1 or cfg["features"][0] not in ("digram", "sequence"):
                problems.append("--feature: the length study takes exactly one of digram, sequence")
            if not cfg["lengths"] or any(int(L) < 2 for L in cfg["lengths"]):
                problems.append("--lengths: need lengths of at least 2")
        try:
            hyperparameter_overrides(cfg)
        except (TypeError, ValueError, UsageError) as exc:
            problems.append(f"hyperparameters: {exc}")
    if command in ("gen", "run") and not cfg["out"]:
        problems.append(f"--out: no output directory given (flag, config or ${OUTPUT_ENV})")
    if problems:
        raise UsageError("\n".join(problems))


def hyperparameter_overrides(cfg):
    """``{family: {kind: {name: value}}}`` from the config, as parameter records.

    Unlisted names keep the selected value for that (family, kind).
    """
    out = {}
    for family, per_kind in (cfg.get("hyperparameters") or {}).items():
        if family not in classifiers.FAMILIES:
            raise UsageError(f"unknown family {family!r}")
        for kind, values in (per_kind or {}).items():
            if kind not in features.KINDS:
                raise UsageError(f"unknown feature kind {kind!r}")
            base = classifiers.selected(family, kind).__dict__.copy()
            base.update(values or {})
            hp = classifiers.make_params(family, **base)
            hp.validate()
            out[(family, kind)] = hp
    return out


def write_resolved(cfg, out):
    clean = {k: v for k, v in cfg.items()}
    with open(Path(out) / RESOLVED_CONFIG, "w", encoding="utf-8") as f:
        yaml.safe_dump(clean, f, sort_keys=True)


def get_corpus(cfg):
    if cfg["builtin_corpus"] and not cfg["corpus"]:
        return corpus.normalize(corpus.builtin_text())
    try:
        return corpus.load_corpus(cfg["corpus"])
    except OSError as exc:
        raise UsageError(f"--corpus: cannot read {cfg['corpus']}: {exc.strerror}") from None
    except (corpus.EmptyCorpusError, UnicodeDecodeError) as exc:
        raise UsageError(f"--corpus: {exc}") from None


# -- commands ----------------------------------------------------------------

def cmd_gen(args):
    cfg = resolve(args)
    validate(cfg, "gen")
    corp = get_corpus(cfg)
    try:
        data = dataset.generate(corp, cfg["scenario"], cfg["per_cipher"], cfg["length"],
                                cfg["seed"], cfg["threads"])
    except corpus.InsufficientCorpusError as exc:
        raise UsageError(f"--corpus: {exc}") from None
    out = dataset.save(data, cfg["out"])
    write_resolved(cfg, out)
    for c, n in data.manifest.counts.items():
        print(f"{c:8s} {n}")
    print(f"{len(data)} messages of {cfg['length']} letters written to {out}")
    return EXIT_OK


def _plan(cfg):
    source = f"dataset {cfg['dataset']}" if cfg["dataset"] else (
        f"generate {cfg['scenario']} x {cfg['per_cipher']} per cipher, length {cfg['length']}, seed {cfg['seed']}")
    lines = [f"data: {source}", f"study: {cfg['study']}"]
    if cfg["study"] == "suite":
        lines.append(f"cells: {len(cfg['models'])} models x {len(cfg['features'])} features")
        lines += [f"  {m} x {k}" for k in cfg["features"] for m in cfg["models"]]
    else:
        lines.append(f"models: {', '.join(cfg['models'])}; feature {cfg['features'][0]}; "
                     f"lengths {', '.join(map(str, cfg['lengths']))}")
    lines.append(f"output: {cfg['out']}")
    return "\n".join(lines)


def cmd_run(args):
    cfg = resolve(args)
    validate(cfg, "run")
    if args.dry_run:
        print(_plan(cfg))
        print("dry run: nothing written")
        return EXIT_OK
    if cfg["dataset"]:
        try:
            data = dataset.load(cfg["dataset"])
        except dataset.DatasetFormatError as exc:
            raise UsageError(f"--dataset: {exc}") from None
    else:
        data = dataset.generate(get_corpus(cfg), cfg["scenario"], cfg["per_cipher"], cfg["length"],
                                cfg["seed"], cfg["threads"])
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_resolved(cfg, out)
    overrides = hyperparameter_overrides(cfg)
    scenario = data.manifest.scenario
    if cfg["study"] == "length":
        kind = cfg["features"][0]
        lengths = [L for L in cfg["lengths"] if L <= data.manifest.length]
        if len(lengths) != len(cfg["lengths"]):
            raise UsageError(f"--lengths: messages have only {data.manifest.length} letters")
        study = evaluation.length_study(data, lengths, tuple(cfg["models"]), kind, cfg["seed"],
                                        overrides, cfg["threads"])
        path = out / f"length_{scenario}_{kind}.csv"
        evaluation.write_length_table(path, study)
        summary = [f"length study, {scenario}, {kind}"]
        summary += [f"{L:6d} " + " ".join("  fail" if a is None else f"{a:.4f}" for a in accs)
                    for L, accs in study.rows()]
        errors = study.errors
    else:
        suite = evaluation.scenario_suite(
            dataset=data, seed=cfg["seed"], families=tuple(cfg["models"]), kinds=tuple(cfg["features"]),
            hyperparameters=overrides, threads=cfg["threads"], keep_models=cfg["save_models"])
        evaluation.write_accuracy_table(out / f"accuracy_{scenario}.csv", suite,
                                        tuple(cfg["models"]), tuple(cfg["features"]))
        summary = [f"scenario {scenario}: {len(suite.reports)} cells evaluated, {len(suite.errors)} failed"]
        for (family, kind), report in suite.reports.items():
            stem = f"{scenario}_{kind}_{family}"
            evaluation.write_confusion(out / f"{stem}_confusion.csv", report.confusion)
            evaluation.write_class_report(out / f"{stem}_report.csv", report)
            summary += ["", f"== {family} x {kind}", report.summary()]
            if report.metadata.get("adjusted"):
                summary.append(f"note: {report.metadata['adjusted']}")
        if cfg["save_models"]:
            (out / "models").mkdir(exist_ok=True)
            for (family, kind), model in suite.models.items():
                classifiers.save_model(model, out / "models" / f"{scenario}_{kind}_{family}.npz")
        errors = suite.errors
    for cell, err in errors.items():
        summary.append(f"FAILED {cell}: {err}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    print("\n".join(summary[:1] + [s for s in summary if s.startswith("FAILED")]))
    print(f"reports written to {out}")
    return EXIT_FAILURE if errors else EXIT_OK


def read_key(cipher, keyfile):
    try:
        with open(keyfile, encoding="utf-8") as f:
            record = yaml.safe_load(f)
    except OSError as exc:
        raise UsageError(f"--keyfile: cannot read {keyfile}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"--keyfile: {keyfile} is not valid YAML/JSON: {exc}") from None
    if not isinstance(record, dict):
        raise UsageError(f"--keyfile: {keyfile} must hold a key record")
    record.setdefault("cipher", cipher)
    if machines.canonical(record["cipher"]) != cipher:
        raise UsageError(f"--keyfile: key is for {record['cipher']}, not {cipher}")
    try:
        key = machines.key_from_record(record)
    except machines.KeyValidationError as exc:
        raise UsageError(f"--keyfile: {exc}") from None
    problems = machines.validate_key(key)
    if problems:
        raise UsageError(f"--keyfile: invalid {cipher} key: {'; '.join(problems)}")
    return key


def cmd_machine(args):
    try:
        cipher = machines.canonical(args.cipher)
    except machines.UnknownCipherError as exc:
        raise UsageError(str(exc)) from None
    key = machines.sample_key(cipher, args.seed) if args.keyfile is None else read_key(cipher, args.keyfile)
    if args.show_key:
        print(yaml.safe_dump(machines.key_to_record(key), sort_keys=False), file=sys.stderr)
    raw = sys.stdin.buffer.read()
    try:
        text = corpus.normalize(raw).letters
    except corpus.EmptyCorpusError:
        text = ""
    except UnicodeDecodeError:
        raise UsageError("stdin is not UTF-8 text") from None
    op = machines.encrypt if args.encrypt else machines.decrypt
    sys.stdout.write(op(key, text) + "\n")
    return EXIT_OK


def cmd_features(args):
    try:
        data = dataset.load(args.dataset)
    except (OSError, dataset.DatasetFormatError) as exc:
        raise UsageError(f"--dataset: {exc}") from None
    try:
        X = features.matrix(data.texts(), args.kind, length=args.length)
    except features.FeatureError as exc:
        raise UsageError(str(exc)) from None
    features.write_csv(args.out, X, data.labels())
    print(f"{X.shape[0]} rows x {X.shape[1]} {args.kind} features written to {args.out}")
    return EXIT_OK


def cmd_inspect(args):
    path = Path(args.path)
    if path.is_dir() and (path / dataset.MANIFEST_FILE).is_file():
        try:
            m = dataset.load_manifest(path)
        except dataset.DatasetFormatError as exc:
            raise UsageError(str(exc)) from None
        print(f"scenario       {m.scenario}")
        print(f"length         {m.length}")
        print(f"seed           {m.seed}")
        print(f"generator      v{m.generator_version}")
        print(f"corpus digest  {m.corpus_digest}")
        for c in CIPHERS:
            print(f"  {c:8s} {m.counts.get(c, 0)}")
        print(f"total          {sum(m.counts.values())} ({'balanced' if m.is_balanced() else 'unbalanced'})")
        return EXIT_OK
    if path.is_dir() and (path / "summary.txt").is_file():
        path = path / "summary.txt"
    if path.suffix == ".npz":
        try:
            model = classifiers.load_model(path)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"{path}: not a saved model: {exc}") from None
        print(f"family         {model.family}")
        print(f"hyperparameters {model.hyperparameters}")
        print(f"features       {model.n_features}")
        print(f"standardized   {model.standardized}")
        print(f"seed           {model.seed}")
        for flag in model.out_of_grid:
            print(f"flag           {flag}")
        return EXIT_OK
    if not path.is_file():
        raise UsageError(f"{path}: no dataset, report or model here")
    sys.stdout.write(path.read_text(encoding="utf-8"))
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "machine": cmd_machine, "features": cmd_features,
            "inspect": cmd_inspect}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cipherid {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except machines.KeyValidationError as exc:
        print(f"cipherid {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

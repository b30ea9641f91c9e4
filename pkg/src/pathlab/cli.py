"""Command-line runner: ``pathlab run <experiment> [--key value]...`` and ``pathlab list``.

Output files go to ``$PATHLAB_OUTPUT_ROOT/<experiment>/`` (default root
``pathlab-output``) unless ``--output-dir`` is given:

``data.csv``
    per-mesh (or per-member) measurements,
``report.csv``
    fitted slopes and summary quantities,
``metadata.txt``
    ``key = value`` lines with parameters, conventions and versions.

Every CSV row carries the config hash and the conventions in force.
"""

import argparse
import logging
import os
import sys

from .errors import ConfigError, PathlabError
from .experiments import CONVENTIONS, FORMAT_VERSION, get_experiment, list_experiments
from .io import config_hash, ensure_dir, write_csv, write_sidecar

__all__ = ["main", "run", "load_config", "OUTPUT_ENV"]

OUTPUT_ENV = "PATHLAB_OUTPUT_ROOT"
DEFAULT_ROOT = "pathlab-output"

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 2, 3


def load_config(path):
    """Flat ``key = value`` config file; ``#`` starts a comment."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path!r}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("config", f"line {lineno} of {path!r} is not 'key = value'")
            k, _, v = line.partition("=")
            out[k.strip()] = v.strip()
    return out


def _parse_overrides(tokens):
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) < 3:
            raise ConfigError(tok, "expected --key value")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(key, "missing value")
            val = tokens[i + 1]
            i += 2
        out[key.replace("-", "_")] = val
    return out


def run(name, overrides=None, config_file=None, output_dir=None):
    """Run an experiment and write its files.

    Returns
    -------
    str
        The output directory.
    """
    exp = get_experiment(name)
    params = {}
    if config_file is not None:
        params.update(load_config(config_file))
        params.pop("experiment", None)
    params.update(overrides or {})
    values = exp.resolve(params)  # type-check before any computation
    result = exp.run(params)
    hashed = {"experiment": name, "format_version": FORMAT_VERSION}
    hashed.update({k: v for k, v in result.metadata.items() if k.startswith("param.")})
    digest = config_hash(hashed)
    if output_dir is None:
        output_dir = os.path.join(os.environ.get(OUTPUT_ENV, DEFAULT_ROOT), name)
    ensure_dir(output_dir)
    extra = {"config_hash": digest, "conventions": CONVENTIONS}
    write_csv(os.path.join(output_dir, "data.csv"), result.data_columns, result.data_rows, extra)
    write_csv(os.path.join(output_dir, "report.csv"), result.report_columns, result.report_rows, extra)
    meta = {"config_hash": digest, **result.metadata}
    write_sidecar(os.path.join(output_dir, "metadata.txt"), meta)
    logging.getLogger(__name__).info("wrote %s (%d parameters)", output_dir, len(values))
    return output_dir


def _print_catalog(stream):
    rows = list_experiments()
    width = max(len(n) for n, _, _ in rows)
    for name, desc, anchor in rows:
        stream.write(f"{name:<{width}}  {desc} [{anchor}]\n")


def main(argv=None):
    parser = argparse.ArgumentParser(prog="pathlab", description="Path-integral approximation lab")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the experiment catalog")
    p_run = sub.add_parser("run", help="run a named experiment")
    p_run.add_argument("experiment")
    p_run.add_argument("--config", help="flat key = value file")
    p_run.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV}/<experiment>)")
    args, rest = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "list":
        if rest:
            parser.error(f"unrecognized arguments: {' '.join(rest)}")
        _print_catalog(sys.stdout)
        return EXIT_OK
    try:
        overrides = _parse_overrides(rest)
        out = run(args.experiment, overrides, args.config, args.output_dir)
    except ConfigError as exc:
        sys.stderr.write(f"pathlab: configuration error: {exc}\n")
        return EXIT_CONFIG
    except PathlabError as exc:
        sys.stderr.write(f"pathlab: {args.experiment} failed: {type(exc).__name__}: {exc}\n")
        return EXIT_FAILURE
    sys.stdout.write(f"{out}\n")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

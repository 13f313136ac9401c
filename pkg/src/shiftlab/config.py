"""Experiment configuration: a structured key-value text file.

INI-style sections; the schema is validated strictly (unknown sections or
keys are rejected) and seeds are mandatory for every randomized step, so a
config fully determines its outputs.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction


class ConfigError(ValueError):
    pass


PIPELINES = (
    "geometry-checks",
    "entropy",
    "tile",
    "target",
    "markers",
    "embed",
    "full-pipeline",
)


def _parse_int(v):
    return int(v)


def _parse_str(v):
    return v


def _parse_fraction(v):
    return Fraction(v)


def _parse_span(v):
    lo, _, hi = v.partition("..")
    try:
        return int(lo), int(hi)
    except ValueError as exc:
        raise ConfigError(f"bad span {v!r} (expected lo..hi)") from exc


def _parse_spans(v):
    return tuple(_parse_span(tok) for tok in v.split("x"))


def _parse_int_list(v):
    return tuple(int(tok) for tok in v.replace(",", " ").split())


def _parse_pair(v):
    toks = v.replace(",", " ").split()
    if len(toks) != 2:
        raise ConfigError(f"expected two numbers, got {v!r}")
    return float(toks[0]), float(toks[1])


# section -> key -> (required, parser); sections keyed by pipeline
SCHEMA = {
    "run": {
        "pipeline": (True, _parse_str),
        "seed": (True, _parse_int),
        "threads": (False, _parse_int),
    },
    "output": {
        "report": (False, _parse_str),
        "csv": (False, _parse_str),
    },
    "geometry-checks": {
        "instances": (False, _parse_int),
    },
    "entropy": {
        "sft": (True, _parse_str),
        "windows": (True, _parse_span),
        "mode": (False, _parse_str),
    },
    "tile": {
        "shapes": (True, _parse_str),
        "l": (True, _parse_str),
        "window": (True, _parse_spans),
        "eps": (True, _parse_fraction),
        "out": (False, _parse_str),
    },
    "target": {
        "lengths": (True, _parse_int_list),
        "eps": (True, _parse_fraction),
        "band": (False, _parse_pair),
        "eval_length": (False, _parse_int),
    },
    "markers": {
        "kit": (False, _parse_str),
        "instance": (False, _parse_str),
        "r": (False, _parse_int),
        "scan": (False, _parse_span),
    },
    "embed": {
        "instance": (True, _parse_str),
        "window": (True, _parse_span),
        "samples": (False, _parse_int),
        "eps": (False, _parse_fraction),
    },
    "full-pipeline": {
        "window": (False, _parse_span),
        "samples": (False, _parse_int),
    },
}


@dataclass
class ExperimentConfig:
    pipeline: str
    seed: int
    threads: int = 1
    report_path: str | None = None
    csv_path: str | None = None
    options: dict = field(default_factory=dict)


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    if "run" not in cp:
        raise ConfigError("missing [run] section")
    pipeline = cp["run"].get("pipeline")
    if pipeline not in PIPELINES:
        raise ConfigError(f"unknown pipeline {pipeline!r}; choose from {PIPELINES}")
    allowed_sections = {"run", "output", pipeline}
    for section in cp.sections():
        if section not in allowed_sections:
            raise ConfigError(f"unexpected section [{section}] for pipeline {pipeline}")
        schema = SCHEMA[section]
        for key in cp[section]:
            if key not in schema:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
        for key, (required, _) in schema.items():
            if required and key not in cp[section]:
                raise ConfigError(f"missing required key {key!r} in [{section}]")
    # required sections present?
    if pipeline in SCHEMA and pipeline not in cp:
        required = [k for k, (req, _) in SCHEMA[pipeline].items() if req]
        if required:
            raise ConfigError(f"missing [{pipeline}] section with keys {required}")
    options = {}
    if pipeline in cp:
        for key, raw in cp[pipeline].items():
            _, parser = SCHEMA[pipeline][key]
            try:
                options[key] = parser(raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"bad value for {key!r} in [{pipeline}]: {exc}") from exc
    run = cp["run"]
    out = cp["output"] if "output" in cp else {}
    try:
        seed = int(run["seed"])
    except (KeyError, ValueError) as exc:
        raise ConfigError("run.seed must be an integer (seeds are mandatory)") from exc
    return ExperimentConfig(
        pipeline=pipeline,
        seed=seed,
        threads=int(run.get("threads", 1)),
        report_path=out.get("report"),
        csv_path=out.get("csv"),
        options=options,
    )


def validate_embed_options(options: dict):
    eps = options.get("eps")
    if eps is not None and not eps < Fraction(1, 3):
        raise ConfigError(f"eps must be < 1/3, got {eps}")

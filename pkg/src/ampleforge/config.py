"""Configuration loading: defaults → YAML overlay → argparse overlay."""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, NoReturn

import yaml

from ampleforge.errors import UsageError, VectorSyntaxError
from ampleforge.lattice import ClassVector, PositivityKind, parse_vector


@dataclass
class SearchConfig:
    """Prover limits.

    Attributes:
        max_depth: Deepest glue nesting tried by iterative deepening.
        node_budget: Node expansions before the search gives up as
            Inconclusive.
        min_inner_degree: Smallest degree s of a square-family inner
            vector (s; 1^{s^2}) before scaling.
        max_inner_degree: Largest such s.
        jobs: Worker threads for root-level branches. 1 keeps runs
            reproducible.
    """

    max_depth: int = 16
    # 10^6 expansions
    node_budget: int = 1_000_000
    min_inner_degree: int = 1
    max_inner_degree: int = 64
    jobs: int = 1


@dataclass
class ProbeConfig:
    """Bounds for the Cremona-orbit indecomposability probe.

    Attributes:
        degree_bound: Orbit members with a larger degree are not explored.
        max_members: Stop after this many distinct orbit members.
    """

    degree_bound: int = 100
    max_members: int = 500


@dataclass
class TableConfig:
    """Bounds-table generation.

    Attributes:
        max_n: Largest N listed.
        node_budget: Prover budget per conjecture target.
        max_depth: Prover depth per conjecture target.
        certificate_dir: When set, every certificate backing a proved
            bound is written there as N<n>.json.
    """

    max_n: int = 60
    node_budget: int = 20_000
    max_depth: int = 8
    certificate_dir: str | None = None


@dataclass
class VerifyConfig:
    """Verifier settings.

    Attributes:
        strict: Refuse assumption leaves and remark-based ample witnesses.
    """

    strict: bool = False


@dataclass
class Config:
    """Top-level configuration.

    Assembled from three layers with increasing priority:
      1. Hardcoded defaults (dataclass field values)
      2. YAML file overlay (ampleforge.yaml or --config path)
      3. CLI argument overlay

    The YAML file only carries the four limit sections; everything below
    ``verify`` comes from the command line alone.

    Attributes:
        search, probe, table, verify: Limit sections, see their classes.
        command: Subcommand name, e.g. "prove" or "table".
        vector: --vector for prove, reduce and probe.
        kind: --kind for prove; nef unless "ample" is given.
        out: Output path for certificates (prove, conjecture, family) or
            the CSV (table).
        file: Certificate file read by verify.
        n: Positional N for cf, pell and conjecture.
        count: Number of Pell solutions to print.
        prove: conjecture --prove runs the prover on the target.
        part: family --part, one of "1", "2", "3", "coef2", "nagata".
        a, l: Parameters of family parts 1 to 3.
        d: Degree for coef2 and nagata.
        slots: coef2 --n, the number of 2-slots; None means floor(d^2 / 4).
        n1, n2, m, x: nagata parameters for (x; m^n1) glued into (d; x^n2).
        with_unit: Part 3 keeps the trailing 1-slot.
        debug: Log at DEBUG instead of INFO.
    """

    search: SearchConfig = field(default_factory=SearchConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    table: TableConfig = field(default_factory=TableConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    # CLI-only
    command: str | None = None
    vector: ClassVector | None = None
    kind: PositivityKind = PositivityKind.NEF
    out: str | None = None
    file: str | None = None
    n: int | None = None
    count: int = 1
    prove: bool = False
    part: str | None = None
    a: int | None = None
    l: int | None = None
    d: int | None = None
    slots: int | None = None
    n1: int | None = None
    n2: int | None = None
    m: int | None = None
    x: Fraction | None = None
    with_unit: bool = False
    debug: bool = False


_SECTIONS: dict[str, tuple[str, ...]] = {
    "search": ("max_depth", "node_budget", "min_inner_degree", "max_inner_degree", "jobs"),
    "probe": ("degree_bound", "max_members"),
    "table": ("max_n", "node_budget", "max_depth", "certificate_dir"),
    "verify": ("strict",),
}


def _apply_yaml(config: Config, yaml_path: str) -> None:
    """Overlay YAML config values onto the Config object."""
    if not os.path.exists(yaml_path):
        return

    with open(yaml_path, "r") as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as exc:
            raise UsageError(f"{yaml_path}: {exc}") from None

    if not data:
        return
    if not isinstance(data, dict):
        raise UsageError(f"{yaml_path}: top level must be a mapping")

    for section, keys in _SECTIONS.items():
        values = data.get(section)
        if not values:
            continue
        if not isinstance(values, dict):
            raise UsageError(f"{yaml_path}: section {section!r} must be a mapping")
        target = getattr(config, section)
        for key in keys:
            if key in values:
                setattr(target, key, values[key])


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(message)


def _vector_arg(text: str) -> ClassVector:
    try:
        return parse_vector(text)
    except VectorSyntaxError as exc:
        raise argparse.ArgumentTypeError(f"bad vector {text!r}: {exc}") from None


def _rational_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad rational {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    """Build the CLI argument parser: global flags plus one subparser per command."""
    parser = _Parser(
        prog="ampleforge",
        description="Certify nef and ample classes on blow-ups of the plane",
    )
    parser.add_argument("--config", type=str, help="Path to YAML config file")
    parser.add_argument("--debug", action="store_true", default=False, help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("prove", help="Search for a certificate")
    p.add_argument("--kind", choices=["nef", "ample"], default="nef")
    p.add_argument("--vector", type=_vector_arg, required=True, help='e.g. "10;3^11"')
    p.add_argument("--depth", type=int, help="Maximum glue depth")
    p.add_argument("--budget", type=int, help="Node expansion budget")
    p.add_argument("--jobs", type=int, help="Worker threads for root branches")
    p.add_argument("--out", type=str, help="Write the certificate here instead of stdout")

    p = sub.add_parser("verify", help="Check a certificate file")
    p.add_argument("file", type=str)
    p.add_argument("--strict", action="store_true", default=None)

    p = sub.add_parser("reduce", help="Print the standard reduction trace")
    p.add_argument("--vector", type=_vector_arg, required=True)

    p = sub.add_parser("cf", help="Continued fraction of sqrt(N)")
    p.add_argument("n", type=int, metavar="N")

    p = sub.add_parser("pell", help="Solutions of d^2 - N m^2 = 1")
    p.add_argument("n", type=int, metavar="N")
    p.add_argument("--count", type=int, default=1)

    p = sub.add_parser("conjecture", help="Pell target vector (d; m^N) and its bound")
    p.add_argument("n", type=int, metavar="N")
    p.add_argument("--prove", action="store_true", default=False)
    p.add_argument("--budget", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", type=str)

    p = sub.add_parser("family", help="Emit a constructor certificate")
    p.add_argument("--part", choices=["1", "2", "3", "coef2", "nagata"], required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int, dest="slots", help="coef2: number of 2-slots")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--x", type=_rational_arg)
    p.add_argument("--with-unit", action="store_true", default=False,
                   help="part 3: keep the trailing 1-slot")
    p.add_argument("--out", type=str)

    p = sub.add_parser("probe", help="Bounded search for a glue decomposition")
    p.add_argument("--vector", type=_vector_arg, required=True)
    p.add_argument("--degree-bound", type=int)
    p.add_argument("--max-members", type=int)

    p = sub.add_parser("table", help="Write the remainder-bounds CSV")
    p.add_argument("--max-n", type=int)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--budget", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--certificate-dir", type=str)
    return parser


def _apply_args(config: Config, args: argparse.Namespace) -> None:
    """Overlay CLI arguments onto the Config object."""
    config.command = args.command
    config.debug = args.debug
    opts: dict[str, Any] = vars(args)

    if config.command in ("prove", "conjecture"):
        if opts.get("depth") is not None:
            config.search.max_depth = opts["depth"]
        if opts.get("budget") is not None:
            config.search.node_budget = opts["budget"]
        if opts.get("jobs") is not None:
            config.search.jobs = opts["jobs"]
    if config.command == "table":
        if opts.get("max_n") is not None:
            config.table.max_n = opts["max_n"]
        if opts.get("budget") is not None:
            config.table.node_budget = opts["budget"]
        if opts.get("depth") is not None:
            config.table.max_depth = opts["depth"]
        if opts.get("certificate_dir"):
            config.table.certificate_dir = opts["certificate_dir"]
    if config.command == "probe":
        if opts.get("degree_bound") is not None:
            config.probe.degree_bound = opts["degree_bound"]
        if opts.get("max_members") is not None:
            config.probe.max_members = opts["max_members"]
    if opts.get("strict") is True:
        config.verify.strict = True
    if opts.get("kind"):
        config.kind = PositivityKind.parse(opts["kind"])

    for name in ("vector", "out", "file", "n", "count", "prove", "part", "a", "l", "d",
                 "slots", "n1", "n2", "m", "x", "with_unit"):
        if opts.get(name) is not None:
            setattr(config, name, opts[name])


_REQUIRED_BY_PART = {
    "1": ("a", "l"),
    "2": ("a", "l"),
    "3": ("a", "l"),
    "coef2": ("d",),
    "nagata": ("n1", "n2", "d", "m", "x"),
}


def _validate(config: Config) -> None:
    """Reject out-of-range limits and incomplete family requests before any work."""
    if config.command is None:
        raise UsageError("a command is required")
    for section, keys in _SECTIONS.items():
        target = getattr(config, section)
        for key in keys:
            value = getattr(target, key)
            if key == "certificate_dir":
                ok = value is None or isinstance(value, str)
            elif key == "strict":
                ok = isinstance(value, bool)
            else:
                ok = isinstance(value, int) and not isinstance(value, bool)
            if not ok:
                raise UsageError(f"{section}.{key} has the wrong type: {value!r}")
    if config.command in ("cf", "pell", "conjecture") and config.n is not None and config.n < 0:
        raise UsageError(f"N must be >= 0, got {config.n}")
    positive = {
        "search.max_depth": config.search.max_depth + 1,
        "search.node_budget": config.search.node_budget,
        "search.jobs": config.search.jobs,
        "search.min_inner_degree": config.search.min_inner_degree,
        "probe.degree_bound": config.probe.degree_bound,
        "probe.max_members": config.probe.max_members,
        "table.node_budget": config.table.node_budget,
        "table.max_depth": config.table.max_depth + 1,
        "count": config.count,
    }
    for name, value in positive.items():
        if not isinstance(value, int) or value <= 0:
            raise UsageError(f"{name} must be {'>= 0' if 'depth' in name else 'positive'}")
    if config.search.max_inner_degree < config.search.min_inner_degree:
        raise UsageError("search.max_inner_degree must be >= search.min_inner_degree")
    if config.command == "table" and config.table.max_n < 10:
        raise UsageError("table needs --max-n >= 10")
    if config.command == "family" and config.part is not None:
        missing = [f"--{flag}" for flag in _REQUIRED_BY_PART[config.part]
                   if getattr(config, flag) is None]
        if missing:
            raise UsageError(f"family --part {config.part} needs {' '.join(missing)}")


def load_config(
    yaml_path: str | None = None,
    cli_args: list[str] | None = None,
) -> Config:
    """Load config: defaults → YAML overlay → argparse overlay.

    Args:
        yaml_path: Path to YAML config file. Defaults to ampleforge.yaml in
            the project root.
        cli_args: CLI arguments list. None means use sys.argv.

    Raises:
        UsageError: arguments or limits do not match the grammar.
    """
    config = Config()

    parser = _build_parser()
    args = parser.parse_args(cli_args if cli_args is not None else None)

    # Default YAML path: ampleforge.yaml in project root (three levels up
    # from this file). CLI --config overrides.
    if yaml_path is None:
        if args.config:
            yaml_path = args.config
        else:
            yaml_path = os.path.join(
                Path(__file__).resolve().parent.parent.parent, "ampleforge.yaml"
            )

    _apply_yaml(config, yaml_path)
    _apply_args(config, args)
    _validate(config)

    return config

"""Entry point for ampleforge.

Exit codes: 0 proved/valid, 2 disproved, 3 inconclusive, 4 conditionally
valid, 5 invalid, 64 usage error, 65 data error, 1 unexpected failure.
"""

from __future__ import annotations

import logging
import sys

from ampleforge.certificates import (
    Certificate,
    ConditionallyValid,
    Invalid,
    Valid,
    decode,
    encode,
    verify,
)
from ampleforge.config import Config, load_config
from ampleforge.constructions import (
    asymp1_part1,
    asymp1_part2,
    asymp1_part3,
    coef2_certificate,
    nagata_compose,
)
from ampleforge.cremona import Permute, Reflect, reduce_vector
from ampleforge.errors import AmpleforgeError, UsageError
from ampleforge.lattice import format_rational, format_vector
from ampleforge.pell import cf_sqrt, conjecture_target, pell_solutions, remainder_bound
from ampleforge.prover import (
    Disproved,
    Proved,
    Prover,
    ProveOutcome,
    SearchLimits,
    probe_from_config,
)
from ampleforge.report import bounds_table, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_DISPROVED = 2
EXIT_INCONCLUSIVE = 3
EXIT_CONDITIONAL = 4
EXIT_INVALID = 5
EXIT_USAGE = 64
EXIT_DATA = 65


def _emit_certificate(cert: Certificate, out: str | None) -> None:
    """Write to a file (indented) or print one JSON line to stdout."""
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(encode(cert, indent=2))
            f.write("\n")
        print(f"certificate written to {out}")
    else:
        print(encode(cert))


def _report_outcome(outcome: ProveOutcome, out: str | None) -> int:
    """Print a prove result and return its exit code."""
    if isinstance(outcome, Proved):
        claim = outcome.certificate.claim
        print(f"proved {claim.kind.value} {format_vector(claim.vector)}")
        _emit_certificate(outcome.certificate, out)
        return EXIT_OK
    if isinstance(outcome, Disproved):
        print(f"disproved: {outcome.reason}")
        return EXIT_DISPROVED
    print(f"inconclusive after {outcome.nodes_used} nodes")
    return EXIT_INCONCLUSIVE


def run_prove(config: Config) -> int:
    """Search for a certificate of --vector."""
    assert config.vector is not None
    prover = Prover(SearchLimits.from_config(config.search))
    return _report_outcome(prover.prove(config.vector, config.kind), config.out)


def run_verify(config: Config) -> int:
    """Re-check a certificate file and print the verdict."""
    assert config.file is not None
    with open(config.file, "r", encoding="utf-8") as f:
        cert = decode(f.read())
    verdict = verify(cert, strict=config.verify.strict)
    if isinstance(verdict, Valid):
        print(f"valid {verdict.kind.value} {format_vector(verdict.vector)}")
        return EXIT_OK
    if isinstance(verdict, ConditionallyValid):
        print(f"conditionally valid {verdict.kind.value} {format_vector(verdict.vector)}")
        print(f"assumptions: {', '.join(sorted(verdict.assumptions))}")
        return EXIT_CONDITIONAL
    assert isinstance(verdict, Invalid)
    print(f"invalid at {verdict.path}: {verdict.reason}")
    return EXIT_INVALID


def _describe_op(op: object) -> str:
    if isinstance(op, Reflect):
        return f"reflect {op.i} {op.j} {op.k}"
    if isinstance(op, Permute):
        return "sort " + " ".join(map(str, op.order))
    return str(op)


def run_reduce(config: Config) -> int:
    """Print every step of the standard reduction."""
    assert config.vector is not None
    outcome, factor = reduce_vector(config.vector)
    if factor != 1:
        print(f"scale {format_rational(factor)}")
    print(f"start {format_vector(outcome.start)}")
    for step in outcome.steps:
        print(f"{_describe_op(step.op)} -> {format_vector(step.result)}")
    print(f"status {outcome.status.value} {format_vector(outcome.final)}")
    return EXIT_OK


def run_cf(config: Config) -> int:
    """Print the periodic continued fraction of sqrt(N)."""
    assert config.n is not None
    print(cf_sqrt(config.n))
    return EXIT_OK


def run_pell(config: Config) -> int:
    """Print the first --count solutions of d^2 - N m^2 = 1, one per line."""
    assert config.n is not None
    for sol in pell_solutions(config.n, config.count):
        print(f"{sol.d} {sol.m}")
    return EXIT_OK


def run_conjecture(config: Config) -> int:
    """Print the Pell target and its bound; optionally try to prove it."""
    assert config.n is not None
    target = conjecture_target(config.n)
    print(f"target {format_vector(target)}")
    print(f"bound {format_rational(remainder_bound(target))}")
    if not config.prove:
        return EXIT_OK
    prover = Prover(SearchLimits.from_config(config.search))
    return _report_outcome(prover.prove(target), config.out)


def run_family(config: Config) -> int:
    """Emit one of the constructor certificates."""
    part = config.part
    if part == "1":
        cert = asymp1_part1(config.a, config.l)
    elif part == "2":
        cert = asymp1_part2(config.a, config.l)
    elif part == "3":
        cert = asymp1_part3(config.a, config.l, with_unit=config.with_unit)
    elif part == "coef2":
        cert = coef2_certificate(config.d, config.slots)
    else:
        cert = nagata_compose(config.n1, config.n2, config.d, config.m, config.x)
    _emit_certificate(cert, config.out)
    return EXIT_OK


def run_probe(config: Config) -> int:
    """Print the indecomposability report."""
    assert config.vector is not None
    report = probe_from_config(config.vector, config.probe, config.search)
    print(f"{report.verdict.value} after {report.members_explored} orbit members")
    if report.witness is not None:
        member, dec = report.witness
        print(
            f"witness {format_vector(member)} = "
            f"{format_vector(dec.outer)} #{dec.site} {format_vector(dec.inner)}"
        )
    for miss in report.near_misses:
        print(
            f"near-miss {format_vector(miss.member)}: {miss.failed_factor} "
            f"{format_vector(getattr(miss.decomposition, miss.failed_factor))} "
            f"fails ({miss.reason})"
        )
    return EXIT_OK


def run_table(config: Config) -> int:
    """Write the bounds CSV."""
    limits = SearchLimits(
        max_depth=config.table.max_depth,
        node_budget=config.table.node_budget,
        min_inner_degree=config.search.min_inner_degree,
        max_inner_degree=config.search.max_inner_degree,
    )
    rows = bounds_table(config.table.max_n, limits, config.table.certificate_dir)
    with open(config.out, "w", encoding="utf-8", newline="") as f:
        write_csv(rows, f)
    print(f"{len(rows)} rows written to {config.out}")
    return EXIT_OK


COMMANDS = {
    "prove": run_prove,
    "verify": run_verify,
    "reduce": run_reduce,
    "cf": run_cf,
    "pell": run_pell,
    "conjecture": run_conjecture,
    "family": run_family,
    "probe": run_probe,
    "table": run_table,
}


def run(argv: list[str] | None = None) -> int:
    """Parse argv, dispatch the command and map failures to exit codes."""
    try:
        config = load_config(cli_args=argv)
    except UsageError as e:
        print(f"ampleforge: usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"ampleforge: error: {e}", file=sys.stderr)
        return EXIT_DATA

    # Log to stderr so stdout stays machine-parsable.
    level = logging.DEBUG if config.debug else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug("Running %s", config.command)

    try:
        return COMMANDS[config.command](config)
    except UsageError as e:
        print(f"ampleforge: usage: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AmpleforgeError, OSError, ValueError) as e:
        # ValueError covers undecodable files and out-of-domain integers.
        print(f"ampleforge: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        print("ampleforge: error: interrupted", file=sys.stderr)
        return EXIT_UNEXPECTED
    except Exception as e:
        logger.error("Unexpected error: %s", e, exc_info=True)
        print(f"ampleforge: error: unexpected failure: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED


def main() -> None:
    """CLI entry point for the ampleforge command."""
    sys.exit(run())


if __name__ == "__main__":
    main()

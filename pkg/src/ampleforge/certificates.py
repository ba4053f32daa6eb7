"""Certificate trees, the independent verifier and the JSON file format.

Every node stores the (vector, kind) it claims. The verifier recomputes each
claim bottom-up from the leaves using exact arithmetic and never consults
the prover.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterator, Union

from ampleforge.cremona import (
    CremonaWord,
    apply_word,
    invert_word,
    word_from_records,
    word_to_records,
)
from ampleforge.errors import AmpleforgeError, PreconditionViolated, SchemaError
from ampleforge.families import BaseFamily, BaseWitness, check_witness, match_base
from ampleforge.gluing import glue, glue_fold
from ampleforge.lattice import (
    ClassVector,
    PositivityKind,
    add,
    format_rational,
    format_vector,
    parse_vector,
    scale,
)

logger = logging.getLogger(__name__)

HEADER = "ampleforge-cert"
VERSION = 1


@dataclass(frozen=True)
class Claim:
    """What a node asserts: vector is nef (or ample)."""

    vector: ClassVector
    kind: PositivityKind


@dataclass(frozen=True)
class BaseLeaf:
    """A member of a base family, re-derived from its witness on verification."""

    claim: Claim
    witness: BaseWitness


@dataclass(frozen=True)
class AssumeLeaf:
    """An explicitly declared, unproved hypothesis."""

    claim: Claim
    label: str


@dataclass(frozen=True)
class GlueNode:
    """Concludes glue(outer, site, inner) with outer's kind; inner must be nef."""

    claim: Claim
    outer: Certificate
    site: int
    inner: Certificate


@dataclass(frozen=True)
class CremonaNode:
    """Concludes v from a child certifying apply_word(word, v)."""

    claim: Claim
    word: CremonaWord
    child: Certificate


@dataclass(frozen=True)
class ScaleNode:
    """Concludes factor * child for a positive rational factor."""

    claim: Claim
    factor: Fraction
    child: Certificate


@dataclass(frozen=True)
class SumNode:
    """Concludes left + right; ample when either summand is ample."""

    claim: Claim
    left: Certificate
    right: Certificate


Certificate = Union[BaseLeaf, AssumeLeaf, GlueNode, CremonaNode, ScaleNode, SumNode]


# --- builders ----------------------------------------------------------------


def base_leaf(v: ClassVector, kind: PositivityKind = PositivityKind.NEF) -> BaseLeaf:
    """Leaf for a base-family vector.

    Raises:
        PreconditionViolated: v matches no base family for kind.
    """
    witness = match_base(v, kind)
    if witness is None:
        raise PreconditionViolated(f"{v} is not a base-family {kind.value} vector")
    return BaseLeaf(Claim(v, kind), witness)


def assume_leaf(
    v: ClassVector, label: str, kind: PositivityKind = PositivityKind.NEF
) -> AssumeLeaf:
    """Leaf stating an unproved hypothesis under label."""
    return AssumeLeaf(Claim(v, kind), label)


def glue_node(outer: Certificate, site: int, inner: Certificate) -> GlueNode:
    """Glue node concluding glue(outer, site, inner) with outer's kind.

    Raises:
        DegreeMismatch: slot site of outer is not degree(inner).
    """
    vector = glue(outer.claim.vector, site, inner.claim.vector)
    return GlueNode(Claim(vector, outer.claim.kind), outer, site, inner)


def glue_fold_node(outer: Certificate, inner: Certificate) -> Certificate:
    """Nested glue nodes putting inner into every slot of outer, last slot first.

    Raises:
        DegreeMismatch: some slot of outer is not degree(inner).
    """
    vector = glue_fold(outer.claim.vector, inner.claim.vector)
    node = outer
    for site in range(outer.claim.vector.k, 0, -1):
        node = glue_node(node, site, inner)
    if node.claim.vector != vector:
        raise AssertionError(f"fold of {outer.claim.vector} disagrees with glue_fold")
    return node


def cremona_node(word: CremonaWord, child: Certificate) -> CremonaNode:
    """Wrap child (certifying the image) so the node concludes the preimage."""
    vector = apply_word(invert_word(word), child.claim.vector)
    return CremonaNode(Claim(vector, child.claim.kind), tuple(word), child)


def scale_node(factor: Fraction | int, child: Certificate) -> ScaleNode:
    """Scale node concluding factor * child with child's kind."""
    factor = Fraction(factor)
    return ScaleNode(Claim(scale(child.claim.vector, factor), child.claim.kind), factor, child)


def sum_node(left: Certificate, right: Certificate) -> SumNode:
    """Sum node; raises LengthMismatch for summands with different k."""
    vector = add(left.claim.vector, right.claim.vector)
    return SumNode(Claim(vector, _sum_kind(left.claim.kind, right.claim.kind)), left, right)


def _sum_kind(a: PositivityKind, b: PositivityKind) -> PositivityKind:
    if PositivityKind.AMPLE in (a, b):
        return PositivityKind.AMPLE
    return PositivityKind.NEF


def children(c: Certificate) -> list[tuple[str, Certificate]]:
    """(field name, subtree) pairs in document order."""
    if isinstance(c, GlueNode):
        return [("outer", c.outer), ("inner", c.inner)]
    if isinstance(c, (CremonaNode, ScaleNode)):
        return [("child", c.child)]
    if isinstance(c, SumNode):
        return [("left", c.left), ("right", c.right)]
    return []


def walk(c: Certificate, path: str = "$") -> Iterator[tuple[str, Certificate]]:
    """Pre-order traversal yielding (path, node)."""
    stack = [(path, c)]
    while stack:
        here, node = stack.pop()
        yield here, node
        for name, child in reversed(children(node)):
            stack.append((f"{here}.{name}", child))


def conclusion(c: Certificate) -> tuple[ClassVector, PositivityKind, frozenset[str]]:
    """The root claim and the labels of every assumption, without verifying."""
    labels = frozenset(node.label for _, node in walk(c) if isinstance(node, AssumeLeaf))
    return c.claim.vector, c.claim.kind, labels


# --- verification ------------------------------------------------------------


@dataclass(frozen=True)
class Valid:
    """The certificate proves vector has the stated kind with no assumptions."""

    vector: ClassVector
    kind: PositivityKind


@dataclass(frozen=True)
class ConditionallyValid:
    """Valid provided every labelled assumption holds."""

    vector: ClassVector
    kind: PositivityKind
    assumptions: frozenset[str]


@dataclass(frozen=True)
class Invalid:
    """The first rejected node, as a JSONPath-like location, and why."""

    path: str
    reason: str


Verdict = Union[Valid, ConditionallyValid, Invalid]


class _Rejected(Exception):
    def __init__(self, path: str, reason: str) -> None:
        super().__init__(reason)
        self.path = path
        self.reason = reason


def verify(c: Certificate, strict: bool = False) -> Verdict:
    """Recheck every rule in the tree.

    Args:
        c: Certificate to check.
        strict: Refuse assumption leaves and remark-based ample witnesses.

    Returns:
        Valid, ConditionallyValid with the assumption labels, or Invalid
        naming the first failing node.
    """
    try:
        vector, kind, assumptions = _check(c, "$", strict)
    except _Rejected as exc:
        logger.debug("certificate rejected at %s: %s", exc.path, exc.reason)
        return Invalid(exc.path, exc.reason)
    if assumptions:
        return ConditionallyValid(vector, kind, assumptions)
    return Valid(vector, kind)


def _check(
    node: Certificate, path: str, strict: bool
) -> tuple[ClassVector, PositivityKind, frozenset[str]]:
    claim = node.claim
    assumptions: frozenset[str] = frozenset()

    if isinstance(node, BaseLeaf):
        witness = node.witness
        problem = check_witness(witness)
        if problem:
            raise _Rejected(path, problem)
        if strict and witness.remark_based:
            raise _Rejected(path, "remark-based witness refused in strict mode")
        try:
            derived = witness.rebuild()
        except ValueError as exc:
            raise _Rejected(path, str(exc)) from None
        kind = witness.kind

    elif isinstance(node, AssumeLeaf):
        if strict:
            raise _Rejected(path, f"assumption {node.label!r} refused in strict mode")
        derived, kind, assumptions = claim.vector, claim.kind, frozenset({node.label})

    elif isinstance(node, GlueNode):
        outer_v, kind, outer_a = _check(node.outer, f"{path}.outer", strict)
        inner_v, inner_kind, inner_a = _check(node.inner, f"{path}.inner", strict)
        if not inner_kind.implies(PositivityKind.NEF):
            raise _Rejected(path, "inner vector must be nef")
        try:
            derived = glue(outer_v, node.site, inner_v)
        except AmpleforgeError as exc:
            raise _Rejected(path, str(exc)) from None
        assumptions = outer_a | inner_a

    elif isinstance(node, CremonaNode):
        child_v, kind, assumptions = _check(node.child, f"{path}.child", strict)
        if claim.vector.k < 3:
            raise _Rejected(path, f"Cremona action needs k >= 3, got k = {claim.vector.k}")
        try:
            image = apply_word(node.word, claim.vector)
        except AmpleforgeError as exc:
            raise _Rejected(path, str(exc)) from None
        if image != child_v:
            raise _Rejected(path, f"word maps {claim.vector} to {image}, child certifies {child_v}")
        derived = claim.vector

    elif isinstance(node, ScaleNode):
        child_v, kind, assumptions = _check(node.child, f"{path}.child", strict)
        if node.factor <= 0:
            raise _Rejected(path, f"scale factor {node.factor} is not positive")
        derived = scale(child_v, node.factor)

    elif isinstance(node, SumNode):
        left_v, left_k, left_a = _check(node.left, f"{path}.left", strict)
        right_v, right_k, right_a = _check(node.right, f"{path}.right", strict)
        if left_v.k != right_v.k:
            raise _Rejected(path, f"length mismatch: {left_v.k} != {right_v.k}")
        derived, kind = add(left_v, right_v), _sum_kind(left_k, right_k)
        assumptions = left_a | right_a

    else:
        raise _Rejected(path, f"unknown node type {type(node).__name__}")

    if derived != claim.vector:
        raise _Rejected(path, f"claimed {claim.vector} but derived {derived}")
    if not kind.implies(claim.kind):
        raise _Rejected(path, f"claimed {claim.kind.value} but derived only {kind.value}")
    return claim.vector, claim.kind, assumptions


# --- serialization -----------------------------------------------------------


def _witness_to_dict(w: BaseWitness) -> dict[str, Any]:
    return {
        "family": w.family.value,
        "scale": format_rational(w.scale),
        "permutation": list(w.sorted_permutation),
        "params": {"d": w.degree, "m1": w.m1, "m2": w.m2, "r": w.ones, "zeros": w.zeros},
        "remark_based": w.remark_based,
    }


def _node_to_dict(node: Certificate) -> dict[str, Any]:
    tag = _TAGS[type(node)]
    record: dict[str, Any] = {
        "node": tag,
        "claim": {"kind": node.claim.kind.value, "vector": format_vector(node.claim.vector)},
    }
    if isinstance(node, BaseLeaf):
        record["witness"] = _witness_to_dict(node.witness)
    elif isinstance(node, AssumeLeaf):
        record["label"] = node.label
    elif isinstance(node, GlueNode):
        record["site"] = node.site
    elif isinstance(node, CremonaNode):
        record["word"] = word_to_records(node.word)
    elif isinstance(node, ScaleNode):
        record["factor"] = format_rational(node.factor)
    record["children"] = [_node_to_dict(child) for _, child in children(node)]
    return record


_TAGS: dict[type, str] = {
    BaseLeaf: "base",
    AssumeLeaf: "assume",
    GlueNode: "glue",
    CremonaNode: "cremona",
    ScaleNode: "scale",
    SumNode: "sum",
}
_ARITY = {"base": 0, "assume": 0, "glue": 2, "cremona": 1, "scale": 1, "sum": 2}


def to_document(c: Certificate) -> dict[str, Any]:
    """The JSON-ready document: header, version and the root node."""
    return {"header": HEADER, "version": VERSION, "root": _node_to_dict(c)}


def encode(c: Certificate, indent: int | None = None) -> str:
    """Certificate file text; single line unless indent is given."""
    return json.dumps(to_document(c), indent=indent)


def decode(text: str) -> Certificate:
    """Parse a certificate file.

    Raises:
        SchemaError: malformed JSON, wrong header or version, or a bad node,
            with the location of the problem.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        where = f"line {exc.lineno}, column {exc.colno}"
        raise SchemaError(f"invalid JSON: {exc.msg} ({where})") from None
    if not isinstance(document, dict):
        raise SchemaError("document must be an object")
    if document.get("header") != HEADER:
        raise SchemaError(f"header must be {HEADER!r}", "$.header")
    if document.get("version") != VERSION:
        raise SchemaError(f"unsupported version {document.get('version')!r}", "$.version")
    if "root" not in document:
        raise SchemaError("missing root node")
    return _node_from_dict(document["root"], "$.root")


def _require(record: dict[str, Any], key: str, location: str) -> Any:
    if key not in record:
        raise SchemaError(f"missing field {key!r}", location)
    return record[key]


def _int_field(record: dict[str, Any], key: str, location: str) -> int:
    value = _require(record, key, location)
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"{key} must be an integer", f"{location}.{key}")
    return value


def _rational(value: Any, location: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SchemaError("rational must be a string 'p' or 'p/q'", location)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"bad rational {value!r}", location) from None


def _claim_from_dict(record: Any, location: str) -> Claim:
    if not isinstance(record, dict):
        raise SchemaError("claim must be an object", location)
    try:
        kind = PositivityKind.parse(str(_require(record, "kind", location)))
    except ValueError:
        raise SchemaError(f"unknown kind {record.get('kind')!r}", f"{location}.kind") from None
    text = _require(record, "vector", location)
    if not isinstance(text, str):
        raise SchemaError("vector must be a string", f"{location}.vector")
    try:
        vector = parse_vector(text)
    except AmpleforgeError as exc:
        raise SchemaError(str(exc), f"{location}.vector") from None
    return Claim(vector, kind)


def _witness_from_dict(record: Any, kind: PositivityKind, location: str) -> BaseWitness:
    if not isinstance(record, dict):
        raise SchemaError("witness must be an object", location)
    try:
        family = BaseFamily(_require(record, "family", location))
    except ValueError:
        raise SchemaError(
            f"unknown family {record.get('family')!r}", f"{location}.family"
        ) from None
    perm = _require(record, "permutation", location)
    if not isinstance(perm, list) or not all(
        isinstance(x, int) and not isinstance(x, bool) for x in perm
    ):
        raise SchemaError("permutation must be a list of integers", f"{location}.permutation")
    params = _require(record, "params", location)
    if not isinstance(params, dict):
        raise SchemaError("params must be an object", f"{location}.params")
    where = f"{location}.params"
    remark = record.get("remark_based", False)
    if not isinstance(remark, bool):
        raise SchemaError("remark_based must be a boolean", f"{location}.remark_based")
    return BaseWitness(
        family=family,
        kind=kind,
        scale=_rational(_require(record, "scale", location), f"{location}.scale"),
        sorted_permutation=tuple(perm),
        degree=_int_field(params, "d", where),
        m1=_int_field(params, "m1", where),
        m2=_int_field(params, "m2", where),
        ones=_int_field(params, "r", where),
        zeros=_int_field(params, "zeros", where),
        remark_based=remark,
    )


def _node_from_dict(record: Any, location: str) -> Certificate:
    if not isinstance(record, dict):
        raise SchemaError("node must be an object", location)
    tag = _require(record, "node", location)
    if not isinstance(tag, str) or tag not in _ARITY:
        raise SchemaError(f"unknown node tag {tag!r}", f"{location}.node")
    claim = _claim_from_dict(_require(record, "claim", location), f"{location}.claim")
    raw_children = record.get("children", [])
    if not isinstance(raw_children, list) or len(raw_children) != _ARITY[tag]:
        raise SchemaError(f"{tag} node needs {_ARITY[tag]} children", f"{location}.children")
    subs = [
        _node_from_dict(child, f"{location}.children[{n}]") for n, child in enumerate(raw_children)
    ]

    if tag == "base":
        raw = _require(record, "witness", location)
        return BaseLeaf(claim, _witness_from_dict(raw, claim.kind, f"{location}.witness"))
    if tag == "assume":
        label = _require(record, "label", location)
        if not isinstance(label, str):
            raise SchemaError("label must be a string", f"{location}.label")
        return AssumeLeaf(claim, label)
    if tag == "glue":
        return GlueNode(claim, subs[0], _int_field(record, "site", location), subs[1])
    if tag == "cremona":
        word = word_from_records(_require(record, "word", location), f"{location}.word")
        return CremonaNode(claim, word, subs[0])
    if tag == "scale":
        factor = _rational(_require(record, "factor", location), f"{location}.factor")
        return ScaleNode(claim, factor, subs[0])
    return SumNode(claim, subs[0], subs[1])

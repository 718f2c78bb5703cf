"""The contract language: parsing and elaboration.

A contract block binds named constants, declares ingress (``pre``) and
egress (``post``) phases — each a header order plus a list of field
checks — and may add ``static:`` assertions over the constants.

Surface form::

    check(IPV6_MIN_MTU = 1280)
    pre {
        order: [EthHdr => Ipv6Hdr => TcpHdr<Ipv6Hdr>],
        checks: [(payload_len[Ipv6Hdr], >, IPV6_MIN_MTU)]
    }
    post {
        order: [EthHdr => Ipv6Hdr => Icmpv6PktTooBig<Ipv6Hdr>],
        checks: [(payload_len[Ipv6Hdr], ==, 1240),
                 (src[Ipv6Hdr], ==, dst[Ipv6Hdr])]
    }
    static: [IPV6_MIN_MTU + 14 == 1294]

Field references on a check's right-hand side read the current packet in
``pre`` checks and the ingress snapshot in ``post`` checks, so
``(src[Ipv6Hdr], ==, dst[Ipv6Hdr])`` in ``post`` asserts that the outgoing
source address equals the *original* destination address. Right-hand
operands may be sums/differences of literals, constants, and field
references (``payload_len[Ipv6Hdr] + 16``).

``elaborate`` turns a parsed spec into an executable contract: header
orders are verified against the registry, static assertions are evaluated
(in every build mode), and constants are inlined into the checks. All of
this happens once, before any packet flows.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .engine import COMPARATORS, Check, FieldRef, Operand, Source
from .exceptions import ContractSyntaxError, ElaborationError, RegistryError
from .registry import (
    BYTES,
    INT,
    OrderElement,
    OrderSpec,
    Registry,
    verify_order,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>0x[0-9A-Fa-f]+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>=>|==|<=|>=|[(){}\[\],:=<>+\-*.])
    """,
    re.VERBOSE,
)

_COMPARATOR_PUNCT = {"==", "<", "<=", ">", ">="}


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "name" | punct text | "eof"
    value: object
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ContractSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        column = m.start() - line_start + 1
        if m.lastgroup == "int":
            tokens.append(Token("int", int(m.group(), 0), line, column))
        elif m.lastgroup == "name":
            tokens.append(Token("name", m.group(), line, column))
        elif m.lastgroup == "punct":
            tokens.append(Token(m.group(), m.group(), line, column))
        # whitespace/comments: track line numbers only
        newlines = m.group().count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", None, line, len(text) - line_start + 1))
    return tokens


# --- static assertion expressions -------------------------------------------
# AST: ("int", value) | ("const", name) | (op, lhs, rhs) with op in {+,-,*}


@dataclass(frozen=True)
class StaticAssertion:
    """A comparison over constants, decided at elaboration time."""

    lhs: tuple
    op: str
    rhs: tuple

    def text(self) -> str:
        return f"{_expr_text(self.lhs)} {self.op} {_expr_text(self.rhs)}"


def _expr_text(node: tuple) -> str:
    tag = node[0]
    if tag == "int":
        return str(node[1])
    if tag == "const":
        return node[1]
    return f"{_expr_text(node[1])} {tag} {_expr_text(node[2])}"


def _expr_eval(node: tuple, constants: dict[str, int]) -> int:
    tag = node[0]
    if tag == "int":
        return node[1]
    if tag == "const":
        if node[1] not in constants:
            raise ElaborationError(
                f"static assertion uses unbound constant {node[1]!r}"
            )
        return constants[node[1]]
    a = _expr_eval(node[1], constants)
    b = _expr_eval(node[2], constants)
    return a + b if tag == "+" else a - b if tag == "-" else a * b


@dataclass(frozen=True)
class PhaseSpec:
    """One contract phase: the declared header order plus its checks."""

    order: OrderSpec
    checks: tuple[Check, ...]


@dataclass(frozen=True)
class ContractSpec:
    """Parsed but not yet elaborated contract."""

    nf_name: str
    constants: dict[str, int]
    static_assertions: tuple[StaticAssertion, ...]
    ingress: PhaseSpec | None
    egress: PhaseSpec | None


@dataclass(frozen=True)
class Contract:
    """Elaborated, executable contract: orders verified, assertions proven,
    constants inlined. Immutable and shareable across threads."""

    nf_name: str
    constants: dict[str, int]
    static_assertions: tuple[StaticAssertion, ...]
    ingress: PhaseSpec | None
    egress: PhaseSpec | None


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token plumbing --
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ContractSyntaxError(message, tok.line, tok.column)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.value if tok.kind != "eof" else "end of input"
            self.error(f"expected {what or kind!r}, found {shown!r}")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if tok.kind != "name" or tok.value != word:
            shown = tok.value if tok.kind != "eof" else "end of input"
            self.error(f"expected keyword {word!r}, found {shown!r}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "name" and tok.value == word

    # -- grammar --
    def parse_spec(self, nf_name: str) -> ContractSpec:
        self.expect_keyword("check")
        self.expect("(")
        constants = self.parse_bindings()
        self.expect(")")
        ingress = self.parse_phase("pre") if self.at_keyword("pre") else None
        egress = self.parse_phase("post") if self.at_keyword("post") else None
        assertions = self.parse_asserts() if self.at_keyword("static") else ()
        tok = self.peek()
        if tok.kind != "eof":
            self.error(f"unexpected trailing input {tok.value!r}")
        return ContractSpec(
            nf_name=nf_name,
            constants=constants,
            static_assertions=assertions,
            ingress=ingress,
            egress=egress,
        )

    def parse_bindings(self) -> dict[str, int]:
        constants: dict[str, int] = {}
        if self.peek().kind == ")":
            return constants
        while True:
            name_tok = self.expect("name", "constant name")
            self.expect("=")
            value_tok = self.expect("int", "integer value")
            if name_tok.value in constants:
                self.error(f"duplicate constant {name_tok.value!r}", name_tok)
            constants[name_tok.value] = value_tok.value
            if self.peek().kind != ",":
                return constants
            self.advance()

    def parse_phase(self, keyword: str) -> PhaseSpec:
        rhs_source = (
            Source.CURRENT_PACKET if keyword == "pre" else Source.INGRESS_SNAPSHOT
        )
        self.expect_keyword(keyword)
        self.expect("{")
        if self.at_keyword("input"):  # accepted and ignored: names the packet
            self.advance()
            self.expect(":")
            self.expect("name", "packet name")
            self.expect(",")
        self.expect_keyword("order")
        self.expect(":")
        order = self.parse_order()
        self.expect(",")
        self.expect_keyword("checks")
        self.expect(":")
        self.expect("[")
        checks = [self.parse_check(rhs_source)]
        while self.peek().kind == ",":
            self.advance()
            checks.append(self.parse_check(rhs_source))
        self.expect("]")
        self.expect("}")
        return PhaseSpec(order=order, checks=tuple(checks))

    def parse_order(self) -> OrderSpec:
        self.expect("[")
        elements = [self.parse_hdr()]
        while self.peek().kind == "=>":
            self.advance()
            elements.append(self.parse_hdr())
        self.expect("]")
        return OrderSpec(tuple(elements))

    def parse_hdr(self) -> OrderElement:
        name = self.expect("name", "header type").value
        param = None
        if self.peek().kind == "<":
            self.advance()
            param = self.expect("name", "header type parameter").value
            self.expect(">")
        return OrderElement(header_type=name, param=param)

    def parse_check(self, rhs_source: Source) -> Check:
        self.expect("(")
        lhs = self.parse_fieldref(Source.CURRENT_PACKET)
        self.expect(",")
        op = self.parse_comparator()
        self.expect(",")
        rhs = self.parse_operand(rhs_source)
        self.expect(")")
        return Check(lhs=lhs, op=op, rhs=rhs)

    def parse_comparator(self) -> str:
        tok = self.peek()
        if tok.kind in _COMPARATOR_PUNCT:
            return self.advance().value
        if tok.kind == "name" and tok.value == "neq":
            self.advance()
            return "neq"
        self.error(
            "expected comparator (one of ==, neq, <, <=, >, >=), "
            f"found {tok.value!r}"
        )

    def parse_fieldref(self, source: Source) -> FieldRef:
        if self.peek().kind == ".":
            self.advance()
        accessor = self.expect("name", "field name").value
        self.expect("[")
        hdr = self.parse_hdr()
        self.expect("]")
        return FieldRef(
            accessor=accessor,
            header_type=hdr.header_type,
            param=hdr.param,
            source=source,
        )

    def parse_operand(self, source: Source) -> Operand:
        terms = [(1, self.parse_operand_term(source))]
        while self.peek().kind in ("+", "-"):
            sign = 1 if self.advance().kind == "+" else -1
            terms.append((sign, self.parse_operand_term(source)))
        return Operand(tuple(terms))

    def parse_operand_term(self, source: Source):
        tok = self.peek()
        if tok.kind == "int":
            return self.advance().value
        if tok.kind in ("name", "."):
            # A name followed by '[' is a field reference; bare is a constant.
            if tok.kind == "name" and self.tokens[self.pos + 1].kind != "[":
                return self.advance().value
            return self.parse_fieldref(source)
        self.error(
            f"expected integer, constant, or field reference, found {tok.value!r}"
        )

    def parse_asserts(self) -> tuple[StaticAssertion, ...]:
        self.expect_keyword("static")
        self.expect(":")
        self.expect("[")
        assertions = [self.parse_assert_expr()]
        while self.peek().kind == ",":
            self.advance()
            assertions.append(self.parse_assert_expr())
        self.expect("]")
        return tuple(assertions)

    def parse_assert_expr(self) -> StaticAssertion:
        lhs = self.parse_additive()
        op = self.parse_comparator()
        rhs = self.parse_additive()
        return StaticAssertion(lhs=lhs, op=op, rhs=rhs)

    def parse_additive(self) -> tuple:
        node = self.parse_multiplicative()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            node = (op, node, self.parse_multiplicative())
        return node

    def parse_multiplicative(self) -> tuple:
        node = self.parse_atom()
        while self.peek().kind == "*":
            self.advance()
            node = ("*", node, self.parse_atom())
        return node

    def parse_atom(self) -> tuple:
        tok = self.peek()
        if tok.kind == "int":
            return ("int", self.advance().value)
        if tok.kind == "name":
            return ("const", self.advance().value)
        self.error(f"expected integer or constant, found {tok.value!r}")


def parse_contract_spec(
    text: str, nf_name: str = "nf", registry: Registry | None = None
) -> ContractSpec:
    """Parse a contract block into a ContractSpec.

    Syntax problems raise ContractSyntaxError with line/column. When a
    registry is supplied the parsed contract is also validated against it (unknown
    header types, unknown accessors, unbound constants, type mismatches).
    """
    spec = _Parser(text).parse_spec(nf_name)
    if registry is not None:
        _validate_spec(spec, registry)
    return spec


def _order_types(phase: PhaseSpec | None) -> set[str]:
    if phase is None:
        return set()
    return {element.header_type for element in phase.order.elements}


def _ref_kind(ref: FieldRef, registry: Registry) -> str:
    return registry.accessor(ref.header_type, ref.accessor).kind


def _validate_ref(
    ref: FieldRef,
    registry: Registry,
    phase_name: str,
    visible_current: set[str],
    visible_snapshot: set[str],
) -> None:
    if not registry.known(ref.header_type):
        raise ElaborationError(
            f"{phase_name} check references unknown header type "
            f"{ref.header_type!r}"
        )
    try:
        registry.accessor(ref.header_type, ref.accessor)
    except RegistryError as exc:
        raise ElaborationError(str(exc)) from None
    if ref.param is not None and not registry.known(ref.param):
        raise ElaborationError(
            f"{phase_name} check references unknown header type parameter "
            f"{ref.param!r}"
        )
    if ref.source is Source.INGRESS_SNAPSHOT:
        if ref.header_type not in visible_snapshot:
            raise ElaborationError(
                f"{phase_name} check references {ref.describe()}, but "
                f"{ref.header_type} is not in the ingress order (dangling "
                "snapshot reference)"
            )
    elif ref.header_type not in visible_current:
        raise ElaborationError(
            f"{phase_name} check references {ref.describe()}, but "
            f"{ref.header_type} is not in the {phase_name} order"
        )


def _validate_phase(
    spec: ContractSpec,
    phase: PhaseSpec,
    phase_name: str,
    registry: Registry,
) -> None:
    for element in phase.order.elements:
        if not registry.known(element.header_type):
            raise ElaborationError(
                f"{phase_name} order references unknown header type "
                f"{element.header_type!r}"
            )
        if element.param is not None and not registry.known(element.param):
            raise ElaborationError(
                f"{phase_name} order references unknown header type "
                f"{element.param!r}"
            )
    visible_current = _order_types(phase)
    visible_snapshot = _order_types(spec.ingress)
    for check in phase.checks:
        _validate_ref(
            check.lhs, registry, phase_name, visible_current, visible_snapshot
        )
        lhs_kind = _ref_kind(check.lhs, registry)
        term_kinds = []
        for _, term in check.rhs.terms:
            if isinstance(term, FieldRef):
                _validate_ref(
                    term, registry, phase_name, visible_current, visible_snapshot
                )
                term_kinds.append(_ref_kind(term, registry))
            elif isinstance(term, str):
                if term not in spec.constants:
                    raise ElaborationError(
                        f"{phase_name} check {check.describe()} uses unbound "
                        f"constant {term!r}"
                    )
                term_kinds.append(INT)
            else:
                term_kinds.append(INT)
        if check.rhs.is_arithmetic():
            bad = [k for k in term_kinds if k != INT]
            if bad or lhs_kind != INT:
                raise ElaborationError(
                    f"{phase_name} check {check.describe()}: arithmetic "
                    "operands require integer fields"
                )
        else:
            if term_kinds[0] != lhs_kind:
                raise ElaborationError(
                    f"{phase_name} check {check.describe()}: cannot compare "
                    f"{lhs_kind} field with {term_kinds[0]} operand"
                )
        if lhs_kind == BYTES and check.op not in ("==", "neq"):
            raise ElaborationError(
                f"{phase_name} check {check.describe()}: byte-sequence fields "
                f"admit only == and neq, not {check.op}"
            )
        if check.op not in COMPARATORS:
            raise ElaborationError(
                f"{phase_name} check {check.describe()}: unknown comparator "
                f"{check.op!r}"
            )


def _validate_spec(spec: ContractSpec, registry: Registry) -> None:
    if spec.ingress is not None:
        _validate_phase(spec, spec.ingress, "ingress", registry)
    if spec.egress is not None:
        _validate_phase(spec, spec.egress, "egress", registry)


def _inline_constants(operand: Operand, constants: dict[str, int]) -> Operand:
    terms = []
    for sign, term in operand.terms:
        if isinstance(term, str):
            if term not in constants:
                raise ElaborationError(f"unbound constant {term!r}")
            terms.append((sign, constants[term]))
        else:
            terms.append((sign, term))
    return Operand(tuple(terms))


def _elaborate_phase(phase: PhaseSpec | None, constants: dict[str, int]):
    if phase is None:
        return None
    checks = tuple(
        Check(lhs=c.lhs, op=c.op, rhs=_inline_constants(c.rhs, constants))
        for c in phase.checks
    )
    return PhaseSpec(order=phase.order, checks=checks)


def check_static_assertions(spec: ContractSpec) -> None:
    """Evaluate every static assertion; raise ElaborationError on failure,
    quoting the expression and the value of each side."""
    for assertion in spec.static_assertions:
        lhs = _expr_eval(assertion.lhs, spec.constants)
        rhs = _expr_eval(assertion.rhs, spec.constants)
        if not COMPARATORS[assertion.op](lhs, rhs):
            raise ElaborationError(
                f"static assertion failed: {assertion.text()} "
                f"(lhs = {lhs}, rhs = {rhs})"
            )


def elaborate(spec: ContractSpec, registry: Registry) -> Contract:
    """Produce the executable contract from its parsed form.

    Runs in every build mode, before any packet flows: validates everything
    against the registry, verifies both header orders, evaluates static
    assertions, and inlines constants so the runtime checks are closed
    forms.
    """
    if not registry.frozen:
        raise ElaborationError("registry must be frozen before elaboration")
    _validate_spec(spec, registry)
    if spec.ingress is not None:
        verify_order(registry, spec.ingress.order)
    if spec.egress is not None:
        verify_order(registry, spec.egress.order)
    check_static_assertions(spec)
    return Contract(
        nf_name=spec.nf_name,
        constants=dict(spec.constants),
        static_assertions=spec.static_assertions,
        ingress=_elaborate_phase(spec.ingress, spec.constants),
        egress=_elaborate_phase(spec.egress, spec.constants),
    )


def explain_contract(contract: Contract) -> str:
    """Render an elaborated contract as readable text (CLI `explain`)."""
    lines = [f"contract for NF {contract.nf_name}"]
    if contract.constants:
        lines.append("constants:")
        for name, value in contract.constants.items():
            lines.append(f"  {name} = {value}")
    if contract.static_assertions:
        lines.append("static assertions (proven at elaboration):")
        for assertion in contract.static_assertions:
            lines.append(f"  {assertion.text()}")
    for phase_name, phase in (("ingress", contract.ingress),
                              ("egress", contract.egress)):
        if phase is None:
            lines.append(f"{phase_name}: (none)")
            continue
        lines.append(f"{phase_name}:")
        lines.append(f"  order: {phase.order}")
        if phase.checks:
            lines.append("  checks:")
            for idx, check in enumerate(phase.checks):
                lines.append(f"    #{idx} {check.describe()}")
        else:
            lines.append("  checks: (none)")
    return "\n".join(lines)

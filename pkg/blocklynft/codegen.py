"""
From a Workspace to something that runs and something a student can read.

expand_macros() rewrites custom blocks into the builtin blocks their rules
expand to; compile_workspace() lowers the expanded tree to the Program IR
executed by blocklynft.runtime; emit_listing() renders the pseudo-JavaScript
listing from each block's listing template.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, fields, replace
from typing import ClassVar, Optional, Tuple

from blocklynft import common
from blocklynft.block_model import (
    CONTRACT_ARGS,
    MACRO_STATEMENTS,
    MACRO_VALUE,
    PLACEHOLDER_RE,
    FieldKind,
    InputKind,
    RegistryError,
)
from blocklynft.workspace_xml import Workspace, chain_to_list, list_to_chain

logger = logging.getLogger("blocklynft.codegen")

FOREVER_TICKS = "controls_forever_ticks"
INDENT = "  "


class CompileError(common.BlocklyNftError):
    pass


# ****************************************************************************
#   Program IR
# ****************************************************************************
class Node:
    OP: ClassVar[str] = ""


@dataclass(frozen=True)
class NumberLit(Node):
    OP = "number_lit"
    value: float


@dataclass(frozen=True)
class TextLit(Node):
    OP = "text_lit"
    value: str


@dataclass(frozen=True)
class SensorRead(Node):
    OP = "sensor_read"
    channel: str


@dataclass(frozen=True)
class WeatherRead(Node):
    OP = "weather_read"


@dataclass(frozen=True)
class ClockNow(Node):
    OP = "clock_now"


@dataclass(frozen=True)
class Compare(Node):
    OP = "compare"
    op: str
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Arith(Node):
    OP = "arith"
    op: str
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class ContractCall(Node):
    OP = "contract_call"
    method: str
    args: Tuple[Node, ...] = ()


@dataclass(frozen=True)
class Print(Node):
    OP = "print"
    expr: Node


@dataclass(frozen=True)
class If(Node):
    OP = "if"
    cond: Node
    then: Tuple[Node, ...] = ()
    orelse: Tuple[Node, ...] = ()


@dataclass(frozen=True)
class Repeat(Node):
    OP = "repeat"
    count: Node
    body: Tuple[Node, ...] = ()


@dataclass(frozen=True)
class ForeverTicks(Node):
    OP = "forever_ticks"
    body: Tuple[Node, ...] = ()


@dataclass(frozen=True)
class ContractSend(Node):
    OP = "contract_send"
    method: str
    args: Tuple[Node, ...] = ()
    # None: the executing account
    sender: Optional[str] = None


@dataclass(frozen=True)
class NftSetAttribute(Node):
    OP = "nft_set_attribute"
    token: Node
    trait: Node
    value: Node


@dataclass(frozen=True)
class Irrigate(Node):
    OP = "irrigate"
    duration_s: Node


@dataclass(frozen=True)
class LogCrop(Node):
    OP = "log_crop"
    note: Node


@dataclass(frozen=True)
class HelloWorld(Node):
    OP = "helloworld"


@dataclass(frozen=True)
class Program:
    setup: Tuple[Node, ...] = ()
    tick_body: Tuple[Node, ...] = ()


# IR attribute name -> JSON key, where they differ; "op" is the node tag
_JSON_KEYS = {"op": "operator", "orelse": "else", "sender": "from"}


def _node_json(node):
    if isinstance(node, Node):
        data = {"op": node.OP}
        for f in fields(node):
            data[_JSON_KEYS.get(f.name, f.name)] = _node_json(getattr(node, f.name))
        return data
    if isinstance(node, tuple):
        return [_node_json(item) for item in node]
    return node


def program_to_json(program):
    return {
        "setup": _node_json(program.setup),
        "tick_body": _node_json(program.tick_body),
    }


def program_to_json_text(program):
    """
    Compact JSON rendering of the IR; an empty program is
    {"setup":[],"tick_body":[]}.
    """
    return json.dumps(program_to_json(program), separators=(",", ":"), ensure_ascii=False)


# ****************************************************************************
#   Macro expansion
# ****************************************************************************
def _rule(registry, block_type):
    try:
        return registry.rule(block_type)
    except RegistryError:
        raise CompileError("unknown block type '%s'" % block_type, case="unknown-type")


def _definition(registry, block_type):
    try:
        return registry.definition(block_type)
    except RegistryError:
        raise CompileError("unknown block type '%s'" % block_type, case="unknown-type")


class _MacroExpander:
    def __init__(self, registry):
        self.registry = registry
        # a DAG over n types cannot nest expansions deeper than n
        self.limit = len(registry)

    def chain(self, head, depth):
        expanded = []
        for block in chain_to_list(head):
            expanded.extend(self.statement(block, depth))
        return list_to_chain(expanded)

    def _children(self, block, depth):
        value_inputs = {}
        for name, child in block.value_inputs.items():
            result = self.value(child, depth)
            if result is not None:
                value_inputs[name] = result
        statement_inputs = {}
        for name, child in block.statement_inputs.items():
            result = self.chain(child, depth)
            if result is not None:
                statement_inputs[name] = result
        return replace(block, value_inputs=value_inputs, statement_inputs=statement_inputs)

    def _instantiate(self, block, depth):
        rule = _rule(self.registry, block.type)
        block = self._children(block, depth)
        if not rule.is_macro:
            return None, block
        if depth >= self.limit:
            raise CompileError(
                "macro expansion of '%s' nests deeper than %d levels" % (block.type, self.limit),
                case="expansion-depth",
            )
        definition = self.registry.definition(block.type)
        return _Instantiation(definition, block), rule.lowering.expansion.top_blocks[0]

    def statement(self, block, depth):
        """Expanded replacement for a statement block: a list of blocks."""
        instance, head = self._instantiate(block, depth)
        if instance is None:
            return [head]
        result = []
        for piece in instance.chain(head):
            result.extend(self.statement(piece, depth + 1))
        return result

    def value(self, block, depth):
        """Expanded replacement for an expression block, or None if absent."""
        instance, head = self._instantiate(block, depth)
        if instance is None:
            return head
        piece = instance.value(head)
        if piece is None:
            return None
        return self.value(piece, depth + 1)


class _Instantiation:
    """
    Substitutes one custom block instance into its macro fragment.
    """

    def __init__(self, definition, block):
        self.definition = definition
        self.block = block

    def field_text(self, text):
        def substitute(match):
            name = match.group(2)
            if name in self.block.fields:
                return self.block.fields[name]
            spec = self.definition.field_spec(name)
            return common.render_value(spec.default) if spec.default is not None else ""

        return PLACEHOLDER_RE.sub(substitute, text)

    def value(self, block):
        if block.type == MACRO_VALUE:
            return self.block.value_inputs.get(block.fields.get("NAME", ""))
        return self.block_copy(block)

    def chain(self, head):
        result = []
        for block in chain_to_list(head):
            if block.type == MACRO_STATEMENTS:
                result.extend(
                    chain_to_list(self.block.statement_inputs.get(block.fields.get("NAME", "")))
                )
            else:
                result.append(self.block_copy(block))
        return result

    def block_copy(self, block):
        value_inputs = {}
        for name, child in block.value_inputs.items():
            result = self.value(child)
            if result is not None:
                value_inputs[name] = result
        statement_inputs = {}
        for name, child in block.statement_inputs.items():
            result = list_to_chain(self.chain(child))
            if result is not None:
                statement_inputs[name] = result
        return replace(
            block,
            fields={name: self.field_text(text) for name, text in block.fields.items()},
            value_inputs=value_inputs,
            statement_inputs=statement_inputs,
        )


def expand_macros(ws, registry):
    """
    Returns a workspace in which every custom block has been replaced by its
    expansion. A workspace of builtin blocks comes back equal to ws.
    """
    expander = _MacroExpander(registry)
    top_blocks = []
    for top in ws.top_blocks:
        if _definition(registry, top.type).is_expression:
            result = expander.value(top, 0)
        else:
            result = expander.chain(top, 0)
        if result is not None:
            top_blocks.append(result)
    return Workspace(top_blocks)


# ****************************************************************************
#   Lowering
# ****************************************************************************
class _Lowerer:
    def __init__(self, registry, strict=False):
        self.registry = registry
        self.strict = strict

    def _native(self, block):
        rule = _rule(self.registry, block.type)
        # expand_macros() leaves nothing but natively lowered types
        assert not rule.is_macro, "macro block '%s' survived expansion" % block.type
        definition = self.registry.definition(block.type)
        self._check_names(block, definition)
        return rule.lowering.opcode, definition

    def _check_names(self, block, definition):
        for name in block.fields:
            if definition.field_spec(name) is None:
                raise CompileError(
                    "block '%s' has no field '%s'" % (block.type, name), case="unknown-field"
                )
        for names, kind in (
            (block.value_inputs, InputKind.VALUE),
            (block.statement_inputs, InputKind.STATEMENT),
        ):
            for name in names:
                spec = definition.input_spec(name)
                if spec is None or spec.kind != kind:
                    raise CompileError(
                        "block '%s' has no %s input '%s'" % (block.type, kind.value, name),
                        case="unknown-input",
                    )

    def field(self, block, definition, name):
        spec = definition.field_spec(name)
        text = block.fields.get(name)
        if text is None:
            if spec.default is None:
                raise CompileError(
                    "block '%s' is missing field '%s'" % (block.type, name),
                    case="missing-field",
                )
            text = common.render_value(spec.default)
        if spec.kind == FieldKind.DROPDOWN and text not in spec.option_values():
            raise CompileError(
                "block '%s' field '%s' must be one of %s, not '%s'"
                % (block.type, name, ", ".join(spec.option_values()), text),
                case="bad-field-value",
            )
        return text

    def number_field(self, block, definition, name):
        text = self.field(block, definition, name)
        try:
            number = float(text)
        except ValueError:
            number = None
        if number is None or not math.isfinite(number):
            raise CompileError(
                "block '%s' field '%s' is not a finite number: '%s'"
                % (block.type, name, text),
                case="bad-number",
            )
        return number

    def value(self, block, definition, name):
        child = block.value_inputs.get(name)
        if child is None:
            if self.strict:
                raise CompileError(
                    "block '%s' is missing input '%s'" % (block.type, name),
                    case="missing-input",
                )
            if definition.input_spec(name).check == "String":
                return TextLit("")
            return NumberLit(0.0)
        return self.expression(child)

    def args(self, block, definition):
        args = []
        for name in CONTRACT_ARGS:
            if name not in block.value_inputs:
                break
            args.append(self.value(block, definition, name))
        return tuple(args)

    def body(self, block, name):
        return self.statements(block.statement_inputs.get(name))

    def statements(self, head):
        return tuple(self.statement(block) for block in chain_to_list(head))

    def expression(self, block):
        opcode, definition = self._native(block)
        if not definition.is_expression:
            raise CompileError(
                "statement block '%s' used where a value is expected" % block.type,
                case="statement-as-expression",
            )
        if block.next is not None:
            raise CompileError(
                "expression block '%s' cannot have a next block" % block.type,
                case="next-on-expression",
            )
        if opcode == "number_literal":
            return NumberLit(self.number_field(block, definition, "NUM"))
        if opcode == "text_literal":
            return TextLit(self.field(block, definition, "TEXT"))
        if opcode == "sensor_read":
            return SensorRead(self.field(block, definition, "CHANNEL"))
        if opcode == "weather_read":
            return WeatherRead()
        if opcode == "clock_now":
            return ClockNow()
        if opcode in ("logic_compare", "math_arith"):
            node = Compare if opcode == "logic_compare" else Arith
            return node(
                self.field(block, definition, "OP"),
                self.value(block, definition, "A"),
                self.value(block, definition, "B"),
            )
        if opcode == "contract_call":
            return ContractCall(
                self.field(block, definition, "METHOD"), self.args(block, definition)
            )
        raise CompileError("no lowering for opcode '%s'" % opcode, case="unknown-type")

    def statement(self, block):
        opcode, definition = self._native(block)
        if definition.is_expression:
            raise CompileError(
                "expression block '%s' used where a statement is expected" % block.type,
                case="expression-as-statement",
            )
        if opcode == "helloworld":
            return HelloWorld()
        if opcode == "print":
            return Print(self.value(block, definition, "TEXT"))
        if opcode == "controls_if":
            return If(
                self.value(block, definition, "IF0"),
                self.body(block, "DO0"),
                self.body(block, "ELSE"),
            )
        if opcode == "controls_repeat":
            return Repeat(self.value(block, definition, "TIMES"), self.body(block, "DO"))
        if opcode == FOREVER_TICKS:
            raise CompileError(
                "the tick loop may only appear once, at the top level", case="forever-nested"
            )
        if opcode == "contract_send":
            return ContractSend(
                self.field(block, definition, "METHOD"),
                self.args(block, definition),
                self.field(block, definition, "FROM") or None,
            )
        if opcode == "nft_set_attribute":
            return NftSetAttribute(
                self.value(block, definition, "TOKEN"),
                self.value(block, definition, "TRAIT"),
                self.value(block, definition, "VALUE"),
            )
        if opcode == "irrigate":
            return Irrigate(self.value(block, definition, "DURATION"))
        if opcode == "log_crop":
            return LogCrop(self.value(block, definition, "NOTE"))
        raise CompileError("no lowering for opcode '%s'" % opcode, case="unknown-type")


def compile_workspace(ws, registry, strict=False):
    """
    Lower ws to a Program. Macros are expanded first. Top-level chains run
    in order as setup; a top-level controls_forever_ticks block, which must
    end the last chain, supplies the tick body.
    """
    expanded = expand_macros(ws, registry)
    lowerer = _Lowerer(registry, strict)
    setup = []
    tick_body = None
    for top in expanded.top_blocks:
        for block in chain_to_list(top):
            if block.type == FOREVER_TICKS:
                if tick_body is not None:
                    raise CompileError("more than one tick loop", case="forever-duplicate")
                # checks names and kinds like any other block
                lowerer._native(block)
                tick_body = lowerer.body(block, "DO")
            elif tick_body is not None:
                raise CompileError(
                    "block '%s' follows the tick loop" % block.type, case="after-tick-loop"
                )
            else:
                setup.append(lowerer.statement(block))
    program = Program(tuple(setup), tick_body or ())
    logger.debug(
        "compiled %d setup and %d tick statement(s)" % (len(program.setup), len(program.tick_body))
    )
    return program


# ****************************************************************************
#   Listing
# ****************************************************************************
def _indent(text):
    return "".join(INDENT + line for line in text.splitlines(keepends=True))


class _ListingEmitter:
    def __init__(self, registry):
        self.registry = registry

    def chain(self, head):
        return "".join(self.statement(block) for block in chain_to_list(head))

    def statement(self, block):
        text = self.expand(block)
        if _definition(self.registry, block.type).is_expression:
            text += ";\n"
        return text

    def value(self, block, definition, name):
        child = block.value_inputs.get(name)
        if child is not None:
            return self.expand(child)
        if definition.input_spec(name).check == "String":
            return '""'
        return "0"

    def expand(self, block):
        definition = _definition(self.registry, block.type)
        template = _rule(self.registry, block.type).listing_template

        def substitute(match):
            kind, name = match.groups()
            if kind in ("field", "label", "string"):
                spec = definition.field_spec(name)
                if spec is None or (kind == "label" and spec.kind != FieldKind.DROPDOWN):
                    return unresolved(kind, name)
                text = block.fields.get(name)
                if text is None:
                    text = common.render_value(spec.default)
                if kind == "string":
                    return json.dumps(text, ensure_ascii=False)
                return spec.display_for(text) if kind == "label" else text
            if kind == "values":
                if definition.input_spec(name + "0") is None:
                    return unresolved(kind, name)
                parts = []
                index = 0
                while name + str(index) in block.value_inputs:
                    parts.append(self.expand(block.value_inputs[name + str(index)]))
                    index += 1
                return ", ".join(parts)
            spec = definition.input_spec(name)
            wanted = InputKind.VALUE if kind == "value" else InputKind.STATEMENT
            if spec is None or spec.kind != wanted:
                return unresolved(kind, name)
            if kind == "value":
                return self.value(block, definition, name)
            return _indent(self.chain(block.statement_inputs.get(name)))

        def unresolved(kind, name):
            raise CompileError(
                "listing template of '%s' refers to unknown %s '%s'" % (block.type, kind, name),
                case="unresolved-placeholder",
            )

        return PLACEHOLDER_RE.sub(substitute, template)


def emit_listing(ws, registry):
    """
    The pseudo-JavaScript listing of ws, one statement per line, nested
    statements indented two spaces per level. Custom blocks are listed with
    their own templates, not their expansions.
    """
    emitter = _ListingEmitter(registry)
    return "".join(emitter.chain(top) for top in ws.top_blocks)

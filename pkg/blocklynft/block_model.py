"""
Block types: their schema, their generator rules and the toolbox manifest.

A BlockRegistry maps each block type to its BlockDefinition and its
GeneratorRule. builtin_registry() returns the compiled-in catalog; custom
blocks are added with register_block() or loaded from a JSON file with
load_blocks(). Custom blocks only ever get semantics by macro expansion
into previously registered types, so the macro graph is a DAG by
construction.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple, Union

from blocklynft import common
from blocklynft.workspace_xml import (
    ToolboxManifest,
    Workspace,
    WorkspaceError,
    chain_to_list,
    parse_workspace,
)

logger = logging.getLogger("blocklynft.block_model")

TYPE_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")
PLACEHOLDER_RE = re.compile(r"\{(field|label|string|value|statements|values):([A-Za-z_][A-Za-z0-9_]*)\}")

# reserved block types that may only appear inside a macro expansion
MACRO_VALUE = "macro_value"
MACRO_STATEMENTS = "macro_statements"
MACRO_PLACEHOLDERS = (MACRO_VALUE, MACRO_STATEMENTS)

VALUE_CHECKS = (None, "Number", "String", "Boolean")

SENSOR_CHANNELS = ("soil_moisture", "temperature", "humidity")
COMPARE_OPS = ("EQ", "NEQ", "LT", "LTE", "GT", "GTE")
ARITH_OPS = ("ADD", "SUB", "MUL", "DIV")
CONTRACT_ARGS = ("ARG0", "ARG1", "ARG2")


class RegistryError(common.BlocklyNftError):
    pass


class FieldKind(str, Enum):
    LABEL = "label"
    TEXT_INPUT = "text_input"
    NUMBER_INPUT = "number_input"
    DROPDOWN = "dropdown"


class InputKind(str, Enum):
    DUMMY = "dummy"
    VALUE = "value"
    STATEMENT = "statement"


@dataclass(frozen=True)
class FieldSpec:
    kind: FieldKind
    name: Optional[str] = None
    default: Union[str, float, None] = None
    # (display, value) pairs, dropdown only
    options: Tuple[Tuple[str, str], ...] = ()

    def option_values(self):
        return [value for display, value in self.options]

    def display_for(self, value):
        for display, option in self.options:
            if option == value:
                return display
        return value


@dataclass(frozen=True)
class InputSpec:
    kind: InputKind
    name: Optional[str] = None
    fields: Tuple[FieldSpec, ...] = ()
    # Blockly's setCheck; only used to pick the default for an absent child
    check: Optional[str] = None


@dataclass(frozen=True)
class BlockDefinition:
    type: str
    inputs: Tuple[InputSpec, ...] = ()
    previous_statement: bool = False
    next_statement: bool = False
    output: Optional[str] = None
    colour: int = 0
    tooltip: str = ""
    help_url: str = ""

    @property
    def is_expression(self):
        return self.output is not None

    def all_fields(self):
        return [spec for input_spec in self.inputs for spec in input_spec.fields]

    def field_spec(self, name):
        for spec in self.all_fields():
            if spec.name == name:
                return spec
        return None

    def input_spec(self, name):
        for spec in self.inputs:
            if spec.name == name and spec.kind != InputKind.DUMMY:
                return spec
        return None


@dataclass(frozen=True)
class NativeLowering:
    opcode: str


@dataclass(frozen=True)
class MacroLowering:
    # a fragment whose single top block (or chain) replaces the instance
    expansion: Workspace


@dataclass(frozen=True)
class GeneratorRule:
    block_type: str
    listing_template: str
    lowering: Union[NativeLowering, MacroLowering]

    @property
    def is_macro(self):
        return isinstance(self.lowering, MacroLowering)


class Violation(NamedTuple):
    field: str
    rule: str

    def __str__(self):
        return "%s: %s" % (self.field, self.rule)


@dataclass(frozen=True)
class BlockRegistry:
    definitions: Dict[str, BlockDefinition] = field(default_factory=dict)
    rules: Dict[str, GeneratorRule] = field(default_factory=dict)

    def __contains__(self, block_type):
        return block_type in self.definitions

    def __len__(self):
        return len(self.definitions)

    def types(self):
        return list(self.definitions)

    def definition(self, block_type):
        try:
            return self.definitions[block_type]
        except KeyError:
            raise RegistryError("unknown block type '%s'" % block_type, case="not-found")

    def rule(self, block_type):
        try:
            return self.rules[block_type]
        except KeyError:
            raise RegistryError("unknown block type '%s'" % block_type, case="not-found")


# ****************************************************************************
#   Validation
# ****************************************************************************
def validate_definition(definition):
    """
    Returns a (possibly empty) list of Violations of the BlockDefinition
    invariants. Violations are data: nothing is raised.
    """
    violations = []
    if not isinstance(definition.type, str) or not TYPE_NAME_RE.match(definition.type):
        violations.append(Violation("type", "must match [a-z][a-z0-9_]*"))
    if (
        isinstance(definition.colour, bool)
        or not isinstance(definition.colour, int)
        or not 0 <= definition.colour < 360
    ):
        violations.append(Violation("colour", "hue must be an integer in [0, 360)"))
    if definition.output is not None and definition.previous_statement:
        violations.append(
            Violation("output", "output and previous_statement are mutually exclusive")
        )
    if definition.output is not None and definition.next_statement:
        violations.append(Violation("next_statement", "next_statement requires no output"))

    input_names = set()
    field_names = set()
    for index, input_spec in enumerate(definition.inputs):
        where = "inputs[%d]" % index
        if input_spec.kind == InputKind.DUMMY:
            if input_spec.name:
                violations.append(Violation(where, "dummy inputs carry no name"))
            if input_spec.check is not None:
                violations.append(Violation(where, "dummy inputs carry no check"))
        elif not input_spec.name:
            violations.append(
                Violation(where, "%s inputs need a nonempty name" % input_spec.kind.value)
            )
        elif input_spec.name in input_names:
            violations.append(
                Violation(where, "duplicate input name '%s'" % input_spec.name)
            )
        else:
            input_names.add(input_spec.name)
        if input_spec.check not in VALUE_CHECKS:
            violations.append(Violation(where, "unknown check '%s'" % input_spec.check))
        for findex, spec in enumerate(input_spec.fields):
            violations.extend(
                _validate_field(spec, "%s.fields[%d]" % (where, findex), field_names)
            )
    return violations


def _validate_field(spec, where, seen):
    violations = []
    if spec.kind == FieldKind.LABEL:
        if spec.name:
            violations.append(Violation(where, "label fields have no name"))
        return violations
    if not spec.name:
        violations.append(
            Violation(where, "%s fields need a nonempty name" % spec.kind.value)
        )
    elif spec.name in seen:
        violations.append(Violation(where, "duplicate field name '%s'" % spec.name))
    else:
        seen.add(spec.name)
    if spec.kind == FieldKind.DROPDOWN:
        if not spec.options:
            violations.append(Violation(where, "dropdown needs at least one option"))
        elif spec.default is not None and spec.default not in spec.option_values():
            violations.append(
                Violation(where, "default '%s' is not an option value" % spec.default)
            )
    elif spec.options:
        violations.append(Violation(where, "only dropdown fields have options"))
    if spec.kind == FieldKind.NUMBER_INPUT and spec.default is not None:
        try:
            float(spec.default)
        except (TypeError, ValueError):
            violations.append(Violation(where, "number default must be numeric"))
    return violations


def template_placeholders(template):
    return PLACEHOLDER_RE.findall(template)


def _validate_template(definition, template):
    for kind, name in template_placeholders(template):
        if kind in ("field", "label", "string"):
            spec = definition.field_spec(name)
            ok = spec is not None and (kind != "label" or spec.kind == FieldKind.DROPDOWN)
        elif kind == "value":
            spec = definition.input_spec(name)
            ok = spec is not None and spec.kind == InputKind.VALUE
        elif kind == "statements":
            spec = definition.input_spec(name)
            ok = spec is not None and spec.kind == InputKind.STATEMENT
        else:
            spec = definition.input_spec(name + "0")
            ok = spec is not None and spec.kind == InputKind.VALUE
        if not ok:
            raise RegistryError(
                "listing template of '%s' refers to unknown %s '%s'"
                % (definition.type, kind, name),
                case="unresolved-placeholder",
            )


def _validate_macro(registry, definition, expansion):
    if len(expansion.top_blocks) != 1:
        raise RegistryError(
            "macro expansion of '%s' must have exactly one top block, found %d"
            % (definition.type, len(expansion.top_blocks)),
            case="bad-macro",
        )
    head = expansion.top_blocks[0]
    for block in _walk(head):
        if block.type in MACRO_PLACEHOLDERS:
            name = block.fields.get("NAME", "")
            spec = definition.input_spec(name)
            wanted = InputKind.VALUE if block.type == MACRO_VALUE else InputKind.STATEMENT
            if spec is None or spec.kind != wanted:
                raise RegistryError(
                    "macro '%s' placeholder %s names no %s input '%s'"
                    % (definition.type, block.type, wanted.value, name),
                    case="bad-macro",
                )
            continue
        if block.type not in registry:
            raise RegistryError(
                "macro expansion of '%s' references unknown type '%s'"
                % (definition.type, block.type),
                case="unknown-type",
            )
        for text in block.fields.values():
            for kind, name in template_placeholders(text):
                if kind != "field" or definition.field_spec(name) is None:
                    raise RegistryError(
                        "macro '%s' field text refers to unknown field '%s'"
                        % (definition.type, name),
                        case="bad-macro",
                    )
    if head.type in MACRO_PLACEHOLDERS:
        head_is_expression = head.type == MACRO_VALUE
    else:
        head_is_expression = registry.definition(head.type).is_expression
    if definition.is_expression != head_is_expression or (
        definition.is_expression and head.next is not None
    ):
        raise RegistryError(
            "macro expansion of '%s' must be %s"
            % (
                definition.type,
                "a single expression" if definition.is_expression else "a statement chain",
            ),
            case="bad-macro",
        )


def _walk(head):
    """Every block reachable from head: chains, value and statement inputs."""
    for block in chain_to_list(head):
        yield block
        for child in block.value_inputs.values():
            yield from _walk(child)
        for child in block.statement_inputs.values():
            yield from _walk(child)


def walk_workspace(ws):
    for top in ws.top_blocks:
        yield from _walk(top)


# ****************************************************************************
#   Registration
# ****************************************************************************
def register_block(registry, definition, rule):
    """
    Returns a new registry holding everything in registry plus the given
    definition and rule. The passed registry is left untouched.
    """
    violations = validate_definition(definition)
    if violations:
        raise RegistryError(
            "invalid definition for '%s': %s"
            % (definition.type, "; ".join(str(v) for v in violations)),
            case="invalid-definition",
        )
    if definition.type in MACRO_PLACEHOLDERS:
        raise RegistryError("'%s' is a reserved block type" % definition.type, case="reserved-type")
    if definition.type in registry:
        raise RegistryError(
            "block type '%s' is already registered" % definition.type,
            case="duplicate-type",
        )
    if rule.block_type != definition.type:
        raise RegistryError(
            "generator rule for '%s' does not match definition '%s'"
            % (rule.block_type, definition.type),
            case="rule-mismatch",
        )
    if not rule.is_macro:
        raise RegistryError(
            "custom block '%s' must lower by macro expansion" % definition.type,
            case="native-custom",
        )
    _validate_template(definition, rule.listing_template)
    _validate_macro(registry, definition, rule.lowering.expansion)
    logger.debug("registered custom block '%s'" % definition.type)
    definitions = dict(registry.definitions)
    definitions[definition.type] = definition
    rules = dict(registry.rules)
    rules[definition.type] = rule
    return BlockRegistry(definitions, rules)


def macro_dependencies(registry):
    """
    Map each macro block type to the sorted list of registered types its
    expansion references. Native types map to [].
    """
    edges = {}
    for block_type in registry.types():
        rule = registry.rule(block_type)
        if rule.is_macro:
            refs = {
                block.type
                for block in walk_workspace(rule.lowering.expansion)
                if block.type not in MACRO_PLACEHOLDERS
            }
            edges[block_type] = sorted(refs)
        else:
            edges[block_type] = []
    return edges


def check_macro_dag(registry):
    """
    Raises RegistryError if macro expansions form a cycle; otherwise returns
    the block types in an order where every macro follows its dependencies.
    """
    edges = macro_dependencies(registry)
    order = []
    state = {}

    def visit(block_type, path):
        if state.get(block_type) == "done":
            return
        if state.get(block_type) == "active":
            raise RegistryError(
                "macro cycle: %s" % " -> ".join(path + [block_type]), case="macro-cycle"
            )
        state[block_type] = "active"
        for dependency in edges.get(block_type, []):
            visit(dependency, path + [block_type])
        state[block_type] = "done"
        order.append(block_type)

    for block_type in edges:
        visit(block_type, [])
    return order


def validate_toolbox(manifest, registry):
    violations = []
    for index, (name, block_types) in enumerate(manifest.categories):
        if not name:
            violations.append(Violation("categories[%d]" % index, "empty category name"))
        for block_type in block_types:
            if block_type not in registry:
                violations.append(
                    Violation(
                        "categories[%d]" % index,
                        "block type '%s' is not registered" % block_type,
                    )
                )
    return violations


def toolbox_for(registry, custom_category="MyBlocks"):
    """
    A manifest listing the builtin catalog plus every custom block under
    custom_category.
    """
    builtins = [t for t in registry.types() if not registry.rule(t).is_macro]
    custom = [t for t in registry.types() if registry.rule(t).is_macro]
    categories = [("Builtins", builtins)]
    if custom:
        categories.append((custom_category, custom))
    return ToolboxManifest(categories)


# ****************************************************************************
#   Builtin catalog
# ****************************************************************************
def _label(text):
    return FieldSpec(FieldKind.LABEL, default=text)


def _dropdown(name, options, default=None):
    return FieldSpec(
        FieldKind.DROPDOWN,
        name=name,
        default=default if default is not None else options[0][1],
        options=tuple(options),
    )


def _value(name, check=None, *fields):
    return InputSpec(InputKind.VALUE, name=name, fields=tuple(fields), check=check)


def _statement(name, *fields):
    return InputSpec(InputKind.STATEMENT, name=name, fields=tuple(fields))


def _dummy(*fields):
    return InputSpec(InputKind.DUMMY, fields=tuple(fields))


def _statement_block(block_type, inputs, colour, tooltip="", next_statement=True):
    return BlockDefinition(
        type=block_type,
        inputs=tuple(inputs),
        previous_statement=True,
        next_statement=next_statement,
        colour=colour,
        tooltip=tooltip,
    )


def _expression_block(block_type, inputs, output, colour, tooltip=""):
    return BlockDefinition(
        type=block_type, inputs=tuple(inputs), output=output, colour=colour, tooltip=tooltip
    )


_CONTRACT_ARG_INPUTS = tuple(_value(name) for name in CONTRACT_ARGS)

# (definition, listing template) in catalog order
_BUILTINS = (
    (
        _statement_block("helloworld", [_dummy(_label("Hello World"))], 230),
        'print("Hello World");\n',
    ),
    (
        _statement_block("print", [_value("TEXT", "String", _label("print"))], 160, "Print a line."),
        "print({value:TEXT});\n",
    ),
    (
        _expression_block(
            "text_literal",
            [_dummy(FieldSpec(FieldKind.TEXT_INPUT, name="TEXT", default=""))],
            "String",
            160,
        ),
        "{string:TEXT}",
    ),
    (
        _expression_block(
            "number_literal",
            [_dummy(FieldSpec(FieldKind.NUMBER_INPUT, name="NUM", default=0))],
            "Number",
            230,
        ),
        "{field:NUM}",
    ),
    (
        _expression_block(
            "sensor_read",
            [
                _dummy(
                    _label("read sensor"),
                    _dropdown(
                        "CHANNEL",
                        [
                            ("soil moisture", "soil_moisture"),
                            ("temperature", "temperature"),
                            ("humidity", "humidity"),
                        ],
                    ),
                )
            ],
            "Number",
            20,
            "Current reading of a plant sensor.",
        ),
        'readSensor("{field:CHANNEL}")',
    ),
    (
        _expression_block("weather_read", [_dummy(_label("weather"))], "String", 20),
        "readWeather()",
    ),
    (
        _expression_block(
            "clock_now", [_dummy(_label("minutes since start"))], "Number", 20
        ),
        "clockNow()",
    ),
    (
        _expression_block(
            "logic_compare",
            [
                _value("A"),
                _value(
                    "B",
                    None,
                    _dropdown(
                        "OP",
                        [("==", "EQ"), ("!=", "NEQ"), ("<", "LT"), ("<=", "LTE"), (">", "GT"), (">=", "GTE")],
                    ),
                ),
            ],
            "Boolean",
            210,
        ),
        "{value:A} {label:OP} {value:B}",
    ),
    (
        _expression_block(
            "math_arith",
            [
                _value("A", "Number"),
                _value(
                    "B",
                    "Number",
                    _dropdown("OP", [("+", "ADD"), ("-", "SUB"), ("*", "MUL"), ("/", "DIV")]),
                ),
            ],
            "Number",
            230,
        ),
        "({value:A} {label:OP} {value:B})",
    ),
    (
        _statement_block(
            "controls_if",
            [_value("IF0", "Boolean", _label("if")), _statement("DO0", _label("do")), _statement("ELSE", _label("else"))],
            210,
        ),
        "if ({value:IF0}) {\n{statements:DO0}} else {\n{statements:ELSE}}\n",
    ),
    (
        _statement_block(
            "controls_repeat",
            [_value("TIMES", "Number", _label("repeat")), _statement("DO", _label("do"))],
            120,
        ),
        "repeat ({value:TIMES}) {\n{statements:DO}}\n",
    ),
    (
        _statement_block(
            "controls_forever_ticks",
            [_dummy(_label("every tick")), _statement("DO")],
            120,
            "Runs its body once per sensor tick.",
            next_statement=False,
        ),
        "forEachTick(function () {\n{statements:DO}});\n",
    ),
    (
        _expression_block(
            "contract_call",
            [
                _dummy(
                    _label("call"),
                    FieldSpec(FieldKind.TEXT_INPUT, name="METHOD", default="totalSupply"),
                )
            ]
            + list(_CONTRACT_ARG_INPUTS),
            "Any",
            290,
            "Call a read-only method on the contract.",
        ),
        "contract.methods.{field:METHOD}({values:ARG}).call()",
    ),
    (
        _statement_block(
            "contract_send",
            [
                _dummy(
                    _label("send"),
                    FieldSpec(FieldKind.TEXT_INPUT, name="METHOD", default="mint"),
                    _label("from"),
                    FieldSpec(FieldKind.TEXT_INPUT, name="FROM", default=""),
                )
            ]
            + list(_CONTRACT_ARG_INPUTS),
            290,
            "Send a transaction to the contract.",
        ),
        'contract.methods.{field:METHOD}({values:ARG}).send({ from: {string:FROM} });\n',
    ),
    (
        _statement_block(
            "nft_set_attribute",
            [
                _value("TOKEN", "Number", _label("set attribute of token")),
                _value("TRAIT", "String", _label("trait")),
                _value("VALUE", None, _label("to")),
            ],
            290,
        ),
        "contract.methods.setAttribute({value:TOKEN}, {value:TRAIT}, {value:VALUE}).send();\n",
    ),
    (
        _statement_block(
            "irrigate", [_value("DURATION", "Number", _label("irrigate for seconds"))], 65
        ),
        "irrigate({value:DURATION});\n",
    ),
    (
        _statement_block("log_crop", [_value("NOTE", "String", _label("log crop"))], 65),
        "logCrop({value:NOTE});\n",
    ),
)


def builtin_registry():
    """
    A fresh registry holding the compiled-in catalog, each type lowered
    natively to the opcode of the same name.
    """
    definitions = {}
    rules = {}
    for definition, template in _BUILTINS:
        definitions[definition.type] = definition
        rules[definition.type] = GeneratorRule(
            definition.type, template, NativeLowering(definition.type)
        )
    return BlockRegistry(definitions, rules)


BUILTIN_TYPES = tuple(definition.type for definition, template in _BUILTINS)


# ****************************************************************************
#   JSON loading
# ****************************************************************************
def _field_from_dict(data):
    return FieldSpec(
        kind=FieldKind(data["kind"]),
        name=data.get("name"),
        default=data.get("default"),
        options=tuple((str(d), str(v)) for d, v in data.get("options", [])),
    )


def _input_from_dict(data):
    return InputSpec(
        kind=InputKind(data["kind"]),
        name=data.get("name"),
        fields=tuple(_field_from_dict(f) for f in data.get("fields", [])),
        check=data.get("check"),
    )


def definition_from_dict(data):
    return BlockDefinition(
        type=data["type"],
        inputs=tuple(_input_from_dict(i) for i in data.get("inputs", [])),
        previous_statement=bool(data.get("previous_statement", False)),
        next_statement=bool(data.get("next_statement", False)),
        output=data.get("output"),
        colour=data.get("colour", 0),
        tooltip=data.get("tooltip", ""),
        help_url=data.get("help_url", ""),
    )


def rule_from_dict(block_type, data):
    lowering = data.get("lowering", {})
    if "macro" not in lowering:
        raise RegistryError(
            "custom block '%s' must give a macro lowering" % block_type,
            case="native-custom",
        )
    try:
        expansion = parse_workspace(lowering["macro"])
    except WorkspaceError as err:
        raise RegistryError(
            "macro expansion of '%s' does not parse: %s" % (block_type, err),
            case="bad-macro",
        )
    return GeneratorRule(
        block_type=block_type,
        listing_template=data.get("listing_template", ""),
        lowering=MacroLowering(expansion),
    )


def load_blocks(path, registry=None):
    """
    Register every block described in the JSON file at path, in file order,
    on top of registry (the builtin catalog by default).

    File shape:
        {"blocks": [{"definition": {...BlockDefinition fields...},
                     "generator": {"listing_template": "...",
                                   "lowering": {"macro": "<xml>...</xml>"}}}]}
    """
    if registry is None:
        registry = builtin_registry()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as err:
        raise RegistryError("cannot read block file %s: %s" % (path, err), case="bad-blocks-file")
    except ValueError as err:
        raise RegistryError("block file %s is not JSON: %s" % (path, err), case="bad-blocks-file")
    try:
        entries = data["blocks"]
        for entry in entries:
            definition = definition_from_dict(entry["definition"])
            rule = rule_from_dict(definition.type, entry.get("generator", {}))
            registry = register_block(registry, definition, rule)
    except (KeyError, TypeError, ValueError) as err:
        raise RegistryError(
            "block file %s has an unexpected shape: %r" % (path, err), case="bad-blocks-file"
        )
    logger.info("loaded %d custom block(s) from %s" % (len(entries), path))
    return registry

import json
import os

import pytest

from blocklynft import block_model, common
from blocklynft.block_model import (
    BlockDefinition,
    FieldKind,
    FieldSpec,
    GeneratorRule,
    InputKind,
    InputSpec,
    MacroLowering,
    NativeLowering,
    RegistryError,
    ToolboxManifest,
    Violation,
)
from blocklynft.workspace_xml import parse_toolbox, parse_workspace
from tests.basetest import BaseTest, ExpectError, temp_dir

# the helloworld block as the Block Factory builds it
HELLOWORLD = BlockDefinition(
    type="helloworld",
    inputs=(InputSpec(InputKind.DUMMY, fields=(FieldSpec(FieldKind.LABEL, default="Hello World"),)),),
    previous_statement=True,
    next_statement=True,
    colour=230,
)


def macro(xml_body):
    return MacroLowering(
        parse_workspace('<xml xmlns="https://developers.google.com/blockly/xml">%s</xml>' % xml_body)
    )


def greet_definition(block_type="greet"):
    return BlockDefinition(
        type=block_type, previous_statement=True, next_statement=True, colour=120
    )


def greet_rule(block_type="greet", body='<block type="helloworld"/>'):
    return GeneratorRule(block_type, "greet();\n", macro(body))


class TestValidateDefinition(BaseTest):
    def test_helloworld_is_valid(self):
        assert block_model.validate_definition(HELLOWORLD) == []

    def test_builtin_helloworld_matches_block_factory(self):
        definition = block_model.builtin_registry().definition("helloworld")
        assert definition.previous_statement and definition.next_statement
        assert definition.colour == 230
        assert definition.all_fields()[0].default == "Hello World"

    def test_output_and_previous_statement(self):
        bad = BlockDefinition(type="bad", previous_statement=True, output="Number")
        assert Violation("output", "output and previous_statement are mutually exclusive") in (
            block_model.validate_definition(bad)
        )

    def test_colour_range(self):
        for colour in (-1, 360, 1.5, True):
            violations = block_model.validate_definition(BlockDefinition(type="x", colour=colour))
            assert [v.field for v in violations] == ["colour"], colour

    def test_type_name(self):
        violations = block_model.validate_definition(BlockDefinition(type="Hello-World"))
        assert [v.field for v in violations] == ["type"]

    def test_duplicate_names(self):
        definition = BlockDefinition(
            type="x",
            inputs=(
                InputSpec(InputKind.VALUE, name="A"),
                InputSpec(InputKind.VALUE, name="A"),
                InputSpec(
                    InputKind.DUMMY,
                    fields=(
                        FieldSpec(FieldKind.TEXT_INPUT, name="F"),
                        FieldSpec(FieldKind.TEXT_INPUT, name="F"),
                    ),
                ),
            ),
        )
        rules = [v.rule for v in block_model.validate_definition(definition)]
        assert "duplicate input name 'A'" in rules
        assert "duplicate field name 'F'" in rules

    def test_dropdown_needs_options(self):
        definition = BlockDefinition(
            type="x",
            inputs=(InputSpec(InputKind.DUMMY, fields=(FieldSpec(FieldKind.DROPDOWN, name="D"),)),),
        )
        assert [v.rule for v in block_model.validate_definition(definition)] == [
            "dropdown needs at least one option"
        ]

    def test_violations_are_data(self):
        # nothing raised, however broken
        broken = BlockDefinition(type="", colour=999, output="Number", next_statement=True)
        assert len(block_model.validate_definition(broken)) == 3


class TestRegisterBlock(BaseTest):
    def setUp(self):
        BaseTest.setUp(self)
        self.registry = block_model.builtin_registry()

    def test_builtin_catalog(self):
        assert self.registry.types() == list(block_model.BUILTIN_TYPES)
        for block_type in self.registry.types():
            assert block_model.validate_definition(self.registry.definition(block_type)) == []
            assert not self.registry.rule(block_type).is_macro

    def test_register_returns_new_registry(self):
        bigger = block_model.register_block(self.registry, greet_definition(), greet_rule())
        assert "greet" in bigger
        assert "greet" not in self.registry
        assert len(bigger) == len(self.registry) + 1

    def test_duplicate_type(self):
        with ExpectError("already registered", "helloworld twice", case="duplicate-type"):
            block_model.register_block(
                self.registry,
                HELLOWORLD,
                GeneratorRule("helloworld", "", macro('<block type="print"/>')),
            )

    def test_invalid_definition(self):
        with ExpectError("invalid definition", "bad colour", case="invalid-definition"):
            block_model.register_block(
                self.registry,
                BlockDefinition(type="greet", colour=400, previous_statement=True),
                greet_rule(),
            )

    def test_custom_block_must_be_macro(self):
        with ExpectError("macro", "native custom block", case="native-custom"):
            block_model.register_block(
                self.registry, greet_definition(), GeneratorRule("greet", "", NativeLowering("greet"))
            )

    def test_rule_mismatch(self):
        with ExpectError("does not match", "rule for another type", case="rule-mismatch"):
            block_model.register_block(self.registry, greet_definition(), greet_rule("other"))

    def test_macro_references_unknown_type(self):
        with ExpectError("unknown type 'nope'", "unregistered reference", case="unknown-type"):
            block_model.register_block(
                self.registry, greet_definition(), greet_rule(body='<block type="nope"/>')
            )

    def test_macro_must_match_shape(self):
        with ExpectError("statement chain", "expression for a statement block", case="bad-macro"):
            block_model.register_block(
                self.registry, greet_definition(), greet_rule(body='<block type="clock_now"/>')
            )

    def test_reserved_type(self):
        with ExpectError("reserved", "placeholder type", case="reserved-type"):
            block_model.register_block(
                self.registry,
                greet_definition("macro_value"),
                greet_rule("macro_value"),
            )

    def test_template_placeholders_must_resolve(self):
        with ExpectError("unknown field 'NOPE'", "dangling placeholder", case="unresolved-placeholder"):
            block_model.register_block(
                self.registry,
                greet_definition(),
                GeneratorRule("greet", "greet({field:NOPE});\n", greet_rule().lowering),
            )

    def test_dependencies_and_dag(self):
        registry = block_model.register_block(self.registry, greet_definition(), greet_rule())
        registry = block_model.register_block(
            registry,
            greet_definition("greet_twice"),
            greet_rule("greet_twice", '<block type="greet"><next><block type="greet"/></next></block>'),
        )
        edges = block_model.macro_dependencies(registry)
        assert edges["greet"] == ["helloworld"]
        assert edges["greet_twice"] == ["greet"]
        assert edges["print"] == []
        order = block_model.check_macro_dag(registry)
        assert order.index("helloworld") < order.index("greet") < order.index("greet_twice")

    def test_cycle_is_reported(self):
        registry = block_model.register_block(self.registry, greet_definition(), greet_rule())
        # forge a cycle behind register_block's back
        rules = dict(registry.rules)
        rules["greet"] = greet_rule(body='<block type="greet"/>')
        cyclic = block_model.BlockRegistry(dict(registry.definitions), rules)
        with ExpectError("greet -> greet", "self-reference", case="macro-cycle"):
            block_model.check_macro_dag(cyclic)


class TestToolbox(BaseTest):
    def test_bundled_toolbox_is_valid(self):
        with open(common.data_file("toolbox.xml")) as f:
            manifest = parse_toolbox(f.read())
        assert block_model.validate_toolbox(manifest, block_model.builtin_registry()) == []

    def test_unknown_type(self):
        manifest = ToolboxManifest([("MyBlocks", ["helloworld", "nope"])])
        assert block_model.validate_toolbox(manifest, block_model.builtin_registry()) == [
            Violation("categories[0]", "block type 'nope' is not registered")
        ]

    def test_toolbox_for(self):
        registry = block_model.load_blocks(common.data_file("plant_blocks.json"))
        manifest = block_model.toolbox_for(registry)
        assert manifest.categories[-1] == ("MyBlocks", ("water_if_dry",))
        assert block_model.validate_toolbox(manifest, registry) == []


class TestLoadBlocks(BaseTest):
    def test_plant_blocks(self):
        registry = block_model.load_blocks(common.data_file("plant_blocks.json"))
        rule = registry.rule("water_if_dry")
        assert rule.is_macro
        assert registry.definition("water_if_dry").field_spec("THRESHOLD").default == 30
        assert block_model.macro_dependencies(registry)["water_if_dry"] == [
            "controls_if",
            "irrigate",
            "log_crop",
            "logic_compare",
            "number_literal",
            "sensor_read",
            "text_literal",
        ]

    def test_missing_file(self):
        with temp_dir() as tmp:
            with ExpectError("cannot read", "no such file", case="bad-blocks-file"):
                block_model.load_blocks(os.path.join(tmp, "none.json"))

    def test_unparseable_macro(self):
        with temp_dir() as tmp:
            path = os.path.join(tmp, "blocks.json")
            with open(path, "w") as f:
                json.dump(
                    {
                        "blocks": [
                            {
                                "definition": {"type": "greet", "previous_statement": True},
                                "generator": {"lowering": {"macro": "<xml"}},
                            }
                        ]
                    },
                    f,
                )
            with ExpectError("does not parse", "broken macro XML", case="bad-macro"):
                block_model.load_blocks(path)


@pytest.mark.parametrize("content", ["not json", '{"nothing": []}', '{"blocks": [{}]}'])
def test_load_blocks_bad_shape(content):
    with temp_dir() as tmp:
        path = os.path.join(tmp, "blocks.json")
        with open(path, "w") as f:
            f.write(content)
        with pytest.raises(RegistryError) as info:
            block_model.load_blocks(path)
        assert info.value.case == "bad-blocks-file"

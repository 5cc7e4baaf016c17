"""
Reads and writes the Blockly XML subset used for workspaces and toolboxes.

Only the elements block, field, value, statement and next are understood
inside a workspace; a toolbox holds category elements of block elements.
Anything else (shadow, mutation, comment, ...) is rejected.

The serializers emit one canonical form: the Blockly namespace on the root,
block attributes in the order (type, id), children in the order fields, value
inputs by name, statement inputs by name, next. An empty document is written
as '<xml xmlns="https://developers.google.com/blockly/xml"/>'.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

from lxml import etree

from blocklynft import common

logger = logging.getLogger("blocklynft.workspace_xml")

BLOCKLY_NS = "https://developers.google.com/blockly/xml"

_WORKSPACE_ELEMENTS = ("block", "field", "value", "statement", "next")


class WorkspaceError(common.BlocklyNftError):
    pass


@dataclass(frozen=True)
class BlockInstance:
    """
    One placed block. id/x/y are editor layout and take no part in equality.
    """

    type: str
    fields: Dict[str, str] = field(default_factory=dict)
    value_inputs: Dict[str, "BlockInstance"] = field(default_factory=dict)
    statement_inputs: Dict[str, "BlockInstance"] = field(default_factory=dict)
    next: Optional["BlockInstance"] = None
    id: Optional[str] = field(default=None, compare=False)
    x: Optional[str] = field(default=None, compare=False)
    y: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Workspace:
    top_blocks: Tuple[BlockInstance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "top_blocks", tuple(self.top_blocks))


@dataclass(frozen=True)
class ToolboxManifest:
    # ordered (category name, ordered block types) pairs
    categories: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self,
            "categories",
            tuple((name, tuple(types)) for name, types in self.categories),
        )


def chain_to_list(head):
    """
    Flatten a next-chain into a list of blocks, each with next stripped.
    """
    blocks = []
    while head is not None:
        blocks.append(replace(head, next=None))
        head = head.next
    return blocks


def list_to_chain(blocks):
    """
    Inverse of chain_to_list(): relink blocks through their next slots.
    Returns the head, or None for an empty list.
    """
    head = None
    for block in reversed(list(blocks)):
        head = replace(block, next=head)
    return head


# ****************************************************************************
#   Parsing
# ****************************************************************************
def _parse_document(text):
    if isinstance(text, str):
        text = text.encode("utf-8")
    parser = etree.XMLParser(resolve_entities=False, no_network=True)
    try:
        root = etree.fromstring(text, parser=parser)
    except (etree.XMLSyntaxError, ValueError) as err:
        raise WorkspaceError("malformed XML: %s" % err, case="malformed-xml")
    _check_element(root)
    if etree.QName(root).localname != "xml":
        raise WorkspaceError(
            "root element must be 'xml', not '%s'" % etree.QName(root).localname,
            case="wrong-root",
        )
    return root


def _check_element(element):
    namespace = etree.QName(element).namespace
    if namespace not in (None, BLOCKLY_NS):
        raise WorkspaceError(
            "element '%s' is in namespace '%s'; only the Blockly namespace is accepted"
            % (etree.QName(element).localname, namespace),
            case="wrong-namespace",
        )


def _children(element):
    """
    Element children with namespace checked, skipping comments and
    processing instructions; stray text is an error.
    """
    if element.text is not None and element.text.strip():
        raise WorkspaceError(
            "unexpected text %r inside '%s'"
            % (element.text.strip(), etree.QName(element).localname),
            case="unexpected-text",
        )
    children = []
    for child in element:
        if child.tail is not None and child.tail.strip():
            raise WorkspaceError(
                "unexpected text %r inside '%s'"
                % (child.tail.strip(), etree.QName(element).localname),
                case="unexpected-text",
            )
        if not isinstance(child.tag, str):
            continue
        _check_element(child)
        children.append(child)
    return children


def _localname(element):
    return etree.QName(element).localname


def _single_block(element):
    kids = _children(element)
    if len(kids) != 1 or _localname(kids[0]) != "block":
        raise WorkspaceError(
            "'%s' element must hold exactly one block, found %d child element(s)"
            % (_localname(element), len(kids)),
            case="bad-child-count",
        )
    return _parse_block(kids[0])


def _required_name(element):
    name = element.get("name")
    if not name:
        raise WorkspaceError(
            "'%s' element is missing its name attribute" % _localname(element),
            case="missing-name",
        )
    return name


def _parse_block(element):
    block_type = element.get("type")
    if not block_type:
        raise WorkspaceError("block element missing type attribute", case="missing-type")
    fields = {}
    value_inputs = {}
    statement_inputs = {}
    next_block = None
    for child in _children(element):
        tag = _localname(child)
        if tag == "field":
            name = _required_name(child)
            if name in fields:
                raise WorkspaceError(
                    "block '%s' has two fields named '%s'" % (block_type, name),
                    case="duplicate-name",
                )
            if len(child):
                raise WorkspaceError(
                    "field '%s' may only hold text" % name, case="unknown-element"
                )
            fields[name] = child.text or ""
        elif tag in ("value", "statement"):
            name = _required_name(child)
            target = value_inputs if tag == "value" else statement_inputs
            if name in value_inputs or name in statement_inputs:
                raise WorkspaceError(
                    "block '%s' has two inputs named '%s'" % (block_type, name),
                    case="duplicate-name",
                )
            target[name] = _single_block(child)
        elif tag == "next":
            if next_block is not None:
                raise WorkspaceError(
                    "block '%s' has more than one next element" % block_type,
                    case="bad-child-count",
                )
            next_block = _single_block(child)
        else:
            raise WorkspaceError(
                "unknown element '%s' inside block '%s'" % (tag, block_type),
                case="unknown-element",
            )
    return BlockInstance(
        type=block_type,
        fields=fields,
        value_inputs=value_inputs,
        statement_inputs=statement_inputs,
        next=next_block,
        id=element.get("id"),
        x=element.get("x"),
        y=element.get("y"),
    )


def parse_workspace(text):
    """
    Parse a Blockly workspace document into a Workspace.
    """
    root = _parse_document(text)
    top_blocks = []
    for child in _children(root):
        tag = _localname(child)
        if tag != "block":
            raise WorkspaceError(
                "unknown element '%s' in workspace (expected one of %s)"
                % (tag, ", ".join(_WORKSPACE_ELEMENTS)),
                case="unknown-element",
            )
        top_blocks.append(_parse_block(child))
    logger.debug("parsed workspace with %d top block(s)" % len(top_blocks))
    return Workspace(top_blocks)


def parse_toolbox(text):
    """
    Parse a toolbox document. The root's id and style attributes are
    tolerated and ignored.
    """
    root = _parse_document(text)
    categories = []
    for child in _children(root):
        if _localname(child) != "category":
            raise WorkspaceError(
                "unknown element '%s' in toolbox" % _localname(child),
                case="unknown-element",
            )
        name = child.get("name")
        if not name:
            raise WorkspaceError(
                "category element is missing its name attribute",
                case="category-missing-name",
            )
        block_types = []
        for member in _children(child):
            if _localname(member) != "block":
                raise WorkspaceError(
                    "unknown element '%s' in category '%s'" % (_localname(member), name),
                    case="unknown-element",
                )
            block_type = member.get("type")
            if not block_type:
                raise WorkspaceError(
                    "block element in category '%s' missing type attribute" % name,
                    case="missing-type",
                )
            block_types.append(block_type)
        categories.append((name, block_types))
    return ToolboxManifest(categories)


# ****************************************************************************
#   Serialization
# ****************************************************************************
def _tag(name):
    return "{%s}%s" % (BLOCKLY_NS, name)


def _root():
    return etree.Element(_tag("xml"), nsmap={None: BLOCKLY_NS})


def _block_element(parent, block):
    element = etree.SubElement(parent, _tag("block"))
    element.set("type", block.type)
    if block.id is not None:
        element.set("id", block.id)
    for name, text in block.fields.items():
        field_element = etree.SubElement(element, _tag("field"))
        field_element.set("name", name)
        field_element.text = text
    for tag, inputs in (("value", block.value_inputs), ("statement", block.statement_inputs)):
        for name in sorted(inputs):
            input_element = etree.SubElement(element, _tag(tag))
            input_element.set("name", name)
            _block_element(input_element, inputs[name])
    if block.next is not None:
        _block_element(etree.SubElement(element, _tag("next")), block.next)
    return element


def _to_text(root):
    return etree.tostring(root, encoding="unicode", pretty_print=len(root) > 0).rstrip(
        "\n"
    )


def serialize_workspace(ws):
    root = _root()
    for block in ws.top_blocks:
        _block_element(root, block)
    return _to_text(root)


def serialize_toolbox(manifest):
    root = _root()
    for name, block_types in manifest.categories:
        category = etree.SubElement(root, _tag("category"))
        category.set("name", name)
        for block_type in block_types:
            etree.SubElement(category, _tag("block")).set("type", block_type)
    return _to_text(root)

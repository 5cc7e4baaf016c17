"""
Check a workspace or toolbox document against the block registry.

Every problem found is printed as one line on stdout; the exit status is 1
when there is any.
"""

import logging

from blocklynft import block_model, blocklynft_base, codegen
from blocklynft.block_model import Violation
from blocklynft.workspace_xml import WorkspaceError, parse_toolbox, parse_workspace

logger = logging.getLogger("blocklynft.validate")


def workspace_violations(text, registry):
    try:
        ws = parse_workspace(text)
    except WorkspaceError as err:
        return [Violation("document", "%s (%s)" % (err, err.case))]
    violations = [
        Violation("block", "type '%s' is not registered" % block.type)
        for block in block_model.walk_workspace(ws)
        if block.type not in registry
    ]
    if not violations:
        try:
            codegen.compile_workspace(ws, registry)
        except codegen.CompileError as err:
            violations.append(Violation("program", "%s (%s)" % (err, err.case)))
    return violations


def toolbox_violations(text, registry):
    try:
        manifest = parse_toolbox(text)
    except WorkspaceError as err:
        return [Violation("document", "%s (%s)" % (err, err.case))]
    return block_model.validate_toolbox(manifest, registry)


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Validate a workspace (or toolbox) document.",
        )

    def register(self, parser):
        parser.description = "Validate a workspace (or, with --toolbox, a toolbox) document."
        parser.add_argument("path", help="Blockly XML document")
        parser.add_argument(
            "--toolbox",
            action="store_true",
            default=False,
            help="read the document as a toolbox rather than a workspace",
        )

    def run(self, args):
        registry = self.registry(args)
        text = self.read_text(args.path, "toolbox" if args.toolbox else "workspace")
        check = toolbox_violations if args.toolbox else workspace_violations
        violations = check(text, registry)
        for violation in violations:
            print("%s: %s" % (args.path, violation))
        if violations:
            logger.info("%s: %d problem(s)" % (args.path, len(violations)))
            return 1
        print("%s: ok" % args.path)
        return 0

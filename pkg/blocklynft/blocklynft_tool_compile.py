"""
Compile a workspace and print its listing or its IR.
"""

import sys

from blocklynft import blocklynft_base, codegen
from blocklynft.workspace_xml import parse_workspace


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Compile a workspace to a listing or IR JSON.",
        )

    def register(self, parser):
        parser.description = "Compile a workspace to a listing or IR JSON."
        parser.add_argument("path", help="Blockly workspace XML file")
        parser.add_argument(
            "--emit",
            choices=["listing", "ir"],
            default="listing",
            help="listing: pseudo-JavaScript; ir: the Program as compact JSON",
        )
        parser.add_argument(
            "--strict",
            action="store_true",
            default=False,
            help="reject blocks with empty value inputs instead of defaulting them",
        )

    def run(self, args):
        registry = self.registry(args)
        ws = parse_workspace(self.read_text(args.path))
        program = codegen.compile_workspace(ws, registry, strict=args.strict)
        if args.emit == "ir":
            print(codegen.program_to_json_text(program))
        else:
            sys.stdout.write(codegen.emit_listing(ws, registry))
        return 0

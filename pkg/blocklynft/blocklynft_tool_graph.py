"""
Graph the block types of the registry.

Each registered block type is a node; each custom block has an edge to every
block type its macro expansion uses.
"""

import logging
import os
import tempfile
import webbrowser

import pydot

from blocklynft import block_model, blocklynft_base, common

logger = logging.getLogger("blocklynft.graph")


class GraphError(common.BlocklyNftError):
    pass


def build_graph(registry, label="block types"):
    # raises RegistryError on a cycle before anything is drawn
    block_model.check_macro_dag(registry)
    edges = block_model.macro_dependencies(registry)

    graph = pydot.Dot(label=label, graph_type="digraph")
    graph.set("overlap", "false")
    graph.set("splines", "true")
    graph.set("labelloc", "top")
    graph.set_node_defaults(shape="box")

    for block_type in registry.types():
        node = pydot.Node(block_type, label=block_type)
        if registry.rule(block_type).is_macro:
            logger.debug(" graph adding custom block %s" % block_type)
            node.set_shape("octagon")
        graph.add_node(node)
    for block_type, dependencies in edges.items():
        for dependency in dependencies:
            logger.debug(" graph adding dependency %s -> %s" % (block_type, dependency))
            graph.add_edge(pydot.Edge(block_type, dependency))
    return graph


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Graph custom blocks and the block types they expand to.",
        )

    def register(self, parser):
        parser.description = "Graph custom blocks and the block types they expand to."
        parser.add_argument(
            "-t",
            "--type",
            dest="graph_type",
            choices=["dot", "circo", "neato", "twopi", "fdp", "sfdp"],
            default="dot",
            help="which graphviz tool should be used to draw the graph",
        )
        parser.add_argument(
            "--display",
            dest="display",
            action="store_true",
            default=False,
            help="render the graph and open it; otherwise print dot text on stdout",
        )
        parser.add_argument(
            "--graph-file",
            "-g",
            dest="graph_file",
            default=None,
            help="render the graph into the specified file (.png, .svg or .jpeg)",
        )
        parser.add_argument(
            "--dot-file",
            "-D",
            dest="dot_file",
            default=None,
            help="save the dot input file in the specified file",
        )

    def run(self, args):
        registry = self.registry(args)
        graph = build_graph(registry)

        if args.dot_file:
            graph.write_raw(args.dot_file)

        if args.display or args.graph_file:
            graph_file = args.graph_file or os.path.join(
                tempfile.gettempdir(), "blocklynft_graph_%s.png" % args.graph_type
            )
            logger.info("writing %s" % graph_file)
            try:
                if graph_file.endswith(".svg"):
                    graph.write_svg(graph_file, prog=args.graph_type)
                elif graph_file.endswith(".jpeg"):
                    graph.write_jpeg(graph_file, prog=args.graph_type)
                else:
                    graph.write_png(graph_file, prog=args.graph_type)
            except (OSError, AssertionError) as err:
                raise GraphError("cannot render %s: %s" % (graph_file, err),
                                 case="render-failed")
            if args.display and not args.graph_file:
                webbrowser.open("file:" + graph_file)
        elif not args.dot_file:
            print("%s" % graph.to_string())
        return 0

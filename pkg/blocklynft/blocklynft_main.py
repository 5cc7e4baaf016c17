#!/usr/bin/env python3

import argparse
import glob
import importlib
import logging
import os
import sys
from pathlib import Path

from blocklynft import common
from blocklynft.common import BlocklyNftError

# Environment variable carrying the log level down to child invocations
BLOCKLYNFT_LOGLEVEL = "BLOCKLYNFT_LOGLEVEL"

LOGLEVEL_FLAGS = {
    "--quiet": logging.ERROR,
    "": logging.WARNING,
    "--verbose": logging.INFO,
    "--debug": logging.DEBUG,
}
SHORT_FLAGS = {"-q": "--quiet", "-v": "--verbose", "-d": "--debug"}

_SCRIPT_DIR = os.path.abspath(os.path.dirname(__file__))

# options every command accepts, before or after its name
GLOBAL_OPTIONS = (
    (("-q", "--quiet"), dict(help="minimal output", action="store_const",
                             const=logging.ERROR, dest="logging_level")),
    (("-v", "--verbose"), dict(help="verbose output", action="store_const",
                               const=logging.INFO, dest="logging_level")),
    (("-d", "--debug"), dict(help="debug output", action="store_const",
                             const=logging.DEBUG, dest="logging_level")),
    (("--config-file",), dict(
        dest="config_filename",
        help='project configuration file\n  (defaults to $BLOCKLYNFT_CONFIG_FILE or "blocklynft.xml").',
    )),
    (("--blocks",), dict(dest="blocks",
                         help="custom block JSON file loaded before the command runs")),
)


def tool_modules():
    """Every blocklynft_tool_*.py module defining a BlocklyNftTool, by name."""
    modules = []
    for file_name in sorted(glob.glob(os.path.join(_SCRIPT_DIR, "blocklynft_tool_*.py"))):
        module = importlib.import_module(".%s" % Path(file_name).stem, package="blocklynft")
        if hasattr(module, "BlocklyNftTool"):
            modules.append(module)
    return modules


def environment_loglevel():
    value = os.environ.get(BLOCKLYNFT_LOGLEVEL, "")
    try:
        return LOGLEVEL_FLAGS[SHORT_FLAGS.get(value, value)]
    except KeyError:
        raise BlocklyNftError("invalid %s value '%s'" % (BLOCKLYNFT_LOGLEVEL, value))


class BlocklyNft:
    def __init__(self):
        self.parser = argparse.ArgumentParser(
            description="Blockly programs, a plant simulator and a mutable-metadata NFT ledger",
            prog="blocklynft",
        )
        self.parser.add_argument("-V", "--version", action="store_true",
                                 help="show program's version number and exit")
        for flags, kwds in GLOBAL_OPTIONS:
            self.parser.add_argument(*flags, **kwds)
        self.subparsers = self.parser.add_subparsers(
            title="Sub Commands",
            description="Valid Sub Commands",
            help="Sub Command help",
        )

    def register_tool(self, module):
        tool = module.BlocklyNftTool()
        details = tool.get_details()
        subparser = self.subparsers.add_parser(details["name"], help=details["description"])
        tool.register(subparser)
        for flags, kwds in GLOBAL_OPTIONS:
            subparser.add_argument(*flags, **dict(kwds, default=argparse.SUPPRESS))
        subparser.set_defaults(tool=tool)
        return tool

    def main(self, args_in):
        logger = logging.getLogger("blocklynft")
        if not logger.handlers:
            # stderr only: stdout carries command results
            logger.addHandler(logging.StreamHandler(sys.stderr))
        self.parser.set_defaults(logging_level=environment_loglevel())
        for module in tool_modules():
            self.register_tool(module)

        args = self.parser.parse_args(args_in)
        if args.version:
            print("blocklynft %s" % common.BLOCKLYNFT_VERSION_STRING)
            return 0

        logger.setLevel(args.logging_level)
        flag = [f for f, level in LOGLEVEL_FLAGS.items() if level == args.logging_level]
        os.environ[BLOCKLYNFT_LOGLEVEL] = flag[0]

        tool = getattr(args, "tool", None)
        if tool is None:
            self.parser.print_help()
            self.parser.error("no command specified")
        return tool.run(args) or 0


def main():
    logger = logging.getLogger("blocklynft")

    try:
        sys.exit(BlocklyNft().main(sys.argv[1:]))
    except KeyboardInterrupt:
        sys.exit("Aborted...")
    except BlocklyNftError as e:
        if logger.getEffectiveLevel() <= logging.DEBUG:
            logger.exception(str(e))
        msg = ["ERROR: ", str(e)]
        if logger.getEffectiveLevel() > logging.DEBUG:
            msg.append("\nFor more information: try re-running your command with")
            if logger.getEffectiveLevel() > logging.INFO:
                msg.append(" --verbose or")
            msg.append(" --debug")
        sys.exit("".join(msg))


if __name__ == "__main__":
    main()

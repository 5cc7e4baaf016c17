"""
Base class giving blocklynft command modules integration into blocklynft_main
and standalone functionality.
"""

import argparse
import logging
import os

from blocklynft import block_model, common, configfile
from blocklynft.sensor_sim import SimConfig

logger = logging.getLogger("blocklynft.base")


class BlocklyNftBase:
    def name_from_file(self, filename):
        """
        Since a command module's filename must conform to a particular naming
        convention, and that name must embed the command's invocation name,
        provide a method to extract the command name from __file__.
        """
        basename = os.path.splitext(os.path.basename(filename))[0]
        pfx = "blocklynft_tool_"
        if basename.startswith(pfx):
            basename = basename[len(pfx) :]
        return basename

    # Override these three functions to hook into blocklynft_main

    def get_details(self):
        # name is the command name; description forms its help text
        return dict(name="", description="")

    def register(self, parser):
        pass

    def run(self, args):
        pass

    # Shared by the commands:

    def configuration(self, args):
        return configfile.load(getattr(args, "config_filename", None))

    def registry(self, args, config=None):
        """
        The builtin catalog plus the custom blocks named by --blocks, or by
        the configuration when --blocks is not given.
        """
        config = config if config is not None else self.configuration(args)
        blocks = getattr(args, "blocks", None) or config.blocks_path
        if not blocks:
            return block_model.builtin_registry()
        registry = block_model.load_blocks(blocks)
        block_model.check_macro_dag(registry)
        return registry

    def sim_config(self, config, seed=None, dt=None):
        return SimConfig.from_mapping(config.sim, seed=seed, dt_minutes=dt)

    def read_text(self, path, what="workspace"):
        try:
            with open(path, "r", encoding="utf-8") as f:
                return f.read()
        except OSError as err:
            raise common.BlocklyNftError("cannot read %s file %s: %s" % (what, path, err),
                                         case="unreadable-file")

    # Standalone functionality:

    # not __init__ as we have to overload functions it calls
    def __init__(self):
        details = self.get_details()
        self.parser = argparse.ArgumentParser(description=details["description"])
        self.register(self.parser)

    def main(self, args_in):
        if len(args_in) < 1:
            self.parser.print_usage()
            return 0
        args = self.parser.parse_args(args_in)
        return self.run(args)

"""
Run a workspace against the plant simulator and the ledger.

Prints each output line, then one line per receipt and the final chain
height. Exit status: 0 on success, 1 when the workspace does not parse or
compile, 2 when the program halts with a runtime error (the partial report
is still printed).
"""

import logging
import sys

from blocklynft import blocklynft_base, common, ledger, metadata_api, runtime

logger = logging.getLogger("blocklynft.run")

EXIT_RUNTIME_ERROR = 2


def print_report(report, chain, out=None):
    out = out if out is not None else sys.stdout
    for line in report.outputs:
        out.write(line + "\n")
    for receipt in report.receipts:
        returned = "" if receipt.returned is None else " -> %s" % common.render_value(
            receipt.returned
        )
        out.write("receipt %d %s%s\n" % (receipt.block_index, receipt.tx_hash, returned))
    out.write("chain height: %d\n" % chain.height)


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Run a workspace on the simulator and ledger.",
        )

    def register(self, parser):
        parser.description = "Run a workspace on the plant simulator and the ledger."
        parser.add_argument("path", help="Blockly workspace XML file")
        parser.add_argument("--ticks", type=int, default=0, help="tick loop iterations")
        parser.add_argument("--seed", type=int, default=None, help="simulator seed")
        parser.add_argument("--dt", type=int, default=None, help="minutes per tick")
        parser.add_argument(
            "--state",
            dest="state_dir",
            default=None,
            help="journal directory to load and extend (default: a fresh in-memory chain)",
        )
        parser.add_argument(
            "--from",
            dest="account",
            default=None,
            help="executing account (default: the first configured account)",
        )
        parser.add_argument(
            "--mint-plant",
            action="store_true",
            default=False,
            help="mint a plant token to the executing account before running",
        )
        parser.add_argument(
            "--strict",
            action="store_true",
            default=False,
            help="reject blocks with empty value inputs",
        )

    def run(self, args):
        config = self.configuration(args)
        registry = self.registry(args, config)
        text = self.read_text(args.path)
        if args.state_dir:
            chain = metadata_api.open_chain(args.state_dir, config.accounts)
        else:
            chain = ledger.new_chain(config.accounts)
        account = args.account or next(iter(chain.accounts), None)
        if args.mint_plant:
            runtime.prepare_plant(chain, account)
        report = runtime.run_workspace(
            text,
            registry,
            chain,
            account,
            args.ticks,
            sim_config=self.sim_config(config, args.seed, args.dt),
            token_id=config.token_id,
            strict=args.strict,
        )
        print_report(report, chain)
        if report.error is not None:
            error = report.error
            where = "setup" if error.tick is None else "tick %d" % error.tick
            sys.stderr.write(
                "ERROR: %s (%s) in %s at %s\n"
                % (error.message, error.case, error.statement, where)
            )
            return EXIT_RUNTIME_ERROR
        return 0

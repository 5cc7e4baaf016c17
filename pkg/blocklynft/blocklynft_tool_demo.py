"""
The end-to-end plant demo.

Mints a plant token, runs the bundled plant workspace for 48 ticks at seed
42 (it waters when soil moisture drops below 30), journals the chain and
prints the token's final metadata and whether the chain verifies.
"""

import json
import logging
import os
import sys

from blocklynft import block_model, blocklynft_base, common, ledger, metadata_api, runtime
from blocklynft.sensor_sim import SimConfig

logger = logging.getLogger("blocklynft.demo")

DEMO_SEED = 42
DEMO_TICKS = 48
DEMO_WORKSPACE = "plant_demo.xml"
DEMO_BLOCKS = "plant_blocks.json"


class DemoError(common.BlocklyNftError):
    pass


def run_demo(state_dir, accounts, sim_config, out):
    """
    Returns the chain after the demo run; writes the report to out.
    """
    registry = block_model.load_blocks(common.data_file(DEMO_BLOCKS))
    with open(common.data_file(DEMO_WORKSPACE), "r", encoding="utf-8") as f:
        workspace = f.read()

    journal = os.path.join(state_dir, metadata_api.JOURNAL_NAME)
    if os.path.exists(journal):
        logger.warning("replacing existing journal %s" % journal)
    chain = ledger.new_chain(accounts)
    ledger.write_journal(chain, journal)

    account = next(iter(chain.accounts), None)
    if account is None:
        raise DemoError("the demo needs at least one account", case="no-accounts")
    mint = runtime.prepare_plant(chain, account)[0]
    report = runtime.run_workspace(
        workspace, registry, chain, account, DEMO_TICKS, sim_config=sim_config,
        token_id=mint.returned,
    )
    if report.error is not None:
        raise DemoError(
            "demo halted at tick %s: %s" % (report.error.tick, report.error.message),
            case=report.error.case,
        )
    logger.info("demo: %d receipt(s) over %d tick(s)"
                % (len(report.receipts), report.ticks_executed))

    doc = metadata_api.MetadataDoc.for_token(chain, mint.returned)
    out.write(json.dumps(doc.to_json(), indent=2) + "\n")
    out.write("chain valid: %s\n" % common.render_value(ledger.verify_chain(chain)))
    return chain


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Run the plant-watering demo end to end.",
        )

    def register(self, parser):
        parser.description = "Run the plant-watering demo end to end."
        parser.add_argument(
            "--state", dest="state_dir", default=None, help="journal directory"
        )

    def run(self, args):
        config = self.configuration(args)
        state_dir = args.state_dir or config.state_path
        # fixed so the documented numbers reproduce
        sim_config = SimConfig(seed=DEMO_SEED)
        run_demo(state_dir, list(config.accounts), sim_config, sys.stdout)
        return 0

"""
Print the plant simulator's readings as CSV.
"""

import sys

from blocklynft import blocklynft_base, sensor_sim
from blocklynft.sensor_sim import SimulationError


def parse_irrigation(text):
    """'TICK:SECONDS' -> (tick, seconds)"""
    try:
        tick, seconds = text.split(":", 1)
        return int(tick), float(seconds)
    except ValueError:
        raise SimulationError(
            "--irrigate-at expects TICK:SECONDS, not '%s'" % text, case="bad-irrigation"
        )


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Print simulator readings as CSV.",
        )

    def register(self, parser):
        parser.description = "Print simulator readings as CSV."
        parser.add_argument("--seed", type=int, default=None, help="simulator seed")
        parser.add_argument("--ticks", type=int, default=48, help="number of readings")
        parser.add_argument("--dt", type=int, default=None, help="minutes per tick")
        parser.add_argument(
            "--irrigate-at",
            dest="irrigations",
            action="append",
            default=[],
            metavar="TICK:SECONDS",
            help="queue irrigation just before the given tick (repeatable)",
        )

    def run(self, args):
        if args.ticks < 0:
            raise SimulationError("--ticks must not be negative", case="bad-ticks")
        config = self.sim_config(self.configuration(args), args.seed, args.dt)
        irrigations = {}
        for text in args.irrigations:
            tick, seconds = parse_irrigation(text)
            irrigations[tick] = irrigations.get(tick, 0.0) + seconds
        sensor_sim.write_trace(sys.stdout, sensor_sim.trace(config, args.ticks, irrigations))
        return 0

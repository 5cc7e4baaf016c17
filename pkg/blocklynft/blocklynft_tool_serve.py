"""
Serve token metadata over HTTP from the journaled ledger.
"""

from blocklynft import blocklynft_base, metadata_api


class BlocklyNftTool(blocklynft_base.BlocklyNftBase):
    def get_details(self):
        return dict(
            name=self.name_from_file(__file__),
            description="Serve the metadata API.",
        )

    def register(self, parser):
        parser.description = "Serve token metadata, attribute updates and runs over HTTP."
        parser.add_argument("--port", type=int, default=None, help="TCP port")
        parser.add_argument(
            "--state", dest="state_dir", default=None, help="journal directory"
        )
        parser.add_argument(
            "--host", default="127.0.0.1", help="interface to listen on"
        )
        parser.add_argument(
            "--diagnostics",
            action="store_true",
            default=False,
            help="load the journal without replaying it; the ledger is then read-only",
        )

    def build_service(self, args):
        config = self.configuration(args)
        server = metadata_api.ServerConfig(
            port=args.port if args.port is not None else config.port,
            state_dir=args.state_dir or config.state_path,
            accounts=list(config.accounts),
        )
        chain = metadata_api.open_chain(server.state_dir, server.accounts, args.diagnostics)
        service = metadata_api.MetadataService(
            chain, self.registry(args, config), config.sim, config.token_id
        )
        return server, service

    def run(self, args):
        server, service = self.build_service(args)
        metadata_api.serve(service, server.port, args.host)
        return 0

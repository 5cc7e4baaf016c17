"""
The HTTP metadata service.

Routes:
    GET  /tokens/<id>             metadata document of a token
    POST /tokens/<id>/attributes  setAttribute as a send from 'from'
    GET  /tokens/<id>/history     setAttribute/appendLog transactions of a token
    POST /run                     compile and run a workspace on the live ledger
    GET  /chain                   height, head hash and verification result

The service keeps no state outside the ledger and its journal. Errors are
{"error": <text>, "case": <name>}.
"""

from __future__ import annotations

import logging
import math
import os
import re
from dataclasses import dataclass, field
from typing import List

from flask import Flask, jsonify, request

from blocklynft import common, ledger, runtime
from blocklynft.block_model import RegistryError, builtin_registry
from blocklynft.codegen import CompileError
from blocklynft.sensor_sim import SimConfig, SimulationError
from blocklynft.workspace_xml import WorkspaceError

logger = logging.getLogger("blocklynft.metadata_api")

JOURNAL_NAME = "journal.jsonl"
DEFAULT_DESCRIPTION = "IoT plant watering and growing log"
NAME_TRAIT = "Name"
TOKEN_ID_RE = re.compile(r"[0-9]+\Z")

# ledger error case -> HTTP status
_LEDGER_STATUS = {
    "not-owner": 403,
    "nonexistent-token": 404,
    "unknown-account": 422,
    "read-only-chain": 409,
}


class ApiError(common.BlocklyNftError):
    def __init__(self, message, case=None, status=400):
        super(ApiError, self).__init__(message, case)
        self.status = status


def _json_number(value):
    if common.is_number(value) and math.isfinite(value) and float(value).is_integer():
        return int(value)
    return value


@dataclass(frozen=True)
class MetadataDoc:
    name: str
    description: str
    image: str
    # (trait_type, value) sorted by trait_type
    attributes: tuple = ()

    @classmethod
    def for_token(cls, chain, token_id):
        with chain.lock:
            if token_id not in chain.state.owners:
                raise ledger.LedgerError("token %s does not exist" % token_id,
                                         case="nonexistent-token")
            attributes = dict(chain.state.attributes.get(token_id, {}))
        name = attributes.get(NAME_TRAIT)
        return cls(
            name=common.render_value(name) if name is not None else "Plant #%d" % token_id,
            description=DEFAULT_DESCRIPTION,
            image="%s%d/image" % (ledger.TOKEN_URI_SCHEME, token_id),
            attributes=tuple(sorted(attributes.items())),
        )

    def to_json(self):
        return {
            "name": self.name,
            "description": self.description,
            "image": self.image,
            "attributes": [
                {"trait_type": trait, "value": _json_number(value)}
                for trait, value in self.attributes
            ],
        }


@dataclass(frozen=True)
class ServerConfig:
    port: int = 5000
    state_dir: str = "state"
    accounts: List[str] = field(default_factory=lambda: ["alice", "bob"])

    def __post_init__(self):
        if not isinstance(self.port, int) or isinstance(self.port, bool) or not 1 <= self.port <= 65535:
            raise ApiError("port must be within [1, 65535], not %r" % (self.port,),
                           case="bad-server-config")
        try:
            os.makedirs(self.state_dir, exist_ok=True)
        except OSError as err:
            raise ApiError("cannot create state directory %s: %s" % (self.state_dir, err),
                           case="bad-server-config")
        if not os.access(self.state_dir, os.W_OK):
            raise ApiError("state directory %s is not writable" % self.state_dir,
                           case="bad-server-config")

    @property
    def journal_path(self):
        return os.path.join(self.state_dir, JOURNAL_NAME)


def open_chain(state_dir, accounts, diagnostics=False):
    """
    The ledger journaled in state_dir: replayed if the journal exists,
    otherwise a fresh chain whose journal is started there.
    """
    journal = os.path.join(state_dir, JOURNAL_NAME)
    if os.path.exists(journal):
        chain = ledger.load_journal(journal, diagnostics=diagnostics)
        if list(chain.accounts) != list(accounts):
            logger.warning(
                "journal %s lists accounts %s; using those instead of %s"
                % (journal, ", ".join(chain.accounts), ", ".join(accounts))
            )
        return chain
    chain = ledger.new_chain(accounts)
    ledger.write_journal(chain, journal)
    return chain


class MetadataService:
    """
    Everything the routes need: the live chain, the block registry for
    /run, and the simulator settings /run starts from.
    """

    def __init__(self, chain, registry=None, sim_defaults=None, token_id=1):
        self.chain = chain
        self.registry = registry if registry is not None else builtin_registry()
        self.sim_defaults = dict(sim_defaults or {})
        self.token_id = token_id

    @property
    def default_account(self):
        return next(iter(self.chain.accounts), None)

    def metadata(self, token_id):
        return MetadataDoc.for_token(self.chain, token_id).to_json()

    def set_attribute(self, token_id, body):
        if not isinstance(body, dict):
            raise ApiError("request body must be a JSON object", case="malformed-body")
        missing = [key for key in ("trait_type", "value", "from") if key not in body]
        if missing:
            raise ApiError("request body is missing %s" % ", ".join(missing),
                           case="malformed-body")
        trait, value, sender = body["trait_type"], body["value"], body["from"]
        if not isinstance(trait, str) or not trait:
            raise ApiError("trait_type must be non-empty text", case="malformed-body")
        if not (isinstance(value, str) or common.is_finite_number(value)):
            raise ApiError("value must be text or a finite number", case="malformed-body")
        if not isinstance(sender, str):
            raise ApiError("from must be an account name", case="malformed-body")
        receipt = ledger.send(self.chain, "setAttribute", [token_id, trait, value], sender)
        return {"tx_hash": receipt.tx_hash, "block_index": receipt.block_index}

    def history(self, token_id):
        return [
            dict(entry, value=_json_number(entry["value"]))
            for entry in ledger.token_history(self.chain, token_id)
        ]

    def run(self, body):
        if not isinstance(body, dict) or not isinstance(body.get("workspace_xml"), str):
            raise ApiError("request body must carry workspace_xml text", case="malformed-body")
        ticks = body.get("ticks", 0)
        seed = body.get("seed", 0)
        sender = body.get("from", self.default_account)
        if "from" in body and not isinstance(sender, str):
            raise ApiError("from must be an account name", case="malformed-body")
        for name, value in (("ticks", ticks), ("seed", seed)):
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ApiError("%s must be a non-negative integer" % name, case="malformed-body")
        sim_config = SimConfig.from_mapping(self.sim_defaults, seed=seed)
        report = runtime.run_workspace(
            body["workspace_xml"], self.registry, self.chain, sender, ticks,
            sim_config=sim_config, token_id=self.token_id,
        )
        return report.to_json()

    def chain_status(self):
        with self.chain.lock:
            return {
                "height": self.chain.height,
                "head_hash": self.chain.head.hash,
                "valid": ledger.verify_chain(self.chain),
            }


def _token_id(text):
    if not TOKEN_ID_RE.match(text):
        raise ApiError("token id must be an integer, not '%s'" % text, case="bad-token-id")
    return int(text)


def _error_response(message, case, status):
    response = jsonify({"error": message, "case": case})
    response.status_code = status
    return response


def create_app(service):
    app = Flask(__name__)
    app.json.sort_keys = False
    app.config["BLOCKLYNFT_SERVICE"] = service

    @app.errorhandler(ApiError)
    def _api_error(err):
        return _error_response(str(err), err.case, err.status)

    @app.errorhandler(ledger.LedgerError)
    def _ledger_error(err):
        return _error_response(str(err), err.case, _LEDGER_STATUS.get(err.case, 400))

    @app.errorhandler(common.BlocklyNftError)
    def _other_error(err):
        # workspace, compile, registry and simulator errors are the client's
        status = 400 if isinstance(
            err, (WorkspaceError, CompileError, RegistryError, SimulationError,
                  runtime.ExecutionError)
        ) else 500
        return _error_response(str(err), err.case, status)

    @app.errorhandler(404)
    def _not_found(err):
        return _error_response("no such route", "not-found", 404)

    @app.errorhandler(405)
    def _bad_method(err):
        return _error_response("method not allowed", "method-not-allowed", 405)

    @app.get("/tokens/<token>")
    def get_metadata(token):
        return jsonify(service.metadata(_token_id(token)))

    @app.post("/tokens/<token>/attributes")
    def post_attribute(token):
        token_id = _token_id(token)
        body = request.get_json(silent=True)
        return jsonify(service.set_attribute(token_id, body))

    @app.get("/tokens/<token>/history")
    def get_history(token):
        return jsonify(service.history(_token_id(token)))

    @app.post("/run")
    def run_workspace():
        return jsonify(service.run(request.get_json(silent=True)))

    @app.get("/chain")
    def get_chain_status():
        return jsonify(service.chain_status())

    return app


def serve(service, port, host="127.0.0.1"):
    app = create_app(service)
    logger.info("serving %d block(s) on http://%s:%d/" % (service.chain.height, host, port))
    app.run(host=host, port=port, threaded=True)

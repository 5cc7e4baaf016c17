"""
A simulated hash-chained ledger hosting one NFT contract.

Each successful send appends exactly one block holding one transaction.
Block hashes are lowercase hex SHA-256 over the canonical encoding

    index|timestamp|prev_hash|from|method|arg1,arg2,...|nonce

with arguments rendered by common.render_value; the genesis block encodes
as "0|0|<64 zeros>|genesis". A failed send leaves no trace on the chain.

Contract methods are registered in CONTRACT_METHODS with the
@contract_method decorator. Mutating methods (mint, transferFrom,
setAttribute, appendLog) are reachable only through send(); read-only
methods (ownerOf, getAttribute, tokenURI, totalSupply, getLog) only
through call().

The journal is a JSON-lines file: a {"genesis": {...}} line, then one line
per transaction block. load_journal() replays it through send(), so the
replayed chain must reproduce every stored hash.
"""

from __future__ import annotations

import copy
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from blocklynft import common

logger = logging.getLogger("blocklynft.ledger")

ZERO_HASH = "0" * 64
TOKEN_URI_SCHEME = "nftsim://tokens/"

# name -> ContractMethod, filled in by @contract_method below
CONTRACT_METHODS = {}


class LedgerError(common.BlocklyNftError):
    pass


class JournalError(LedgerError):
    pass


def address_of(account):
    """Deterministic development address of a named account."""
    return "0x" + common.sha256_hex("dev-account-" + account)[:40]


def is_address(text):
    return (
        isinstance(text, str)
        and len(text) == 42
        and text.startswith("0x")
        and all(c in "0123456789abcdef" for c in text[2:])
    )


@dataclass(frozen=True)
class Transaction:
    nonce: int
    sender: str
    method: str
    args: Tuple = ()
    timestamp: int = 0


@dataclass(frozen=True)
class BlockRecord:
    index: int
    timestamp: int
    prev_hash: str
    tx: Optional[Transaction]
    hash: str


@dataclass(frozen=True)
class Receipt:
    tx_hash: str
    block_index: int
    returned: object = None

    def to_json(self):
        return {"tx_hash": self.tx_hash, "block_index": self.block_index,
                "returned": self.returned}


@dataclass
class NftState:
    next_token_id: int = 1
    owners: Dict[int, str] = field(default_factory=dict)
    attributes: Dict[int, Dict[str, object]] = field(default_factory=dict)
    logs: Dict[int, List[Tuple[int, str]]] = field(default_factory=dict)

    def copy(self):
        return copy.deepcopy(self)

    def encode(self):
        """
        Canonical text: one record per token in ascending id,
        id|owner|trait=n:<number> or trait=s:<text> (traits sorted)|ts:note...
        joined by newlines.
        """
        records = []
        for token_id in sorted(self.owners):
            parts = [str(token_id), self.owners[token_id]]
            attributes = self.attributes.get(token_id, {})
            for trait in sorted(attributes):
                value = attributes[trait]
                tag = "n" if common.is_number(value) else "s"
                parts.append("%s=%s:%s" % (trait, tag, common.render_value(value)))
            for timestamp, note in self.logs.get(token_id, []):
                parts.append("%s:%s" % (common.render_value(timestamp), note))
            records.append("|".join(parts))
        return "\n".join(records)


def encode_block(index, timestamp, prev_hash, tx):
    if tx is None:
        return "%d|%s|%s|genesis" % (index, common.render_value(timestamp), prev_hash)
    return "|".join(
        [
            str(index),
            common.render_value(timestamp),
            prev_hash,
            tx.sender,
            tx.method,
            ",".join(common.render_value(arg) for arg in tx.args),
            str(tx.nonce),
        ]
    )


def block_hash(index, timestamp, prev_hash, tx):
    return common.sha256_hex(encode_block(index, timestamp, prev_hash, tx))


def genesis_block():
    return BlockRecord(0, 0, ZERO_HASH, None, block_hash(0, 0, ZERO_HASH, None))


# ****************************************************************************
#   Contract method table
# ****************************************************************************
@dataclass(frozen=True)
class ContractMethod:
    name: str
    mutating: bool
    arity: int
    function: object


class contract_method(object):
    """
    Registers a contract method implementation in CONTRACT_METHODS:

    @contract_method("mint", arity=1, mutating=True)
    def _mint(ctx, to):
        ...
    """

    def __init__(self, name, arity, mutating=False):
        self.name = name
        self.arity = arity
        self.mutating = mutating

    def __call__(self, func):
        CONTRACT_METHODS[self.name] = ContractMethod(self.name, self.mutating, self.arity, func)
        return func


class _Context:
    """What a method body sees: state, account table, sender and time."""

    def __init__(self, state, accounts, sender=None, timestamp=0):
        self.state = state
        self.accounts = accounts
        self.sender = sender
        self.timestamp = timestamp

    def token(self, value):
        if not common.is_finite_number(value) or float(value) != int(value):
            raise LedgerError("token id must be an integer, not %r" % (value,),
                              case="bad-arguments")
        token_id = int(value)
        if token_id not in self.state.owners:
            raise LedgerError("token %d does not exist" % token_id, case="nonexistent-token")
        return token_id

    def account(self, value):
        if not isinstance(value, str) or value not in self.accounts:
            raise LedgerError("unknown account '%s'" % (value,), case="unknown-account")
        return value

    def owned_token(self, value):
        token_id = self.token(value)
        if self.state.owners[token_id] != self.sender:
            raise LedgerError(
                "account '%s' does not own token %d" % (self.sender, token_id),
                case="not-owner",
            )
        return token_id


def _text(value, what):
    if not isinstance(value, str) or not value:
        raise LedgerError("%s must be non-empty text, not %r" % (what, value),
                          case="bad-arguments")
    return value


@contract_method("mint", arity=1, mutating=True)
def _mint(ctx, to):
    owner = ctx.account(to)
    token_id = ctx.state.next_token_id
    ctx.state.owners[token_id] = owner
    ctx.state.attributes[token_id] = {}
    ctx.state.logs[token_id] = []
    ctx.state.next_token_id += 1
    return token_id


@contract_method("transferFrom", arity=3, mutating=True)
def _transfer_from(ctx, from_account, to_account, token):
    token_id = ctx.owned_token(token)
    if from_account != ctx.state.owners[token_id]:
        raise LedgerError(
            "token %d is not owned by '%s'" % (token_id, from_account), case="not-owner"
        )
    ctx.state.owners[token_id] = ctx.account(to_account)


@contract_method("setAttribute", arity=3, mutating=True)
def _set_attribute(ctx, token, trait, value):
    token_id = ctx.owned_token(token)
    trait = _text(trait, "trait_type")
    if not (isinstance(value, str) or common.is_number(value)):
        raise LedgerError("attribute value must be text or a number, not %r" % (value,),
                          case="bad-arguments")
    ctx.state.attributes[token_id][trait] = value


@contract_method("appendLog", arity=2, mutating=True)
def _append_log(ctx, token, note):
    token_id = ctx.owned_token(token)
    ctx.state.logs[token_id].append((ctx.timestamp, common.render_value(note)))


@contract_method("ownerOf", arity=1)
def _owner_of(ctx, token):
    return ctx.accounts[ctx.state.owners[ctx.token(token)]]


@contract_method("getAttribute", arity=2)
def _get_attribute(ctx, token, trait):
    attributes = ctx.state.attributes[ctx.token(token)]
    try:
        return attributes[trait]
    except (KeyError, TypeError):
        raise LedgerError("token has no attribute '%s'" % (trait,), case="unknown-trait")


@contract_method("tokenURI", arity=1)
def _token_uri(ctx, token):
    return TOKEN_URI_SCHEME + str(ctx.token(token))


@contract_method("totalSupply", arity=0)
def _total_supply(ctx):
    return ctx.state.next_token_id - 1


@contract_method("getLog", arity=1)
def _get_log(ctx, token):
    return "\n".join(
        "%s: %s" % (common.render_value(timestamp), note)
        for timestamp, note in ctx.state.logs[ctx.token(token)]
    )


def _method(name, args):
    try:
        method = CONTRACT_METHODS[name]
    except (KeyError, TypeError):
        raise LedgerError("unknown contract method '%s'" % (name,), case="unknown-method")
    if len(args) != method.arity:
        raise LedgerError(
            "%s takes %d argument(s), got %d" % (name, method.arity, len(args)),
            case="bad-arguments",
        )
    for arg in args:
        if common.is_number(arg) and not common.is_finite_number(arg):
            raise LedgerError(
                "%s arguments must be finite numbers, not %r" % (name, arg),
                case="bad-arguments",
            )
    return method


# ****************************************************************************
#   Chain
# ****************************************************************************
class Chain:
    """
    Blocks, account table and the NFT state they fold to. All access goes
    through one lock, so sends are serialized and readers see whole states.
    """

    def __init__(self, accounts):
        self.accounts = {name: address_of(name) for name in accounts}
        self.blocks = [genesis_block()]
        self.state = NftState()
        self.lock = threading.RLock()
        self.journal_path = None
        # set for a journal loaded without verification; refuses sends
        self.diagnostics = False

    @property
    def height(self):
        return len(self.blocks)

    @property
    def head(self):
        return self.blocks[-1]


def new_chain(accounts):
    accounts = list(accounts)
    for name in accounts:
        if not isinstance(name, str) or not name:
            raise LedgerError("account names must be non-empty text", case="bad-account")
    duplicates = sorted({name for name in accounts if accounts.count(name) > 1})
    if duplicates:
        raise LedgerError(
            "duplicate account name(s): %s" % ", ".join(duplicates), case="duplicate-account"
        )
    return Chain(accounts)


def call(chain, method, args=()):
    args = tuple(args)
    table_entry = _method(method, args)
    if table_entry.mutating:
        raise LedgerError(
            "'%s' changes state; use send, not call" % method, case="mutating-via-call"
        )
    with chain.lock:
        return table_entry.function(_Context(chain.state, chain.accounts), *args)


def send(chain, method, args, sender, timestamp=None):
    """
    Apply a mutating method as a transaction from sender. On success one
    block is appended (and journaled) and a Receipt returned; on failure
    LedgerError is raised and the chain is unchanged.
    """
    args = tuple(args)
    with chain.lock:
        if chain.diagnostics:
            raise LedgerError("chain was loaded for diagnostics only", case="read-only-chain")
        if not isinstance(sender, str) or sender not in chain.accounts:
            raise LedgerError("unknown account '%s'" % (sender,), case="unknown-account")
        table_entry = _method(method, args)
        if not table_entry.mutating:
            raise LedgerError(
                "'%s' is read-only; use call, not send" % method, case="read-only-via-send"
            )
        if timestamp is None:
            timestamp = chain.head.timestamp
        state = chain.state.copy()
        returned = table_entry.function(
            _Context(state, chain.accounts, sender, timestamp), *args
        )

        index = chain.height
        tx = Transaction(index - 1, sender, method, args, timestamp)
        prev_hash = chain.head.hash
        block = BlockRecord(index, timestamp, prev_hash, tx,
                            block_hash(index, timestamp, prev_hash, tx))
        if chain.journal_path is not None:
            _append_journal_line(chain.journal_path, _block_json(block))
        chain.blocks.append(block)
        chain.state = state
    logger.debug("send %s from %s -> block %d" % (method, sender, index))
    return Receipt(block.hash, index, returned)


def verify_chain(chain):
    previous = None
    for position, block in enumerate(chain.blocks):
        if block.index != position:
            return False
        if position == 0:
            if block.tx is not None or block.prev_hash != ZERO_HASH:
                return False
        else:
            if block.tx is None or block.prev_hash != previous.hash:
                return False
            if block.tx.nonce != position - 1 or block.tx.timestamp != block.timestamp:
                return False
        if block_hash(block.index, block.timestamp, block.prev_hash, block.tx) != block.hash:
            return False
        previous = block
    return True


def rebuild_state(blocks, accounts, strict=True):
    """
    Fold the transactions of blocks into a fresh NftState. With strict off,
    transactions that fail are logged and skipped.
    """
    state = NftState()
    for block in blocks[1:]:
        tx = block.tx
        try:
            if tx is None:
                raise LedgerError("block %d carries no transaction" % block.index,
                                  case="bad-block")
            if tx.sender not in accounts:
                raise LedgerError("unknown account '%s'" % (tx.sender,), case="unknown-account")
            table_entry = _method(tx.method, tx.args)
            if not table_entry.mutating:
                raise LedgerError("'%s' is read-only" % tx.method, case="read-only-via-send")
            candidate = state.copy()
            table_entry.function(_Context(candidate, accounts, tx.sender, tx.timestamp), *tx.args)
            state = candidate
        except LedgerError as err:
            if strict:
                raise
            logger.warning("skipping block %d: %s" % (block.index, err))
    return state


def state_root(chain):
    with chain.lock:
        return common.sha256_hex(chain.state.encode())


def token_history(chain, token_id):
    """
    Every setAttribute and appendLog transaction touching token_id, in chain
    order.
    """
    with chain.lock:
        if token_id not in chain.state.owners:
            raise LedgerError("token %s does not exist" % (token_id,), case="nonexistent-token")
        history = []
        for block in chain.blocks[1:]:
            tx = block.tx
            if tx is None or tx.method not in ("setAttribute", "appendLog") or not tx.args:
                continue
            token = tx.args[0]
            if not common.is_number(token) or token != token_id:
                continue
            entry = {"block_index": block.index, "timestamp": block.timestamp, "method": tx.method}
            if tx.method == "setAttribute":
                entry.update(trait_type=tx.args[1], value=tx.args[2])
            else:
                entry.update(trait_type=None, value=common.render_value(tx.args[1]))
            history.append(entry)
        return history


# ****************************************************************************
#   Journal
# ****************************************************************************
def _block_json(block):
    tx = block.tx
    return {
        "block_index": block.index,
        "timestamp": block.timestamp,
        "nonce": tx.nonce,
        "from": tx.sender,
        "method": tx.method,
        "args": list(tx.args),
        "prev_hash": block.prev_hash,
        "hash": block.hash,
    }


def _genesis_json(chain):
    return {"genesis": {"accounts": list(chain.accounts), "hash": chain.blocks[0].hash}}


def _append_journal_line(path, data):
    try:
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(data, sort_keys=True, ensure_ascii=False) + "\n")
    except OSError as err:
        raise JournalError("cannot append to journal %s: %s" % (path, err),
                           case="journal-unwritable")


def write_journal(chain, path):
    """
    Write the whole chain to path, replacing any existing file, and keep
    appending subsequent sends to it.
    """
    with chain.lock:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(_genesis_json(chain), sort_keys=True) + "\n")
            for block in chain.blocks[1:]:
                f.write(json.dumps(_block_json(block), sort_keys=True, ensure_ascii=False) + "\n")
        chain.journal_path = path
    logger.info("journal %s holds %d block(s)" % (path, chain.height))


def _read_journal(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = [line for line in f.read().splitlines() if line.strip()]
    except OSError as err:
        raise JournalError("cannot read journal %s: %s" % (path, err), case="journal-unreadable")
    entries = []
    for number, line in enumerate(lines, 1):
        try:
            entries.append(json.loads(line))
        except ValueError as err:
            raise JournalError("%s line %d is not JSON: %s" % (path, number, err),
                               case="journal-corrupt")
    if not entries or not isinstance(entries[0], dict) or "genesis" not in entries[0]:
        raise JournalError("%s does not start with a genesis line" % path, case="journal-corrupt")
    return entries


def load_journal(path, diagnostics=False):
    """
    Rebuild a chain from the journal at path.

    Normally every transaction is replayed through send() and must reproduce
    its stored hash, else JournalError; the chain then keeps journaling to
    path. With diagnostics=True stored blocks are taken verbatim, state is
    folded best-effort and the chain refuses sends, so verify_chain() can
    report on a tampered file.
    """
    entries = _read_journal(path)
    try:
        genesis = entries[0]["genesis"]
        chain = new_chain(genesis.get("accounts", []))
        records = entries[1:]
        if diagnostics:
            blocks = [BlockRecord(0, 0, ZERO_HASH, None, genesis.get("hash", chain.blocks[0].hash))]
            for record in records:
                tx = Transaction(record["nonce"], record["from"], record["method"],
                                 tuple(record["args"]), record["timestamp"])
                blocks.append(BlockRecord(record["block_index"], record["timestamp"],
                                          record["prev_hash"], tx, record["hash"]))
            chain.blocks = blocks
            chain.state = rebuild_state(blocks, chain.accounts, strict=False)
            chain.diagnostics = True
        else:
            if genesis.get("hash") != chain.blocks[0].hash:
                raise JournalError("%s genesis hash does not match" % path,
                                   case="journal-mismatch")
            for number, record in enumerate(records, 2):
                receipt = send(chain, record["method"], record["args"], record["from"],
                               record["timestamp"])
                if receipt.tx_hash != record["hash"]:
                    raise JournalError(
                        "%s line %d: replayed hash %s differs from stored %s"
                        % (path, number, receipt.tx_hash, record["hash"]),
                        case="journal-mismatch",
                    )
            chain.journal_path = path
    except (KeyError, TypeError, AttributeError) as err:
        raise JournalError("%s has an unexpected shape: %r" % (path, err), case="journal-corrupt")
    except JournalError:
        raise
    except LedgerError as err:
        raise JournalError("%s does not replay: %s" % (path, err), case="journal-mismatch")
    logger.info("loaded %d block(s) from %s%s"
                % (chain.height, path, " (diagnostics)" if diagnostics else ""))
    return chain

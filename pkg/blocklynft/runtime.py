"""
Tree-walking interpreter for the Program IR.

execute() runs the setup statements once, then the tick body tick_limit
times; the simulator advances one tick before each body run. Values are
numbers (float), text (str), booleans and unit (None). Every failure is
captured in RunReport.error; nothing raised by a program escapes execute().
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import singledispatchmethod
from typing import List, Optional

from blocklynft import codegen, common, ledger
from blocklynft.codegen import (
    Arith,
    ClockNow,
    Compare,
    ContractCall,
    ContractSend,
    HelloWorld,
    If,
    Irrigate,
    LogCrop,
    NftSetAttribute,
    NumberLit,
    Print,
    Repeat,
    SensorRead,
    TextLit,
    WeatherRead,
)
from blocklynft.sensor_sim import PlantSimulator, SimConfig
from blocklynft.workspace_xml import parse_workspace

logger = logging.getLogger("blocklynft.runtime")

PLANT_TRAIT_LAST_WATERED = "Last Watered"


class ExecutionError(common.BlocklyNftError):
    pass


def render(value):
    return common.render_value(value)


def type_name(value):
    if value is None:
        return "unit"
    if isinstance(value, bool):
        return "boolean"
    if common.is_number(value):
        return "number"
    return "text"


def _as_value(value):
    # ledger integers become numbers like any other
    if common.is_number(value):
        return float(value)
    return value


@dataclass
class RunEnvironment:
    simulator: PlantSimulator
    chain: ledger.Chain
    account: str
    # the plant token log_crop appends to
    token_id: int = 1


@dataclass(frozen=True)
class RunError:
    case: str
    message: str
    # None while running setup
    tick: Optional[int]
    statement: Optional[str]

    def to_json(self):
        return {"case": self.case, "message": self.message, "tick": self.tick,
                "statement": self.statement}


@dataclass
class RunReport:
    outputs: List[str] = field(default_factory=list)
    receipts: List[ledger.Receipt] = field(default_factory=list)
    ticks_executed: int = 0
    error: Optional[RunError] = None

    def to_json(self):
        data = {
            "outputs": list(self.outputs),
            "receipts": [receipt.to_json() for receipt in self.receipts],
            "ticks_executed": self.ticks_executed,
        }
        if self.error is not None:
            data["error"] = self.error.to_json()
        return data


class Interpreter:
    def __init__(self, env, report):
        self.env = env
        self.report = report
        self.reading = None
        self.tick = None
        self.statement = None

    @property
    def clock(self):
        return self.reading.time_minutes if self.reading is not None else 0

    def run(self, statements):
        for node in statements:
            self.statement = node.OP
            self.exec(node)

    def number(self, node, what):
        value = self.eval(node)
        if not common.is_number(value):
            raise ExecutionError(
                "%s must be a number, not %s" % (what, type_name(value)), case="type-error"
            )
        return value

    def send(self, method, args, sender=None):
        receipt = ledger.send(
            self.env.chain, method, args, sender or self.env.account, self.clock
        )
        self.report.receipts.append(receipt)
        return receipt

    def current_reading(self):
        if self.reading is None:
            raise ExecutionError("no sensor reading before the first tick", case="no-reading")
        return self.reading

    # ------------------------------------------------------------------
    #   statements
    # ------------------------------------------------------------------
    @singledispatchmethod
    def exec(self, node):
        raise ExecutionError("cannot execute '%s'" % node.OP, case="unknown-statement")

    @exec.register
    def _(self, node: HelloWorld):
        self.report.outputs.append("Hello World")

    @exec.register
    def _(self, node: Print):
        self.report.outputs.append(render(self.eval(node.expr)))

    @exec.register
    def _(self, node: If):
        cond = self.eval(node.cond)
        if isinstance(cond, bool):
            taken = cond
        elif common.is_number(cond):
            taken = cond != 0
        else:
            raise ExecutionError(
                "if condition must be a boolean, not %s" % type_name(cond), case="type-error"
            )
        self.run(node.then if taken else node.orelse)

    @exec.register
    def _(self, node: Repeat):
        count = self.number(node.count, "repeat count")
        if not math.isfinite(count):
            raise ExecutionError("repeat count must be finite", case="type-error")
        for _ in range(max(0, math.floor(count))):
            self.run(node.body)

    @exec.register
    def _(self, node: ContractSend):
        self.send(node.method, [self.eval(arg) for arg in node.args], node.sender)

    @exec.register
    def _(self, node: NftSetAttribute):
        token = self.eval(node.token)
        trait = self.eval(node.trait)
        value = self.eval(node.value)
        self.send("setAttribute", [token, trait, value])

    @exec.register
    def _(self, node: Irrigate):
        self.env.simulator.irrigate(self.number(node.duration_s, "irrigation duration"))

    @exec.register
    def _(self, node: LogCrop):
        self.send("appendLog", [self.env.token_id, render(self.eval(node.note))])

    # ------------------------------------------------------------------
    #   expressions
    # ------------------------------------------------------------------
    @singledispatchmethod
    def eval(self, node):
        raise ExecutionError("cannot evaluate '%s'" % node.OP, case="unknown-expression")

    @eval.register
    def _(self, node: NumberLit):
        return float(node.value)

    @eval.register
    def _(self, node: TextLit):
        return node.value

    @eval.register
    def _(self, node: SensorRead):
        return self.current_reading().channel(node.channel)

    @eval.register
    def _(self, node: WeatherRead):
        return self.current_reading().weather

    @eval.register
    def _(self, node: ClockNow):
        return float(self.clock)

    @eval.register
    def _(self, node: Compare):
        lhs = self.eval(node.lhs)
        rhs = self.eval(node.rhs)
        if type_name(lhs) != type_name(rhs):
            raise ExecutionError(
                "cannot compare %s with %s" % (type_name(lhs), type_name(rhs)),
                case="type-error",
            )
        if node.op == "EQ":
            return lhs == rhs
        if node.op == "NEQ":
            return lhs != rhs
        if type_name(lhs) not in ("number", "text"):
            raise ExecutionError("cannot order %s values" % type_name(lhs), case="type-error")
        if node.op == "LT":
            return lhs < rhs
        if node.op == "LTE":
            return lhs <= rhs
        if node.op == "GT":
            return lhs > rhs
        if node.op == "GTE":
            return lhs >= rhs
        raise ExecutionError("unknown comparison '%s'" % node.op, case="type-error")

    @eval.register
    def _(self, node: Arith):
        lhs = self.number(node.lhs, "left operand of %s" % node.op)
        rhs = self.number(node.rhs, "right operand of %s" % node.op)
        if node.op == "ADD":
            result = lhs + rhs
        elif node.op == "SUB":
            result = lhs - rhs
        elif node.op == "MUL":
            result = lhs * rhs
        elif node.op == "DIV":
            if rhs == 0:
                raise ExecutionError("division by zero", case="division-by-zero")
            result = lhs / rhs
        else:
            raise ExecutionError(
                "unknown arithmetic operator '%s'" % node.op, case="type-error"
            )
        if not math.isfinite(result):
            raise ExecutionError("%s result is out of range" % node.op, case="non-finite")
        return result

    @eval.register
    def _(self, node: ContractCall):
        args = [self.eval(arg) for arg in node.args]
        return _as_value(ledger.call(self.env.chain, node.method, args))


def execute(program, env, tick_limit):
    """
    Run program against env and return the RunReport. Outputs and receipts
    produced before a failure are kept.
    """
    report = RunReport()
    interpreter = Interpreter(env, report)
    try:
        interpreter.run(program.setup)
        for tick in range(tick_limit):
            interpreter.tick = tick
            interpreter.statement = None
            interpreter.reading = env.simulator.tick()
            interpreter.run(program.tick_body)
            report.ticks_executed += 1
    except common.BlocklyNftError as err:
        report.error = RunError(err.case, str(err), interpreter.tick, interpreter.statement)
        logger.info(
            "run halted at tick %s in %s: %s" % (interpreter.tick, interpreter.statement, err)
        )
    return report


def prepare_plant(chain, account, timestamp=0):
    """
    Mint a plant token to account with its "Last Watered" attribute set to
    "never". Returns the two receipts.
    """
    mint = ledger.send(chain, "mint", [account], account, timestamp)
    label = ledger.send(
        chain, "setAttribute", [mint.returned, PLANT_TRAIT_LAST_WATERED, "never"], account,
        timestamp,
    )
    logger.info("minted plant token %s to %s" % (mint.returned, account))
    return [mint, label]


def run_workspace(xml_text, registry, chain, account, ticks, sim_config=None,
                  token_id=1, strict=False):
    """
    Parse, compile and execute a workspace document against chain with a
    fresh simulator. Parse and compile failures raise; runtime failures are
    reported in the returned RunReport.
    """
    if not isinstance(ticks, int) or isinstance(ticks, bool) or ticks < 0:
        raise ExecutionError("ticks must be a non-negative integer, not %r" % (ticks,),
                             case="bad-ticks")
    if not isinstance(account, str) or account not in chain.accounts:
        raise ledger.LedgerError("unknown account '%s'" % (account,), case="unknown-account")
    program = codegen.compile_workspace(parse_workspace(xml_text), registry, strict=strict)
    simulator = PlantSimulator(sim_config if sim_config is not None else SimConfig())
    env = RunEnvironment(simulator, chain, account, token_id)
    return execute(program, env, ticks)

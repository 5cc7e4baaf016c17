"""
hypothesis strategies over the builtin block catalog and the contract.
"""

from hypothesis import strategies as st

from blocklynft.common import render_value
from blocklynft.workspace_xml import BlockInstance, Workspace, list_to_chain

ACCOUNTS = ["alice", "bob", "carol"]
TRAITS = ["Temperature", "Humidity", "Soil Moisture", "Weather", "Name"]

# printable text that survives an XML round trip unchanged
field_text = st.text(
    alphabet=st.characters(
        whitelist_categories=("L", "N", "P", "S", "Zs"), blacklist_characters="\r"
    ),
    max_size=12,
)

block_ids = st.none() | st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1,
                                max_size=6)

numbers = st.floats(allow_nan=False, allow_infinity=False, width=32)

LEAF_EXPRESSIONS = ["number_literal", "text_literal", "sensor_read", "weather_read", "clock_now"]
NESTED_EXPRESSIONS = ["logic_compare", "math_arith", "contract_call"]
STATEMENTS = [
    "helloworld",
    "print",
    "controls_if",
    "controls_repeat",
    "contract_send",
    "nft_set_attribute",
    "irrigate",
    "log_crop",
]


@st.composite
def _optional_inputs(draw, names, depth):
    inputs = {}
    for name in names:
        if draw(st.booleans()):
            inputs[name] = draw(expressions(depth - 1))
    return inputs


@st.composite
def expressions(draw, depth=2):
    choices = LEAF_EXPRESSIONS + (NESTED_EXPRESSIONS if depth > 0 else [])
    block_type = draw(st.sampled_from(choices))
    fields = {}
    inputs = {}
    if block_type == "number_literal":
        fields["NUM"] = render_value(draw(numbers))
    elif block_type == "text_literal":
        fields["TEXT"] = draw(field_text)
    elif block_type == "sensor_read":
        fields["CHANNEL"] = draw(st.sampled_from(["soil_moisture", "temperature", "humidity"]))
    elif block_type == "logic_compare":
        fields["OP"] = draw(st.sampled_from(["EQ", "NEQ", "LT", "LTE", "GT", "GTE"]))
        inputs = draw(_optional_inputs(["A", "B"], depth))
    elif block_type == "math_arith":
        fields["OP"] = draw(st.sampled_from(["ADD", "SUB", "MUL", "DIV"]))
        inputs = draw(_optional_inputs(["A", "B"], depth))
    elif block_type == "contract_call":
        fields["METHOD"] = draw(st.sampled_from(["totalSupply", "ownerOf", "tokenURI"]))
        count = draw(st.integers(0, 2))
        inputs = {"ARG%d" % i: draw(expressions(depth - 1)) for i in range(count)}
    return BlockInstance(block_type, fields=fields, value_inputs=inputs, id=draw(block_ids))


@st.composite
def statements(draw, depth=2):
    choices = STATEMENTS if depth > 0 else [
        t for t in STATEMENTS if t not in ("controls_if", "controls_repeat")
    ]
    block_type = draw(st.sampled_from(choices))
    fields = {}
    values = {}
    bodies = {}
    if block_type == "print":
        values = draw(_optional_inputs(["TEXT"], 2))
    elif block_type == "controls_if":
        values = draw(_optional_inputs(["IF0"], 2))
        for name in ("DO0", "ELSE"):
            body = draw(chains(depth - 1))
            if body is not None:
                bodies[name] = body
    elif block_type == "controls_repeat":
        values = draw(_optional_inputs(["TIMES"], 1))
        body = draw(chains(depth - 1))
        if body is not None:
            bodies["DO"] = body
    elif block_type == "contract_send":
        fields["METHOD"] = draw(st.sampled_from(["mint", "setAttribute", "appendLog"]))
        fields["FROM"] = draw(st.sampled_from(["", "alice", "bob"]))
        count = draw(st.integers(0, 3))
        values = {"ARG%d" % i: draw(expressions(1)) for i in range(count)}
    elif block_type == "nft_set_attribute":
        values = draw(_optional_inputs(["TOKEN", "TRAIT", "VALUE"], 2))
    elif block_type == "irrigate":
        values = draw(_optional_inputs(["DURATION"], 1))
    elif block_type == "log_crop":
        values = draw(_optional_inputs(["NOTE"], 1))
    return BlockInstance(
        block_type, fields=fields, value_inputs=values, statement_inputs=bodies,
        id=draw(block_ids),
    )


@st.composite
def chains(draw, depth=2, min_size=0):
    return list_to_chain(draw(st.lists(statements(depth), min_size=min_size, max_size=3)))


@st.composite
def workspaces(draw, with_tick_loop=None, with_expressions=True):
    """
    Workspaces of builtin blocks. Top-level expression blocks (legal in
    the document, rejected by the compiler) only appear when
    with_expressions is set.
    """
    tops = draw(st.lists(chains(2, min_size=1), max_size=3))
    if with_expressions and draw(st.booleans()):
        tops.append(draw(expressions(1)))
    if with_tick_loop is None:
        with_tick_loop = draw(st.booleans())
    if with_tick_loop:
        body = draw(chains(2))
        loop = BlockInstance(
            "controls_forever_ticks",
            statement_inputs={"DO": body} if body is not None else {},
        )
        tops.append(loop)
    return Workspace(tops)


@st.composite
def contract_operations(draw, max_size=40):
    """
    (sender, method, args) triples; some of them fail on purpose
    (non-owners, missing tokens).
    """
    ops = []
    for _ in range(draw(st.integers(1, max_size))):
        sender = draw(st.sampled_from(ACCOUNTS))
        method = draw(st.sampled_from(["mint", "setAttribute", "appendLog", "transferFrom"]))
        token = draw(st.integers(1, 6))
        if method == "mint":
            args = [draw(st.sampled_from(ACCOUNTS))]
        elif method == "setAttribute":
            value = draw(st.one_of(numbers, st.text(max_size=8)))
            args = [token, draw(st.sampled_from(TRAITS)), value]
        elif method == "appendLog":
            args = [token, draw(st.text(max_size=8))]
        else:
            args = [sender, draw(st.sampled_from(ACCOUNTS)), token]
        ops.append((sender, method, args))
    return ops

"""Benchmark workloads: SmallBank, TPC-C, Auction and the scalable Auction(n).

Each benchmark exists twice: as a DSL file under ``data/`` (what
``load_benchmark`` returns) and as a Python builder (``build_*``); the test
suite asserts both agree.
"""

from __future__ import annotations

import re
from importlib import resources
from typing import Iterable, Optional

from ..model import (
    BTP,
    FKAnnotation,
    ForeignKey,
    Kind,
    Loop,
    Optional_,
    Branch,
    RelationDecl,
    Schema,
    Statement,
    Stmt,
    Workload,
    seq,
)

ABBREVIATIONS: dict[str, dict[str, str]] = {
    "smallbank": {
        "Amalgamate": "Am",
        "Balance": "Bal",
        "DepositChecking": "DC",
        "TransactSavings": "TS",
        "WriteCheck": "WC",
    },
    "tpcc": {
        "Delivery": "Del",
        "NewOrder": "NO",
        "OrderStatus": "OS",
        "Payment": "Pay",
        "StockLevel": "SL",
    },
    "auction": {"FindBids": "FB", "PlaceBid": "PB"},
}

BENCHMARKS = ("smallbank", "tpcc", "auction")


def abbreviations(bench: str) -> dict[str, str]:
    if bench in ABBREVIATIONS:
        return dict(ABBREVIATIONS[bench])
    n = parse_auction_n(bench)
    if n is None:
        return {}
    return {**{f"FindBids{i}": f"FB{i}" for i in range(1, n + 1)}, **{f"PlaceBid{i}": f"PB{i}" for i in range(1, n + 1)}}


def parse_auction_n(bench: str) -> Optional[int]:
    m = re.fullmatch(r"auction_n\((\d+)\)|auction(\d+)", bench)
    if not m:
        return None
    n = int(m.group(1) or m.group(2))
    if n < 1:
        raise ValueError("Auction(n) needs n >= 1")
    return n


def data_text(name: str) -> str:
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")


def load_benchmark(bench: str) -> Workload:
    """Workload for ``smallbank``, ``tpcc``, ``auction`` or ``auction_n(N)``."""
    from ..dsl import parse_workload_or_raise

    if bench in BENCHMARKS:
        return parse_workload_or_raise(data_text(f"{bench}.wl"), f"{bench}.wl")
    n = parse_auction_n(bench)
    if n is not None:
        return build_auction_n(n)
    raise KeyError(f"unknown benchmark {bench!r}; expected one of {', '.join(BENCHMARKS)} or auction_n(N)")


def build(bench: str) -> Workload:
    builders = {"smallbank": build_smallbank, "tpcc": build_tpcc, "auction": build_auction}
    if bench in builders:
        return builders[bench]()
    n = parse_auction_n(bench)
    if n is None:
        raise KeyError(bench)
    return build_auction_n(n)


def _attrs(spec) -> Optional[frozenset]:
    if spec is None:
        return None
    if isinstance(spec, str):
        return frozenset(spec.split())
    return frozenset(spec)


class _Builder:
    def __init__(self, schema: Schema):
        self.schema = schema

    def q(self, label: str, kind: Kind, rel: str, pred=None, obs=None, mod=None) -> Stmt:
        if kind in (Kind.INS, Kind.KEY_DEL, Kind.PRED_DEL) and mod is None:
            mod = self.schema.attrs(rel)
        return Stmt(Statement(label, kind, rel, _attrs(pred), _attrs(obs), _attrs(mod)))


def _fks(*triples: str) -> tuple[FKAnnotation, ...]:
    out = []
    for text in triples:
        m = re.fullmatch(r"\s*(\w+)\s*=\s*(\w+)\((\w+)\)\s*", text)
        out.append(FKAnnotation(m.group(1), m.group(2), m.group(3)))
    return tuple(out)


def _rel(name: str, attrs: str, key: str) -> RelationDecl:
    return RelationDecl(name, tuple(attrs.split()), tuple(key.split()))


def _fk(name: str, dom: str, dom_attrs: str, rng: str, rng_attrs: str) -> ForeignKey:
    return ForeignKey(name, dom, tuple(dom_attrs.split()), rng, tuple(rng_attrs.split()))


K = Kind


# --- Auction ---------------------------------------------------------------

def _auction_schema(bids: Iterable[str]) -> Schema:
    bids = list(bids)
    rels = [_rel("Buyer", "id calls", "id")]
    rels += [_rel(b, "buyerId bid", "buyerId") for b in bids]
    rels += [_rel("Log", "id buyerId bid", "id")]
    fks = []
    if len(bids) == 1:
        fks.append(_fk("f1", bids[0], "buyerId", "Buyer", "id"))
    else:
        fks += [_fk(f"f1_{i}", b, "buyerId", "Buyer", "id") for i, b in enumerate(bids, start=1)]
    fks.append(_fk("f2", "Log", "buyerId", "Buyer", "id"))
    return Schema(tuple(rels), tuple(fks))


def _auction_programs(b: _Builder, bids: str, fk: str, suffix: str) -> list[BTP]:
    find = BTP(
        "FindBids" + suffix,
        seq(
            b.q("q1", K.KEY_UPD, "Buyer", obs="calls", mod="calls"),
            b.q("q2", K.PRED_SEL, bids, pred="bid", obs="bid"),
        ),
    )
    place = BTP(
        "PlaceBid" + suffix,
        seq(
            b.q("q3", K.KEY_UPD, "Buyer", obs="calls", mod="calls"),
            b.q("q4", K.KEY_SEL, bids, obs="bid"),
            Optional_(b.q("q5", K.KEY_UPD, bids, obs=(), mod="bid")),
            b.q("q6", K.INS, "Log"),
        ),
        _fks(f"q3 = {fk}(q4)", f"q3 = {fk}(q5)", "q3 = f2(q6)"),
    )
    return [find, place]


def build_auction() -> Workload:
    schema = _auction_schema(["Bids"])
    return Workload(schema, tuple(_auction_programs(_Builder(schema), "Bids", "f1", "")))


def build_auction_n(n: int) -> Workload:
    """Auction over ``n`` items; item ``i`` keeps its bids in relation ``Bids{i}``."""
    if n < 1:
        raise ValueError("Auction(n) needs n >= 1")
    if n == 1:
        bids = ["Bids1"]
        schema = Schema(
            (_rel("Buyer", "id calls", "id"), _rel("Bids1", "buyerId bid", "buyerId"), _rel("Log", "id buyerId bid", "id")),
            (_fk("f1_1", "Bids1", "buyerId", "Buyer", "id"), _fk("f2", "Log", "buyerId", "Buyer", "id")),
        )
    else:
        bids = [f"Bids{i}" for i in range(1, n + 1)]
        schema = _auction_schema(bids)
    b = _Builder(schema)
    programs: list[BTP] = []
    for i, rel in enumerate(bids, start=1):
        programs += _auction_programs(b, rel, f"f1_{i}", str(i))
    return Workload(schema, tuple(programs))


# --- SmallBank -------------------------------------------------------------

def smallbank_schema() -> Schema:
    return Schema(
        (
            _rel("Account", "Name CustomerId", "Name"),
            _rel("Savings", "CustomerId Balance", "CustomerId"),
            _rel("Checking", "CustomerId Balance", "CustomerId"),
        ),
        (
            _fk("f1", "Account", "CustomerId", "Savings", "CustomerId"),
            _fk("f2", "Account", "CustomerId", "Checking", "CustomerId"),
        ),
    )


def build_smallbank() -> Workload:
    schema = smallbank_schema()
    b = _Builder(schema)
    cid, bal = "CustomerId", "Balance"
    programs = (
        BTP(
            "Amalgamate",
            seq(
                b.q("q1", K.KEY_SEL, "Account", obs=cid),
                b.q("q2", K.KEY_SEL, "Account", obs=cid),
                b.q("q3", K.KEY_UPD, "Savings", obs=bal, mod=bal),
                b.q("q4", K.KEY_UPD, "Checking", obs=bal, mod=bal),
                b.q("q5", K.KEY_UPD, "Checking", obs=bal, mod=bal),
            ),
            _fks("q3 = f1(q1)", "q4 = f2(q1)", "q5 = f2(q2)"),
        ),
        BTP(
            "Balance",
            seq(
                b.q("q6", K.KEY_SEL, "Account", obs=cid),
                b.q("q7", K.KEY_SEL, "Savings", obs=bal),
                b.q("q8", K.KEY_SEL, "Checking", obs=bal),
            ),
            _fks("q7 = f1(q6)", "q8 = f2(q6)"),
        ),
        BTP(
            "DepositChecking",
            seq(
                b.q("q9", K.KEY_SEL, "Account", obs=cid),
                b.q("q10", K.KEY_UPD, "Checking", obs=bal, mod=bal),
            ),
            _fks("q10 = f2(q9)"),
        ),
        BTP(
            "TransactSavings",
            seq(
                b.q("q11", K.KEY_SEL, "Account", obs=cid),
                b.q("q12", K.KEY_UPD, "Savings", obs=bal, mod=bal),
            ),
            _fks("q12 = f1(q11)"),
        ),
        BTP(
            "WriteCheck",
            seq(
                b.q("q13", K.KEY_SEL, "Account", obs=cid),
                b.q("q14", K.KEY_SEL, "Savings", obs=bal),
                b.q("q15", K.KEY_SEL, "Checking", obs=bal),
                b.q("q16", K.KEY_UPD, "Checking", obs=bal, mod=bal),
            ),
            _fks("q14 = f1(q13)", "q15 = f2(q13)", "q16 = f2(q13)"),
        ),
    )
    return Workload(schema, programs)


# --- TPC-C -----------------------------------------------------------------

def tpcc_schema() -> Schema:
    return Schema(
        (
            _rel("Warehouse", "w_id w_name w_street_1 w_street_2 w_city w_state w_zip w_tax w_ytd", "w_id"),
            _rel(
                "District",
                "d_id d_w_id d_name d_street_1 d_street_2 d_city d_state d_zip d_tax d_ytd d_next_o_id",
                "d_id d_w_id",
            ),
            _rel(
                "Customer",
                "c_id c_d_id c_w_id c_first c_middle c_last c_street_1 c_street_2 c_city c_state c_zip "
                "c_phone c_since c_credit c_credit_lim c_discount c_balance c_ytd_payment c_payment_cnt "
                "c_delivery_cnt c_data",
                "c_id c_d_id c_w_id",
            ),
            _rel(
                "History",
                "h_c_id h_c_d_id h_c_w_id h_d_id h_w_id h_date h_amount h_data",
                "h_c_id h_c_d_id h_c_w_id h_d_id h_w_id",
            ),
            _rel("New_Order", "no_o_id no_d_id no_w_id", "no_o_id no_d_id no_w_id"),
            _rel(
                "Orders",
                "o_id o_d_id o_w_id o_c_id o_entry_id o_carrier_id o_ol_cnt o_all_local",
                "o_id o_d_id o_w_id",
            ),
            _rel(
                "Order_Line",
                "ol_o_id ol_d_id ol_w_id ol_number ol_i_id ol_supply_w_id ol_delivery_d ol_quantity "
                "ol_amount ol_dist_info",
                "ol_o_id ol_d_id ol_w_id ol_number",
            ),
            _rel("Item", "i_id i_im_id i_name i_price i_data", "i_id"),
            _rel(
                "Stock",
                "s_i_id s_w_id s_quantity s_dist_01 s_dist_02 s_dist_03 s_dist_04 s_dist_05 s_dist_06 "
                "s_dist_07 s_dist_08 s_dist_09 s_dist_10 s_ytd s_order_cnt s_remote_cnt s_data",
                "s_i_id s_w_id",
            ),
        ),
        (
            _fk("f1", "District", "d_w_id", "Warehouse", "w_id"),
            _fk("f2", "Customer", "c_d_id c_w_id", "District", "d_id d_w_id"),
            _fk("f3", "History", "h_c_id h_c_d_id h_c_w_id", "Customer", "c_id c_d_id c_w_id"),
            _fk("f4", "History", "h_d_id h_w_id", "District", "d_id d_w_id"),
            _fk("f5", "New_Order", "no_o_id no_d_id no_w_id", "Orders", "o_id o_d_id o_w_id"),
            _fk("f6", "Orders", "o_d_id o_w_id", "District", "d_id d_w_id"),
            _fk("f7", "Orders", "o_c_id o_d_id o_w_id", "Customer", "c_id c_d_id c_w_id"),
            _fk("f8", "Order_Line", "ol_o_id ol_d_id ol_w_id", "Orders", "o_id o_d_id o_w_id"),
            _fk("f9", "Order_Line", "ol_i_id", "Item", "i_id"),
            _fk("f10", "Order_Line", "ol_supply_w_id", "Warehouse", "w_id"),
            _fk("f11", "Stock", "s_i_id", "Item", "i_id"),
            _fk("f12", "Stock", "s_w_id", "Warehouse", "w_id"),
        ),
    )


# Reconstructed from parameters shared between statements; Payment treats the
# paying customer as belonging to the district being updated.
TPCC_CONSTRAINTS: dict[str, tuple[str, ...]] = {
    "Delivery": (
        "q3 = f5(q2)", "q4 = f5(q2)",
        "q3 = f8(q5)", "q4 = f8(q5)", "q3 = f8(q6)", "q4 = f8(q6)",
        "q7 = f7(q3)", "q7 = f7(q4)",
    ),
    "NewOrder": (
        "q9 = f1(q10)", "q10 = f2(q8)", "q8 = f7(q11)", "q10 = f6(q11)",
        "q11 = f5(q12)", "q11 = f8(q15)", "q13 = f9(q15)", "q13 = f11(q14)",
    ),
    "OrderStatus": ("q17 = f7(q18)",),
    "Payment": (
        "q20 = f1(q21)",
        "q21 = f2(q22)", "q21 = f2(q23)", "q21 = f2(q24)", "q21 = f2(q25)",
        "q23 = f3(q26)", "q24 = f3(q26)", "q25 = f3(q26)", "q21 = f4(q26)",
    ),
    "StockLevel": (),
}

# Insert write sets exactly as listed in the benchmark's statement table, which
# leaves out the columns that stay NULL on insert.  Not well-formed (an insert
# writes every attribute); only used to compare graph sizes.
TABLE_INSERT_SETS = {
    "q11": "o_all_local o_c_id o_d_id o_entry_id o_id o_ol_cnt o_w_id",
    "q15": "ol_amount ol_d_id ol_dist_info ol_i_id ol_number ol_o_id ol_quantity ol_supply_w_id ol_w_id",
}


def build_tpcc(table_insert_sets: bool = False) -> Workload:
    """TPC-C; ``table_insert_sets`` swaps in the partial insert write sets of
    ``TABLE_INSERT_SETS`` (the result then fails validation)."""
    schema = tpcc_schema()
    b = _Builder(schema)
    ins = TABLE_INSERT_SETS if table_insert_sets else {}
    programs = (
        BTP(
            "Delivery",
            Loop(seq(
                b.q("q1", K.PRED_SEL, "New_Order", pred="no_d_id no_w_id", obs="no_o_id"),
                b.q("q2", K.KEY_DEL, "New_Order"),
                b.q("q3", K.KEY_SEL, "Orders", obs="o_c_id"),
                b.q("q4", K.KEY_UPD, "Orders", obs=(), mod="o_carrier_id"),
                b.q("q5", K.PRED_UPD, "Order_Line", pred="ol_d_id ol_o_id ol_w_id", obs=(), mod="ol_delivery_d"),
                b.q("q6", K.PRED_SEL, "Order_Line", pred="ol_d_id ol_o_id ol_w_id", obs="ol_amount"),
                b.q("q7", K.KEY_UPD, "Customer", obs="c_balance c_delivery_cnt", mod="c_balance c_delivery_cnt"),
            )),
            _fks(*TPCC_CONSTRAINTS["Delivery"]),
        ),
        BTP(
            "NewOrder",
            seq(
                b.q("q8", K.KEY_SEL, "Customer", obs="c_credit c_discount c_last"),
                b.q("q9", K.KEY_SEL, "Warehouse", obs="w_tax"),
                b.q("q10", K.KEY_UPD, "District", obs="d_next_o_id d_tax", mod="d_next_o_id"),
                b.q("q11", K.INS, "Orders", mod=ins.get("q11")),
                b.q("q12", K.INS, "New_Order"),
                Loop(seq(
                    b.q("q13", K.KEY_SEL, "Item", obs="i_data i_name i_price"),
                    b.q(
                        "q14", K.KEY_UPD, "Stock",
                        obs="s_data s_dist_01 s_dist_02 s_dist_03 s_dist_04 s_dist_05 s_dist_06 s_dist_07 "
                            "s_dist_08 s_dist_09 s_dist_10 s_order_cnt s_quantity s_remote_cnt s_ytd",
                        mod="s_order_cnt s_quantity s_remote_cnt s_ytd",
                    ),
                    b.q("q15", K.INS, "Order_Line", mod=ins.get("q15")),
                )),
            ),
            _fks(*TPCC_CONSTRAINTS["NewOrder"]),
        ),
        BTP(
            "OrderStatus",
            seq(
                Branch(
                    b.q("q16", K.PRED_SEL, "Customer", pred="c_d_id c_last c_w_id", obs="c_balance c_first c_id c_middle"),
                    b.q("q17", K.KEY_SEL, "Customer", obs="c_balance c_first c_last c_middle"),
                ),
                b.q("q18", K.PRED_SEL, "Orders", pred="o_c_id o_d_id o_w_id", obs="o_carrier_id o_entry_id o_id"),
                b.q(
                    "q19", K.PRED_SEL, "Order_Line", pred="ol_d_id ol_o_id ol_w_id",
                    obs="ol_amount ol_delivery_d ol_i_id ol_quantity ol_supply_w_id",
                ),
            ),
            _fks(*TPCC_CONSTRAINTS["OrderStatus"]),
        ),
        BTP(
            "Payment",
            seq(
                b.q("q20", K.KEY_UPD, "Warehouse", obs="w_city w_name w_state w_street_1 w_street_2 w_ytd w_zip", mod="w_ytd"),
                b.q("q21", K.KEY_UPD, "District", obs="d_city d_name d_state d_street_1 d_street_2 d_ytd d_zip", mod="d_ytd"),
                Optional_(b.q("q22", K.PRED_SEL, "Customer", pred="c_d_id c_last c_w_id", obs="c_id")),
                b.q(
                    "q23", K.KEY_UPD, "Customer",
                    obs="c_balance c_city c_credit c_credit_lim c_discount c_first c_last c_middle c_phone "
                        "c_since c_state c_street_1 c_street_2 c_ytd_payment c_zip",
                    mod="c_balance c_payment_cnt c_ytd_payment",
                ),
                Optional_(seq(
                    b.q("q24", K.KEY_SEL, "Customer", obs="c_data"),
                    b.q("q25", K.KEY_UPD, "Customer", obs=(), mod="c_data"),
                )),
                b.q("q26", K.INS, "History"),
            ),
            _fks(*TPCC_CONSTRAINTS["Payment"]),
        ),
        BTP(
            "StockLevel",
            seq(
                b.q("q27", K.KEY_SEL, "District", obs="d_next_o_id"),
                b.q("q28", K.PRED_SEL, "Order_Line", pred="ol_d_id ol_o_id ol_w_id", obs="ol_i_id"),
                b.q("q29", K.PRED_SEL, "Stock", pred="s_quantity s_w_id", obs="s_i_id"),
            ),
            _fks(*TPCC_CONSTRAINTS["StockLevel"]),
        ),
    )
    return Workload(schema, programs)

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mirrorgmt.fixtures import CP2, OCTIC
from mirrorgmt.invariants import (
    GW,
    W,
    ZERO_ON_MISSING,
    Context,
    ContextMismatch,
    GWKey,
    InvariantTable,
    MissingEntry,
    TableError,
    WKey,
    dump_table,
    enumerate_w_keys,
    format_value,
    gw_selection_rule,
    insertion_profiles,
    load_table,
    lookup,
    normalize_key,
    parse_table,
    parse_value,
    store_table,
    w_selection_rule,
)


def test_context_validation():
    with pytest.raises(ValueError):
        Context(3, 1)
    with pytest.raises(ValueError):
        Context(5, 0)


@pytest.mark.parametrize(
    "ctx, ins, d, expected",
    [
        (OCTIC, (2, 2, 2), 1, True),  # 6 = 8-5+0+3
        (CP2, (1, 2, 2), 1, True),  # 5 = 4-5+3+3
        (OCTIC, (2, 2), 1, False),
    ],
)
def test_gw_selection(ctx, ins, d, expected):
    assert gw_selection_rule(GWKey(ctx, ins, d)) is expected


@pytest.mark.parametrize(
    "ctx, a, b, ins, d, expected",
    [
        (OCTIC, 2, 2, (2,), 1, True),
        (OCTIC, 5, 0, (), 1, True),
        (CP2, 2, 0, (2, 2), 1, True),
        (OCTIC, 2, 2, (3,), 1, False),
    ],
)
def test_w_selection(ctx, a, b, ins, d, expected):
    assert w_selection_rule(WKey(ctx, a, b, ins, d)) is expected


def test_wkey_canonical_orientation():
    k1 = WKey(OCTIC, 0, 4, [2], 1)
    assert (k1.a, k1.b) == (4, 0)
    assert k1 == WKey(OCTIC, 4, 0, (2,), 1)
    assert WKey(OCTIC, 2, 2, [2, 3, 2], 1).insertions == (3, 2, 2)
    assert GWKey(OCTIC, [2, 4, 3], 1) == GWKey(OCTIC, (4, 3, 2), 1)


def test_normalize_divisor_insertion():
    norm = normalize_key(WKey(OCTIC, 2, 2, (1, 2), 3))
    assert norm.key == WKey(OCTIC, 2, 2, (2,), 3)
    assert norm.factor == 3


def test_normalize_identity_insertion_kills():
    norm = normalize_key(WKey(OCTIC, 2, 2, (0, 2), 2))
    assert norm.resolved and norm.factor == 0


def test_normalize_degree_zero():
    assert normalize_key(GWKey(OCTIC, (2, 2, 2), 0)) == (None, 8)
    assert normalize_key(GWKey(OCTIC, (2, 2, 1), 0)) == (None, 0)
    assert normalize_key(GWKey(OCTIC, (2, 2, 2, 0), 0)) == (None, 0)
    assert normalize_key(WKey(CP2, 2, 0, (0,), 0)) == (None, 1)
    assert normalize_key(WKey(OCTIC, 2, 2, (), 0)) == (None, 0)
    assert normalize_key(WKey(OCTIC, 2, 2, (2, 2), 0)) == (None, 0)


def test_normalize_out_of_range():
    assert normalize_key(WKey(CP2, 3, 1, (2,), 1)) == (None, 0)
    assert normalize_key(GWKey(CP2, (3, 2), 1)) == (None, 0)
    with pytest.raises(ValueError):
        normalize_key(WKey(CP2, 1, 1, (), -1))


def test_normalize_gw_folds_boundaries():
    norm = normalize_key(GWKey(OCTIC, (2, 2, 2, 1), 2))
    assert norm.key == GWKey(OCTIC, (2, 2, 2), 2) and norm.factor == 2


def test_lookup_fixture_values(octic):
    w, gw = octic
    assert lookup(w, WKey(OCTIC, 2, 2, (2,), 1)) == 83871744
    assert lookup(gw, GWKey(OCTIC, (1, 2, 2, 2), 1)) == 59021312
    assert lookup(gw, GWKey(OCTIC, (1, 2, 2, 2), 2)) == 2 * 821654084851712
    # fails the selection rule: zero without consulting storage
    assert lookup(w, WKey(OCTIC, 2, 2, (3,), 1)) == 0
    assert lookup(gw, GWKey(OCTIC, (2, 2), 1)) == 0


def test_lookup_missing_policy(octic):
    w, _ = octic
    key = WKey(OCTIC, 3, 0, (3,), 1)
    with pytest.raises(MissingEntry) as info:
        lookup(w, key)
    assert "w(3,0|{3})_1" in str(info.value)
    assert lookup(w.with_policy(ZERO_ON_MISSING), key) == 0


def test_lookup_context_and_kind_mismatch(octic, cp2):
    w, gw = octic
    with pytest.raises(ContextMismatch):
        lookup(w, WKey(CP2, 2, 2, (), 1))
    with pytest.raises(ContextMismatch):
        lookup(w, GWKey(OCTIC, (2, 2, 2), 1))


ctx_strategy = st.builds(lambda N, dk: Context(N, max(1, N - dk)), st.integers(4, 8), st.integers(0, 3))


@settings(max_examples=200, deadline=None)
@given(ctx_strategy, st.integers(1, 3), st.data())
def test_divisor_property_and_selection_zero(ctx, d, data):
    a = data.draw(st.integers(0, ctx.top))
    b = data.draw(st.integers(0, ctx.top))
    ins = data.draw(st.lists(st.integers(2, ctx.top), max_size=3))
    key = WKey(ctx, a, b, ins, d)
    value = Fraction(data.draw(st.integers(-100, 100)), data.draw(st.integers(1, 9)))
    table = InvariantTable(W, ctx, {key: value} if w_selection_rule(key) else {}, ZERO_ON_MISSING)
    with_one = WKey(ctx, a, b, ins + [1], d)
    assert lookup(table, with_one) == d * lookup(table, key)
    assert lookup(table, key) == lookup(table, key)
    if not w_selection_rule(key):
        assert lookup(table, key) == 0


def test_value_encoding():
    assert parse_value("12") == 12
    assert parse_value("-6/4") == Fraction(-3, 2)
    assert format_value(Fraction(-3, 2)) == "-3/2"
    assert format_value(Fraction(10**20)) == "100000000000000000000"
    for bad in ("1.5", "3/0", "", "a", 7):
        with pytest.raises(ValueError):
            parse_value(bad)


def test_round_trip(tmp_path, octic, cp2):
    for table in (*octic, *cp2):
        path = tmp_path / "t.json"
        store_table(table, path)
        assert load_table(path) == table
        assert dump_table(load_table(path)) == path.read_text()


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_round_trip_random(data):
    ctx = Context(6, 4)
    keys = enumerate_w_keys(ctx, 2, 2, min_b=0)
    chosen = data.draw(st.lists(st.sampled_from(keys), unique=True, max_size=10))
    values = {k: Fraction(data.draw(st.integers(-10**30, 10**30)), data.draw(st.integers(1, 10**6))) for k in chosen}
    table = InvariantTable(W, ctx, values)
    assert parse_table(dump_table(table)) == table


def test_empty_table():
    table = parse_table('{"kind": "GW", "N": 5, "k": 5, "entries": []}')
    assert len(table) == 0


def _doc(entries, kind="W", N=8, k=8):
    return json.dumps({"kind": kind, "N": N, "k": k, "entries": entries})


def test_load_canonicalizes():
    table = parse_table(_doc([{"d": 1, "a": 0, "b": 4, "insertions": [2], "value": "49700864/2"}]))
    assert table[WKey(OCTIC, 4, 0, (2,), 1)] == 24850432


@pytest.mark.parametrize(
    "entries, fragment",
    [
        ([{"d": 1, "a": 2, "b": 2, "insertions": [3], "value": "1"}], "selection rule"),
        (
            [
                {"d": 1, "a": 2, "b": 2, "insertions": [2], "value": "1"},
                {"d": 1, "a": 2, "b": 2, "insertions": [2], "value": "2"},
            ],
            "duplicate",
        ),
        ([{"d": 1, "a": 2, "b": 2, "insertions": [2, 1], "value": "1"}], "normalized"),
        ([{"d": 0, "a": 2, "b": 2, "insertions": [2], "value": "8"}], "degree-0"),
        ([{"d": 1, "a": 9, "b": 0, "insertions": [], "value": "1"}], "outside"),
    ],
)
def test_load_rejections(entries, fragment):
    with pytest.raises(TableError) as info:
        parse_table(_doc(entries))
    assert fragment in str(info.value)
    assert "entries[" in str(info.value)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ('{"kind": "W", "N": 8,\n "k": }', ":2:"),
        (_doc([{"d": 1, "a": 2, "b": 2, "insertions": [2], "value": 5}]), "entries[0].value"),
        (_doc([{"a": 2, "b": 2, "insertions": [2], "value": "5"}]), "entries[0]: missing field 'd'"),
        (_doc([], kind="X"), "kind"),
        (_doc([{"d": 1, "a": 2, "b": 2, "insertions": [2, 2, 2], "value": "5"}], kind="GW"), "no boundary"),
    ],
)
def test_parse_errors_carry_location(text, fragment):
    with pytest.raises(TableError) as info:
        parse_table(text, source="f.json")
    assert fragment in str(info.value)


def test_insertion_profiles_and_key_enumeration():
    assert list(insertion_profiles(CP2, 2, 3)) == [(2, 2)]
    assert list(insertion_profiles(OCTIC, 2, 2)) == [(3,), (2, 2)]
    keys = enumerate_w_keys(OCTIC, 1, 1)
    assert WKey(OCTIC, 2, 2, (2,), 1) in keys and WKey(OCTIC, 5, 0, (), 1) in keys
    assert all(w_selection_rule(k) and k.n <= 1 for k in keys)

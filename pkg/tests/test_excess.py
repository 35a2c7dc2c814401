import pytest
from hypothesis import given, strategies as st

from mirrorgmt.excess import (
    ExcessQuery,
    new_excess_dimension,
    offset_free_count,
    old_excess_dimension,
    pattern_of_term,
    predict_corrections,
    unsound_terms,
)
from mirrorgmt.fixtures import CP2, OCTIC
from mirrorgmt.gmt import enumerate_terms
from mirrorgmt.invariants import Context, WKey, enumerate_w_keys


@pytest.mark.parametrize(
    "N, k, g, l, expected",
    [(8, 8, 1, 1, 0), (9, 8, 2, 1, -2), (5, 5, 3, 2, 1)],
)
def test_old_excess_examples(N, k, g, l, expected):
    assert old_excess_dimension(ExcessQuery(Context(N, k), g, l)) == expected


def test_old_excess_offset_variant():
    q = ExcessQuery(OCTIC, 1, 1)
    assert old_excess_dimension(q) == 0
    assert offset_free_count(q) == 1


@pytest.mark.parametrize(
    "ctx, g, l, coinciding, expected",
    [
        (CP2, 1, 1, (2,), -1),
        (CP2, 1, 1, (2, 2), 0),
        (OCTIC, 2, 1, (2,), 2),
    ],
)
def test_new_excess_examples(ctx, g, l, coinciding, expected):
    assert new_excess_dimension(ExcessQuery(ctx, g, l, coinciding)) == expected


def test_query_validation():
    with pytest.raises(ValueError):
        ExcessQuery(OCTIC, 1, 2)
    with pytest.raises(ValueError):
        ExcessQuery(CP2, 1, 1, (3,))


contexts = st.builds(lambda N, k: Context(N, min(k, N)), st.integers(4, 9), st.integers(1, 9))


@given(contexts, st.integers(1, 6), st.data())
def test_new_excess_monotone(ctx, g, data):
    l = data.draw(st.integers(1, g))
    base = data.draw(st.lists(st.integers(0, ctx.top), max_size=4))
    c = data.draw(st.integers(0, ctx.top))
    before = new_excess_dimension(ExcessQuery(ctx, g, l, tuple(base)))
    after = new_excess_dimension(ExcessQuery(ctx, g, l, tuple(base) + (c,)))
    assert after - before == c - 1
    empty = ExcessQuery(ctx, g, l)
    assert new_excess_dimension(empty) == offset_free_count(empty) == old_excess_dimension(empty) + 1


@given(st.integers(4, 9), st.integers(1, 8), st.integers(1, 6), st.data())
def test_old_excess_negative_off_calabi_yau(N, gap, g, data):
    k = N - gap
    if k < 1:
        return
    l = data.draw(st.integers(1, g))
    assert old_excess_dimension(ExcessQuery(Context(N, k), g, l)) <= -1


def test_cp2_line_key_has_no_correction():
    preds = predict_corrections(WKey(CP2, 1, 2, (2,), 1))
    assert [(p.kind, p.coinciding, p.count) for p in preds] == [("old", (), -3), ("new", (2,), -1)]
    assert not any(p.permitted for p in preds)


def test_cp2_two_insertion_key():
    preds = predict_corrections(WKey(CP2, 1, 1, (2, 2), 1))
    permitted = [p for p in preds if p.permitted]
    assert [(p.kind, p.coinciding, p.count, p.choices) for p in permitted] == [("new", (2, 2), 0, 1)]
    survivors = [pattern_of_term(t, WKey(CP2, 1, 1, (2, 2), 1)) for t in enumerate_terms(WKey(CP2, 1, 1, (2, 2), 1))]
    assert survivors == [None, permitted[0].pattern()]


def test_octic_degree_two_covers_every_summand():
    key = WKey(OCTIC, 2, 2, (2,), 2)
    permitted = {p.pattern() for p in predict_corrections(key) if p.permitted}
    patterns = [pattern_of_term(t, key) for t in enumerate_terms(key)]
    assert patterns[0] is None
    assert len(patterns) == 4 and all(p in permitted for p in patterns[1:])
    old = [p for p in predict_corrections(key) if p.kind == "old" and p.g == 1]
    assert old[0].count == 0 and old[0].as_dict()["variant_count"] == 1
    new_g2 = [p for p in predict_corrections(key) if p.kind == "new" and p.g == 2 and p.sigma.parts == (2,)]
    assert new_g2[0].count == 2


@pytest.mark.parametrize("ctx", [CP2, OCTIC])
def test_soundness_on_fixture_contexts(ctx):
    for key in enumerate_w_keys(ctx, 3, 3):
        assert unsound_terms(key) == [], key


@pytest.mark.parametrize("N", [4, 5, 6, 7, 8])
def test_counts_miss_the_degree_one_tail_when_gap_is_one(N):
    # the g = d summand w(O_{N-2} O_1)_1 passes its selection rule, yet the
    # empty-coincidence count l-1-(N-k)g is -1 here: the counts are not sound
    ctx = Context(N, N - 1)
    key = WKey(ctx, N - 3, 1, (), 1)
    assert [t.label() for t in unsound_terms(key)] == ["g=1 (g=d)"]
    broken = {str(k) for k in enumerate_w_keys(ctx, 3, 3) if unsound_terms(k)}
    assert all(k.endswith("|{})_1") for k in broken)


def test_predict_rejects_selection_failure():
    with pytest.raises(ValueError):
        predict_corrections(WKey(OCTIC, 2, 2, (3,), 1))

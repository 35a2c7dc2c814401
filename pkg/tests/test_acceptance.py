"""One test per acceptance criterion; each logs a PASS/FAIL line to the terminal summary."""
import random
import time
from collections import Counter
from contextlib import contextmanager
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, factorial

import pytest
from sympy.utilities.iterables import multiset_permutations

from mirrorgmt.excess import (
    ExcessQuery,
    new_excess_dimension,
    offset_free_count,
    old_excess_dimension,
    predict_corrections,
    unsound_terms,
)
from mirrorgmt.fixtures import CP2, OCTIC
from mirrorgmt.gmt import evaluate_rhs, solve_gw_from_w, verify_identity
from mirrorgmt.invariants import GW, W, Context, GWKey, InvariantTable, WKey, enumerate_w_keys
from mirrorgmt.partitions import (
    enumerate_insertion_splits,
    enumerate_partitions,
    symmetry_factor,
)
from mirrorgmt.selftest import random_mirror_data, random_value, run_selftest
from mirrorgmt.series import Truncation, compose, identity_map, invert_mirror_map, mirror_map


@contextmanager
def criterion(log, number, title):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        log.append(f"criterion {number} FAIL  {title}")
        raise
    log.append(f"criterion {number} PASS  {title} ({time.perf_counter() - start:.2f}s)")


def timed(limit, fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    elapsed = time.perf_counter() - start
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"
    return out


def test_criterion_1_plane(acceptance_log, cp2):
    with criterion(acceptance_log, 1, "CP2 identities"):
        w, gw = cp2

        def check():
            r1 = verify_identity(WKey(CP2, 1, 2, (2,), 1), gw, w)
            r2 = verify_identity(WKey(CP2, 1, 1, (2, 2), 1), gw, w)
            return r1, r2

        r1, r2 = timed(1.0, check)
        assert r1.equal and r1.lhs == 1
        assert r2.equal and r2.lhs == 2 and [tv.value for tv in r2.terms] == [1, 1]


def test_criterion_2_octic_degree_one(acceptance_log, octic):
    with criterion(acceptance_log, 2, "octic d=1"):
        w, gw = octic
        value = timed(1.0, evaluate_rhs, WKey(OCTIC, 2, 2, (2,), 1), gw, w)
        assert value == 83871744 == 59021312 + 24850432


def test_criterion_3_octic_degree_two(acceptance_log, octic):
    with criterion(acceptance_log, 3, "octic d=2 four-term breakdown"):
        w, gw = octic
        report = timed(1.0, verify_identity, WKey(OCTIC, 2, 2, (2,), 2), gw, w)
        assert report.rhs == 1238948617930752 and report.equal
        expected = Counter(
            [
                Fraction(821654084851712),
                Fraction(201251978293248),
                Fraction(59021312 * 4432896, 8),
                Fraction(59021312 * 24850432, 8),
            ]
        )
        assert Counter(tv.value for tv in report.terms) == expected


def test_criterion_4_inverse_solve(acceptance_log, octic):
    with criterion(acceptance_log, 4, "GW from W on octic"):
        w, _ = octic
        solved = solve_gw_from_w(w, [WKey(OCTIC, 2, 2, (2,), 1), WKey(OCTIC, 2, 2, (2,), 2)])
        assert solved[GWKey(OCTIC, (2, 2, 2), 1)] == 59021312
        assert solved[GWKey(OCTIC, (2, 2, 2), 2)] == 821654084851712


def test_criterion_5_oracle_equivalence(acceptance_log):
    with criterion(acceptance_log, 5, "relation vs series composition, 100 random trials"):
        results = timed(60.0, run_selftest, 100, 20240501)
        assert len(results) == 100
        failures = [f for r in results for f in r.failures]
        assert failures == []
        assert sum(r.pairs for r in results) > 0 and sum(r.keys for r in results) > 0


def test_criterion_6_b_zero_tautology(acceptance_log):
    with criterion(acceptance_log, 6, "b=0 tautology on 1000+ random keys"):
        rng = random.Random(6)
        cases = []
        while sum(len(keys) for _, _, keys in cases) < 1200:
            N = rng.randint(4, 8)
            ctx = Context(N, rng.randint(1, N))
            keys = enumerate_w_keys(ctx, 3, 3, max_b=0)
            others = enumerate_w_keys(ctx, 3, 3, min_b=1)
            # random values with no relation to each other
            w = InvariantTable(W, ctx, {k: random_value(rng) for k in keys + others})
            cases.append((w, InvariantTable(GW, ctx, {}), rng.sample(keys, min(len(keys), 40))))

        def run():
            checked = 0
            for w, gw, keys in cases:
                for key in keys:
                    assert evaluate_rhs(key, gw, w) == w[key], key
                    checked += 1
            return checked

        assert timed(5.0, run) >= 1000


def test_criterion_7_mirror_round_trip(acceptance_log, octic, cp2):
    with criterion(acceptance_log, 7, "mirror map inversion round trip"):
        rng = random.Random(7)
        cases = []
        for w, _ in (octic, cp2):
            cases.append((w.with_policy("zero"), Truncation(3, 3)))
        for _ in range(20):
            N = rng.randint(4, 8)
            ctx = Context(N, rng.randint(1, N))
            trunc = Truncation(rng.randint(1, 3), rng.randint(0, 3))
            cases.append((random_mirror_data(ctx, trunc, rng).with_policy("zero"), trunc))
        for w, trunc in cases:
            t = mirror_map(w, trunc)
            x = invert_mirror_map(t)
            ident = identity_map(w.context.N, trunc)
            assert [compose(c, t, trunc) for c in x] == ident
            assert [compose(c, x, trunc) for c in t] == ident


def test_criterion_8_excess(acceptance_log):
    with criterion(acceptance_log, 8, "excess counts and soundness on fixture families"):
        assert new_excess_dimension(ExcessQuery(CP2, 1, 1, (2,))) == -1
        assert new_excess_dimension(ExcessQuery(CP2, 1, 1, (2, 2))) == 0
        assert new_excess_dimension(ExcessQuery(OCTIC, 1, 1, (2,))) == 2
        assert new_excess_dimension(ExcessQuery(OCTIC, 2, 1, (2,))) == 2
        old = ExcessQuery(OCTIC, 1, 1)
        assert old_excess_dimension(old) == 0
        assert offset_free_count(old) == 1
        octic_old = [p for p in predict_corrections(WKey(OCTIC, 2, 2, (2,), 1)) if p.kind == "old"]
        assert octic_old[0].as_dict()["variant_count"] == 1
        for ctx in (CP2, OCTIC):
            for key in enumerate_w_keys(ctx, 3, 3):
                assert unsound_terms(key) == [], key


def brute_partitions(g, l):
    return sorted(c for c in combinations_with_replacement(range(1, g + 1), l) if sum(c) == g)


def test_criterion_9_combinatorics(acceptance_log):
    with criterion(acceptance_log, 9, "partitions, split weights, permutation counts"):
        for g in range(1, 13):
            for l in range(1, g + 1):
                assert [p.parts for p in enumerate_partitions(g, l)] == brute_partitions(g, l)
        for types in (1, 2):
            for counts in combinations_with_replacement(range(5), types):
                if types == 2 and counts[0] == 0:
                    continue
                profile = {2 + i: c for i, c in enumerate(counts)}
                for l in range(1, 5):
                    splits = list(enumerate_insertion_splits(profile, l))
                    total = 1
                    n_splits = 1
                    for c in profile.values():
                        total *= (l + 1) ** c
                        n_splits *= comb(c + l, l)
                    assert sum(s.weight for s in splits) == total
                    assert len(splits) == n_splits
        for profile in ({2: 4, 3: 1}, {2: 3, 4: 4}, {2: 4, 3: 4}):
            for l in range(1, 5):
                expected = 1
                for c in profile.values():
                    expected *= (l + 1) ** c
                assert sum(s.weight for s in enumerate_insertion_splits(profile, l)) == expected
        for g in range(1, 11):
            for l in range(1, g + 1):
                for sigma in enumerate_partitions(g, l):
                    distinct = sum(1 for _ in multiset_permutations(list(sigma.parts)))
                    assert distinct == factorial(l) * symmetry_factor(sigma)

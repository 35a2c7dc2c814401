"""Randomized cross-check of the term-by-term relation against series composition."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .gmt import enumerate_terms, gw_factor_for, solve_w_from_gw, verify_identity
from .invariants import GW, W, Context, GWKey, InvariantTable, WKey, enumerate_w_keys, normalize_key
from .series import Truncation, verify_conjecture

__all__ = ["random_value", "random_consistent_tables", "TrialResult", "run_trial", "run_selftest"]


def random_value(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-60, 60), rng.randint(1, 9))


def random_mirror_data(context: Context, trunc: Truncation, rng: random.Random) -> InvariantTable:
    keys = enumerate_w_keys(context, trunc.d_max, trunc.n_max, max_b=0)
    return InvariantTable(W, context, {key: random_value(rng) for key in keys})


def random_consistent_tables(context: Context, trunc: Truncation, rng: random.Random):
    """Random GW values and mirror data, with the W table computed from them.

    Returns ``(gw, w, domain)`` where ``domain`` lists every in-truncation W key with
    ``b >= 1`` and ``w`` also contains the mirror data.
    """
    domain = enumerate_w_keys(context, trunc.d_max, trunc.n_max, min_b=1)
    needed: set[GWKey] = set()
    for key in domain:
        head = gw_factor_for(key)
        if head is not None:
            needed.add(head.key)
        for term in enumerate_terms(key):
            if term.gw_factor_key is not None:
                norm = normalize_key(term.gw_factor_key)
                if not norm.resolved:
                    needed.add(norm.key)
    gw = InvariantTable(GW, context, {key: random_value(rng) for key in sorted(needed, key=GWKey.sort_key)})
    mirror = random_mirror_data(context, trunc, rng)
    w = solve_w_from_gw(gw, mirror, domain)
    return gw, w, domain


@dataclass
class TrialResult:
    context: Context
    trunc: Truncation
    pairs: int
    keys: int
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def run_trial(context: Context, trunc: Truncation, rng: random.Random) -> TrialResult:
    gw, w, domain = random_consistent_tables(context, trunc, rng)
    result = TrialResult(context, trunc, 0, len(domain))
    top = context.top
    for a in range(top + 1):
        for b in range(a + 1):
            result.pairs += 1
            report = verify_conjecture(a, b, gw, w, trunc)
            if not report.passed:
                result.failures.append(f"conjecture ({a},{b}): {report.differences[:3]}")
    for key in domain:
        if not verify_identity(key, gw, w).equal:
            result.failures.append(f"identity {key}")
    return result


def random_setting(rng: random.Random, d_max: int = 3, n_max: int = 3) -> tuple[Context, Truncation]:
    N = rng.randint(4, 8)
    k = rng.randint(1, N)
    return Context(N, k), Truncation(rng.randint(1, d_max), rng.randint(0, n_max))


def run_selftest(trials: int = 100, seed: int = 0) -> list[TrialResult]:
    rng = random.Random(seed)
    results = []
    for _ in range(trials):
        context, trunc = random_setting(rng)
        results.append(run_trial(context, trunc, rng))
    return results

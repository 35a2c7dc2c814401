"""Generalized mirror transformation for multi-point virtual structure constants.

The relation expresses ``w(O_a O_b | prod_j O_j^{n_j})_{0,d}`` as

* the Gromov-Witten invariant ``<O_a O_b prod_j O_j^{n_j}>_{0,d}`` (``g = 0``),
* plus ``w(O_{a+b} O_1 | prod_j O_j^{n_j})_{0,d}`` (``g = d``),
* plus, for ``1 <= g <= d-1``, a sum over partitions ``sigma`` of ``g``, splits of the
  insertions over the ``l`` parts of ``sigma``, and exponents ``e_p`` in ``0..N-2`` of

      S(sigma) * multinomial * <O_a O_b prod O_j^{m_0^j} prod_p O_{e_p}>_{0,d-g}
               * prod_p w(O_{N-2-e_p} O_1 | prod_j O_j^{m_p^j})_{0,g_p} / k.

Everything is exact rational arithmetic.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .invariants import (
    GW,
    W,
    Context,
    ContextMismatch,
    GWKey,
    InvariantTable,
    Key,
    MissingEntry,
    TableError,
    WKey,
    lookup,
    normalize_key,
    selection_rule,
    w_selection_rule,
)
from .partitions import Partition, InsertionSplit, enumerate_insertion_splits, enumerate_partitions, symmetry_factor

__all__ = [
    "CorrectionTerm",
    "TermValue",
    "IdentityReport",
    "DomainNotClosed",
    "InconsistentTables",
    "enumerate_terms",
    "evaluate_rhs",
    "verify_identity",
    "gw_factor_for",
    "solve_gw_from_w",
    "solve_w_from_gw",
    "gw_frontier",
    "close_domain",
    "w_key_for_gw",
]


class DomainNotClosed(ValueError):
    """The recursion needs lower-degree GW values that no domain key produces."""

    def __init__(self, frontier: Sequence[GWKey]):
        self.frontier = list(frontier)
        listing = ", ".join(str(k) for k in self.frontier)
        super().__init__(f"domain is not closed under the recursion; frontier: {listing}")


class InconsistentTables(ValueError):
    pass


@dataclass(frozen=True)
class CorrectionTerm:
    """One summand of the right-hand side.

    ``gw_factor_key`` is ``None`` for the ``g = d`` term, ``w_factor_keys`` is empty
    for the ``g = 0`` term.
    """

    g: int
    sigma: Partition | None
    split: InsertionSplit | None
    e: tuple[int, ...] | None
    gw_factor_key: GWKey | None
    w_factor_keys: tuple[WKey, ...]
    scalar: Fraction

    def label(self) -> str:
        if self.g == 0:
            return "g=0"
        if self.sigma is None:
            return f"g={self.g} (g=d)"
        slots = "|".join(
            ",".join(map(str, self.split.slot(p))) or "-" for p in range(self.split.l + 1)
        )
        return f"g={self.g} sigma={self.sigma} split=[{slots}] e={self.e}"

    def factors(self) -> list[Key]:
        out: list[Key] = []
        if self.gw_factor_key is not None:
            out.append(self.gw_factor_key)
        out.extend(self.w_factor_keys)
        return out


def _vanishes(key: Key) -> bool:
    norm = normalize_key(key)
    if norm.resolved:
        return norm.factor == 0
    return not selection_rule(norm.key)


def _check_key(key: WKey) -> None:
    if not isinstance(key, WKey):
        raise TypeError(f"expected a WKey, got {key!r}")
    if key.d < 1:
        raise ValueError(f"the transformation relates degrees d >= 1; got {key} (use normalize_key for d = 0)")
    if not w_selection_rule(key):
        raise ValueError(f"{key} fails the W selection rule")


def _profile(key: WKey) -> dict[int, int]:
    return key.counts()


def enumerate_terms(key: WKey, prune: bool = True) -> list[CorrectionTerm]:
    """List the summands for ``key`` (a canonical W key, degree ``>= 1``).

    With ``prune`` (the default) summands whose GW factor or any W factor vanishes
    by normalization or by its selection rule are dropped.
    """
    _check_key(key)
    ctx, d, a, b = key.context, key.d, key.a, key.b
    N, k = ctx.N, ctx.k
    ins = key.insertions
    n = _profile(key)
    one = Fraction(1)
    inv_k = Fraction(1, k)
    terms: list[CorrectionTerm] = []

    def keep(term: CorrectionTerm) -> bool:
        return not prune or not any(_vanishes(f) for f in term.factors())

    head = CorrectionTerm(0, None, None, None, GWKey(ctx, (a, b) + ins, d), (), one)
    if keep(head):
        terms.append(head)

    for g in range(1, d):
        for l in range(1, g + 1):
            for sigma in enumerate_partitions(g, l):
                s_factor = symmetry_factor(sigma)
                for split in enumerate_insertion_splits(n, l):
                    base = s_factor * split.weight * inv_k**l
                    on_map = split.slot(0)
                    frozen = [split.slot(p) for p in range(1, l + 1)]
                    for e in product(range(N - 1), repeat=l):
                        gw_key = GWKey(ctx, (a, b) + on_map + e, d - g)
                        w_keys = tuple(
                            WKey(ctx, N - 2 - e_p, 0, frozen[p], sigma.parts[p]) for p, e_p in enumerate(e)
                        )
                        term = CorrectionTerm(g, sigma, split, e, gw_key, w_keys, base)
                        if keep(term):
                            terms.append(term)

    tail = CorrectionTerm(d, None, None, None, None, (WKey(ctx, a + b, 0, ins, d),), one)
    if keep(tail):
        terms.append(tail)
    return terms


@dataclass(frozen=True)
class TermValue:
    term: CorrectionTerm
    factor_values: tuple[Fraction, ...]
    value: Fraction


def _term_value(term: CorrectionTerm, gw: InvariantTable, w: InvariantTable, where: str) -> TermValue:
    values = []
    if term.gw_factor_key is not None:
        values.append(lookup(gw, term.gw_factor_key, where=f"{where}, {term.label()}, GW factor"))
    for i, wk in enumerate(term.w_factor_keys):
        values.append(lookup(w, wk, where=f"{where}, {term.label()}, W factor {i + 1}"))
    total = term.scalar
    for v in values:
        total *= v
    return TermValue(term, tuple(values), total)


def _check_tables(key: WKey, gw: InvariantTable, w: InvariantTable) -> None:
    if gw.kind != GW or w.kind != W:
        raise ValueError("expected a GW table and a W table")
    if gw.context != key.context or w.context != key.context:
        raise ContextMismatch(f"tables and key {key} must share context {key.context}")


def _evaluate(key: WKey, gw: InvariantTable, w: InvariantTable, prune: bool):
    """Return (scale, terms) with RHS(key) = scale * sum(term values)."""
    norm = normalize_key(key)
    if norm.resolved:
        return norm.factor, None
    canonical = norm.key
    if not w_selection_rule(canonical):
        return Fraction(0), None
    values = [_term_value(t, gw, w, where=str(canonical)) for t in enumerate_terms(canonical, prune=prune)]
    return norm.factor, values


def evaluate_rhs(key: WKey, gw: InvariantTable, w: InvariantTable, prune: bool = True) -> Fraction:
    """Exact value of the right-hand side for ``key``.

    Keys carrying ``O_1``/``O_h`` insertions are normalized first and the divisor
    factor is applied to the sum.
    """
    _check_tables(key, gw, w)
    if key.d < 1:
        raise ValueError(f"degree must be >= 1, got {key}")
    scale, values = _evaluate(key, gw, w, prune)
    if values is None:
        return scale
    return scale * sum((tv.value for tv in values), Fraction(0))


@dataclass
class IdentityReport:
    key: WKey
    lhs: Fraction
    rhs: Fraction
    scale: Fraction
    terms: list[TermValue] = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def as_dict(self) -> dict:
        from .invariants import format_value as fv

        return {
            "key": str(self.key),
            "lhs": fv(self.lhs),
            "rhs": fv(self.rhs),
            "scale": fv(self.scale),
            "equal": self.equal,
            "terms": [
                {
                    "term": tv.term.label(),
                    "scalar": fv(tv.term.scalar),
                    "factors": [
                        {"key": str(fk), "value": fv(v)} for fk, v in zip(tv.term.factors(), tv.factor_values)
                    ],
                    "value": fv(tv.value),
                }
                for tv in self.terms
            ],
        }


def verify_identity(key: WKey, gw: InvariantTable, w: InvariantTable) -> IdentityReport:
    """Compare ``lookup(w, key)`` against the right-hand side, with the term breakdown."""
    _check_tables(key, gw, w)
    lhs = lookup(w, key)
    scale, values = _evaluate(key, gw, w, prune=True)
    if values is None:
        return IdentityReport(key, lhs, scale, scale, [])
    rhs = scale * sum((tv.value for tv in values), Fraction(0))
    return IdentityReport(key, lhs, rhs, scale, values)


# -- solvers -----------------------------------------------------------------


def gw_factor_for(key: WKey):
    """Normalized GW key of the ``g = 0`` summand of ``key`` and its divisor factor,
    or ``None`` when that summand is identically zero."""
    norm = normalize_key(GWKey(key.context, (key.a, key.b) + key.insertions, key.d))
    if norm.resolved or not selection_rule(norm.key):
        return None
    return norm


def _canonical_domain(domain: Iterable[WKey], context: Context) -> list[WKey]:
    keys = []
    seen = set()
    for key in domain:
        if key.context != context:
            raise ContextMismatch(f"domain key {key} has context {key.context}, expected {context}")
        if key.d < 1:
            raise ValueError(f"domain keys need d >= 1: {key}")
        norm = normalize_key(key)
        if norm.resolved or not w_selection_rule(norm.key):
            continue
        if norm.key not in seen:
            seen.add(norm.key)
            keys.append(norm.key)
    keys.sort(key=lambda k: k.sort_key())
    return keys


def gw_frontier(domain: Iterable[WKey], context: Context) -> list[GWKey]:
    """Lower-degree GW keys demanded by the correction terms that no domain key produces."""
    keys = _canonical_domain(domain, context)
    produced = set()
    for key in keys:
        norm = gw_factor_for(key)
        if norm is not None:
            produced.add(norm.key)
    needed = set()
    for key in keys:
        for term in enumerate_terms(key):
            if term.g == 0 or term.gw_factor_key is None:
                continue
            norm = normalize_key(term.gw_factor_key)
            if not norm.resolved:
                needed.add(norm.key)
    return sorted(needed - produced, key=lambda k: k.sort_key())


def w_key_for_gw(key: GWKey) -> WKey:
    """A W key whose ``g = 0`` summand is ``key``: the two smallest exponents become the
    boundaries, padded with the divisor ``O_h`` when fewer than two are present."""
    ins = sorted(key.insertions)
    while len(ins) < 2:
        ins.insert(0, 1)
    return WKey(key.context, ins[1], ins[0], ins[2:], key.d)


def close_domain(domain: Iterable[WKey], context: Context) -> list[WKey]:
    """Extend ``domain`` with W keys until :func:`gw_frontier` is empty."""
    keys = _canonical_domain(domain, context)
    while True:
        frontier = gw_frontier(keys, context)
        if not frontier:
            return keys
        keys = _canonical_domain(list(keys) + [w_key_for_gw(g) for g in frontier], context)


def _by_degree(keys: list[WKey]) -> dict[int, list[WKey]]:
    groups: dict[int, list[WKey]] = defaultdict(list)
    for key in keys:
        groups[key.d].append(key)
    return dict(sorted(groups.items()))


def solve_gw_from_w(w: InvariantTable, domain: Iterable[WKey]) -> InvariantTable:
    """Recover GW invariants from W values by peeling off the correction terms.

    For each domain key, in ascending degree, the ``g = 0`` summand is solved for;
    the other summands only involve GW values of lower degree, which must themselves
    be produced by domain keys (otherwise :class:`DomainNotClosed`).
    """
    if w.kind != W:
        raise ValueError("solve_gw_from_w needs a W table")
    context = w.context
    keys = _canonical_domain(domain, context)
    frontier = gw_frontier(keys, context)
    if frontier:
        raise DomainNotClosed(frontier)

    # dry run: every W factor must be resolvable before any arithmetic
    for key in keys:
        lookup(w, key, where="left-hand side")
        for term in enumerate_terms(key):
            for wk in term.w_factor_keys:
                lookup(w, wk, where=f"{key}, {term.label()}")

    solved: dict[GWKey, Fraction] = {}
    origin: dict[GWKey, WKey] = {}
    for d, group in _by_degree(keys).items():
        partial = InvariantTable(GW, context, solved)
        for key in group:
            norm = gw_factor_for(key)
            if norm is None:
                continue
            rest = Fraction(0)
            for term in enumerate_terms(key):
                if term.g == 0:
                    continue
                rest += _term_value(term, partial, w, where=str(key)).value
            value = (lookup(w, key) - rest) / norm.factor
            if norm.key in solved and solved[norm.key] != value:
                raise InconsistentTables(
                    f"{norm.key} solved as {solved[norm.key]} from {origin[norm.key]} "
                    f"but as {value} from {key}"
                )
            solved[norm.key] = value
            origin[norm.key] = key
    return InvariantTable(GW, context, solved, w.policy)


def solve_w_from_gw(gw: InvariantTable, mirror_data: InvariantTable, domain: Iterable[WKey]) -> InvariantTable:
    """Evaluate the transformation forward for every domain key.

    ``mirror_data`` supplies the ``b = 0`` slice ``w(O_c O_1 | ...)``, which the
    relation does not determine. The result contains the mirror data plus every
    domain value.
    """
    if gw.kind != GW or mirror_data.kind != W:
        raise ValueError("solve_w_from_gw needs a GW table and a W table of mirror data")
    if gw.context != mirror_data.context:
        raise ContextMismatch("GW table and mirror data must share a context")
    bad = [str(k) for k in mirror_data if k.b != 0]
    if bad:
        raise TableError("mirror data may only hold b = 0 keys", bad)
    context = gw.context
    keys = _canonical_domain(domain, context)
    out: dict[WKey, Fraction] = dict(mirror_data.entries)
    for d, group in _by_degree(keys).items():
        partial = InvariantTable(W, context, out, mirror_data.policy)
        computed = {}
        for key in group:
            if key.b == 0:
                computed[key] = lookup(partial, key, where="mirror data")
                continue
            computed[key] = evaluate_rhs(key, gw, partial)
        out.update(computed)
    return InvariantTable(W, context, out, mirror_data.policy)

"""Dimension counts for excess-intersection loci of the correction terms.

A correction of degree ``g`` comes from maps whose coordinate polynomial has ``l``
common roots of multiplicities ``sigma = (g_1, ..., g_l)``.  With no marked point on
those roots the locus has expected dimension ``l - 1 - (N-k) g`` after imposing all
insertions ("old" excess).  Marked points sitting on a root see their insertion
degenerate to the identity, giving ``sum (c - 1) - (g - l) - (N-k-1) g`` ("new").
A locus can contribute only when its count is nonnegative.

These counts are necessary conditions; :mod:`mirrorgmt.gmt` never consults them.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from math import comb

from .gmt import CorrectionTerm, enumerate_terms
from .invariants import Context, WKey, w_selection_rule
from .partitions import Partition, enumerate_partitions

__all__ = [
    "ExcessQuery",
    "Prediction",
    "old_excess_dimension",
    "new_excess_dimension",
    "offset_free_count",
    "predict_corrections",
    "pattern_of_term",
    "unsound_terms",
]


@dataclass(frozen=True)
class ExcessQuery:
    context: Context
    g: int
    l: int  # noqa: E741
    coinciding: tuple[int, ...] = ()

    def __post_init__(self):
        if not 1 <= self.l <= self.g:
            raise ValueError(f"need 1 <= l <= g, got g={self.g}, l={self.l}")
        object.__setattr__(self, "coinciding", tuple(sorted(self.coinciding, reverse=True)))
        bad = [c for c in self.coinciding if not self.context.in_range(c)]
        if bad:
            raise ValueError(f"coinciding exponents out of range: {bad}")


def old_excess_dimension(q: ExcessQuery) -> int:
    """``l - 1 - (N-k) g``."""
    N, k = q.context.N, q.context.k
    return q.l - 1 - (N - k) * q.g


def offset_free_count(q: ExcessQuery) -> int:
    """``-(g-l) - (N-k-1) g``: the old-excess expression without the ``-1``.

    Exceeds :func:`old_excess_dimension` by exactly one; reports show both because
    worked examples are sometimes quoted in this form.
    """
    N, k = q.context.N, q.context.k
    return -(q.g - q.l) - (N - k - 1) * q.g


def new_excess_dimension(q: ExcessQuery) -> int:
    """``sum_j (c_j - 1) - (g-l) - (N-k-1) g`` over the coinciding insertions."""
    N, k = q.context.N, q.context.k
    return sum(c - 1 for c in q.coinciding) - (q.g - q.l) - (N - k - 1) * q.g


@dataclass(frozen=True)
class Prediction:
    g: int
    sigma: Partition
    coinciding: tuple[int, ...]
    choices: int  # labelled ways to pick the coinciding insertions
    kind: str  # "old" or "new"
    count: int
    variant_count: int | None = None  # old excess only, see offset_free_count

    @property
    def permitted(self) -> bool:
        return self.count >= 0

    def pattern(self) -> tuple:
        return (self.g, self.sigma.parts, self.coinciding)

    def as_dict(self) -> dict:
        out = {
            "g": self.g,
            "sigma": list(self.sigma.parts),
            "coinciding": list(self.coinciding),
            "choices": self.choices,
            "kind": self.kind,
            "count": self.count,
            "permitted": self.permitted,
        }
        if self.variant_count is not None:
            out["variant_count"] = self.variant_count
            out["note"] = "count without the -1 offset, -(g-l)-(N-k-1)g, is " + str(self.variant_count)
        return out


def _sub_multisets(counts: dict[int, int]):
    exps = sorted(counts, reverse=True)
    for picks in product(*(range(counts[j] + 1) for j in exps)):
        chosen: list[int] = []
        choices = 1
        for j, m in zip(exps, picks):
            chosen.extend([j] * m)
            choices *= comb(counts[j], m)
        yield tuple(chosen), choices


def predict_corrections(key: WKey) -> list[Prediction]:
    """Every ``(g, sigma, coinciding sub-multiset)`` pattern for ``key`` with its count."""
    if not w_selection_rule(key):
        raise ValueError(f"{key} fails the W selection rule")
    out = []
    for g in range(1, key.d + 1):
        for l in range(1, g + 1):
            for sigma in enumerate_partitions(g, l):
                for chosen, choices in _sub_multisets(key.counts()):
                    q = ExcessQuery(key.context, g, l, chosen)
                    if chosen:
                        out.append(Prediction(g, sigma, chosen, choices, "new", new_excess_dimension(q)))
                    else:
                        out.append(
                            Prediction(g, sigma, (), 1, "old", old_excess_dimension(q), offset_free_count(q))
                        )
    return out


def pattern_of_term(term: CorrectionTerm, key: WKey) -> tuple | None:
    """Excess pattern a correction term comes from (``None`` for the ``g = 0`` term)."""
    if term.g == 0:
        return None
    if term.sigma is None:  # g = d: one root of full multiplicity carrying every insertion
        return (term.g, (term.g,), key.insertions)
    coinciding = tuple(
        sorted((c for p in range(1, term.split.l + 1) for c in term.split.slot(p)), reverse=True)
    )
    return (term.g, term.sigma.parts, coinciding)


def unsound_terms(key: WKey) -> list[CorrectionTerm]:
    """Surviving correction terms whose pattern is not permitted by the counts."""
    permitted = {p.pattern() for p in predict_corrections(key) if p.permitted}
    return [
        t for t in enumerate_terms(key) if t.g != 0 and pattern_of_term(t, key) not in permitted
    ]


def summarize(predictions: list[Prediction]) -> Counter:
    return Counter((p.kind, p.permitted) for p in predictions)

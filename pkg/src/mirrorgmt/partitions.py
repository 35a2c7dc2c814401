"""Integer partitions and the combinatorial weights of the correction sum."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, Mapping

__all__ = [
    "EmptyDomainError",
    "Partition",
    "InsertionSplit",
    "enumerate_partitions",
    "multiplicity",
    "symmetry_factor",
    "enumerate_insertion_splits",
    "weak_compositions",
]


class EmptyDomainError(ValueError):
    """Raised when a partition count is requested outside ``1 <= l <= g``."""


@dataclass(frozen=True)
class Partition:
    """A partition ``g_1 <= ... <= g_l`` of ``g``; ``parts`` is stored nondecreasing."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a partition needs at least one part")
        if any(p < 1 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(x > y for x, y in zip(parts, parts[1:])):
            raise ValueError(f"parts must be nondecreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def g(self) -> int:
        return sum(self.parts)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def _partitions(g: int, l: int, smallest: int) -> Iterator[tuple[int, ...]]:
    if l == 1:
        if g >= smallest:
            yield (g,)
        return
    # the remaining l-1 parts are each >= first
    for first in range(smallest, g // l + 1):
        for rest in _partitions(g - first, l - 1, first):
            yield (first,) + rest


def enumerate_partitions(g: int, l: int) -> list[Partition]:
    """Return all partitions of ``g`` into exactly ``l`` parts, in lexicographic order.

    >>> [str(p) for p in enumerate_partitions(4, 2)]
    ['(1,3)', '(2,2)']
    """
    if g < 1 or l < 1 or l > g:
        raise EmptyDomainError(f"no partitions of g={g} into l={l} parts (need 1 <= l <= g)")
    return [Partition(p) for p in _partitions(g, l, 1)]


def multiplicity(i: int, sigma: Partition) -> int:
    """Number of parts of ``sigma`` equal to ``i`` (0 for ``i`` outside ``1..g``)."""
    return sum(1 for part in sigma.parts if part == i)


def symmetry_factor(sigma: Partition) -> Fraction:
    """``prod_i 1/mul(i, sigma)!`` as an exact rational."""
    denom = 1
    for mult in Counter(sigma.parts).values():
        denom *= factorial(mult)
    return Fraction(1, denom)


def weak_compositions(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``n``.

    Ordered with the first slot descending, so the all-in-slot-0 tuple comes first.
    """
    if parts == 1:
        yield (n,)
        return
    for head in range(n, -1, -1):
        for tail in weak_compositions(n - head, parts - 1):
            yield (head,) + tail


@dataclass(frozen=True)
class InsertionSplit:
    """Distribution of the marked insertions over slot 0 and the ``l`` frozen roots.

    ``m[p]`` lists, for each exponent in ``exponents``, how many of the insertions
    with that exponent go to slot ``p`` (slot 0 stays on the map, slot ``p >= 1``
    coincides with root ``p``). ``weight`` is the number of labelled assignments
    realizing this split.
    """

    exponents: tuple[int, ...]
    m: tuple[tuple[int, ...], ...]
    weight: int

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.m) - 1

    def counts(self, p: int) -> dict[int, int]:
        """Nonzero multiplicities ``{j: m_p^j}`` for slot ``p``."""
        return {j: c for j, c in zip(self.exponents, self.m[p]) if c}

    def slot(self, p: int) -> tuple[int, ...]:
        """Insertions in slot ``p`` as a descending exponent tuple."""
        out: list[int] = []
        for j, c in zip(self.exponents, self.m[p]):
            out.extend([j] * c)
        return tuple(sorted(out, reverse=True))


def enumerate_insertion_splits(n: Mapping[int, int], l: int) -> Iterator[InsertionSplit]:
    """Stream every split of the insertion profile ``n`` (exponent -> count) into ``l+1`` slots.

    Each split carries the multinomial weight ``prod_j n_j! / (m_0^j! ... m_l^j!)``.
    """
    if l < 0:
        raise ValueError(f"l must be nonnegative, got {l}")
    if any(c < 0 for c in n.values()):
        raise ValueError(f"insertion counts must be nonnegative: {dict(n)}")
    exponents = tuple(sorted(j for j, c in n.items() if c))

    def choices(idx: int) -> Iterator[tuple[tuple[tuple[int, ...], ...], int]]:
        if idx == len(exponents):
            yield (), 1
            return
        total = n[exponents[idx]]
        for comp in weak_compositions(total, l + 1):
            w = factorial(total)
            for c in comp:
                w //= factorial(c)
            for rest, rest_weight in choices(idx + 1):
                yield (comp,) + rest, w * rest_weight

    for choice, weight in choices(0):
        # transpose: choice[idx][p] -> m[p][idx]
        m = tuple(tuple(choice[idx][p] for idx in range(len(exponents))) for p in range(l + 1))
        yield InsertionSplit(exponents, m, weight)

"""Truncated formal series for the generating-function side of the transformation.

A :class:`TruncatedSeries` lives in the ring

    Q[v^0, v^1]_{linear}  +  Q[v^2, ..., v^{N-2}][[q]]

truncated at ``q^{d_max}`` and total ``v``-degree ``n_max``.  The grading symbol ``q``
stands for ``exp(v^1)``, so ``v^1`` itself only ever appears linearly; ``v^0`` only
enters through the constant-degree (three-point) part.  Exponentials ``exp(d v^1)``
are never expanded; under a change of variables ``v^1 -> v^1 + delta`` they pick up a
factor ``exp(d * delta)`` which is a finite sum because ``delta`` raises the q-order.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from .invariants import (
    Context,
    GWKey,
    InvariantTable,
    WKey,
    format_value,
    insertion_profiles,
    lookup,
)

__all__ = [
    "Truncation",
    "TruncatedSeries",
    "SeriesError",
    "NonInvertible",
    "two_point_generating_function",
    "gw_generating_function",
    "mirror_map",
    "identity_map",
    "invert_mirror_map",
    "exp_positive_order",
    "compose",
    "ConjectureReport",
    "verify_conjecture",
    "required_components",
]


class SeriesError(ValueError):
    pass


class NonInvertible(SeriesError):
    pass


@dataclass(frozen=True, order=True)
class Truncation:
    d_max: int
    n_max: int

    def __post_init__(self):
        if self.d_max < 0 or self.n_max < 0:
            raise ValueError(f"truncation caps must be nonnegative: {self}")

    def __str__(self):
        return f"(d_max={self.d_max}, n_max={self.n_max})"


Exps = tuple  # exponent vector over v^2..v^{N-2}


class TruncatedSeries:
    """Sparse exact series; see the module docstring for the ring.

    ``terms`` maps ``(d, exps)`` to a coefficient of ``q^d * prod_j (v^j)^{exps[j-2]}``;
    ``lin`` holds the coefficients of ``v^0`` and ``v^1`` (at ``q^0``).
    """

    __slots__ = ("N", "trunc", "terms", "lin")

    def __init__(self, N: int, trunc: Truncation, terms=None, lin=None, _trusted=False):
        self.N = N
        self.trunc = trunc
        if _trusted:
            self.terms = terms
            self.lin = lin
            return
        nv = N - 3
        clean = {}
        for (d, exps), c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nv:
                raise SeriesError(f"exponent vector {exps} has wrong length for N={N}")
            if c and d <= trunc.d_max and sum(exps) <= trunc.n_max:
                clean[(d, exps)] = Fraction(c)
        self.terms = clean
        self.lin = {p: Fraction(c) for p, c in (lin or {}).items() if c}
        if any(p not in (0, 1) for p in self.lin):
            raise SeriesError("only v^0 and v^1 may appear as linear terms")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, N: int, trunc: Truncation) -> "TruncatedSeries":
        return cls(N, trunc, {}, {}, _trusted=True)

    @classmethod
    def constant(cls, N: int, trunc: Truncation, c) -> "TruncatedSeries":
        return cls(N, trunc, {(0, (0,) * (N - 3)): c})

    @classmethod
    def variable(cls, N: int, p: int, trunc: Truncation, coeff=1) -> "TruncatedSeries":
        if p in (0, 1):
            return cls(N, trunc, {}, {p: coeff})
        if not 2 <= p <= N - 2:
            raise SeriesError(f"no variable v^{p} for N={N}")
        exps = [0] * (N - 3)
        exps[p - 2] = 1
        return cls(N, trunc, {(0, tuple(exps)): coeff})

    # -- structure ---------------------------------------------------------

    def _like(self, terms, lin=None) -> "TruncatedSeries":
        return TruncatedSeries(self.N, self.trunc, terms, lin if lin is not None else {}, _trusted=True)

    def _check(self, other: "TruncatedSeries") -> None:
        if self.N != other.N:
            raise SeriesError(f"series over different variable sets (N={self.N} vs N={other.N})")
        if self.trunc != other.trunc:
            raise SeriesError(f"truncation mismatch: {self.trunc} vs {other.trunc}")

    @property
    def affine(self) -> tuple[Fraction, dict[int, Fraction]]:
        """Constant and linear coefficients at ``q^0`` over ``v^0..v^{N-2}``."""
        const = self.terms.get((0, (0,) * (self.N - 3)), Fraction(0))
        linear = dict(self.lin)
        for (d, exps), c in self.terms.items():
            if d == 0 and sum(exps) == 1:
                linear[exps.index(1) + 2] = c
        return const, linear

    @property
    def graded(self) -> dict[int, dict[Exps, Fraction]]:
        """Coefficients of ``q^d`` for ``d >= 1``."""
        out: dict[int, dict[Exps, Fraction]] = defaultdict(dict)
        for (d, exps), c in self.terms.items():
            if d >= 1:
                out[d][exps] = c
        return dict(sorted(out.items()))

    def graded_part(self) -> "TruncatedSeries":
        return self._like({key: c for key, c in self.terms.items() if key[0] >= 1})

    def q_order(self) -> int | None:
        """Smallest q-degree carrying a nonzero coefficient (``None`` for zero)."""
        degrees = [d for d, _ in self.terms]
        if self.lin:
            degrees.append(0)
        return min(degrees) if degrees else None

    def is_zero(self) -> bool:
        return not self.terms and not self.lin

    def coefficient(self, d: int, exps: Exps) -> Fraction:
        return self.terms.get((d, tuple(exps)), Fraction(0))

    def truncated(self, trunc: Truncation) -> "TruncatedSeries":
        """Drop everything above the (smaller or equal) caps of ``trunc``."""
        if trunc.d_max > self.trunc.d_max or trunc.n_max > self.trunc.n_max:
            raise SeriesError(f"cannot truncate {self.trunc} up to {trunc}")
        kept = {(d, e): c for (d, e), c in self.terms.items() if d <= trunc.d_max and sum(e) <= trunc.n_max}
        return TruncatedSeries(self.N, trunc, kept, dict(self.lin), _trusted=True)

    def _embedded(self, trunc: Truncation) -> "TruncatedSeries":
        # coefficients above the original caps are unknown, not zero; callers must
        # only read results at orders the original caps determine
        return TruncatedSeries(self.N, trunc, dict(self.terms), dict(self.lin), _trusted=True)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self + TruncatedSeries.constant(self.N, self.trunc, other)
        self._check(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            v = terms.get(key, 0) + c
            if v:
                terms[key] = v
            else:
                terms.pop(key, None)
        lin = dict(self.lin)
        for p, c in other.lin.items():
            v = lin.get(p, 0) + c
            if v:
                lin[p] = v
            else:
                lin.pop(p, None)
        return self._like(terms, lin)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()}, {p: -c for p, c in self.lin.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        c = Fraction(c)
        if not c:
            return self._like({})
        return self._like({k: v * c for k, v in self.terms.items()}, {p: v * c for p, v in self.lin.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        if self.lin or other.lin:
            const_self = self._pure_constant()
            const_other = other._pure_constant()
            if const_self is not None:
                return other.scale(const_self)
            if const_other is not None:
                return self.scale(const_other)
            raise SeriesError("v^0 and v^1 enter only linearly and cannot be multiplied")
        d_max, n_max = self.trunc.d_max, self.trunc.n_max
        left = [(d, e, sum(e), c) for (d, e), c in self.terms.items()]
        right = sorted(((d, e, sum(e), c) for (d, e), c in other.terms.items()), key=lambda t: t[0])
        out: dict = {}
        for d1, e1, n1, c1 in left:
            for d2, e2, n2, c2 in right:
                if d1 + d2 > d_max:
                    break
                if n1 + n2 > n_max:
                    continue
                key = (d1 + d2, tuple(x + y for x, y in zip(e1, e2)))
                out[key] = out.get(key, 0) + c1 * c2
        return self._like({k: v for k, v in out.items() if v})

    __rmul__ = __mul__

    def _pure_constant(self):
        if self.lin:
            return None
        zero = (0, (0,) * (self.N - 3))
        if all(key == zero for key in self.terms):
            return self.terms.get(zero, Fraction(0))
        return None

    def shift(self, d: int) -> "TruncatedSeries":
        """Multiply by ``q^d``."""
        if self.lin and d:
            raise SeriesError("cannot multiply v^0/v^1 by q")
        terms = {(dd + d, e): c for (dd, e), c in self.terms.items() if dd + d <= self.trunc.d_max}
        return self._like(terms, dict(self.lin))

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.N, self.trunc, self.terms, self.lin) == (other.N, other.trunc, other.terms, other.lin)

    def __hash__(self):
        return hash((self.N, self.trunc, frozenset(self.terms.items()), frozenset(self.lin.items())))

    # -- presentation ------------------------------------------------------

    def monomials(self) -> list[tuple[int, tuple[int, ...], Fraction]]:
        """``(d, full exponent vector over v^0..v^{N-2}, coefficient)``, sorted."""
        rows = []
        for p, c in self.lin.items():
            full = [0] * (self.N - 1)
            full[p] = 1
            rows.append((0, tuple(full), c))
        for (d, exps), c in self.terms.items():
            rows.append((d, (0, 0) + exps, c))
        rows.sort(key=lambda r: (r[0], r[1]))
        return rows

    @staticmethod
    def monomial_label(d: int, full: Sequence[int]) -> str:
        parts = [f"q^{d}"] + [f"x{p}^{e}" for p, e in enumerate(full) if e]
        return " ".join(parts)

    def dump(self) -> str:
        """One line per monomial, ``"q^d x2^i2 ... : p/q"``, sorted by (d, exponents)."""
        return "".join(f"{self.monomial_label(d, full)} : {format_value(c)}\n" for d, full, c in self.monomials())

    def __repr__(self):
        body = " + ".join(f"{format_value(c)}*[{self.monomial_label(d, f)}]" for d, f, c in self.monomials())
        return f"TruncatedSeries(N={self.N}, {self.trunc}, {body or '0'})"


# -- generating functions ----------------------------------------------------


def _profile_exps(N: int, insertions: Iterable[int]) -> tuple[tuple[int, ...], int]:
    exps = [0] * (N - 3)
    for c in insertions:
        exps[c - 2] += 1
    denom = 1
    for m in exps:
        denom *= factorial(m)
    return tuple(exps), denom


def _check_exponent(context: Context, *exponents: int) -> None:
    for c in exponents:
        if not context.in_range(c):
            raise ValueError(f"exponent {c} outside 0..{context.top}")


def _two_point(context: Context, a: int, b: int, trunc: Truncation, value) -> TruncatedSeries:
    N, k = context.N, context.k
    series = TruncatedSeries.zero(N, trunc)
    c = N - 2 - a - b
    if context.in_range(c):
        series = series + TruncatedSeries.variable(N, c, trunc, k)
    terms = dict(series.terms)
    for d in range(1, trunc.d_max + 1):
        excess = N - 3 + (N - k) * d - a - b
        for ins in insertion_profiles(context, excess, trunc.n_max):
            v = value(ins, d)
            if v:
                exps, denom = _profile_exps(N, ins)
                terms[(d, exps)] = Fraction(v) / denom
    return TruncatedSeries(N, trunc, terms, series.lin)


def two_point_generating_function(a: int, b: int, w: InvariantTable, trunc: Truncation) -> TruncatedSeries:
    """``k x^{N-2-a-b} + sum_d q^d sum_m w(O_a O_b | prod O_j^{m_j})_{0,d} prod (x^j)^{m_j}/m_j!``."""
    ctx = w.context
    _check_exponent(ctx, a, b)
    return _two_point(ctx, a, b, trunc, lambda ins, d: lookup(w, WKey(ctx, a, b, ins, d)))


def gw_generating_function(a: int, b: int, gw: InvariantTable, trunc: Truncation) -> TruncatedSeries:
    """Perturbed two-point GW function in the same shape, with ``Q = exp(t^1)`` as grading."""
    ctx = gw.context
    _check_exponent(ctx, a, b)
    return _two_point(ctx, a, b, trunc, lambda ins, d: lookup(gw, GWKey(ctx, (a, b) + ins, d)))


def identity_map(N: int, trunc: Truncation) -> list[TruncatedSeries]:
    return [TruncatedSeries.variable(N, p, trunc) for p in range(N - 1)]


def _mirror_component(w: InvariantTable, p: int, trunc: Truncation) -> TruncatedSeries:
    ctx = w.context
    gf = two_point_generating_function(ctx.N - 2 - p, 0, w, trunc)
    return TruncatedSeries.variable(ctx.N, p, trunc) + gf.graded_part().scale(Fraction(1, ctx.k))


def mirror_map(
    w: InvariantTable,
    trunc: Truncation,
    components: Iterable[int] | Mapping[int, int] | None = None,
) -> list[TruncatedSeries | None]:
    """``t^p = x^p + (1/k) * (graded part of w(O_{N-2-p} O_1)_0)`` for ``p = 0..N-2``.

    ``components`` restricts the work: an iterable of indices computes only those,
    a mapping ``p -> cap`` computes component ``p`` only up to ``q^cap``.  Entries
    not requested are ``None``.
    """
    N = w.context.N
    if components is None:
        wanted = {p: trunc.d_max for p in range(N - 1)}
    elif isinstance(components, Mapping):
        wanted = dict(components)
    else:
        wanted = {p: trunc.d_max for p in components}
    out: list[TruncatedSeries | None] = [None] * (N - 1)
    for p, cap in wanted.items():
        if not 0 <= p <= N - 2:
            raise ValueError(f"no mirror-map component t^{p} for N={N}")
        if cap > trunc.d_max:
            raise ValueError(f"component cap {cap} exceeds d_max={trunc.d_max}")
        out[p] = _mirror_component(w, p, Truncation(cap, trunc.n_max))
    return out


# -- composition ---------------------------------------------------------------


def exp_positive_order(s: TruncatedSeries, scale: int = 1) -> TruncatedSeries:
    """``sum_m (scale * s)^m / m!`` for a series without ``q^0`` part."""
    if s.lin or any(d == 0 for d, _ in s.terms):
        raise SeriesError("exp_positive_order needs a series of positive q-order")
    one = TruncatedSeries.constant(s.N, s.trunc, 1)
    result = one
    arg = s.scale(scale)
    power = one
    for m in range(1, s.trunc.d_max + 1):
        power = (power * arg).scale(Fraction(1, m))
        if power.is_zero():
            break
        result = result + power
    return result


@dataclass
class _Shift:
    delta: TruncatedSeries  # embedded at the working truncation
    cap: int  # q-order up to which delta is known


def _shifts(subst: Sequence[TruncatedSeries | None], N: int, trunc: Truncation) -> dict[int, _Shift]:
    if len(subst) != N - 1:
        raise SeriesError(f"substitution needs {N - 1} components, got {len(subst)}")
    shifts = {}
    for p, s in enumerate(subst):
        if s is None:
            continue
        if s.N != N:
            raise SeriesError(f"component {p} lives over N={s.N}, expected {N}")
        if s.trunc.n_max != trunc.n_max or s.trunc.d_max > trunc.d_max:
            raise SeriesError(f"component {p} truncation {s.trunc} incompatible with {trunc}")
        delta = s - TruncatedSeries.variable(N, p, s.trunc)
        if delta.lin or any(d == 0 for d, _ in delta.terms):
            raise NonInvertible(f"component {p} differs from v^{p} at q-order 0; substitution must be v^{p} + O(q)")
        if p >= 2 and any(sum(e) == 0 for _, e in delta.terms):
            raise SeriesError(
                f"component {p} has v-independent corrections; truncating by insertion count would not be exact"
            )
        shifts[p] = _Shift(delta._embedded(trunc), s.trunc.d_max)
    return shifts


def compose(
    f: TruncatedSeries, subst: Sequence[TruncatedSeries | None], trunc: Truncation | None = None
) -> TruncatedSeries:
    """Substitute ``v^p -> subst[p]`` into ``f``, rewriting ``q^d`` as ``q^d exp(d * delta_1)``.

    Each ``subst[p]`` must be ``v^p`` plus terms of positive q-order.  Components may be
    known to a lower q-order than ``trunc`` as long as every use of them is multiplied
    by enough powers of ``q``; otherwise :class:`SeriesError` is raised.
    """
    trunc = trunc or f.trunc
    if f.trunc != trunc:
        raise SeriesError(f"series truncation {f.trunc} differs from requested {trunc}")
    N = f.N
    shifts = _shifts(subst, N, trunc)

    # lowest q-degree at which each variable is used
    first_use: dict[int, int] = {p: 0 for p in f.lin}
    for d, exps in f.terms:
        for j, e in enumerate(exps):
            if e:
                first_use[j + 2] = min(first_use.get(j + 2, d), d)
        if d > 0:
            first_use[1] = min(first_use.get(1, d), d)
    for p, d in first_use.items():
        if p not in shifts:
            raise SeriesError(f"substitution lacks component {p}, which the series uses")
        if shifts[p].cap < trunc.d_max - d:
            raise SeriesError(
                f"component {p} known to q^{shifts[p].cap} but needed to q^{trunc.d_max - d}"
            )

    result = TruncatedSeries.zero(N, trunc)
    for p, c in f.lin.items():
        result = result + TruncatedSeries.variable(N, p, trunc, c) + shifts[p].delta.scale(c)

    by_degree: dict[int, dict] = defaultdict(dict)
    for (d, exps), c in f.terms.items():
        by_degree[d][exps] = c

    nv = N - 3
    for d, poly in sorted(by_degree.items()):
        block_trunc = Truncation(trunc.d_max - d, trunc.n_max)
        bases = {}
        for j in range(nv):
            p = j + 2
            if p in shifts:
                bases[j] = (TruncatedSeries.variable(N, p, trunc) + shifts[p].delta).truncated(block_trunc)
        memo: dict[tuple, TruncatedSeries] = {(0,) * nv: TruncatedSeries.constant(N, block_trunc, 1)}

        def monomial(exps: tuple) -> TruncatedSeries:
            if exps in memo:
                return memo[exps]
            j = next(i for i, e in enumerate(exps) if e)
            lower = exps[:j] + (exps[j] - 1,) + exps[j + 1 :]
            memo[exps] = monomial(lower) * bases[j]
            return memo[exps]

        block = TruncatedSeries.zero(N, block_trunc)
        for exps, c in sorted(poly.items()):
            block = block + monomial(exps).scale(c)
        if d > 0:
            block = block * exp_positive_order(shifts[1].delta.truncated(block_trunc), d)
        result = result + TruncatedSeries(N, trunc, block.terms, block.lin, _trusted=True).shift(d)
    return result


def invert_mirror_map(t: Sequence[TruncatedSeries], trunc: Truncation | None = None) -> list[TruncatedSeries]:
    """Solve ``x^p = t^p - correction_p(x)`` by fixed-point iteration.

    Input and output are both ``v^p + O(q)`` vectors; each sweep fixes one more
    q-order, so the iteration settles after at most ``d_max + 1`` sweeps.
    """
    if not t or any(s is None for s in t):
        raise SeriesError("inversion needs every mirror-map component")
    N = t[0].N
    trunc = trunc or t[0].trunc
    if len(t) != N - 1:
        raise SeriesError(f"expected {N - 1} components, got {len(t)}")
    for p, s in enumerate(t):
        if s.trunc != trunc:
            raise SeriesError(f"component {p} truncation {s.trunc} differs from {trunc}")
    corrections = [s - TruncatedSeries.variable(N, p, trunc) for p, s in enumerate(t)]
    for p, c in enumerate(corrections):
        if c.lin or any(d == 0 for d, _ in c.terms):
            raise NonInvertible(f"t^{p} - x^{p} has a q^0 part; the map is not of the form x + O(q)")
    ident = identity_map(N, trunc)
    eps = [TruncatedSeries.zero(N, trunc) for _ in range(N - 1)]
    for _ in range(trunc.d_max + 1):
        x_of_t = [ident[p] + eps[p] for p in range(N - 1)]
        new = [-compose(corrections[p], x_of_t, trunc) if not corrections[p].is_zero() else corrections[p]
               for p in range(N - 1)]
        if new == eps:
            break
        eps = new
    else:
        raise SeriesError("fixed-point iteration did not settle")  # pragma: no cover
    return [ident[p] + eps[p] for p in range(N - 1)]


# -- conjecture check --------------------------------------------------------


def required_components(f: TruncatedSeries) -> dict[int, int]:
    """For each variable ``f`` uses, the q-order to which its substitute must be known."""
    d_max = f.trunc.d_max
    need: dict[int, int] = {p: d_max for p in f.lin}
    for d, exps in f.terms:
        for j, e in enumerate(exps):
            if e:
                need[j + 2] = max(need.get(j + 2, 0), d_max - d)
        if d > 0:
            need[1] = max(need.get(1, 0), d_max - d)
    return need


@dataclass
class ConjectureReport:
    a: int
    b: int
    trunc: Truncation
    compared: int
    differences: list[tuple[str, Fraction, Fraction]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.differences

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "d_max": self.trunc.d_max,
            "n_max": self.trunc.n_max,
            "compared": self.compared,
            "passed": self.passed,
            "differences": [
                {"monomial": m, "gw_side": format_value(x), "w_side": format_value(y)} for m, x, y in self.differences
            ],
        }


def verify_conjecture(
    a: int, b: int, gw: InvariantTable, w: InvariantTable, trunc: Truncation
) -> ConjectureReport:
    """Compose the perturbed GW two-point function with the mirror map and compare it,
    coefficient by coefficient, with the W generating function.

    Only the mirror-map components (and q-orders) that the GW side actually uses are
    computed, so the W table need not hold the full ``b = 0`` slice.
    """
    if gw.context != w.context:
        raise ValueError("tables must share a context")
    a, b = max(a, b), min(a, b)
    gw_side = gw_generating_function(a, b, gw, trunc)
    t = mirror_map(w, trunc, components=required_components(gw_side))
    composed = compose(gw_side, t, trunc)
    w_side = two_point_generating_function(a, b, w, trunc)
    left = {(d, full): c for d, full, c in composed.monomials()}
    right = {(d, full): c for d, full, c in w_side.monomials()}
    zero = Fraction(0)
    diffs = []
    monos = sorted(set(left) | set(right))
    for mono in monos:
        x, y = left.get(mono, zero), right.get(mono, zero)
        if x != y:
            diffs.append((TruncatedSeries.monomial_label(*mono), x, y))
    return ConjectureReport(a, b, trunc, len(monos), diffs)

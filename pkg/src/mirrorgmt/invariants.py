"""Invariant keys, selection rules, degree/identity normalization and table storage.

Two kinds of numbers are handled:

* ``W`` -- multi-point virtual structure constants ``w(O_a O_b | O_c1 ... O_cn)_{0,d}``
  with two distinguished boundary insertions ``a`` (at 0) and ``b`` (at infinity);
* ``GW`` -- genus-0 Gromov-Witten invariants ``<O_c1 ... O_cn>_{0,d}``, fully symmetric.

Values are exact :class:`fractions.Fraction`.  Tables are written as JSON with values
encoded as ``"p"`` or ``"p/q"`` strings.
"""
from __future__ import annotations

import json
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

__all__ = [
    "W",
    "GW",
    "ERROR_ON_MISSING",
    "ZERO_ON_MISSING",
    "Context",
    "WKey",
    "GWKey",
    "Key",
    "Normalized",
    "InvariantTable",
    "TableError",
    "MissingEntry",
    "ContextMismatch",
    "gw_selection_rule",
    "w_selection_rule",
    "selection_rule",
    "normalize_key",
    "lookup",
    "load_table",
    "store_table",
    "dump_table",
    "parse_table",
    "format_value",
    "parse_value",
    "insertion_profiles",
    "enumerate_w_keys",
]

W = "W"
GW = "GW"
ERROR_ON_MISSING = "error"
ZERO_ON_MISSING = "zero"


class TableError(ValueError):
    """A table (or table file) failed parsing or validation.

    ``problems`` holds one human-readable line per offending entry.
    """

    def __init__(self, message: str, problems: Iterable[str] = ()):
        self.problems = list(problems)
        if self.problems:
            message = message + ":\n  " + "\n  ".join(self.problems)
        super().__init__(message)


class MissingEntry(KeyError):
    """A canonical key needed for an evaluation is absent from an error-on-missing table."""

    def __init__(self, key: "Key", where: str | None = None):
        self.key = key
        self.where = where
        super().__init__(key)

    def __str__(self):
        msg = f"missing table entry {self.key}"
        if self.where:
            msg += f" (needed by {self.where})"
        return msg


class ContextMismatch(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Context:
    """Degree-``k`` hypersurface in ``CP^{N-1}``."""

    N: int
    k: int

    def __post_init__(self):
        if self.N < 4:
            raise ValueError(f"N must be >= 4, got {self.N}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def top(self) -> int:
        """Largest cohomology exponent, ``N - 2``."""
        return self.N - 2

    def in_range(self, exponent: int) -> bool:
        return 0 <= exponent <= self.N - 2

    def __str__(self):
        return f"(N={self.N},k={self.k})"


def _canonical_insertions(insertions: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted((int(c) for c in insertions), reverse=True))


def _fmt_ins(insertions: tuple[int, ...]) -> str:
    return "{" + ",".join(map(str, insertions)) + "}"


@dataclass(frozen=True)
class WKey:
    """Key of ``w(O_{h^a} O_{h^b} | prod O_{h^c})_{0,d}``; stored with ``a >= b``."""

    context: Context
    a: int
    b: int
    insertions: tuple[int, ...]
    d: int

    def __post_init__(self):
        a, b = int(self.a), int(self.b)
        if a < b:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "insertions", _canonical_insertions(self.insertions))
        object.__setattr__(self, "d", int(self.d))

    kind = W

    @property
    def n(self) -> int:
        return len(self.insertions)

    def counts(self) -> dict[int, int]:
        return dict(Counter(self.insertions))

    def in_range(self) -> bool:
        ctx = self.context
        return all(ctx.in_range(c) for c in (self.a, self.b, *self.insertions))

    def sort_key(self):
        return (self.d, -self.a, -self.b, len(self.insertions), tuple(-c for c in self.insertions))

    def __str__(self):
        return f"w({self.a},{self.b}|{_fmt_ins(self.insertions)})_{self.d}"


@dataclass(frozen=True)
class GWKey:
    """Key of ``<prod O_{h^c}>_{0,d}``; the insertion multiset is stored descending."""

    context: Context
    insertions: tuple[int, ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "insertions", _canonical_insertions(self.insertions))
        object.__setattr__(self, "d", int(self.d))

    kind = GW

    @property
    def n(self) -> int:
        return len(self.insertions)

    def counts(self) -> dict[int, int]:
        return dict(Counter(self.insertions))

    def in_range(self) -> bool:
        return all(self.context.in_range(c) for c in self.insertions)

    def sort_key(self):
        return (self.d, len(self.insertions), tuple(-c for c in self.insertions))

    def __str__(self):
        return f"<{','.join(map(str, self.insertions))}>_{self.d}"


Key = Union[WKey, GWKey]


def gw_selection_rule(key: GWKey) -> bool:
    """Dimension constraint ``sum c_j = N - 5 + (N-k) d + n``."""
    N, k = key.context.N, key.context.k
    return sum(key.insertions) == N - 5 + (N - k) * key.d + key.n


def w_selection_rule(key: WKey) -> bool:
    """Dimension constraint ``a + b + sum (c_j - 1) = N - 3 + (N-k) d``."""
    N, k = key.context.N, key.context.k
    return key.a + key.b + sum(c - 1 for c in key.insertions) == N - 3 + (N - k) * key.d


def selection_rule(key: Key) -> bool:
    return w_selection_rule(key) if isinstance(key, WKey) else gw_selection_rule(key)


class Normalized(NamedTuple):
    """Result of :func:`normalize_key`.

    If ``key`` is ``None`` the invariant is fully determined and ``factor`` is its
    value; otherwise the invariant equals ``factor`` times the value at ``key``.
    """

    key: Key | None
    factor: Fraction

    @property
    def resolved(self) -> bool:
        return self.key is None


_ZERO = Fraction(0)


def normalize_key(key: Key) -> Normalized:
    """Apply the degree-0 values and the identity/divisor axioms.

    For ``d >= 1`` an insertion ``O_1`` kills the invariant, each divisor insertion
    ``O_h`` is removed with a factor ``d``, and any exponent outside ``0..N-2`` gives 0.
    For ``d == 0`` the invariant is ``k`` times the Poincare pairing of the three
    classes when there are exactly three (GW) or one plus the boundaries (W), else 0.
    """
    if key.d < 0:
        raise ValueError(f"degree must be nonnegative: {key}")
    ctx = key.context
    if not key.in_range():
        return Normalized(None, _ZERO)
    if key.d == 0:
        if isinstance(key, WKey):
            if key.n != 1:
                return Normalized(None, _ZERO)
            total = key.a + key.b + key.insertions[0]
        else:
            if key.n != 3:
                return Normalized(None, _ZERO)
            total = sum(key.insertions)
        return Normalized(None, Fraction(ctx.k if total == ctx.top else 0))
    if 0 in key.insertions:
        return Normalized(None, _ZERO)
    ones = key.insertions.count(1)
    if ones:
        rest = tuple(c for c in key.insertions if c != 1)
        if isinstance(key, WKey):
            key = WKey(ctx, key.a, key.b, rest, key.d)
        else:
            key = GWKey(ctx, rest, key.d)
    return Normalized(key, Fraction(key.d) ** ones)


def _is_canonical_storable(key: Key) -> list[str]:
    problems = []
    if key.d < 1:
        problems.append("degree-0 values are fixed and may not be stored")
    if not key.in_range():
        problems.append(f"exponent outside 0..{key.context.top}")
    elif any(c in (0, 1) for c in key.insertions):
        problems.append("insertions O_1/O_h must be removed (store the normalized key)")
    if not problems and not selection_rule(key):
        problems.append("violates the selection rule")
    return problems


@dataclass(frozen=True)
class InvariantTable:
    """Immutable map from canonical keys to exact values.

    ``policy`` decides what :func:`lookup` does for a key that passes its selection
    rule but is not stored: ``"error"`` raises :class:`MissingEntry`, ``"zero"``
    returns 0.
    """

    kind: str
    context: Context
    entries: Mapping[Key, Fraction] = field(default_factory=dict)
    policy: str = ERROR_ON_MISSING

    def __post_init__(self):
        if self.kind not in (W, GW):
            raise ValueError(f"kind must be 'W' or 'GW', got {self.kind!r}")
        if self.policy not in (ERROR_ON_MISSING, ZERO_ON_MISSING):
            raise ValueError(f"unknown missing-entry policy {self.policy!r}")
        expected = WKey if self.kind == W else GWKey
        entries = {}
        problems = []
        for key, value in self.entries.items():
            if not isinstance(key, expected):
                problems.append(f"{key}: wrong key type for a {self.kind} table")
                continue
            if key.context != self.context:
                problems.append(f"{key}: context {key.context} differs from table {self.context}")
                continue
            problems.extend(f"{key}: {p}" for p in _is_canonical_storable(key))
            entries[key] = Fraction(value)
        if problems:
            raise TableError(f"invalid {self.kind} table for {self.context}", problems)
        object.__setattr__(self, "entries", MappingProxyType(entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[Key]:
        return iter(sorted(self.entries, key=lambda k: k.sort_key()))

    def __contains__(self, key):
        return key in self.entries

    def __getitem__(self, key: Key) -> Fraction:
        return self.entries[key]

    def __eq__(self, other):
        if not isinstance(other, InvariantTable):
            return NotImplemented
        return (self.kind, self.context, dict(self.entries)) == (
            other.kind,
            other.context,
            dict(other.entries),
        )

    def items(self):
        return [(key, self.entries[key]) for key in self]

    def with_policy(self, policy: str) -> "InvariantTable":
        return InvariantTable(self.kind, self.context, self.entries, policy)

    def updated(self, extra: Mapping[Key, Fraction]) -> "InvariantTable":
        merged = dict(self.entries)
        merged.update(extra)
        return InvariantTable(self.kind, self.context, merged, self.policy)

    def restrict(self, predicate) -> "InvariantTable":
        kept = {k: v for k, v in self.entries.items() if predicate(k)}
        return InvariantTable(self.kind, self.context, kept, self.policy)


def lookup(table: InvariantTable, key: Key, where: str | None = None) -> Fraction:
    """Value of ``key`` read through ``table`` after normalization.

    Keys failing their selection rule are 0 without touching storage.
    """
    if key.context != table.context:
        raise ContextMismatch(f"key {key} has context {key.context}, table has {table.context}")
    if key.kind != table.kind:
        raise ContextMismatch(f"cannot look up a {key.kind} key in a {table.kind} table")
    norm = normalize_key(key)
    if norm.resolved:
        return norm.factor
    canonical = norm.key
    if not selection_rule(canonical):
        return _ZERO
    try:
        value = table.entries[canonical]
    except KeyError:
        if table.policy == ZERO_ON_MISSING:
            return _ZERO
        raise MissingEntry(canonical, where) from None
    return norm.factor * value


# -- key enumeration ---------------------------------------------------------


def insertion_profiles(
    context: Context, excess: int, max_count: int, smallest: int = 2
) -> Iterator[tuple[int, ...]]:
    """Descending insertion tuples with exponents in ``smallest..N-2``,
    ``sum (c-1) == excess`` and at most ``max_count`` entries."""
    if excess < 0:
        return

    def rec(remaining: int, largest: int, slots: int) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield ()
            return
        if slots == 0:
            return
        for c in range(min(largest, remaining + 1), smallest - 1, -1):
            for rest in rec(remaining - (c - 1), c, slots - 1):
                yield (c,) + rest

    if smallest < 2:
        raise ValueError("profiles are built from exponents >= 2")
    yield from rec(excess, context.top, max_count)


def enumerate_w_keys(
    context: Context,
    d_max: int,
    n_max: int,
    *,
    min_b: int = 0,
    max_b: int | None = None,
    d_min: int = 1,
) -> list[WKey]:
    """All in-range W keys with ``d_min <= d <= d_max``, at most ``n_max`` insertions
    (exponents ``2..N-2``) and ``min_b <= b <= a``, that pass the selection rule."""
    N, k = context.N, context.k
    keys = []
    top_b = context.top if max_b is None else max_b
    for d in range(d_min, d_max + 1):
        for a in range(context.top, -1, -1):
            for b in range(min(a, top_b), min_b - 1, -1):
                excess = N - 3 + (N - k) * d - a - b
                for ins in insertion_profiles(context, excess, n_max):
                    keys.append(WKey(context, a, b, ins, d))
    return keys


# -- file format -------------------------------------------------------------

_VALUE_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_value(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"`` (``q > 0``) into a Fraction."""
    if not isinstance(text, str):
        raise ValueError(f"value must be a string 'p' or 'p/q', got {text!r}")
    m = _VALUE_RE.match(text)
    if not m:
        raise ValueError(f"malformed rational {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_value(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _int_field(entry: dict, name: str, where: str) -> int:
    if name not in entry:
        raise TableError(f"{where}: missing field {name!r}")
    value = entry[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise TableError(f"{where}.{name}: expected an integer, got {value!r}")
    return value


def parse_table(text: str, source: str = "<string>", policy: str = ERROR_ON_MISSING) -> InvariantTable:
    """Parse the JSON table format; raise :class:`TableError` with a location on failure."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TableError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise TableError(f"{source}: top level must be an object")
    kind = doc.get("kind")
    if kind not in (W, GW):
        raise TableError(f"{source}: field 'kind' must be 'W' or 'GW', got {kind!r}")
    N = _int_field(doc, "N", source)
    k = _int_field(doc, "k", source)
    try:
        context = Context(N, k)
    except ValueError as exc:
        raise TableError(f"{source}: {exc}") from None
    raw_entries = doc.get("entries", [])
    if not isinstance(raw_entries, list):
        raise TableError(f"{source}: field 'entries' must be a list")

    entries: dict[Key, Fraction] = {}
    problems = []
    for i, entry in enumerate(raw_entries):
        where = f"{source}: entries[{i}]"
        if not isinstance(entry, dict):
            raise TableError(f"{where}: expected an object")
        d = _int_field(entry, "d", where)
        ins = entry.get("insertions", [])
        if not isinstance(ins, list) or any(isinstance(c, bool) or not isinstance(c, int) for c in ins):
            raise TableError(f"{where}.insertions: expected a list of integers")
        if d < 0:
            raise TableError(f"{where}.d: degree must be nonnegative")
        if kind == W:
            key: Key = WKey(context, _int_field(entry, "a", where), _int_field(entry, "b", where), ins, d)
        else:
            if "a" in entry or "b" in entry:
                raise TableError(f"{where}: GW entries carry no boundary fields 'a'/'b'")
            key = GWKey(context, ins, d)
        try:
            value = parse_value(entry.get("value"))
        except ValueError as exc:
            raise TableError(f"{where}.value: {exc}") from None
        if key in entries:
            problems.append(f"entries[{i}] {key}: duplicate canonical key")
            continue
        problems.extend(f"entries[{i}] {key}: {p}" for p in _is_canonical_storable(key))
        entries[key] = value
    if problems:
        raise TableError(f"{source}: rejected", problems)
    return InvariantTable(kind, context, entries, policy)


def dump_table(table: InvariantTable) -> str:
    """Serialize deterministically (sorted entries, fixed layout, trailing newline)."""
    rows = []
    for key, value in table.items():
        row: dict = {"d": key.d}
        if isinstance(key, WKey):
            row["a"] = key.a
            row["b"] = key.b
        row["insertions"] = list(key.insertions)
        row["value"] = format_value(value)
        rows.append(row)
    lines = [
        "{",
        f'  "kind": {json.dumps(table.kind)},',
        f'  "N": {table.context.N},',
        f'  "k": {table.context.k},',
    ]
    if rows:
        lines.append('  "entries": [')
        body = [f"    {json.dumps(row)}" for row in rows]
        lines.append(",\n".join(body))
        lines.append("  ]")
    else:
        lines.append('  "entries": []')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_table(path: str | os.PathLike, policy: str = ERROR_ON_MISSING) -> InvariantTable:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_table(text, source=os.fspath(path), policy=policy)


def store_table(table: InvariantTable, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_table(table))

"""Reference tables: the CP^2 model (N=4, k=1) and the octic Calabi-Yau (N=k=8)."""
from __future__ import annotations

import os
from fractions import Fraction

from .invariants import GW, W, Context, GWKey, InvariantTable, WKey, dump_table

__all__ = ["CP2", "OCTIC", "cp2_tables", "octic_tables", "FIXTURE_FILES", "write_fixtures"]

CP2 = Context(4, 1)
OCTIC = Context(8, 8)


def cp2_tables() -> tuple[InvariantTable, InvariantTable]:
    """``(w, gw)`` for lines in the plane.

    ``<O_{h^2} O_{h^2}>_{0,1} = 1`` (one line through two points); the divisor axiom
    turns it into ``<O_h O_{h^2} O_{h^2}>_{0,1} = <O_h O_h O_{h^2} O_{h^2}>_{0,1} = 1``.
    """
    c = CP2
    w = InvariantTable(
        W,
        c,
        {
            WKey(c, 2, 2, (), 1): Fraction(1),
            WKey(c, 2, 1, (2,), 1): Fraction(1),
            WKey(c, 1, 1, (2, 2), 1): Fraction(2),
            WKey(c, 2, 0, (2, 2), 1): Fraction(1),
        },
    )
    gw = InvariantTable(GW, c, {GWKey(c, (2, 2), 1): Fraction(1)})
    return w, gw


def octic_tables() -> tuple[InvariantTable, InvariantTable]:
    """``(w, gw)`` for the degree-8 hypersurface in ``CP^7``, degrees 1 and 2."""
    c = OCTIC
    w = InvariantTable(
        W,
        c,
        {
            WKey(c, 2, 2, (2,), 1): Fraction(83871744),
            WKey(c, 2, 2, (2,), 2): Fraction(1238948617930752),
            WKey(c, 4, 0, (2,), 1): Fraction(24850432),
            WKey(c, 4, 0, (2,), 2): Fraction(201251978293248),
            WKey(c, 5, 0, (), 1): Fraction(4432896),
        },
    )
    gw = InvariantTable(
        GW,
        c,
        {
            GWKey(c, (2, 2, 2), 1): Fraction(59021312),
            GWKey(c, (2, 2, 2), 2): Fraction(821654084851712),
        },
    )
    return w, gw


FIXTURE_FILES = {
    "cp2.w.json": lambda: cp2_tables()[0],
    "cp2.gw.json": lambda: cp2_tables()[1],
    "octic.w.json": lambda: octic_tables()[0],
    "octic.gw.json": lambda: octic_tables()[1],
}


def write_fixtures(outdir: str | os.PathLike) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    written = []
    for name, build in FIXTURE_FILES.items():
        path = os.path.join(outdir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_table(build()))
        written.append(path)
    return written

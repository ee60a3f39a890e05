"""Ingested lattice tables: 2-reflective lists, one-class genera, rootless list, appendix.

A table directory has the layout::

    f_tables/rank<N>.lat   watson.lat   rootless32.lat   appendix193.lat   covering_radii.tbl

Lattice files use the expression grammar of :mod:`k3lattice.dsl`, one entry
per line, grouped by ``#rank n`` headers. A ``#complete`` line in an F-table
file marks the list as exhaustive for that rank.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Set

from .dsl import LatticeExpr, eval_expr, read_table
from .errors import TableMissing
from .lattice import Lattice
from .vectors import read_covering_table

APPENDIX_COUNTS = {3: 18, 4: 24, 5: 27, 6: 28, 7: 21, 8: 19, 9: 15, 10: 13,
                   11: 6, 12: 5, 13: 3, 14: 5, 15: 3, 16: 2, 17: 2, 18: 2}


@dataclass(frozen=True)
class TableEntry:
    rank: int
    text: str
    expr: LatticeExpr = field(compare=False)

    @cached_property
    def lattice(self) -> Lattice:
        return eval_expr(self.expr)


@dataclass
class TableSet:
    f_tables: Dict[int, List[TableEntry]]
    f_complete: Set[int]
    watson: List[TableEntry]
    rootless: List[TableEntry]
    appendix: List[TableEntry]
    covering_radii: dict
    source: str = "package"

    def f_table(self, rank: int) -> List[TableEntry]:
        if rank not in self.f_tables:
            raise TableMissing(f"no 2-reflective table for rank {rank}")
        return self.f_tables[rank]

    def appendix_rank(self, rank: int) -> List[TableEntry]:
        return [e for e in self.appendix if e.rank == rank]

    def zero_table(self, rank: int) -> "ZeroTable":
        """Known zero-entropy lattices of one rank: appendix entries plus 2-reflective ones."""
        f = self.f_tables.get(rank)
        if f is None and rank > 2:
            raise TableMissing(f"no 2-reflective table for rank {rank}")
        entries = [e.lattice for e in self.appendix_rank(rank)] + [e.lattice for e in f or []]
        return ZeroTable(rank, entries, complete=rank in self.f_complete,
                         nonreflective_complete=bool(self.appendix) or rank <= 2)


@dataclass
class ZeroTable:
    """Zero-entropy lattices of one rank.

    ``complete``: every zero-entropy lattice of the rank is listed up to genus.
    ``nonreflective_complete``: every non-2-reflective zero-entropy lattice with
    ``rank + l <= 22`` is listed, so that a lattice certified non-2-reflective
    and absent from the list has positive entropy.
    """

    rank: int
    entries: List[Lattice]
    complete: bool = False
    nonreflective_complete: bool = False


def _entries(text: str, default_rank: Optional[int] = None) -> List[TableEntry]:
    out = []
    for rank, line, expr in read_table(text):
        r = rank if rank is not None else default_rank
        if r is None:
            r = eval_expr(expr).rank
        out.append(TableEntry(r, line, expr))
    return out


def _read(base, name: str) -> Optional[str]:
    p = base / name
    try:
        return p.read_text(encoding="utf-8")
    except (FileNotFoundError, IsADirectoryError):
        return None


def load_tables(directory: Optional[os.PathLike | str] = None) -> TableSet:
    """Load a table directory (the bundled data when ``directory`` is None)."""
    if directory is None:
        base = resources.files("k3lattice") / "data"
        source = "package"
    else:
        base = Path(directory)
        if not base.is_dir():
            raise TableMissing(f"table directory {directory} not found")
        source = str(directory)
    f_tables: Dict[int, List[TableEntry]] = {}
    complete: Set[int] = set()
    fdir = base / "f_tables"
    for r in range(1, 27):
        text = _read(fdir, f"rank{r}.lat")
        if text is None:
            continue
        f_tables[r] = _entries(text, r)
        if any(line.strip() == "#complete" for line in text.splitlines()):
            complete.add(r)
    cov = _read(base, "covering_radii.tbl")
    return TableSet(
        f_tables=f_tables,
        f_complete=complete,
        watson=_entries(_read(base, "watson.lat") or ""),
        rootless=_entries(_read(base, "rootless32.lat") or ""),
        appendix=_entries(_read(base, "appendix193.lat") or ""),
        covering_radii=read_covering_table(cov) if cov else {},
        source=source,
    )


_DEFAULT: Optional[TableSet] = None


def default_tables() -> TableSet:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_tables()
    return _DEFAULT

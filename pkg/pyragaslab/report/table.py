"""Column-aligned result tables for root lists, Hopf reports and check summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Integral, Real

from . import strutil
from .style import Style


@dataclass(frozen=True, slots=True)
class Column:
    """Column definition.

    Attributes:
        title: Header text.
        width: Fixed width (0 = fit to content).
        numeric: Right-align and format reals with ``fmt``.
        fmt: Format spec for real values.
    """
    title: str
    width: int = 0
    numeric: bool = False
    fmt: str = '.6g'


def format_value(value: object, fmt: str = '.6g') -> str:
    if value is None:
        return '-'
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    if isinstance(value, Integral):
        return str(value)
    if isinstance(value, complex):
        sign = '-' if math.copysign(1.0, value.imag) < 0 else '+'
        return f'{value.real:{fmt}} {sign} {abs(value.imag):{fmt}}i'
    if isinstance(value, Real):
        return f'{float(value):{fmt}}'
    return str(value)


@dataclass
class Table:
    """Static table; cells may carry their own ANSI styling.

    Attributes:
        columns: Column definitions.
        rows: Rendered cell strings, one list per row.
        header_style: Style for the header row.
    """
    columns: list[Column] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)
    header_style: Style = field(default_factory=lambda: Style().bold())

    def add_row(self, *values: object) -> None:
        """Append a row, formatting non-strings per column."""
        cells = []
        for col, v in zip(self.columns, values):
            cells.append(v if isinstance(v, str) else format_value(v, col.fmt))
        self.rows.append(cells)

    def _col_widths(self) -> list[int]:
        widths = []
        for i, col in enumerate(self.columns):
            if col.width > 0:
                widths.append(col.width)
                continue
            w = strutil.visible_width(col.title)
            for row in self.rows:
                if i < len(row):
                    w = max(w, strutil.visible_width(row[i]))
            widths.append(w)
        return widths

    def view(self) -> str:
        if not self.columns:
            return ''
        widths = self._col_widths()
        gap = '  '

        fits = [Style(color=False).width(w).align(1.0 if col.numeric else 0.0)
                for col, w in zip(self.columns, widths)]

        def cell(text: str, i: int) -> str:
            return fits[i].render(text)

        lines = [self.header_style.render(gap.join(cell(c.title, i) for i, c in enumerate(self.columns)))]
        lines.append(gap.join('─' * w for w in widths))
        for row in self.rows:
            padded = list(row) + [''] * (len(self.columns) - len(row))
            lines.append(gap.join(cell(padded[i], i) for i in range(len(self.columns))).rstrip())
        return '\n'.join(lines)

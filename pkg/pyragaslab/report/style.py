"""Chainable, immutable text style for terminal reports.

Usage:
    s = Style().bold().fg("#02BF87").width(8).align(1.0)
    print(s.render("pass"))

Colour is emitted only when ``color_enabled()`` allows it; a disabled
style still applies width and alignment.
"""

from __future__ import annotations

import os
import sys
from typing import TextIO

from . import strutil

RESET = '\x1b[0m'
BOLD_CODE = '\x1b[1m'
DIM_CODE = '\x1b[2m'


def color_enabled(stream: TextIO | None = None) -> bool:
    """False when NO_COLOR is set or the stream is not a terminal."""
    if os.environ.get('NO_COLOR'):
        return False
    stream = stream if stream is not None else sys.stdout
    isatty = getattr(stream, 'isatty', None)
    return bool(isatty and isatty())


def _fg_code(hex_color: str) -> str:
    h = hex_color.lstrip('#')
    if len(h) != 6:
        raise ValueError(f'expected #RRGGBB, got {hex_color!r}')
    r, g, b = int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16)
    return f'\x1b[38;2;{r};{g};{b}m'


class Style:
    """Each builder method returns a new Style."""

    __slots__ = ('_fg_color', '_bold', '_dim', '_width', '_align', '_color')

    def __init__(self, color: bool = True) -> None:
        self._fg_color: str | None = None
        self._bold = False
        self._dim = False
        self._width = 0  # 0 = natural
        self._align = 0.0  # 0=left, 0.5=center, 1=right
        self._color = color

    def _copy(self) -> Style:
        new = Style.__new__(Style)
        for slot in Style.__slots__:
            setattr(new, slot, getattr(self, slot))
        return new

    def bold(self, v: bool = True) -> Style:
        s = self._copy()
        s._bold = v
        return s

    def dim(self, v: bool = True) -> Style:
        s = self._copy()
        s._dim = v
        return s

    def fg(self, hex_color: str) -> Style:
        _fg_code(hex_color)
        s = self._copy()
        s._fg_color = hex_color
        return s

    def width(self, n: int) -> Style:
        s = self._copy()
        s._width = max(0, n)
        return s

    def align(self, pos: float) -> Style:
        """0.0 = left, 0.5 = centre, 1.0 = right."""
        s = self._copy()
        s._align = min(1.0, max(0.0, pos))
        return s

    def _prefix(self) -> str:
        if not self._color:
            return ''
        parts = []
        if self._bold:
            parts.append(BOLD_CODE)
        if self._dim:
            parts.append(DIM_CODE)
        if self._fg_color:
            parts.append(_fg_code(self._fg_color))
        return ''.join(parts)

    def _fit(self, line: str) -> str:
        if self._width <= 0:
            return line
        vw = strutil.visible_width(line)
        if vw > self._width:
            return strutil.truncate(line, self._width)
        gap = self._width - vw
        left = int(gap * self._align)
        return ' ' * left + line + ' ' * (gap - left)

    def render(self, content: str) -> str:
        prefix = self._prefix()
        suffix = RESET if prefix else ''
        return '\n'.join(prefix + self._fit(line) + suffix for line in content.split('\n'))

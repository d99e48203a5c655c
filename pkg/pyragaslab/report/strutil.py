"""ANSI-aware width helpers for column alignment in terminal reports."""

from __future__ import annotations

import re
import unicodedata

# CSI and OSC sequences; SGR colour codes are the common case.
_ANSI_RE = re.compile(r'\x1b\[[0-9;:]*[A-Za-z]|\x1b\][^\x07]*\x07')


def strip_ansi(s: str) -> str:
    return _ANSI_RE.sub('', s)


def _char_width(ch: str) -> int:
    if unicodedata.category(ch).startswith('M'):
        return 0
    return 2 if unicodedata.east_asian_width(ch) in ('F', 'W') else 1


def visible_width(s: str) -> int:
    """Terminal columns taken by ``s``; escapes count zero, wide glyphs two."""
    return sum(_char_width(ch) for ch in strip_ansi(s))


def truncate(s: str, width: int, tail: str = '…') -> str:
    """Cut ``s`` to ``width`` visible columns, keeping escape sequences intact.

    ``tail`` replaces the removed part and counts toward the width.
    """
    if width <= 0:
        return ''
    if visible_width(s) <= width:
        return s
    room = width - visible_width(tail)
    if room <= 0:
        return tail[:width]

    out: list[str] = []
    used = 0
    i = 0
    while i < len(s):
        m = _ANSI_RE.match(s, i)
        if m:
            out.append(m.group())
            i = m.end()
            continue
        cw = _char_width(s[i])
        if used + cw > room:
            break
        out.append(s[i])
        used += cw
        i += 1
    out.append(tail)
    return ''.join(out)

"""Progress bar for long chart and verification runs."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import TextIO

from .style import Style


@dataclass
class Progress:
    """Horizontal completion bar written in place on a terminal stream.

    Attributes:
        label: Text shown before the bar.
        width: Total bar width in characters, percentage included.
        fill_style: Style for the filled portion.
        empty_style: Style for the empty portion.
        stream: Where ``update`` writes; nothing is written unless it is a TTY.
    """
    label: str = ''
    percent: float = 0.0
    width: int = 40
    fill_char: str = '█'
    empty_char: str = '░'
    fill_style: Style = field(default_factory=lambda: Style().fg('#7D56F4'))
    empty_style: Style = field(default_factory=lambda: Style().dim())
    stream: TextIO | None = None

    def set_percent(self, percent: float) -> None:
        self.percent = max(0.0, min(1.0, percent))

    def view(self) -> str:
        pct = max(0.0, min(1.0, self.percent))
        pct_text = f' {pct * 100:3.0f}%'
        bar_width = max(1, self.width - len(pct_text))
        filled = round(bar_width * pct)
        bar = (self.fill_style.render(self.fill_char * filled)
               + self.empty_style.render(self.empty_char * (bar_width - filled)))
        prefix = f'{self.label} ' if self.label else ''
        return prefix + bar + pct_text

    def update(self, done: int, total: int) -> None:
        """Callback form used by the chart runners: ``update(done, total)``."""
        self.set_percent(done / total if total else 1.0)
        stream = self.stream if self.stream is not None else sys.stderr
        if not (hasattr(stream, 'isatty') and stream.isatty()):
            return
        end = '\n' if done >= total else ''
        stream.write('\r' + self.view() + end)
        stream.flush()

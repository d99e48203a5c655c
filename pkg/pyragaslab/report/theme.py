"""Palette for lab reports."""

from __future__ import annotations

from dataclasses import dataclass

from .style import Style, color_enabled


@dataclass
class LabTheme:
    """Named styles the CLI renders with, so a palette change is one function."""
    heading: Style
    label: Style
    passed: Style
    failed: Style
    warn: Style
    dim: Style
    error: Style

    def status(self, ok: bool | None) -> str:
        """'pass', 'FAIL' or 'n/a' in the matching style."""
        if ok is None:
            return self.dim.render('n/a')
        return self.passed.render('pass') if ok else self.failed.render('FAIL')


def lab_theme(color: bool | None = None) -> LabTheme:
    """Dark-terminal palette; colour follows ``color_enabled()`` unless given."""
    on = color_enabled() if color is None else color
    base = Style(color=on)
    return LabTheme(
        heading=base.bold().fg('#7D56F4'),
        label=base.bold(),
        passed=base.fg('#02BF87'),
        failed=base.bold().fg('#FF5F5F'),
        warn=base.fg('#F7B32B'),
        dim=base.dim(),
        error=base.bold().fg('#FF0000'),
    )

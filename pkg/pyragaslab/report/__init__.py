"""Terminal rendering for lab reports: styles, tables, progress and palette."""

from .progress import Progress
from .style import Style, color_enabled
from .table import Column, Table, format_value
from .theme import LabTheme, lab_theme

__all__ = [
    'Column',
    'LabTheme',
    'Progress',
    'Style',
    'Table',
    'color_enabled',
    'format_value',
    'lab_theme',
]

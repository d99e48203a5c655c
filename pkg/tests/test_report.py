"""Tests for the report package — styles, width helpers, tables and progress."""

import io

import pytest

from pyragaslab.report import Column, Progress, Style, Table, color_enabled, format_value, lab_theme
from pyragaslab.report.strutil import strip_ansi, truncate, visible_width
from pyragaslab.report.style import RESET


class TestStripAnsi:
    def test_no_ansi(self):
        assert strip_ansi("mu2") == "mu2"

    def test_fg_color(self):
        assert strip_ansi("\x1b[38;2;255;0;0mFAIL\x1b[0m") == "FAIL"

    def test_multiple_sequences(self):
        s = "\x1b[1m\x1b[38;2;0;255;0mpass\x1b[0m"
        assert strip_ansi(s) == "pass"


class TestVisibleWidth:
    def test_plain_ascii(self):
        assert visible_width("stable") == 6

    def test_with_ansi(self):
        assert visible_width("\x1b[1mbold\x1b[0m") == 4

    def test_greek_is_narrow(self):
        assert visible_width("λτφ") == 3

    def test_cjk_characters(self):
        assert visible_width("漢字") == 4


class TestTruncate:
    def test_fits(self):
        assert truncate("short", 10) == "short"

    def test_cut_with_tail(self):
        out = truncate("undetermined", 6)
        assert visible_width(out) == 6
        assert out.endswith("…")

    def test_keeps_escapes(self):
        out = truncate("\x1b[1mabcdefgh\x1b[0m", 4)
        assert out.startswith("\x1b[1m")
        assert strip_ansi(out) == "abc…"

    def test_zero_width(self):
        assert truncate("abc", 0) == ""


class TestStyle:
    def test_plain_render(self):
        assert Style().render("hello") == "hello"

    def test_bold(self):
        result = Style().bold().render("hello")
        assert "\x1b[1m" in result
        assert result.endswith(RESET)

    def test_fg_color(self):
        assert "\x1b[38;2;255;0;0m" in Style().fg("#FF0000").render("red")

    def test_bad_color(self):
        with pytest.raises(ValueError):
            Style().fg("red")

    def test_immutable_chaining(self):
        base = Style()
        bold = base.bold()
        assert base.render("x") == "x"
        assert bold.render("x") != "x"

    def test_colour_disabled_keeps_layout(self):
        s = Style(color=False).bold().fg("#FFFFFF").width(6).align(1.0)
        assert s.render("ok") == "    ok"

    def test_centre_alignment(self):
        assert Style().width(6).align(0.5).render("ab") == "  ab  "

    def test_width_truncates(self):
        assert visible_width(Style().width(3).render("abcdef")) == 3

    def test_color_enabled_respects_no_color(self):
        # NO_COLOR is set by the autouse fixture.
        assert color_enabled(io.StringIO()) is False


class TestTheme:
    def test_status_words(self):
        theme = lab_theme(color=False)
        assert theme.status(True) == "pass"
        assert theme.status(False) == "FAIL"
        assert theme.status(None) == "n/a"

    def test_coloured_status_carries_escape(self):
        theme = lab_theme(color=True)
        assert "\x1b[" in theme.status(True)
        assert strip_ansi(theme.status(False)) == "FAIL"


class TestFormatValue:
    def test_none(self):
        assert format_value(None) == "-"

    def test_bool(self):
        assert format_value(True) == "yes"

    def test_int(self):
        assert format_value(7) == "7"

    def test_complex(self):
        assert format_value(complex(0.5, -1.0)) == "0.5 - 1i"

    def test_real_fmt(self):
        assert format_value(3.14159265, ".3g") == "3.14"


class TestTableView:
    def test_empty_columns(self):
        assert Table(columns=[]).view() == ""

    def test_header_only(self):
        t = Table(columns=[Column("check"), Column("status")])
        lines = t.view().split("\n")
        assert len(lines) == 2  # header + separator
        assert "check" in strip_ansi(lines[0])

    def test_rows_and_alignment(self):
        t = Table(columns=[Column("name"), Column("value", numeric=True)])
        t.add_row("mu2", -4.0)
        t.add_row("transversality", 0.25)
        lines = [strip_ansi(l) for l in t.view().split("\n")]
        assert len(lines) == 4
        # Numeric column is right-aligned: both rows end at the same column.
        assert len(lines[2]) == len(lines[3])
        assert lines[2].endswith("-4")

    def test_numeric_cells_pad_on_the_left(self):
        t = Table(columns=[Column("root", width=6, numeric=True), Column("note", width=4)])
        t.add_row(1, "ok")
        assert t.view().split("\n")[2] == "     1  ok"

    def test_fixed_width_truncates(self):
        t = Table(columns=[Column("detail", width=5)])
        t.add_row("a very long detail")
        assert "…" in t.view()

    def test_short_rows_are_padded(self):
        t = Table(columns=[Column("a"), Column("b")])
        t.rows.append(["only"])
        assert "only" in t.view()


class TestProgress:
    def test_zero_percent(self):
        p = Progress(percent=0.0, width=15)
        assert "█" not in strip_ansi(p.view())

    def test_full_percent(self):
        p = Progress(percent=1.0, width=15)
        result = strip_ansi(p.view())
        assert "░" not in result
        assert "100%" in result

    def test_label(self):
        p = Progress(label="chart", percent=0.5, width=20)
        assert strip_ansi(p.view()).startswith("chart ")

    def test_set_percent_clamps(self):
        p = Progress()
        p.set_percent(1.5)
        assert p.percent == 1.0
        p.set_percent(-0.5)
        assert p.percent == 0.0

    def test_update_is_silent_off_terminal(self):
        stream = io.StringIO()
        p = Progress(stream=stream)
        p.update(3, 4)
        assert p.percent == 0.75
        assert stream.getvalue() == ""

    def test_update_writes_on_terminal(self):
        class Tty(io.StringIO):
            def isatty(self):
                return True

        stream = Tty()
        p = Progress(stream=stream, width=12)
        p.update(2, 2)
        assert stream.getvalue().startswith("\r")
        assert stream.getvalue().endswith("\n")

    def test_zero_total_is_complete(self):
        p = Progress(stream=io.StringIO())
        p.update(0, 0)
        assert p.percent == 1.0

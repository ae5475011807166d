"""Tests for ldpc_lab.alist."""

import pytest

from ldpc_lab.alist import emit_alist, parse_alist
from ldpc_lab.codes import build_random_regular
from ldpc_lab.models import AlistParseError


class TestParse:
    def test_toy_adjacency(self, toy_alist, toy_code):
        h = parse_alist(toy_alist)
        assert h.check_neighbors == ((0, 1), (1, 2))
        assert h == toy_code
        assert (h.to_dense() == [[1, 1, 0], [0, 1, 1]]).all()

    def test_bytes_input(self, toy_alist, toy_code):
        assert parse_alist(toy_alist.encode("ascii")) == toy_code

    def test_zero_padding_dropped(self, toy_code):
        padded = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
        assert parse_alist(padded) == toy_code

    def test_isolated_variable(self):
        text = "3 1\n1 2\n1 1 0\n2\n1\n1\n\n1 2\n"
        h = parse_alist(text)
        assert h.var_degree.tolist() == [1, 1, 0]
        assert h.check_neighbors == ((0, 1),)

    def test_index_out_of_range(self):
        text = "3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 4\n"
        with pytest.raises(AlistParseError) as exc:
            parse_alist(text)
        assert exc.value.line == 9

    def test_truncated_file(self, toy_alist):
        lines = toy_alist.splitlines()
        with pytest.raises(AlistParseError) as exc:
            parse_alist("\n".join(lines[:6]))
        assert exc.value.line == 7

    def test_degree_list_mismatch(self):
        text = "3 2\n2 2\n1 2 1\n2 2\n1\n1\n2\n1 2\n2 3\n"
        with pytest.raises(AlistParseError) as exc:
            parse_alist(text)
        assert exc.value.line == 6

    def test_empty_code(self):
        with pytest.raises(AlistParseError) as exc:
            parse_alist("0 0\n0 0\n\n\n")
        assert exc.value.line == 1

    def test_non_integer_token(self):
        with pytest.raises(AlistParseError) as exc:
            parse_alist("3 x\n")
        assert exc.value.line == 1

    def test_column_and_row_lists_disagree(self):
        text = "3 2\n2 2\n1 2 1\n2 2\n2\n1 2\n1\n1 2\n2 3\n"
        with pytest.raises(AlistParseError):
            parse_alist(text)


class TestEmit:
    def test_toy_is_canonical(self, toy_code, toy_alist):
        assert emit_alist(toy_code) == toy_alist

    def test_round_trip_array_code(self, array53):
        assert parse_alist(emit_alist(array53)) == array53

    def test_round_trip_random_code(self):
        h = build_random_regular(48, 3, 6, seed=2)
        assert parse_alist(emit_alist(h)) == h

    def test_reparse_is_idempotent(self):
        padded = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
        once = emit_alist(parse_alist(padded))
        assert emit_alist(parse_alist(once)) == once

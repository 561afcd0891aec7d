import pytest
from hypothesis import given, strategies as st

from maskguard.syntax.subtokens import count_subtokens, split_subtokens


def test_underscore_name_keeps_separator_piece():
    assert split_subtokens("updated_size") == ["updated", "_", "size"]
    assert count_subtokens("updated_size") == 3


def test_camel_case_split():
    assert split_subtokens("getValue") == ["get", "Value"]
    assert count_subtokens("getValue") == 2


def test_digit_boundary_split():
    assert count_subtokens("buf2") == 2
    assert split_subtokens("buf2") == ["buf", "2"]


def test_single_word():
    assert count_subtokens("size") == 1


def test_single_character():
    assert count_subtokens("a") == 1


def test_mixed_styles():
    assert count_subtokens("maxRetryCount") == 3
    assert count_subtokens("dst_length") == 3


identifiers = st.from_regex(r"[A-Za-z_$][A-Za-z0-9_$]{0,20}", fullmatch=True)


@given(name=identifiers)
def test_count_is_positive_and_matches_split(name):
    count = count_subtokens(name)
    assert count >= 1
    assert count == len(split_subtokens(name))


@given(name=identifiers)
def test_split_reassembles_to_name(name):
    assert "".join(split_subtokens(name)) == name

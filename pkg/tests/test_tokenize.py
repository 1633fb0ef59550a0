import unicodedata

from hypothesis import given
from hypothesis import strategies as st

from mtcanvas.tokenizer import token_spans, tokenize


def test_whitespace_split():
    assert tokenize("the cat sat") == ["the", "cat", "sat"]


def test_punctuation_is_its_own_token():
    assert tokenize("Hello, world!") == ["Hello", ",", "world", "!"]
    assert tokenize("don't") == ["don", "'", "t"]


def test_adjacent_punctuation_splits_per_character():
    assert tokenize('He said..."go"') == ["He", "said", ".", ".", ".", '"', "go", '"']


def test_case_preserved():
    assert tokenize("The THE the") == ["The", "THE", "the"]


def test_unicode_whitespace_and_punctuation():
    # U+00A0 no-break space separates; U+3002 ideographic full stop is punctuation
    assert tokenize("a b。") == ["a", "b", "。"]


def test_empty_and_blank():
    assert tokenize("") == []
    assert tokenize("   \t\n") == []


def test_spans_point_back_into_text():
    text = "The GNU Project, founded in 1983."
    for tok, start, end in token_spans(text):
        assert text[start:end] == tok


@given(st.text(max_size=80))
def test_spans_cover_exactly_the_non_whitespace(text):
    spans = token_spans(text)
    for tok, start, end in spans:
        assert 0 <= start < end <= len(text)
        assert text[start:end] == tok
        assert tok
    # spans are ordered and disjoint
    for (_, _, e1), (_, s2, _) in zip(spans, spans[1:]):
        assert e1 <= s2
    # everything outside a span is whitespace
    covered = set()
    for _, start, end in spans:
        covered.update(range(start, end))
    for i, ch in enumerate(text):
        if i not in covered:
            assert ch.isspace()


@given(st.text(max_size=80))
def test_punctuation_tokens_are_single_characters(text):
    for tok in tokenize(text):
        if len(tok) > 1:
            assert not any(unicodedata.category(c).startswith("P") for c in tok)

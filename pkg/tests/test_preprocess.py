import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentimon.corpus import Label, LabeledDocument
from sentimon.preprocess import (
    DEFAULT_STOPWORDS,
    MENTION_PATTERN,
    URL_PATTERN,
    PreprocessConfig,
    clean,
    load_stopwords,
    parse_stopwords,
    preprocess_text,
    remove_stopwords,
    run_pipeline,
    tokenize,
)

_unicode = st.text(st.characters(blacklist_categories=("Cs",)), max_size=80)
# text biased towards the interesting cases: urls, mentions, apostrophes
_tweety = st.lists(
    st.one_of(
        st.sampled_from(["http://t.co/x", "https://a.b/c?d=1", "www.site.org", "@mike", "@", "don't",
                         "SAD", "!!!", "i'm", "what", "a", "movie", "HTTP", "www", ":", "/", "'"]),
        st.text(st.characters(blacklist_categories=("Cs",)), max_size=6),
    ),
    max_size=12,
).map(" ".join)


def test_clean_examples():
    assert clean("Sooo SAD http://t.co/x @mike") == "sooo sad  "
    assert clean("") == ""
    assert clean("Check THIS Out") == "check this out"


def test_clean_flags():
    keep_all = PreprocessConfig(strip_urls=False, strip_mentions=False, lowercase=False)
    assert clean("Hi @Bob www.x.com", keep_all) == "Hi @Bob www.x.com"
    assert clean("Hi @Bob www.x.com", PreprocessConfig(lowercase=False)) == "Hi  "


def test_tokenize_examples():
    assert tokenize("my boss is bullying me") == ["my", "boss", "is", "bullying", "me"]
    assert tokenize("") == []
    assert tokenize("don't stop!!!") == ["don't", "stop"]
    assert tokenize("a bb ccc", min_token_len=2) == ["bb", "ccc"]


def test_remove_stopwords_examples():
    tokens = ["my", "boss", "is", "bullying", "me"]
    assert remove_stopwords(tokens, {"my", "is", "me"}) == ["boss", "bullying"]
    assert remove_stopwords([], DEFAULT_STOPWORDS) == []
    assert remove_stopwords(["the", "a", "an"]) == []


def test_run_pipeline_examples():
    doc = LabeledDocument("x", "what a movie!", Label.POSITIVE)
    assert run_pipeline(doc, PreprocessConfig(stopword_list=frozenset({"what", "a"}))) == ["movie"]
    assert run_pipeline("http://t.co/abc @someone www.example.com") == []


def test_default_stopwords_bundle():
    assert len(DEFAULT_STOPWORDS) == 179
    assert {"the", "a", "an", "is", "my", "me", "what"} <= DEFAULT_STOPWORDS
    assert all(w == w.lower() for w in DEFAULT_STOPWORDS)


def test_parse_and_load_stopwords(tmp_path):
    assert parse_stopwords(["# comment", "", " foo ", "bar"]) == {"foo", "bar"}
    path = tmp_path / "stop.txt"
    path.write_text("# mine\nzap\n", encoding="utf-8")
    assert load_stopwords(path) == {"zap"}


def test_config_validation():
    with pytest.raises(ValueError):
        PreprocessConfig(stopword_list=frozenset({"The"}))
    with pytest.raises(ValueError):
        PreprocessConfig(min_token_len=0)


@settings(max_examples=300)
@given(st.one_of(_unicode, _tweety))
def test_clean_idempotent(text):
    once = clean(text)
    assert clean(once) == once


@settings(max_examples=300)
@given(st.one_of(_unicode, _tweety))
def test_cleaned_text_has_no_urls_or_mentions(text):
    out = clean(text)
    assert URL_PATTERN.search(out) is None
    assert MENTION_PATTERN.search(out) is None
    assert out == out.lower()


@settings(max_examples=300)
@given(st.one_of(_unicode, _tweety))
def test_pipeline_idempotent_and_well_formed(text):
    tokens = preprocess_text(text)
    assert preprocess_text(" ".join(tokens)) == tokens
    for tok in tokens:
        assert tok and all(ch.isalnum() or ch == "'" for ch in tok)
        assert tok not in DEFAULT_STOPWORDS

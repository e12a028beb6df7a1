import numpy as np
import pytest

from app.config import DEFAULT_SUFFIX_RULES
from app.errors import InputError
from app.ingest.text import (
    StandardizationConfig,
    lemmatize_word,
    load_lemma_dictionary,
    load_stopwords,
    standardize_text,
)

from conftest import LEMMAS, STOPWORDS


@pytest.fixture(scope="module")
def standardization():
    return StandardizationConfig.from_files(str(STOPWORDS), str(LEMMAS), DEFAULT_SUFFIX_RULES)


def test_standardize_drops_numbers_stopwords_and_lemmatizes(standardization):
    tokens = standardize_text("The 3 Batteries, wherein said cathodes are coated!", standardization)
    assert tokens == ["battery", "cathode", "coat"]


def test_standardize_keeps_document_order_and_repeats(standardization):
    tokens = standardize_text("Sensor signals and sensor circuits", standardization)
    assert tokens == ["sensor", "signal", "sensor", "circuit"]


def test_short_and_alphanumeric_tokens_are_dropped(standardization):
    assert standardize_text("x y 5g mp3 layer", standardization) == ["layer"]


def test_unicode_is_folded(standardization):
    assert standardize_text("Café Électrode", standardization) == ["cafe", "electrode"]


def test_hyphenated_words_lemmatize_each_segment(standardization):
    assert standardize_text("heat-sinks", standardization) == ["heat-sink"]


def test_suffix_rules_prefer_the_longest_ending(standardization):
    assert lemmatize_word("glasses", standardization) == "glass"
    assert lemmatize_word("studies", standardization) == "study"
    assert lemmatize_word("analysis", standardization) == "analysis"
    assert lemmatize_word("switches", standardization) == "switch"


def test_dictionary_beats_suffix_rules(standardization):
    assert lemmatize_word("lens", standardization) == "lens"
    assert lemmatize_word("data", standardization) == "datum"


@pytest.mark.parametrize("word", ["batteries", "coated", "glasses", "lenses", "running", "fibres", "membranes"])
def test_lemmatization_is_idempotent(standardization, word):
    lemma = lemmatize_word(word, standardization)
    assert lemmatize_word(lemma, standardization) == lemma


def test_lemma_cycles_settle_on_smallest_member():
    config = StandardizationConfig(lemma_dictionary={"alpha": "beta", "beta": "alpha"})
    assert lemmatize_word("alpha", config) == "alpha"
    assert lemmatize_word("beta", config) == "alpha"


def test_stopword_matches_after_lemmatization():
    config = StandardizationConfig(stopwords={"claim"}, suffix_rules=(("s", ""),))
    assert standardize_text("claims lens", config) == ["len"]


def test_empty_abstract():
    assert standardize_text("", StandardizationConfig()) == []


def test_lemma_file_skips_malformed_rows(tmp_path):
    path = tmp_path / "lemmas.tsv"
    path.write_text("# comment\nmice\tmouse\nbroken line\nfoo\tBar2\n", encoding="utf-8")
    assert load_lemma_dictionary(path) == {"mice": "mouse"}


def test_stopword_file_is_lowercased(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("The\n\n# note\nOF\n", encoding="utf-8")
    assert load_stopwords(path) == frozenset({"the", "of"})


def test_missing_resource_files_raise_input_error(tmp_path):
    with pytest.raises(InputError):
        load_stopwords(tmp_path / "absent.txt")
    with pytest.raises(InputError):
        load_lemma_dictionary(tmp_path / "absent.tsv")


SAMPLE_ABSTRACTS = [
    "The 3 Batteries, wherein said cathodes are coated!",
    "Heat-sinks and glasses; studies of switches, lenses and data.",
    "Café Électrode membranes running through fibres of 5g mp3 layers",
    "A method comprising sensors, sensor signals and a plurality of circuits",
]


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_standardized_text_is_a_fixed_point(standardization, seed):
    rng = np.random.default_rng(seed)
    words = " ".join(SAMPLE_ABSTRACTS).split()
    abstract = " ".join(rng.choice(words, size=int(rng.integers(1, 40))))
    tokens = standardize_text(abstract, standardization)
    assert standardize_text(" ".join(tokens), standardization) == tokens

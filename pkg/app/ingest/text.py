"""
Word standardization for patent abstracts.

Deterministic substitute for a part-of-speech aware lemmatizer: a lemma
dictionary is consulted first and ordered suffix rules act as the fallback.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple
import logging
import re
import unicodedata

from app.errors import InputError

logger = logging.getLogger(__name__)

# alphanumeric runs, optionally joined by internal hyphens
_TOKEN_RE = re.compile(r"[^\W_]+(?:-[^\W_]+)*")
_WORD_RE = re.compile(r"[a-z]+(?:-[a-z]+)*")
_LEMMA_RE = re.compile(r"[a-z]+")

MIN_TOKEN_LENGTH = 2
MIN_STEM_LENGTH = 2
_MAX_LEMMA_STEPS = 16


@dataclass(frozen=True)
class StandardizationConfig:
    stopwords: FrozenSet[str] = frozenset()
    lemma_dictionary: Dict[str, str] = field(default_factory=dict)
    suffix_rules: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(w.lower() for w in self.stopwords))
        # longest suffix first; equal lengths keep their configured order
        rules = sorted(((s.lower(), r.lower()) for s, r in self.suffix_rules), key=lambda rule: -len(rule[0]))
        object.__setattr__(self, "suffix_rules", tuple(rules))

    @classmethod
    def from_files(
        cls,
        stopwords_path: Optional[str],
        lemmas_path: Optional[str],
        suffix_rules: Iterable[Tuple[str, str]] = (),
    ) -> "StandardizationConfig":
        return cls(
            stopwords=load_stopwords(stopwords_path) if stopwords_path else frozenset(),
            lemma_dictionary=load_lemma_dictionary(lemmas_path) if lemmas_path else {},
            suffix_rules=tuple(suffix_rules),
        )


def load_stopwords(path) -> FrozenSet[str]:
    """One word per line; blank lines and '#' comments are skipped"""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"stopword file not found: {path}")
    words = set()
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            word = line.strip().lower()
            if word and not word.startswith("#"):
                words.add(word)
    logger.info(f"📋 Loaded {len(words)} stopwords from {path}")
    return frozenset(words)


def load_lemma_dictionary(path) -> Dict[str, str]:
    """TSV `word<TAB>lemma`; entries whose lemma is not a plain lowercase word are ignored"""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"lemma dictionary not found: {path}")
    lemmas: Dict[str, str] = {}
    skipped = 0
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                skipped += 1
                continue
            word, lemma = parts[0].strip().lower(), parts[1].strip().lower()
            if not word or not _LEMMA_RE.fullmatch(lemma):
                skipped += 1
                continue
            lemmas[word] = lemma
    if skipped:
        logger.warning(f"⚠️ Skipped {skipped} malformed lemma entries in {path}")
    logger.info(f"📋 Loaded {len(lemmas)} lemma entries from {path}")
    return lemmas


def _fold_unicode(text: str) -> str:
    normalized = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in normalized if not unicodedata.combining(ch))


def _lemma_step(word: str, config: StandardizationConfig) -> str:
    lemma = config.lemma_dictionary.get(word)
    if lemma is not None:
        return lemma
    for suffix, replacement in config.suffix_rules:
        if word.endswith(suffix) and len(word) - len(suffix) >= MIN_STEM_LENGTH:
            return word[: len(word) - len(suffix)] + replacement
    return word


def lemmatize_word(word: str, config: StandardizationConfig) -> str:
    """Apply lemma steps until a fixed point, so lemmatizing a lemma is a no-op"""
    seen = [word]
    current = word
    for _ in range(_MAX_LEMMA_STEPS):
        nxt = _lemma_step(current, config)
        if nxt == current:
            return current
        if nxt in seen:
            # dictionary cycle: settle on its smallest member
            return min(seen[seen.index(nxt):])
        seen.append(nxt)
        current = nxt
    return current


def _lemmatize_token(token: str, config: StandardizationConfig) -> str:
    segments = [lemmatize_word(seg, config) or seg for seg in token.split("-")]
    return "-".join(segments)


def _keep(token: str, config: StandardizationConfig) -> bool:
    return (
        len(token) >= MIN_TOKEN_LENGTH
        and _WORD_RE.fullmatch(token) is not None
        and token not in config.stopwords
    )


def standardize_text(raw: str, config: StandardizationConfig) -> List[str]:
    """Lowercase, tokenize, drop numbers/non-alphabetic/short/stop words, lemmatize"""
    if not raw:
        return []
    text = _fold_unicode(raw.lower())
    tokens: List[str] = []
    for token in _TOKEN_RE.findall(text):
        if not _keep(token, config):
            continue
        lemma = _lemmatize_token(token, config)
        if _keep(lemma, config):
            tokens.append(lemma)
    return tokens

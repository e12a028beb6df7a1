from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple
import threading

from app.errors import UnseenPairError


class WordPair(NamedTuple):
    """Unordered pair of distinct words, stored in lexicographic order"""

    first: str
    second: str

    @classmethod
    def of(cls, a: str, b: str) -> "WordPair":
        if a == b:
            raise ValueError(f"a word pair needs two distinct words, got '{a}' twice")
        return cls(a, b) if a < b else cls(b, a)


def extract_word_pairs(tokens: Iterable[str]) -> Set[WordPair]:
    """All pairs of distinct word types; D distinct tokens give D(D-1)/2 pairs"""
    distinct = sorted(set(tokens))
    return {WordPair(a, b) for a, b in combinations(distinct, 2)}


class PairInterner:
    """Maps words and word pairs to dense integer ids, stable in insertion order"""

    def __init__(self):
        self._lock = threading.Lock()
        self._word_ids: Dict[str, int] = {}
        self._words: List[str] = []
        self._pair_ids: Dict[Tuple[int, int], int] = {}
        self._pairs: List[Tuple[int, int]] = []
        self._frozen = False

    def __len__(self) -> int:
        return len(self._pairs)

    @property
    def words(self) -> Sequence[str]:
        return self._words

    @property
    def pairs(self) -> Sequence[Tuple[int, int]]:
        return self._pairs

    def freeze(self):
        self._frozen = True

    def _word_id(self, word: str) -> int:
        wid = self._word_ids.get(word)
        if wid is None:
            if self._frozen:
                raise UnseenPairError(f"word '{word}' is not in the intern table")
            wid = len(self._words)
            self._word_ids[word] = wid
            self._words.append(word)
        return wid

    def intern(self, pair: WordPair) -> int:
        """Insert-or-get; safe to call from several threads"""
        with self._lock:
            key = (self._word_id(pair.first), self._word_id(pair.second))
            pid = self._pair_ids.get(key)
            if pid is None:
                if self._frozen:
                    raise UnseenPairError(f"pair {pair.first}/{pair.second} is not in the intern table")
                pid = len(self._pairs)
                self._pair_ids[key] = pid
                self._pairs.append(key)
            return pid

    def intern_all(self, pairs: Iterable[WordPair]) -> FrozenSet[int]:
        # sorted so ids do not depend on set iteration order
        return frozenset(self.intern(p) for p in sorted(pairs))

    def lookup(self, pair: WordPair) -> Optional[int]:
        a = self._word_ids.get(pair.first)
        b = self._word_ids.get(pair.second)
        if a is None or b is None:
            return None
        return self._pair_ids.get((a, b))

    @classmethod
    def from_tables(cls, words: Sequence[str], pairs: Sequence[Tuple[int, int]]) -> "PairInterner":
        interner = cls()
        interner._words = list(words)
        interner._word_ids = {w: i for i, w in enumerate(interner._words)}
        interner._pairs = [(int(a), int(b)) for a, b in pairs]
        interner._pair_ids = {key: i for i, key in enumerate(interner._pairs)}
        return interner

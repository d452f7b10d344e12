"""Deterministic text preprocessing: tokenization, sentence segmentation,
lemmatization, content-word tagging, lemma-relatedness matrices, and paragraph
grouping.

Everything here is rule-based on purpose: the token-index metrics computed
downstream are only comparable across machines if preprocessing is
bit-reproducible, so no statistical models are involved. The exact rules are
documented on each function; the stopword and irregular-lemma tables are
versioned resource files that can be overridden at load time.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from difflib import SequenceMatcher
from functools import lru_cache
from importlib import resources as importlib_resources
from pathlib import Path

import numpy as np

from .corpus import Document, Token

DEFAULT_SIMILARITY_THRESHOLD = 0.86
DEFAULT_MAX_PARAGRAPH_SENTENCES = 5


# ---------------------------------------------------------------------------
# Lexicon resources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lexicon:
    """Stopword membership and irregular-lemma lookups used by preprocessing."""

    stopwords: frozenset[str]
    lemma_exceptions: dict[str, str]

    @staticmethod
    def load(
        stopwords_path: str | Path | None = None,
        lemma_exceptions_path: str | Path | None = None,
    ) -> "Lexicon":
        """Build a lexicon from resource files, with optional overrides."""
        return Lexicon(
            stopwords=frozenset(_read_lines(stopwords_path, "stopwords.txt")),
            lemma_exceptions=dict(
                line.split(None, 1)
                for line in _read_lines(lemma_exceptions_path, "lemma_exceptions.txt")
            ),
        )


def _read_lines(path: str | Path | None, resource: str) -> list[str]:
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = (
            importlib_resources.files("textreduce.resources")
            .joinpath(resource)
            .read_text(encoding="utf-8")
        )
    lines = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    return Lexicon.load()


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

# Ordered alternation: dotted acronyms ("U.S.", "i.e."), numbers (possibly with
# grouping/decimal marks), words (internal apostrophes allowed), then any other
# single non-whitespace character. Single letter-period ("A.") is NOT an
# acronym, so the period stays a separate token and can end a sentence.
_TOKEN_RE = re.compile(
    r"(?:[^\W\d_]\.){2,}"
    r"|\d+(?:[.,]\d+)*"
    r"|[^\W\d_]+(?:'[^\W\d_]+)*"
    r"|\S"
)


def tokenize(raw_text: str, lexicon: Lexicon | None = None) -> list[Token]:
    """Split text into offset-exact tokens with lemma and content flags.

    Tokens cover every non-whitespace character; punctuation is split from
    words except inside dotted acronyms and numbers.
    """
    lexicon = lexicon or default_lexicon()
    tokens: list[Token] = []
    for match in _TOKEN_RE.finditer(raw_text):
        surface = match.group()
        lemma = lemmatize(surface, lexicon)
        tokens.append(
            Token(
                surface=surface,
                char_start=match.start(),
                char_end=match.end(),
                lemma=lemma,
                is_content=_is_content(surface, lemma, lexicon),
            )
        )
    return tokens


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

_TERMINALS = {".", "!", "?"}
_CLOSERS = {'"', "'", ")", "]", "”", "’"}

# Fixed abbreviation list: a period directly after one of these never ends a
# sentence. Matched case-insensitively against the preceding token.
ABBREVIATIONS = frozenset(
    """
    mr mrs ms dr prof gen col sgt lt gov sen rep rev hon capt cmdr maj adm
    st jr sr vs etc inc ltd co corp dept univ est fig no
    jan feb mar apr jun jul aug sep sept oct nov dec
    mon tue tues wed thu thur thurs fri sat sun
    """.split()
)


def split_sentences(tokens: list[Token]) -> list[tuple[int, int]]:
    """Token-index sentence ranges (end exclusive) covering every token.

    A sentence ends at ./!/? (plus any closing quotes or brackets immediately
    after) when the next token starts with an uppercase letter or the text
    ends. A period preceded by a listed abbreviation never ends a sentence.
    """
    bounds: list[tuple[int, int]] = []
    n = len(tokens)
    start = 0
    i = 0
    while i < n:
        surface = tokens[i].surface
        if surface in _TERMINALS:
            if (
                surface == "."
                and i > start
                and tokens[i - 1].surface.lower() in ABBREVIATIONS
            ):
                i += 1
                continue
            j = i + 1
            while j < n and tokens[j].surface in _CLOSERS:
                j += 1
            if j >= n or tokens[j].surface[:1].isupper():
                bounds.append((start, j))
                start = j
                i = j
                continue
        i += 1
    if start < n:
        bounds.append((start, n))
    return bounds


# ---------------------------------------------------------------------------
# Lemmatization and content words
# ---------------------------------------------------------------------------

_DOUBLED_FINALS = ("bb", "dd", "gg", "mm", "nn", "pp", "rr", "tt")


def lemmatize(surface: str, lexicon: Lexicon | None = None) -> str:
    """Lowercase a token and reduce it to its lemma.

    Lookup order: the irregular-form table, then a single suffix rule
    (-ies/-sses/-es after sibilants, plural -s, -ing, -ed, -est, -er), else the
    lowercased surface unchanged. Suffix stripping undoes final consonant
    doubling (stopped -> stop) and never leaves fewer than three characters.
    Non-alphabetic surfaces are returned lowercased as-is.
    """
    lexicon = lexicon or default_lexicon()
    lower = surface.lower()
    exception = lexicon.lemma_exceptions.get(lower)
    if exception is not None:
        return exception
    if not lower.isalpha():
        return lower
    return _strip_suffix(lower)


def _strip_suffix(word: str) -> str:
    n = len(word)
    if word.endswith("ies") and n >= 5:
        return word[:-3] + "y"
    if word.endswith("sses") and n >= 5:
        return word[:-2]
    if word.endswith("zzes") and n >= 5:
        return word[:-3]
    if word.endswith(("ches", "shes", "xes")) and n >= 5:
        return word[:-2]
    if word.endswith("ing") and n - 3 >= 3:
        return _undouble(word[:-3])
    if word.endswith("eed") and n >= 5:
        return word[:-1]
    if word.endswith("ied") and n >= 5:
        return word[:-3] + "y"
    if word.endswith("ed") and n - 2 >= 3:
        return _undouble(word[:-2])
    if word.endswith("est") and n - 3 >= 4:
        return _undouble(word[:-3])
    if word.endswith("er") and n - 2 >= 4:
        return _undouble(word[:-2])
    if word.endswith("s") and not word.endswith(("ss", "us", "is")) and n - 1 >= 3:
        return word[:-1]
    return word


def _undouble(stem: str) -> str:
    if stem.endswith(_DOUBLED_FINALS):
        return stem[:-1]
    return stem


def is_content_word(token: Token | str, lexicon: Lexicon | None = None) -> bool:
    """False for stopword lemmas and for tokens without letters or digits."""
    lexicon = lexicon or default_lexicon()
    if isinstance(token, Token):
        return _is_content(token.surface, token.lemma, lexicon)
    return _is_content(token, lemmatize(token, lexicon), lexicon)


def _is_content(surface: str, lemma: str, lexicon: Lexicon) -> bool:
    if lemma in lexicon.stopwords:
        return False
    return any(ch.isalnum() for ch in surface)


# ---------------------------------------------------------------------------
# Lemma similarity and the relation matrix
# ---------------------------------------------------------------------------

def lemma_similarity(lemma_a: str, lemma_b: str) -> float:
    """Ratcliff/Obershelp ratio 2*M/T of two lemmas, symmetrized.

    M is the total length of recursively found longest common blocks and T the
    combined length. The block recursion is order-sensitive, so the arguments
    are put in lexicographic order first; two empty strings score 1.0.
    """
    a, b = sorted((lemma_a, lemma_b))
    return SequenceMatcher(None, a, b, autojunk=False).ratio()


@dataclass(frozen=True, eq=False)
class RelationMatrix:
    """Binary summary-token x document-token lemma-relatedness matrix."""

    entries: np.ndarray  # uint8, shape (summary tokens, document tokens)

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])


def relation_matrix(
    summary_tokens: list[Token] | tuple[Token, ...],
    document_tokens: list[Token] | tuple[Token, ...],
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> RelationMatrix:
    """Matrix with 1 where a summary and a document token have lemma
    similarity at or above the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be within [0, 1], got {threshold}")
    summary_lemmas = [t.lemma for t in summary_tokens]
    document_lemmas = [t.lemma for t in document_tokens]
    entries = np.zeros((len(summary_lemmas), len(document_lemmas)), dtype=np.uint8)
    cache: dict[tuple[str, str], bool] = {}
    for i, ls in enumerate(summary_lemmas):
        for j, ld in enumerate(document_lemmas):
            key = (ls, ld) if ls <= ld else (ld, ls)
            related = cache.get(key)
            if related is None:
                related = lemma_similarity(ls, ld) >= threshold
                cache[key] = related
            if related:
                entries[i, j] = 1
    return RelationMatrix(entries=entries)


# ---------------------------------------------------------------------------
# Paragraph segmentation
# ---------------------------------------------------------------------------

def segment_paragraphs(
    document: Document, max_sentences: int = DEFAULT_MAX_PARAGRAPH_SENTENCES
) -> list[tuple[int, int]]:
    """Greedy sentence grouping into paragraphs.

    A paragraph closes after ``max_sentences`` sentences, or earlier when the
    next sentence shares no content lemma with the one before it.
    """
    return _paragraph_bounds(document.tokens, document.sentence_bounds, max_sentences)


def _paragraph_bounds(
    tokens: tuple[Token, ...] | list[Token],
    sentence_bounds: list[tuple[int, int]] | tuple[tuple[int, int], ...],
    max_sentences: int = DEFAULT_MAX_PARAGRAPH_SENTENCES,
) -> list[tuple[int, int]]:
    if max_sentences < 1:
        raise ValueError("max_sentences must be at least 1")
    lemma_sets = [
        {t.lemma for t in tokens[s:e] if t.is_content} for s, e in sentence_bounds
    ]
    bounds: list[tuple[int, int]] = []
    start = 0
    for idx in range(1, len(lemma_sets)):
        if idx - start == max_sentences or not lemma_sets[idx] & lemma_sets[idx - 1]:
            bounds.append((start, idx))
            start = idx
    if lemma_sets:
        bounds.append((start, len(lemma_sets)))
    return bounds


# ---------------------------------------------------------------------------
# Boldening
# ---------------------------------------------------------------------------

def bold_mask(
    document: Document,
    summary: Document,
    sentence_index: int,
    matrix: RelationMatrix | None = None,
) -> list[bool]:
    """Per-document-token flags for the given summary sentence.

    A document token is bold when it is a content word related (per the
    relation matrix) to at least one token of that summary sentence.
    """
    if not 0 <= sentence_index < summary.sentence_count:
        raise ValueError(
            f"summary sentence index {sentence_index} out of range "
            f"0..{summary.sentence_count - 1}"
        )
    if matrix is None:
        matrix = relation_matrix(summary.tokens, document.tokens)
    start, end = summary.sentence_bounds[sentence_index]
    rows = matrix.entries[start:end]
    if rows.size:
        related = rows.any(axis=0)
    else:
        related = np.zeros(len(document.tokens), dtype=bool)
    return [bool(flag) and tok.is_content for flag, tok in zip(related, document.tokens)]


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

def analyze(
    raw_text: str,
    text_id: str,
    lexicon: Lexicon | None = None,
    max_paragraph_sentences: int = DEFAULT_MAX_PARAGRAPH_SENTENCES,
) -> Document:
    """Tokenize, segment, and tag one text into an immutable Document."""
    lexicon = lexicon or default_lexicon()
    tokens = tokenize(raw_text, lexicon)
    sentence_bounds = split_sentences(tokens)
    paragraph_bounds = _paragraph_bounds(tokens, sentence_bounds, max_paragraph_sentences)
    return Document(
        id=text_id,
        raw_text=raw_text,
        tokens=tuple(tokens),
        sentence_bounds=tuple(sentence_bounds),
        paragraph_bounds=tuple(paragraph_bounds),
    )

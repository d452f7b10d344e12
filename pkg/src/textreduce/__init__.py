"""Toolkit for highlight-controlled text reduction data.

Ingests document-summary corpora with frozen tokenization, produces and
validates summary-to-document highlight alignments (manually through the
annotation service, automatically through pluggable aligners), encodes
highlighted documents for generation models, and evaluates agreement,
highlight overlap, and content preservation.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Alignment,
    Document,
    DocumentSummaryPair,
    HighlightSet,
    Span,
    Token,
    canonicalize_spans,
    highlights_of,
    ingest,
    load,
    save,
)

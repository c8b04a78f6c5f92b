"""Chess game records as text: token corpora, embeddings, and analyses."""

from . import core, corpus, embedder, errors, projector, queries, tokens

__version__ = "0.1.0"
__all__ = [
    "core",
    "corpus",
    "embedder",
    "errors",
    "projector",
    "queries",
    "tokens",
    "__version__",
]

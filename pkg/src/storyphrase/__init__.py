"""storyphrase: familiar-vocabulary system-assigned passphrases.

Pipeline modules:
    corpus     text ingestion and tokenization
    ngram      Laplace-smoothed n-gram models
    sampling   seeded text generation (temperature / top-k / top-p)
    extract    candidate passphrase extraction
    tagging    POS tag-rule analysis and structure filtering
    ranking    guessability scoring (max of 2..5-gram joints)
    similarity embeddings, assignment dedup, typo buckets
    guesswork  entropy / expected guesses / marginal guesswork
    study      protocol state machine and recall metrics
    service    event-sourced HTTP study backend
    cli        command-line pipeline driver
"""

__version__ = "0.1.0"

from ._kernels import IMPLEMENTATION as kernel_implementation  # noqa: F401

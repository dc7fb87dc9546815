"""Passphrase similarity: embeddings, assignment dedup and typo buckets.

The built-in provider is a deterministic, fully offline stand-in for a
sentence encoder: hashed character-trigram + case-folded word-unigram term
frequencies in 512 dimensions, L2-normalized.  Real encoders can be
attached through the stream-socket adapter without touching callers.
"""

from __future__ import annotations

import hashlib
import socket
from dataclasses import dataclass, field

import numpy as np

from .corpus import tokenize
from .errors import AttemptMatchesAssigned, EmptyText

DEFAULT_DIMENSION = 512

# Closed integer percent ranges; the bottom bucket absorbs everything
# below 40 so that bucketing is total.
BUCKET_RANGES = [
    (">95", 96, 100),
    ("90-95", 90, 95),
    ("85-89", 85, 89),
    ("80-84", 80, 84),
    ("75-79", 75, 79),
    ("70-74", 70, 74),
    ("60-69", 60, 69),
    ("50-59", 50, 59),
    ("40-49", 40, 49),
    ("20-39", 0, 39),
]
COMPLETELY_DISSIMILAR = "completely-dissimilar"
BUCKET_LABELS = [label for label, _, _ in BUCKET_RANGES] + [COMPLETELY_DISSIMILAR]


def _stable_index(feature: str, dimension: int) -> int:
    digest = hashlib.md5(feature.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dimension


def embed_default(text: str, dimension: int = DEFAULT_DIMENSION) -> np.ndarray:
    """Unit-norm hashed feature vector; identical texts embed identically."""
    if not tokenize(text, "words"):
        raise EmptyText("nothing to embed")
    normalized = " ".join(text.split())
    vec = np.zeros(dimension, dtype=np.float64)
    for word in normalized.lower().split():
        vec[_stable_index("w:" + word, dimension)] += 1.0
    for i in range(len(normalized) - 2):
        vec[_stable_index("t:" + normalized[i : i + 3], dimension)] += 1.0
    return vec / np.linalg.norm(vec)


@dataclass
class DefaultEmbeddingProvider:
    name: str = "hashed-trigram-tf"
    dimension: int = DEFAULT_DIMENSION

    def embed(self, text: str) -> np.ndarray:
        return embed_default(text, self.dimension)


@dataclass
class SocketEmbeddingProvider:
    """Adapter for an external encoder behind a local stream socket.

    Protocol: one newline-terminated text per request, one line of
    space-separated floats per response.  `address` is a unix socket path
    or a (host, port) tuple.
    """

    address: object
    dimension: int
    name: str = "socket-embedding"

    def embed(self, text: str) -> np.ndarray:
        if isinstance(self.address, (tuple, list)):
            conn = socket.create_connection(tuple(self.address))
        else:
            conn = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
            conn.connect(str(self.address))
        try:
            conn.sendall(text.replace("\n", " ").encode("utf-8") + b"\n")
            chunks = []
            while not chunks or not chunks[-1].endswith(b"\n"):
                data = conn.recv(65536)
                if not data:
                    break
                chunks.append(data)
        finally:
            conn.close()
        values = np.array([float(x) for x in b"".join(chunks).split()], dtype=np.float64)
        if values.size != self.dimension:
            raise ValueError(
                f"provider returned {values.size} floats, expected {self.dimension}"
            )
        norm = np.linalg.norm(values)
        return values / norm if norm else values


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.dot(u, v))


def similarity_matrix(passphrases, provider=None) -> np.ndarray:
    provider = provider or DefaultEmbeddingProvider()
    vectors = [provider.embed(p) for p in passphrases]
    n = len(vectors)
    matrix = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        matrix[i, i] = 1.0
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = cosine(vectors[i], vectors[j])
    return matrix


def check_assignable(candidate: str, assigned, theta: float, provider=None) -> bool:
    """True iff the candidate's cosine with every assigned phrase is < theta."""
    if not 0 < theta <= 1:
        raise ValueError(f"theta={theta}")
    if not assigned:
        return True
    provider = provider or DefaultEmbeddingProvider()
    cand = provider.embed(candidate)
    return all(cosine(cand, provider.embed(a)) < theta for a in assigned)


def _shares_word(assigned: str, attempt: str) -> bool:
    a = {w.lower() for w in tokenize(assigned, "words")}
    b = {w.lower() for w in tokenize(attempt, "words")}
    return bool(a & b)


def bucket_attempt(assigned: str, attempt: str, provider=None):
    """(cosine, bucket label) for a failed login attempt."""
    if " ".join(assigned.split()) == " ".join(attempt.split()):
        raise AttemptMatchesAssigned("attempt equals the assigned passphrase")
    provider = provider or DefaultEmbeddingProvider()
    score = cosine(provider.embed(assigned), provider.embed(attempt))
    if not _shares_word(assigned, attempt):
        return score, COMPLETELY_DISSIMILAR
    pct = round(score * 100)
    for label, lo, hi in BUCKET_RANGES:
        if lo <= pct <= hi:
            return score, label
    return score, BUCKET_RANGES[-1][0]

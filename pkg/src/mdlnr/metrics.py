"""Similarity between true and inferred weight matrices."""
from __future__ import annotations

import numpy as np

from .graph_state import WeightedNetwork


def _dense(W) -> np.ndarray:
    if isinstance(W, WeightedNetwork):
        return W.to_dense()
    if hasattr(W, "toarray"):
        return W.toarray()
    return np.asarray(W, dtype=float)


def _upper(W_true, W_hat):
    A, B = _dense(W_true), _dense(W_hat)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    iu = np.triu_indices(A.shape[0], 1)
    return A[iu], B[iu]


def jaccard_weighted(W_true, W_hat) -> float:
    """``1 - sum|W - What| / sum(|W| + |What|)`` over pairs ``i < j``; 1 when
    both matrices are empty."""
    a, b = _upper(W_true, W_hat)
    den = np.abs(a).sum() + np.abs(b).sum()
    if den == 0:
        return 1.0
    return float(1.0 - np.abs(a - b).sum() / den)


def jaccard_binary(W_true, W_hat) -> float:
    """:func:`jaccard_weighted` applied to the binarised supports.

    This equals ``2|A & B| / (|A| + |B|)`` for supports ``A`` and ``B``.
    """
    a, b = _upper(W_true, W_hat)
    return jaccard_weighted_vec((a != 0).astype(float), (b != 0).astype(float))


def jaccard_weighted_vec(a: np.ndarray, b: np.ndarray) -> float:
    den = np.abs(a).sum() + np.abs(b).sum()
    if den == 0:
        return 1.0
    return float(1.0 - np.abs(a - b).sum() / den)


def support_overlap(W_true, W_hat) -> float:
    """Set overlap ``|A & B| / |A | B|`` of the two supports (1 when both empty)."""
    a, b = _upper(W_true, W_hat)
    a, b = a != 0, b != 0
    union = (a | b).sum()
    return 1.0 if union == 0 else float((a & b).sum() / union)

"""Classical (Torgerson) multidimensional scaling of CMD vectors."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

log = logging.getLogger(__name__)


@dataclass
class EmbeddingResult:
    coords: np.ndarray        # (m, n_components)
    eigenvalues: np.ndarray   # full spectrum of the doubly centered Gram matrix, descending
    stress: float             # Kruskal stress-1 of embedded vs original distances
    flags: list[str] = field(default_factory=list)
    imputed: int = 0


def impute_undefined(vectors) -> tuple[np.ndarray, int]:
    """Replace ``nan`` entries by 0, returning the matrix and how many were replaced."""
    V = np.array(vectors, dtype=float, copy=True)
    bad = np.isnan(V)
    V[bad] = 0.0
    return V, int(bad.sum())


def classical_mds(vectors, n_components: int = 2) -> EmbeddingResult:
    """Embed the rows of ``vectors`` so Euclidean distances are preserved as well as possible.

    Coordinates are the top eigenvectors of ``-1/2 J D^2 J`` scaled by the
    square roots of their eigenvalues.  Each axis is oriented so that its
    first non-negligible coordinate is positive.  Axes without a positive
    eigenvalue are left at zero and flagged.
    """
    V, imputed = impute_undefined(vectors)
    m = len(V)
    if m < 3:
        raise ValueError(f"need at least 3 vectors, got {m}")
    flags = []
    if imputed:
        log.warning("%d undefined CMD entries imputed as 0", imputed)
        flags.append(f"{imputed} undefined entries imputed as 0")
    D = squareform(pdist(V)) if V.shape[1] else np.zeros((m, m))
    J = np.eye(m) - 1.0 / m
    B = -0.5 * J @ (D ** 2) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    tol = 1e-10 * max(1.0, abs(evals[0]))
    coords = np.zeros((m, n_components))
    for k in range(n_components):
        if evals[k] <= tol:
            flags.append(f"axis {k + 1} has no positive eigenvalue; left at zero")
            continue
        col = evecs[:, k] * np.sqrt(evals[k])
        big = np.abs(col) > 1e-9 * np.abs(col).max()
        if col[np.argmax(big)] < 0:
            col = -col
        coords[:, k] = col
    coords -= coords.mean(axis=0)

    d_hat = pdist(coords)
    d = pdist(V) if V.shape[1] else np.zeros_like(d_hat)
    denom = np.sum(d ** 2)
    stress = float(np.sqrt(np.sum((d - d_hat) ** 2) / denom)) if denom > 0 else 0.0
    return EmbeddingResult(coords, evals, stress, flags, imputed)

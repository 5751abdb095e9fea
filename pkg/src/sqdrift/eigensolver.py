"""Lowest eigenpairs of real symmetric (sparse) matrices."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError

DENSE_FALLBACK_DIM = 512


def _as_dense(matrix) -> np.ndarray:
    return matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=float)


def diagonalize(matrix, k: int = 1, tol: float = 1e-8, max_iter: int = 500, max_subspace: int | None = None):
    """Return ``(energies, vectors, residual_norms)`` for the ``k`` lowest eigenpairs.

    Matrices up to ``DENSE_FALLBACK_DIM`` are solved densely; larger ones use
    Davidson iteration with a diagonal preconditioner, restarting once the
    search space reaches ``max_subspace`` (default ``20 * k``) vectors.
    """
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim):
        raise ValueError("matrix must be square")
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} must lie in [1, {dim}]")
    if dim <= DENSE_FALLBACK_DIM:
        dense = _as_dense(matrix)
        w, v = np.linalg.eigh(dense)
        w, v = w[:k], v[:, :k]
        res = np.linalg.norm(dense @ v - v * w, axis=0)
        return w, _fix_sign(v), res
    return davidson(matrix, k, tol=tol, max_iter=max_iter, max_subspace=max_subspace)


def _fix_sign(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive, so results are reproducible
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _orthonormalize_against(basis: np.ndarray, vec: np.ndarray) -> np.ndarray | None:
    for _ in range(2):
        vec = vec - basis @ (basis.T @ vec)
    norm = np.linalg.norm(vec)
    if norm < 1e-10:
        return None
    return vec / norm


def davidson(matrix, k: int = 1, tol: float = 1e-8, max_iter: int = 500, max_subspace: int | None = None):
    dim = matrix.shape[0]
    max_subspace = max(max_subspace or 20 * k, 2 * k)
    diag = np.asarray(matrix.diagonal(), dtype=float)
    order = np.lexsort((np.arange(dim), diag))
    n_guess = min(dim, 2 * k)
    V = np.zeros((dim, n_guess))
    V[order[:n_guess], np.arange(n_guess)] = 1.0
    W = np.asarray(matrix @ V)

    theta = res_norms = None
    for _ in range(max_iter):
        T = V.T @ W
        T = 0.5 * (T + T.T)
        evals, evecs = np.linalg.eigh(T)
        theta = evals[:k]
        S = evecs[:, :k]
        X = V @ S
        AX = W @ S
        R = AX - X * theta
        res_norms = np.linalg.norm(R, axis=0)
        if np.all(res_norms <= tol):
            return theta, _fix_sign(X), res_norms

        if V.shape[1] + k > max_subspace:
            V, _ = np.linalg.qr(X)
            W = np.asarray(matrix @ V)
            continue

        new = []
        basis = V
        for i in np.flatnonzero(res_norms > tol):
            denom = theta[i] - diag
            denom[np.abs(denom) < 1e-8] = 1e-8
            t = _orthonormalize_against(basis, R[:, i] / denom)
            if t is None:
                t = _orthonormalize_against(basis, R[:, i])
            if t is not None:
                new.append(t)
                basis = np.column_stack([basis, t])
        if not new:
            break
        new = np.column_stack(new)
        V = np.column_stack([V, new])
        W = np.column_stack([W, np.asarray(matrix @ new)])

    raise ConvergenceError(
        f"Davidson did not converge in {max_iter} iterations (residuals {res_norms})",
        residuals=res_norms,
        eigenvalues=theta,
    )

"""Principal component analysis on sentence vectors.

The eigendecomposition is a cyclic Jacobi sweep over the sample covariance
matrix: simple, robust for symmetric matrices, and fast enough at the
dimensionalities this package works with. A fitted model is immutable and
safe to share across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, IntegrityError

_JACOBI_TOL_FACTOR = 1e-10
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class PcaModel:
    """Mean vector, orthonormal component rows, eigenvalues and variance ratios."""

    mean: np.ndarray                      # (d,)
    components: np.ndarray                # (n_comp, d), rows orthonormal
    eigenvalues: np.ndarray               # (n_comp,), nonnegative, descending
    explained_variance_ratio: np.ndarray  # (n_comp,), eigenvalue / total variance
    n_samples: int

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def n_comp(self) -> int:
        return int(self.components.shape[0])


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def _jacobi_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvectors in columns,
    unsorted. Convergence: off-diagonal Frobenius norm below 1e-10 times
    its initial value.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    d = a.shape[0]
    v = np.eye(d)
    initial_off = _off_diagonal_norm(a)
    if initial_off == 0.0:
        return np.diag(a).copy(), v
    threshold = _JACOBI_TOL_FACTOR * initial_off
    for _ in range(_JACOBI_MAX_SWEEPS):
        if _off_diagonal_norm(a) <= threshold:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    return np.diag(a).copy(), v


def pca_fit(data: np.ndarray, n_comp: int) -> PcaModel:
    """Fit PCA on rows of ``data``, keeping the top ``n_comp`` eigenpairs.

    The covariance uses the unbiased 1/(n-1) estimator. Each component's
    entry of largest absolute value is made positive so that outputs are
    reproducible across runs and platforms.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        x = np.vstack([np.asarray(row, dtype=np.float64) for row in data])
    n, d = x.shape
    if n < 2:
        raise ArgumentError(f"need at least 2 samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise ArgumentError("input contains non-finite values")
    if not 1 <= n_comp <= min(d, n):
        raise ArgumentError(f"n_comp must be in [1, {min(d, n)}], got {n_comp}")

    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)

    eigenvalues, eigenvectors = _jacobi_eigh(cov)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    total = float(eigenvalues.sum())
    kept_values = eigenvalues[:n_comp].copy()
    components = eigenvectors[:, :n_comp].T.copy()
    for i in range(n_comp):
        pivot = int(np.argmax(np.abs(components[i])))
        if components[i, pivot] < 0:
            components[i] = -components[i]
    if total > 0.0:
        ratios = kept_values / total
    else:
        ratios = np.zeros_like(kept_values)
    return PcaModel(
        mean=mean,
        components=components,
        eigenvalues=kept_values,
        explained_variance_ratio=ratios,
        n_samples=n,
    )


def pca_transform(model: PcaModel, vectors: np.ndarray) -> np.ndarray:
    """Project one vector (1-D) or a stack of vectors (2-D) onto the components."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.shape[-1] != model.dim:
        raise ArgumentError(f"vector dim {arr.shape[-1]} does not match model dim {model.dim}")
    return (arr - model.mean) @ model.components.T


def pca_inverse_transform(model: PcaModel, projected: np.ndarray) -> np.ndarray:
    arr = np.asarray(projected, dtype=np.float64)
    if arr.shape[-1] != model.n_comp:
        raise ArgumentError(
            f"projected dim {arr.shape[-1]} does not match model n_comp {model.n_comp}"
        )
    return arr @ model.components + model.mean


def pca_truncate(model: PcaModel, n_comp: int) -> PcaModel:
    """Keep only the top ``n_comp`` components of an already-fitted model.

    Equivalent to refitting on the same data with the smaller n_comp: the
    decomposition does not depend on how many eigenpairs are kept.
    """
    if not 1 <= n_comp <= model.n_comp:
        raise ArgumentError(f"n_comp must be in [1, {model.n_comp}], got {n_comp}")
    return PcaModel(
        mean=model.mean,
        components=model.components[:n_comp],
        eigenvalues=model.eigenvalues[:n_comp],
        explained_variance_ratio=model.explained_variance_ratio[:n_comp],
        n_samples=model.n_samples,
    )


def choose_n_comp_by_variance(model: PcaModel, threshold: float) -> int:
    """Smallest component count whose cumulative variance ratio reaches ``threshold``.

    The model must have been fitted at full rank so the ratios sum to one.
    """
    if not 0.0 < threshold <= 1.0:
        raise ArgumentError(f"threshold must be in (0, 1], got {threshold}")
    full_rank = min(model.dim, model.n_samples)
    if model.n_comp != full_rank:
        raise ArgumentError(
            f"model has {model.n_comp} components but full rank is {full_rank}"
        )
    cumulative = np.cumsum(model.explained_variance_ratio)
    reached = np.nonzero(cumulative + 1e-12 >= threshold)[0]
    if reached.size == 0:
        return model.n_comp
    return int(reached[0]) + 1


_PCA_MAGIC = b"PSPCA1\n"


def save_pca(model: PcaModel, path: Path) -> None:
    """Persist a model: JSON header line, then little-endian float64 blocks
    (mean, eigenvalues, ratios, row-major components)."""
    path = Path(path)
    header = {
        "dim": model.dim,
        "n_comp": model.n_comp,
        "n_samples": model.n_samples,
    }
    with open(path, "wb") as fh:
        fh.write(_PCA_MAGIC)
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        for block in (model.mean, model.eigenvalues, model.explained_variance_ratio):
            fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.components, dtype="<f8").tobytes())


def load_pca(path: Path) -> PcaModel:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(_PCA_MAGIC))
        if magic != _PCA_MAGIC:
            raise IntegrityError(f"{path} is not a PCA model file")
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            dim = int(header["dim"])
            n_comp = int(header["n_comp"])
            n_samples = int(header["n_samples"])
        except (ValueError, KeyError, TypeError) as exc:
            raise IntegrityError(f"{path} has a malformed PCA header: {exc}") from exc
        expected = 8 * (dim + 2 * n_comp + n_comp * dim)
        payload = fh.read()
        if len(payload) != expected:
            raise IntegrityError(
                f"{path} payload is {len(payload)} bytes, expected {expected}"
            )
    floats = struct.unpack(f"<{dim + 2 * n_comp + n_comp * dim}d", payload)
    mean = np.array(floats[:dim])
    eigenvalues = np.array(floats[dim:dim + n_comp])
    ratios = np.array(floats[dim + n_comp:dim + 2 * n_comp])
    components = np.array(floats[dim + 2 * n_comp:]).reshape(n_comp, dim)
    return PcaModel(
        mean=mean,
        components=components,
        eigenvalues=eigenvalues,
        explained_variance_ratio=ratios,
        n_samples=n_samples,
    )

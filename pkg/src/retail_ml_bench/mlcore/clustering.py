"""K-means (k-means++ seeding, Lloyd iterations) and diagonal-covariance GMM."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ._common import IterConfig, as_dense, check_dim, rng_for

VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class KMeansModel:
    centroids: np.ndarray
    inertia: float
    n_iter: int
    inertia_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def n_features(self) -> int:
        return self.centroids.shape[1]


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _assign(X, C):
    d2 = _sq_dists(X, C)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(len(X)), labels]


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: each step draws a few D^2-weighted candidates and keeps
    the one that lowers the total squared distance most (first wins on ties)."""
    n = len(X)
    trials = 2 + int(np.log(k))
    centers = [int(rng.integers(n))]
    closest = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            cands = rng.choice(n, size=trials, p=closest / total)
        else:
            cands = rng.integers(n, size=trials)
        pots = [np.minimum(closest, ((X - X[c]) ** 2).sum(axis=1)) for c in cands]
        best = int(np.argmin([p.sum() for p in pots]))
        centers.append(int(cands[best]))
        closest = pots[best]
    return X[centers].copy()


def _update(X, labels, d2, C):
    k = len(C)
    new = np.empty_like(C)
    counts = np.bincount(labels, minlength=k)
    empty = []
    for j in range(k):
        if counts[j]:
            new[j] = X[labels == j].mean(axis=0)
        else:
            empty.append(j)
    if empty:
        # farthest points from their current centroid, distinct per empty cluster
        far = np.argsort(-d2, kind="stable")
        for j, i in zip(empty, far):
            new[j] = X[i]
    return new


def fit_kmeans(points, k: int, cfg: IterConfig = IterConfig()) -> KMeansModel:
    X = as_dense(points)
    n = len(X)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= n_rows={n}")
    rng = rng_for(cfg.seed)
    C = _kmeans_pp(X, k, rng)
    labels, d2 = _assign(X, C)
    inertia = float(d2.sum())
    trace = [inertia]
    n_iter = 0
    for it in range(1, cfg.max_iter + 1):
        C_new = _update(X, labels, d2, C)
        labels_new, d2_new = _assign(X, C_new)
        inertia_new = float(d2_new.sum())
        if inertia_new > inertia:
            break  # rounding noise at a fixed point
        improvement = inertia - inertia_new
        C, labels, d2, inertia = C_new, labels_new, d2_new, inertia_new
        trace.append(inertia)
        n_iter = it
        if inertia == 0.0 or improvement / (inertia + improvement) < cfg.tol:
            break
    return KMeansModel(centroids=C, inertia=inertia, n_iter=n_iter, inertia_trace=trace)


def kmeans_assign(model: KMeansModel, points) -> np.ndarray:
    """Index of the nearest centroid for each point; ties go to the lowest index."""
    X = as_dense(points)
    check_dim(X, model.n_features)
    return _assign(X, model.centroids)[0]


@dataclass(frozen=True, eq=False)
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    diag_variances: np.ndarray
    final_log_likelihood: float
    n_iter: int
    log_likelihood_trace: list[float] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


def _log_joint(X, weights, means, variances):
    """log(w_k) + log N(x | mu_k, diag(var_k)) for every point and component."""
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    d = X.shape[1]
    out = np.empty((len(X), len(weights)))
    for j in range(len(weights)):
        diff = X - means[j]
        out[:, j] = (logw[j] - 0.5 * (d * np.log(2 * np.pi) + np.log(variances[j]).sum()
                                      + (diff ** 2 / variances[j]).sum(axis=1)))
    return out


def _e_step(X, weights, means, variances):
    lj = _log_joint(X, weights, means, variances)
    ll = logsumexp(lj, axis=1)
    return np.exp(lj - ll[:, None]), float(ll.mean())


def _m_step(X, resp, means, variances):
    nk = resp.sum(axis=0)
    weights = nk / nk.sum()
    new_means = means.copy()
    new_vars = variances.copy()
    for j in range(resp.shape[1]):
        if nk[j] <= 0:
            continue  # zero-weight component contributes nothing; keep its shape
        new_means[j] = resp[:, j] @ X / nk[j]
        new_vars[j] = resp[:, j] @ ((X - new_means[j]) ** 2) / nk[j]
    np.maximum(new_vars, VARIANCE_FLOOR, out=new_vars)
    return weights, new_means, new_vars


def fit_gmm(points, k: int, cfg: IterConfig = IterConfig()) -> GmmModel:
    """EM for a diagonal Gaussian mixture, initialised from :func:`fit_kmeans`."""
    X = as_dense(points)
    n = len(X)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= n_rows={n}")
    km = fit_kmeans(X, k, cfg)
    labels = kmeans_assign(km, X)
    counts = np.bincount(labels, minlength=k)
    weights = counts / n
    means = km.centroids.copy()
    variances = np.empty_like(means)
    for j in range(k):
        members = X[labels == j]
        variances[j] = members.var(axis=0) if len(members) else X.var(axis=0)
    np.maximum(variances, VARIANCE_FLOOR, out=variances)

    resp, ll = _e_step(X, weights, means, variances)
    trace = [ll]
    n_iter = 0
    for it in range(1, cfg.max_iter + 1):
        weights, means, variances = _m_step(X, resp, means, variances)
        resp, ll_new = _e_step(X, weights, means, variances)
        trace.append(ll_new)
        n_iter = it
        done = ll_new - ll < cfg.tol
        ll = ll_new
        if done:
            break
    return GmmModel(weights=weights, means=means, diag_variances=variances,
                    final_log_likelihood=ll, n_iter=n_iter, log_likelihood_trace=trace)


def gmm_responsibilities(model: GmmModel, points) -> np.ndarray:
    """Posterior component membership per point (rows sum to one)."""
    X = as_dense(points)
    check_dim(X, model.n_features)
    return _e_step(X, model.weights, model.means, model.diag_variances)[0]


def gmm_assign(model: GmmModel, points) -> np.ndarray:
    return np.argmax(gmm_responsibilities(model, points), axis=1)

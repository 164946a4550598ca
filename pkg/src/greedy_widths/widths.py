"""Kolmogorov and Gelfand width oracles.

Exact values are only claimed for the Hilbert-to-Hilbert case (singular
values) and for tiny brute-forced instances; everything else carries an
honest upper / lower / heuristic tag.  Index convention: d_n uses
n-dimensional subspaces and d_0 = ||T||.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, RegimeError
from .spaces import CompactSet, NormedSpace, conjugate_exponent, lp_norm
from .subspaces import Subspace, dist_to_subspace

__all__ = [
    "WidthEstimate",
    "operator_norm",
    "hilbert_widths",
    "diagonal_width_upper",
    "kolmogorov_width",
    "gelfand_width",
    "brute_force_width",
    "alternating_minimax",
]


@dataclass(frozen=True)
class WidthEstimate:
    n: int
    value: float
    kind: str     # exact | upper | lower | heuristic
    method: str   # svd | diagonal_formula | coordinate_subspace |
                  # alternating_minimax | brute_force | duality | vertex_enum

    def to_json_dict(self):
        return {"n": self.n, "value": self.value, "kind": self.kind,
                "method": self.method}


def _sign_vertices(m):
    """All +-1 vectors with first coordinate fixed to +1 (2^(m-1) rows)."""
    rows = np.array(list(itertools.product([1.0, -1.0], repeat=m - 1)))
    return np.hstack([np.ones((rows.shape[0], 1)), rows]) if m > 1 else np.ones((1, 1))


def operator_norm(T, domain: NormedSpace, target: NormedSpace,
                  restarts=8, seed=0) -> WidthEstimate:
    """||T|| from domain to target; exact where vertex/SVD structure allows."""
    T = np.asarray(T, dtype=float)
    if T.shape != (target.dim, domain.dim):
        raise DimensionError("operator shape does not match the spaces")
    if domain.is_inner_product and target.is_inner_product:
        A_t = target.metric_factor()
        A_d = domain.metric_factor()
        M = A_t @ T @ np.linalg.inv(A_d)
        val = float(np.linalg.svd(M, compute_uv=False)[0]) if M.size else 0.0
        return WidthEstimate(0, val, "exact", "svd")
    if domain.is_lp and domain.p == 1:
        # extreme points of the l1 ball are +-e_i
        vals = target.norm(T.T)
        return WidthEstimate(0, float(np.max(vals)), "exact", "vertex_enum")
    if domain.is_lp and domain.p == np.inf and domain.dim <= 20:
        V = _sign_vertices(domain.dim)
        vals = target.norm(V @ T.T)
        return WidthEstimate(0, float(np.max(vals)), "exact", "vertex_enum")
    # heuristic lower bound by multistart projected ascent
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        x = rng.normal(size=domain.dim)
        x /= domain.norm(x)
        step = 0.5
        val = float(target.norm(T @ x))
        for _ in range(200):
            y = T @ x
            ny = target.norm(y)
            if ny == 0:
                break
            if target.p == np.inf:
                g = np.zeros(target.dim)
                g[int(np.argmax(np.abs(y)))] = np.sign(y[int(np.argmax(np.abs(y)))])
            elif target.p == 1:
                g = np.sign(y)
            else:
                g = np.sign(y) * (np.abs(y) / ny) ** (target.p - 1.0)
            d = T.T @ g
            x_try = x + step * d
            x_try /= domain.norm(x_try)
            v_try = float(target.norm(T @ x_try))
            if v_try > val + 1e-15:
                x, val = x_try, v_try
                step *= 1.2
            else:
                step *= 0.5
                if step < 1e-12:
                    break
        best = max(best, val)
    return WidthEstimate(0, best, "heuristic", "alternating_minimax")


def hilbert_widths(T) -> list[WidthEstimate]:
    """d_n(T) for T between l2 spaces: the decreasing singular values."""
    T = np.asarray(T, dtype=float)
    s = np.linalg.svd(T, compute_uv=False)
    out = [WidthEstimate(n, float(s[n]), "exact", "svd") for n in range(len(s))]
    out.append(WidthEstimate(len(s), 0.0, "exact", "svd"))
    return out


def diagonal_width_upper(alpha: float, q: float, n: int, m: int) -> WidthEstimate:
    """Coordinate-subspace upper bound (n+1)^(-alpha) for D_alpha: l2 -> l_q.

    Projecting onto the first n coordinates leaves the tail, whose l_q norm
    is dominated by its l2 norm for q >= 2, hence the bound.
    """
    if not (2 < q < np.inf):
        raise ConfigError("the diagonal bound requires 2 < q < inf")
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    if n >= m:
        raise ConfigError(f"n={n} must be below the ambient dimension m={m}")
    return WidthEstimate(n, float((n + 1.0) ** (-alpha)), "upper",
                         "coordinate_subspace")


def kolmogorov_width(T, domain: NormedSpace, target: NormedSpace, n: int,
                     samples=256, seed=0, restarts=4) -> WidthEstimate:
    """d_n of the operator T; exact only in the Hilbert-to-Hilbert case."""
    T = np.asarray(T, dtype=float)
    if domain.is_inner_product and target.is_inner_product:
        A_t = target.metric_factor()
        A_d = domain.metric_factor()
        M = A_t @ T @ np.linalg.inv(A_d)
        s = np.linalg.svd(M, compute_uv=False)
        val = float(s[n]) if n < len(s) else 0.0
        return WidthEstimate(n, val, "exact", "svd")
    if n == 0:
        return operator_norm(T, domain, target)
    ball = CompactSet.operator_ball(T, domain, samples if samples % 2 == 0
                                    else samples + 1, seed)
    est = alternating_minimax(ball.materialize(), target, n,
                              restarts=restarts, seed=seed)
    # the sampled set under-represents the ball, so no upper claim survives
    return WidthEstimate(n, est.value, "heuristic", est.method)


def gelfand_width(T, domain: NormedSpace, target: NormedSpace, n: int,
                  **kwargs) -> WidthEstimate:
    """d^n(T) computed as d_n(T') between the dual-exponent spaces."""
    T = np.asarray(T, dtype=float)
    if not (domain.is_lp and target.is_lp):
        raise ConfigError("gelfand duality path requires l_p spaces")
    dual_dom = NormedSpace.lp(target.dim, conjugate_exponent(target.p))
    dual_tgt = NormedSpace.lp(domain.dim, conjugate_exponent(domain.p))
    est = kolmogorov_width(T.T, dual_dom, dual_tgt, n, **kwargs)
    method = est.method if est.method == "svd" else "duality"
    return WidthEstimate(n, est.value, est.kind, method)


# ---------------------------------------------------------------------------
# Finite-set widths
# ---------------------------------------------------------------------------


def _frame_from_angles(theta, m, n):
    """Map n*(m-1) angles to an m x n orthonormal-ish frame."""
    cols = []
    for i in range(n):
        ang = theta[i * (m - 1):(i + 1) * (m - 1)]
        v = np.ones(1)
        for a in ang:
            v = np.concatenate([v * np.cos(a), [np.sin(a)]])
        cols.append(v)
    return np.stack(cols, axis=1)


def _max_dist(points, basis, space):
    if space.is_inner_product:
        A = space.metric_factor()
        Z = points @ A.T
        if basis.shape[1]:
            q, _ = np.linalg.qr(A @ basis)
            proj = Z @ q
            d2 = np.einsum("ij,ij->i", Z, Z) - np.einsum("ij,ij->i", proj, proj)
        else:
            d2 = np.einsum("ij,ij->i", Z, Z)
        return float(np.sqrt(np.maximum(d2, 0.0).max()))
    if basis.shape[1] == 0:
        return float(np.max(space.norm(points)))
    V = Subspace(basis, space)
    return float(max(dist_to_subspace(p, V).value for p in points))


def brute_force_width(points, space: NormedSpace, n: int,
                      grid=7, tol=1e-6) -> WidthEstimate:
    """Certified minimax over subspaces by grid refinement (tiny regime only).

    Regime: m <= 4, n <= 2, at most 16 points; outside it a RegimeError
    instructs the caller to fall back to ``alternating_minimax``.
    """
    points = np.asarray(points, dtype=float)
    n_pts, m = points.shape
    if m > 4 or n > 2 or n_pts > 16:
        raise RegimeError("outside the certified brute-force regime")
    if n == 0:
        return WidthEstimate(0, float(np.max(space.norm(points))), "exact",
                             "brute_force")
    rank = np.linalg.matrix_rank(points, tol=1e-12)
    if n >= rank:
        return WidthEstimate(n, 0.0, "exact", "brute_force")

    d = n * (m - 1)
    # multistart grid refinement: the minimax objective has several basins
    # in angle space, so the top separated candidates are refined in
    # parallel instead of collapsing onto the first local minimum
    centers = [np.zeros(d)]
    width = np.pi
    best_val = np.inf
    for _ in range(40):
        cand = []
        for c in centers:
            axes = [np.linspace(c[i] - width / 2, c[i] + width / 2, grid)
                    for i in range(d)]
            for theta in itertools.product(*axes):
                theta = np.array(theta)
                basis = _frame_from_angles(theta, m, n)
                if n > 1 and np.linalg.matrix_rank(basis, tol=1e-8) < n:
                    continue
                cand.append((_max_dist(points, basis, space), theta))
        cand.sort(key=lambda t: t[0])
        best_val = min(best_val, cand[0][0])
        sep = width / (grid - 1)
        centers = []
        for val, theta in cand:
            if all(np.abs(theta - c).max() > sep for c in centers):
                centers.append(theta)
            if len(centers) == 3:
                break
        width *= 0.5
        if width < tol:
            break
    kind = "exact" if width < tol else "upper"
    return WidthEstimate(n, best_val, kind, "brute_force")


def alternating_minimax(points, space: NormedSpace, n: int,
                        restarts=4, seed=0, iters=80) -> WidthEstimate:
    """Heuristic upper bound on d_n of a finite set.

    Alternates worst-point identification with a descent step on an
    orthonormal frame (QR retraction); deterministic given the seed, and
    the reported value is max-dist of an explicit subspace, hence a true
    upper bound for the discrete set.
    """
    points = np.asarray(points, dtype=float)
    n_pts, m = points.shape
    if n == 0:
        return WidthEstimate(0, float(np.max(space.norm(points))), "upper",
                             "alternating_minimax")
    if n >= min(m, np.linalg.matrix_rank(points, tol=1e-12)):
        return WidthEstimate(n, 0.0, "upper", "alternating_minimax")

    rng = np.random.default_rng(seed)
    inits = []
    # deterministic inits: worst-norm points, PCA; then random restarts
    order = np.argsort(-space.norm(points), kind="stable")
    inits.append(points[order[:n]].T)
    u, s, vt = np.linalg.svd(points - points.mean(0), full_matrices=False)
    inits.append(vt[:n].T)
    for _ in range(max(0, restarts - 2)):
        inits.append(rng.normal(size=(m, n)))

    best = np.inf
    for W0 in inits:
        W, _ = np.linalg.qr(W0)
        if W.shape[1] < n:
            continue
        val = _max_dist(points, W, space)
        best = min(best, val)
        lr = 0.5
        for _ in range(iters):
            W_new = _minimax_step(points, W, space, lr)
            v_new = _max_dist(points, W_new, space)
            if v_new < val - 1e-14:
                W, val = W_new, v_new
                lr *= 1.1
            else:
                lr *= 0.5
                if lr < 1e-10:
                    break
            best = min(best, val)
    return WidthEstimate(n, float(best), "upper", "alternating_minimax")


def _minimax_step(points, W, space, lr):
    """One descent step on the frame at the current worst point."""
    if space.is_inner_product:
        A = space.metric_factor()
        Z = points @ A.T
        q, _ = np.linalg.qr(A @ W)
        proj = Z @ q
        d2 = np.einsum("ij,ij->i", Z, Z) - np.einsum("ij,ij->i", proj, proj)
        i = int(np.argmax(d2))
        f = points[i]
        c = q.T @ (A @ f)
        r = A @ f - q @ c
        nr = np.linalg.norm(r)
        if nr == 0:
            return W
        G = -np.linalg.solve(A, r / nr)[:, None] @ c[None, :]
    else:
        V = Subspace(W, space)
        dists, results = [], []
        for p in points:
            res = dist_to_subspace(p, V)
            dists.append(res.value)
            results.append(res)
        i = int(np.argmax(dists))
        res = results[i]
        r = points[i] - W @ res.minimizer
        nr = lp_norm(r, space.p)
        if nr == 0:
            return W
        if res.certificate is not None:
            g = res.certificate
        else:
            g = np.sign(r) * (np.abs(r) / nr) ** (space.p - 1.0)
        G = -g[:, None] @ res.minimizer[None, :]
    W_new, _ = np.linalg.qr(W - lr * G)
    return W_new

"""Subspaces and best-approximation solvers in l_p norms.

``dist_to_subspace`` computes min_c || f - B c || for the ambient norm:
least squares for inner-product norms, a linear program for p in {1, inf},
and damped Newton on a smoothed objective for the remaining exponents.
For p in {1, 2, inf} an optimal dual certificate is returned alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigError, DimensionError, RankError, SolverError
from .spaces import NormedSpace, conjugate_exponent, lp_norm

__all__ = [
    "Subspace",
    "DistanceResult",
    "dist_to_subspace",
    "dual_certificate",
    "gram_schmidt",
    "orthogonal_project",
]


class Subspace:
    """Span of independent basis columns inside a normed space."""

    def __init__(self, basis, space: NormedSpace):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.ndim != 2:
            raise DimensionError("basis must be an (m, k) array")
        if basis.shape[0] != space.dim:
            raise DimensionError(
                f"basis rows {basis.shape[0]} != space dim {space.dim}")
        self.space = space
        self.basis = basis
        basis.setflags(write=False)
        k = basis.shape[1]
        if k > 0:
            q, r = np.linalg.qr(basis)
            diag = np.abs(np.diag(r))
            scale = np.linalg.norm(basis, axis=0).max()
            if scale == 0 or np.min(diag) < 1e-10 * scale:
                raise RankError("basis columns are numerically dependent")
            self.cached_orthonormal = q
        else:
            self.cached_orthonormal = np.zeros((space.dim, 0))

    @classmethod
    def empty(cls, space: NormedSpace):
        return cls(np.zeros((space.dim, 0)), space)

    @property
    def k(self):
        return self.basis.shape[1]

    def contains(self, f, tol=1e-9):
        f = np.asarray(f, dtype=float)
        q = self.cached_orthonormal
        res = f - q @ (q.T @ f)
        return np.linalg.norm(res) <= tol * max(1.0, np.linalg.norm(f))


@dataclass
class DistanceResult:
    """Best-approximation value with minimizer and optional dual witness."""

    value: float
    minimizer: np.ndarray
    certificate: np.ndarray | None = None

    def to_json_dict(self):
        d = {"value": self.value, "minimizer": self.minimizer.tolist()}
        if self.certificate is not None:
            d["certificate"] = self.certificate.tolist()
        return d


def _norming_functional(f, space):
    """Unit dual functional b with <f, b> = ||f|| (None for f = 0)."""
    nf = space.norm(f)
    if nf < 1e-300:
        return None
    if space.weight is not None:
        return space.weight @ f / nf
    p = space.p
    if p == np.inf:
        b = np.zeros_like(f)
        i = int(np.argmax(np.abs(f)))
        b[i] = np.sign(f[i])
        return b
    if p == 1:
        return np.sign(f)
    return np.sign(f) * (np.abs(f) / nf) ** (p - 1.0)


def _lstsq_distance(f, basis, metric_factor=None):
    """Inner-product-norm distance via QR least squares."""
    if metric_factor is None:
        A_f, A_B = f, basis
    else:
        A_f, A_B = metric_factor @ f, metric_factor @ basis
    c, *_ = np.linalg.lstsq(A_B, A_f, rcond=None)
    res = A_f - A_B @ c
    return float(np.linalg.norm(res)), c, res


def _lp_distance_linprog(f, basis, p):
    """p in {1, inf} via an LP; returns (value, c, dual certificate)."""
    m, k = basis.shape
    if p == np.inf:
        # min t  s.t.  B c - t <= f,  -B c - t <= -f
        A_ub = np.block([[basis, -np.ones((m, 1))],
                         [-basis, -np.ones((m, 1))]])
        b_ub = np.concatenate([f, -f])
        cost = np.zeros(k + 1)
        cost[-1] = 1.0
        bounds = [(None, None)] * k + [(None, None)]
        nvar = k + 1
    else:
        # min sum(u)  s.t.  B c - u <= f,  -B c - u <= -f,  u >= 0
        A_ub = np.block([[basis, -np.eye(m)],
                         [-basis, -np.eye(m)]])
        b_ub = np.concatenate([f, -f])
        cost = np.concatenate([np.zeros(k), np.ones(m)])
        bounds = [(None, None)] * k + [(0, None)] * m
        nvar = k + m
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"linprog failed with status {res.status}",
                          best=None)
    c = res.x[:k]
    # LP duality: b = y_minus - y_plus is feasible for the dual with
    # ||b||_{p'} <= 1, b orthogonal to the basis, <f, b> = value.
    marg = res.ineqlin.marginals
    cert = marg[:m] - marg[m:]
    value = lp_norm(f - basis @ c, p)
    nrm = lp_norm(cert, conjugate_exponent(p))
    if nrm > 1e-12:
        cert = cert / nrm
    return float(value), c, cert


def _smooth_newton_distance(f, basis, p, max_iter=200):
    """1 < p < inf, p != 2: damped Newton on sum (r^2 + eps^2)^(p/2).

    For p < 2 the kink at r = 0 is annealed away with eps -> 1e-10;
    for p >= 2 the objective is already C^2 and eps = 0.
    """
    m, k = basis.shape
    scale = max(lp_norm(f, p), 1e-300)
    fs = f / scale
    _, c, _ = _lstsq_distance(fs, basis)
    eps_schedule = [0.0] if p >= 2 else [1e-2, 1e-4, 1e-6, 1e-8, 1e-10]

    def objective(r, eps):
        return float(np.sum((r * r + eps * eps) ** (p / 2.0)))

    total_iters = 0
    for eps in eps_schedule:
        for _ in range(max_iter):
            total_iters += 1
            r = fs - basis @ c
            s2 = r * r + eps * eps
            w = s2 ** ((p - 2.0) / 2.0)
            grad = -p * (basis.T @ (w * r))
            gnorm = np.linalg.norm(grad)
            if gnorm < 1e-14:
                break
            # curvature weights are >= (p-1) w > 0, Hessian is SPD
            h = w * (1.0 + (p - 2.0) * r * r / np.maximum(s2, 1e-300))
            H = p * (basis.T * h) @ basis
            lam = 1e-12 * max(1.0, np.trace(H) / k)
            try:
                step = np.linalg.solve(H + lam * np.eye(k), -grad)
            except np.linalg.LinAlgError:
                step = -grad
            f0 = objective(r, eps)
            t = 1.0
            improved = False
            for _ in range(40):
                c_try = c + t * step
                f1 = objective(fs - basis @ c_try, eps)
                if f1 <= f0 + 1e-4 * t * (grad @ step):
                    c = c_try
                    improved = True
                    break
                t *= 0.5
            if not improved or np.linalg.norm(t * step) < 1e-15 * (
                    1.0 + np.linalg.norm(c)):
                break
        if total_iters >= max_iter * len(eps_schedule):
            break
    r = fs - basis @ c
    # stationarity of the last smoothed objective: its minimum value is
    # within O(eps) of the true distance, so this certifies convergence
    # even when the exact residual has near-kink coordinates (p < 2)
    eps_last = eps_schedule[-1]
    w_last = (r * r + eps_last * eps_last) ** ((p - 2.0) / 2.0)
    grad = -p * (basis.T @ (w_last * r))
    if np.linalg.norm(grad) > 1e-6 * max(1.0, lp_norm(r, p) ** (p - 1.0)):
        raise SolverError("Newton iteration did not converge",
                          best=DistanceResult(float(scale * lp_norm(r, p)),
                                              scale * c))
    return float(scale * lp_norm(r, p)), scale * c


def dist_to_subspace(f, V: Subspace) -> DistanceResult:
    """Distance from ``f`` to ``V`` in the ambient norm of ``V.space``."""
    f = np.asarray(f, dtype=float)
    space = V.space
    if f.shape != (space.dim,):
        raise DimensionError(f"vector shape {f.shape} != ({space.dim},)")
    if V.k == 0:
        return DistanceResult(float(space.norm(f)), np.zeros(0),
                              _norming_functional(f, space))

    if space.weight is not None or space.p == 2:
        A = space.metric_factor() if space.weight is not None else None
        value, c, res = _lstsq_distance(f, V.basis, A)
        nrm = np.linalg.norm(res)
        if nrm > 1e-15:
            if space.weight is not None:
                # dual witness w.r.t. the plain pairing: b = A^T res / |res|
                cert = (space.metric_factor().T @ (res / nrm))
            else:
                cert = res / nrm
        else:
            cert = None
        return DistanceResult(value, c, cert)

    if space.p in (1.0, np.inf):
        value, c, cert = _lp_distance_linprog(f, V.basis, space.p)
        return DistanceResult(value, c, cert)

    value, c = _smooth_newton_distance(f, V.basis, space.p)
    r = f - V.basis @ c
    nr = lp_norm(r, space.p)
    cert = None
    if nr > 1e-15:
        # gradient of the norm at the residual: unit dual norm, attains the
        # distance, and first-order optimality makes it vanish on the basis
        cert = np.sign(r) * (np.abs(r) / nr) ** (space.p - 1.0)
    return DistanceResult(value, c, cert)


def dual_certificate(f, V: Subspace) -> np.ndarray:
    """Norm-one functional b with b _|_ V and <f, b> = dist(f, V).

    Only available for p in {1, 2, inf}.  If f lies in V the distance is
    zero and any unit functional vanishing on V works; a deterministic one
    built from the orthogonal complement is returned.
    """
    space = V.space
    if space.is_lp and space.p not in (1.0, 2.0, np.inf):
        raise ConfigError("dual certificates require p in {1, 2, inf}")
    res = dist_to_subspace(np.asarray(f, dtype=float), V)
    if res.value >= 1e-12 and res.certificate is not None:
        return res.certificate
    # degenerate: pick the first left-null direction of the basis
    if V.k >= space.dim:
        raise ConfigError("subspace spans the whole space; no functional exists")
    u, s, _ = np.linalg.svd(V.basis if V.k else np.zeros((space.dim, 1)))
    b = u[:, V.k].copy()
    p_prime = conjugate_exponent(space.p) if space.is_lp else 2.0
    return b / lp_norm(b, p_prime)


def gram_schmidt(vectors, metric: NormedSpace, strict=False):
    """Gram-Schmidt in the inner product of ``metric``.

    Returns (orthonormal vectors as columns, lower-triangular coefficient
    matrix C with input[l] = sum_j C[l, j] * phi_j and C[l, l] >= 0).
    Dependent inputs are dropped unless ``strict`` is set.
    """
    if not metric.is_inner_product:
        raise ConfigError("gram_schmidt requires an inner-product norm")
    A = metric.metric_factor()
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2:
        X = np.stack([np.asarray(v, dtype=float) for v in vectors])
    n = X.shape[0]
    Z = X @ A.T  # rows are metric-transformed inputs
    Q = []  # transformed orthonormal rows
    kept = []
    coeffs = np.zeros((n, n))
    for l in range(n):
        z = Z[l].copy()
        # two-pass re-orthogonalization keeps the Gram matrix at 1e-10
        for _ in range(2):
            for j, q in enumerate(Q):
                cj = q @ z
                coeffs[l, j] += cj
                z -= cj * q
        nz = np.linalg.norm(z)
        if nz < 1e-12 * max(np.linalg.norm(Z[l]), 1e-300):
            if strict:
                raise RankError(f"input vector {l} is dependent on its predecessors")
            continue
        coeffs[l, len(Q)] = nz
        Q.append(z / nz)
        kept.append(l)
    k = len(Q)
    Ainv = np.linalg.inv(A)
    ortho = np.stack([Ainv @ q for q in Q], axis=1) if k else np.zeros((X.shape[1], 0))
    return ortho, coeffs[:, :k], kept


def orthogonal_project(target, metric: NormedSpace, y):
    """Orthogonal projection of ``y`` onto ``target`` in the metric inner product.

    ``target`` may be a Subspace or an (m, k) basis array.  The projection
    is idempotent, self-adjoint and non-expansive in the metric norm.
    """
    if not metric.is_inner_product:
        raise ConfigError("orthogonal projection requires an inner-product norm")
    W = target.basis if isinstance(target, Subspace) else np.asarray(target, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    y = np.asarray(y, dtype=float)
    if W.shape[0] != metric.dim or y.shape[-1] != metric.dim:
        raise DimensionError("projection dimensions do not match the metric")
    if W.shape[1] == 0:
        return np.zeros_like(y)
    A = metric.metric_factor()
    q, _ = np.linalg.qr(A @ W)
    z = y @ A.T
    proj = (z @ q) @ q.T
    return np.linalg.solve(A, proj.T).T if proj.ndim > 1 else np.linalg.solve(A, proj)


def projector_matrix(target, metric: NormedSpace):
    """Matrix P of the metric-orthogonal projection onto ``target``."""
    W = target.basis if isinstance(target, Subspace) else np.asarray(target, dtype=float)
    A = metric.metric_factor()
    if W.shape[1] == 0:
        return np.zeros((metric.dim, metric.dim))
    q, _ = np.linalg.qr(A @ W)
    return np.linalg.solve(A, q @ q.T @ A)

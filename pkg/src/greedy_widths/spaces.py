"""Finite-dimensional normed spaces and compact-set surrogates.

A ``NormedSpace`` is R^m equipped with either an l_p norm (1 <= p <= inf)
or a weighted-Euclidean norm sqrt(x^T G x) with G symmetric positive
definite.  Compact sets are represented either as finite point clouds or
as the image of a unit ball under a matrix operator, discretized by a
seeded symmetric low-discrepancy sphere sample.  All sigma values computed
on such surrogates are lower bounds for the continuum quantities.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import ConfigError, DimensionError

__all__ = [
    "NormedSpace",
    "DualExponent",
    "CompactSet",
    "conjugate_exponent",
    "norm",
    "dual_pairing",
    "materialize",
    "sphere_sample",
]


def conjugate_exponent(p: float) -> float:
    """Return p' with 1/p + 1/p' = 1 (1' = inf, inf' = 1)."""
    if p == 1:
        return np.inf
    if p == np.inf:
        return 1.0
    if p == 2:
        return 2.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class DualExponent:
    """A Hoelder-conjugate exponent pair."""

    p: float
    p_prime: float = field(init=False)

    def __post_init__(self):
        if not (self.p >= 1):
            raise ConfigError(f"exponent p={self.p} must satisfy p >= 1")
        object.__setattr__(self, "p_prime", conjugate_exponent(self.p))


class NormedSpace:
    """R^dim with an l_p or weighted-Euclidean norm.

    Immutable after construction; safe to share across workers.
    """

    def __init__(self, dim, p=None, weight=None):
        if dim < 1 or int(dim) != dim:
            raise ConfigError(f"dim={dim} must be a positive integer")
        self.dim = int(dim)
        if (p is None) == (weight is None):
            raise ConfigError("exactly one of p / weight must be given")
        if p is not None:
            p = float(p)
            if not (p >= 1):
                raise ConfigError(f"p={p} must satisfy p >= 1 (or inf)")
            self.p = p
            self.weight = None
            self.chol = None
        else:
            G = np.asarray(weight, dtype=float)
            if G.shape != (self.dim, self.dim):
                raise DimensionError(f"weight shape {G.shape} != ({dim},{dim})")
            if not np.allclose(G, G.T, atol=1e-12 * max(1.0, np.abs(G).max())):
                raise ConfigError("weight matrix must be symmetric")
            G = 0.5 * (G + G.T)
            try:
                # Cholesky success certifies positive-definiteness; the
                # factor is kept so every norm evaluation is one matvec.
                L = np.linalg.cholesky(G)
            except np.linalg.LinAlgError as exc:
                raise ConfigError("weight matrix is not positive definite") from exc
            self.p = None
            self.weight = G
            self.chol = L
            G.setflags(write=False)
            L.setflags(write=False)

    # ---- constructors -------------------------------------------------

    @classmethod
    def lp(cls, dim, p):
        return cls(dim, p=p)

    @classmethod
    def weighted_euclidean(cls, G):
        G = np.asarray(G, dtype=float)
        return cls(G.shape[0], weight=G)

    # ---- predicates ---------------------------------------------------

    @property
    def is_lp(self):
        return self.p is not None

    @property
    def is_inner_product(self):
        """True when the norm comes from an inner product."""
        return self.weight is not None or self.p == 2

    def gram(self):
        """Inner-product matrix G (identity for l_2)."""
        if not self.is_inner_product:
            raise ConfigError("space norm is not induced by an inner product")
        if self.weight is not None:
            return self.weight
        return np.eye(self.dim)

    def metric_factor(self):
        """Upper-triangular A with norm(x) = ||A x||_2."""
        if not self.is_inner_product:
            raise ConfigError("space norm is not induced by an inner product")
        if self.weight is not None:
            return self.chol.T
        return np.eye(self.dim)

    @property
    def dual_p(self):
        if self.p is None:
            raise ConfigError("dual exponent undefined for weighted norm")
        return conjugate_exponent(self.p)

    # ---- evaluation ---------------------------------------------------

    def norm(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionError(f"vector length {x.shape[-1]} != dim {self.dim}")
        if self.weight is not None:
            return np.linalg.norm(x @ self.chol, axis=-1)
        return lp_norm(x, self.p)

    def __repr__(self):
        if self.is_lp:
            return f"NormedSpace(dim={self.dim}, p={self.p})"
        return f"NormedSpace(dim={self.dim}, weighted_euclidean)"

    def __eq__(self, other):
        if not isinstance(other, NormedSpace):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if self.is_lp != other.is_lp:
            return False
        if self.is_lp:
            return self.p == other.p
        return np.array_equal(self.weight, other.weight)

    def descriptor(self):
        """JSON-serializable description of the space."""
        if self.is_lp:
            return {"dim": self.dim, "p": "inf" if self.p == np.inf else self.p}
        return {"dim": self.dim, "weight": self.weight.tolist()}

    @classmethod
    def from_descriptor(cls, d):
        if "weight" in d:
            return cls.weighted_euclidean(np.asarray(d["weight"], dtype=float))
        p = np.inf if d["p"] in ("inf", "Infinity") else float(d["p"])
        return cls.lp(int(d["dim"]), p)


def lp_norm(x, p):
    x = np.asarray(x, dtype=float)
    if p == np.inf:
        return np.max(np.abs(x), axis=-1)
    if p == 1:
        return np.sum(np.abs(x), axis=-1)
    # scale for overflow/underflow safety on extreme magnitudes
    m = np.max(np.abs(x), axis=-1, keepdims=True)
    safe = np.where(m == 0, 1.0, m)
    val = np.sum((np.abs(x) / safe) ** p, axis=-1) ** (1.0 / p)
    return np.squeeze(m, axis=-1) * val


def norm(space: NormedSpace, x) -> float:
    """Norm of ``x`` in ``space`` (module-level convenience form)."""
    return float(space.norm(np.asarray(x, dtype=float)))


def dual_pairing(b, x) -> float:
    """Standard bilinear pairing <x, b> = sum_i b_i x_i."""
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if b.shape != x.shape:
        raise DimensionError(f"pairing shapes {b.shape} != {x.shape}")
    return float(b @ x)


# ---------------------------------------------------------------------------
# Compact sets
# ---------------------------------------------------------------------------


def sphere_sample(space: NormedSpace, count: int, seed: int) -> np.ndarray:
    """Symmetric low-discrepancy sample of the unit-norm boundary.

    Deterministic given ``seed``; closed under negation, hence ``count``
    must be even.
    """
    if count <= 0:
        raise ConfigError("sphere sample count must be positive")
    if count % 2 != 0:
        raise ConfigError("sphere sample count must be even (symmetric sample)")
    half = count // 2
    eng = qmc.Sobol(d=space.dim, scramble=True, seed=int(seed))
    u = eng.random(half)
    # avoid the degenerate 0/1 endpoints of the unit cube
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = ndtri(u)
    norms = space.norm(g)
    norms = np.where(norms == 0, 1.0, norms)
    pts = g / norms[:, None]
    return np.concatenate([pts, -pts], axis=0)


class CompactSet:
    """Finite surrogate for a compact subset of the target space.

    Either a finite point cloud, or the discretized image of a unit ball
    under a matrix operator (``T`` maps domain -> target).
    """

    def __init__(self, kind, points=None, matrix=None, domain=None,
                 sphere_samples=None, seed=0):
        self.kind = kind
        if kind == "point_cloud":
            pts = np.asarray(points, dtype=float)
            if pts.ndim != 2 or pts.shape[0] == 0:
                raise ConfigError("point cloud must be a non-empty 2-d array")
            self.points = pts
            pts.setflags(write=False)
            self.matrix = None
            self.domain = None
            self.sphere_samples = None
            self.seed = None
        elif kind == "operator_ball":
            T = np.asarray(matrix, dtype=float)
            if T.ndim != 2:
                raise ConfigError("operator matrix must be 2-d")
            if domain is None or domain.dim != T.shape[1]:
                raise DimensionError("operator domain dimension mismatch")
            if not sphere_samples:
                raise ConfigError("sphere_samples must be positive")
            self.points = None
            self.matrix = T
            T.setflags(write=False)
            self.domain = domain
            self.sphere_samples = int(sphere_samples)
            self.seed = int(seed)
        else:
            raise ConfigError(f"unknown compact-set kind {kind!r}")

    @classmethod
    def point_cloud(cls, points):
        return cls("point_cloud", points=points)

    @classmethod
    def operator_ball(cls, matrix, domain, sphere_samples, seed=0):
        return cls("operator_ball", matrix=matrix, domain=domain,
                   sphere_samples=sphere_samples, seed=seed)

    @property
    def target_dim(self):
        if self.kind == "point_cloud":
            return self.points.shape[1]
        return self.matrix.shape[0]

    def domain_sample(self):
        """The domain-sphere sample behind an operator ball."""
        if self.kind != "operator_ball":
            raise ConfigError("domain_sample only defined for operator balls")
        return sphere_sample(self.domain, self.sphere_samples, self.seed)

    def materialize(self) -> np.ndarray:
        """Finite point list representing the set; deterministic per seed."""
        if self.kind == "point_cloud":
            return self.points
        return self.domain_sample() @ self.matrix.T

    def fingerprint(self) -> str:
        pts = np.ascontiguousarray(self.materialize())
        return hashlib.sha256(pts.tobytes()).hexdigest()

    # ---- JSON wire format --------------------------------------------

    def to_json_dict(self):
        if self.kind == "point_cloud":
            return {"kind": "point_cloud", "points": self.points.tolist()}
        if not self.domain.is_lp:
            raise ConfigError("only l_p domains are serializable")
        p = "inf" if self.domain.p == np.inf else self.domain.p
        return {
            "kind": "operator_ball",
            "matrix": self.matrix.tolist(),
            "domain_p": p,
            "sphere_samples": self.sphere_samples,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d):
        if d["kind"] == "point_cloud":
            return cls.point_cloud(np.asarray(d["points"], dtype=float))
        if d["kind"] == "operator_ball":
            T = np.asarray(d["matrix"], dtype=float)
            p = np.inf if d["domain_p"] in ("inf", "Infinity") else float(d["domain_p"])
            domain = NormedSpace.lp(T.shape[1], p)
            return cls.operator_ball(T, domain, int(d["sphere_samples"]),
                                     int(d.get("seed", 0)))
        raise ConfigError(f"unknown compact-set kind {d.get('kind')!r}")

    @classmethod
    def from_json(cls, s):
        return cls.from_json_dict(json.loads(s))


def materialize(cset: CompactSet) -> np.ndarray:
    """Module-level convenience form of ``CompactSet.materialize``."""
    return cset.materialize()

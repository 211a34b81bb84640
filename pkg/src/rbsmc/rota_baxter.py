"""Rota-Baxter operators on square complex matrices.

An operator ``P`` of weight ``lam`` satisfies

    P(x) P(y) = P(x P(y)) + P(P(x) y) + lam P(x y)

for all ``x, y``.  Three concrete families are supported: scalar scaling
``P(X) = -lam X`` (weight ``lam``), the projection onto upper triangular
matrices along the strictly lower ones (weight -1), and an arbitrary linear
map given as an ``n^2 x n^2`` matrix acting on column-stacked matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyBasis
from .linalg import as_matrix, frobenius_norm

SCALAR = "scalar"
TRIANGULAR = "triangular"
GENERAL = "general"

MEMBERSHIP_TOL = 1e-9
HYP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RotaBaxterOperator:
    """Tagged operator descriptor.

    ``dim`` is ``None`` for the scalar and triangular families, which act on
    any square size.  ``matrix`` is only set for the general family.
    """

    kind: str
    weight: complex
    dim: Optional[int] = None
    matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def __call__(self, x):
        return apply(self, x)

    @property
    def is_complex(self) -> bool:
        if complex(self.weight).imag != 0.0:
            return True
        return self.matrix is not None and np.iscomplexobj(self.matrix)

    def to_dict(self) -> dict:
        if self.kind == SCALAR:
            return {"kind": SCALAR, "lambda": _scalar_to_json(self.weight)}
        if self.kind == TRIANGULAR:
            return {"kind": TRIANGULAR}
        out = {"kind": GENERAL, "weight": _scalar_to_json(self.weight),
               "map": np.real(self.matrix).tolist()}
        if np.iscomplexobj(self.matrix) and np.any(self.matrix.imag != 0):
            out["map_imag"] = self.matrix.imag.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RotaBaxterOperator":
        if not isinstance(data, dict) or "kind" not in data:
            raise ValueError("operator descriptor needs a 'kind' field")
        kind = data["kind"]
        if kind == SCALAR:
            if "lambda" not in data:
                raise ValueError("scalar operator needs 'lambda'")
            return scalar_scaling(_scalar_from_json(data["lambda"]))
        if kind == TRIANGULAR:
            return triangular_projection()
        if kind == GENERAL:
            if "map" not in data or "weight" not in data:
                raise ValueError("general operator needs 'weight' and 'map'")
            m = np.asarray(data["map"], dtype=float)
            if "map_imag" in data:
                m = m + 1j * np.asarray(data["map_imag"], dtype=float)
            return general_linear(m, _scalar_from_json(data["weight"]))
        raise ValueError(f"unknown operator kind {kind!r}")


def _scalar_to_json(z):
    z = complex(z)
    if z.imag == 0.0:
        return z.real
    return {"re": z.real, "im": z.imag}


def _scalar_from_json(v) -> complex | float:
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def _clean_weight(lam):
    lam = complex(lam)
    if not np.isfinite(lam):
        raise ValueError("weight must be finite")
    return lam.real if lam.imag == 0.0 else lam


def scalar_scaling(lam) -> RotaBaxterOperator:
    """``P(X) = -lam X``, a Rota-Baxter operator of weight ``lam``."""
    return RotaBaxterOperator(SCALAR, _clean_weight(lam))


def triangular_projection() -> RotaBaxterOperator:
    """Projection onto upper triangular matrices along strictly lower ones (weight -1)."""
    return RotaBaxterOperator(TRIANGULAR, -1.0)


def general_linear(matrix, weight) -> RotaBaxterOperator:
    """Arbitrary linear map given by its ``n^2 x n^2`` matrix on column-stacked ``vec(X)``.

    No Rota-Baxter property is assumed; use :func:`rb_residual` to test it.
    """
    m = as_matrix(matrix, "map")
    side = int(round(np.sqrt(m.shape[0])))
    if m.shape[0] != m.shape[1] or side * side != m.shape[0]:
        raise DimensionMismatch(f"map must be n^2 x n^2, got {m.shape}")
    m = m.copy()
    m.setflags(write=False)
    return RotaBaxterOperator(GENERAL, _clean_weight(weight), side, m)


def peirce_corner(n: int = 2) -> RotaBaxterOperator:
    """The corner map ``X -> e11 X e11`` tagged with weight 0.

    It is idempotent but does not satisfy the weight-zero identity
    (``P(I)P(I) = e11`` while the right-hand side is ``2 e11``).
    """
    m = np.zeros((n * n, n * n))
    m[0, 0] = 1.0
    return general_linear(m, 0.0)


def _check(p: RotaBaxterOperator, *mats):
    out = []
    n = None
    for x in mats:
        x = as_matrix(x)
        if x.shape[0] != x.shape[1]:
            raise DimensionMismatch(f"expected square matrices, got {x.shape}")
        if n is None:
            n = x.shape[0]
        elif x.shape[0] != n:
            raise DimensionMismatch(f"matrix sizes differ: {n} vs {x.shape[0]}")
        out.append(x)
    if p.dim is not None and n is not None and n != p.dim:
        raise DimensionMismatch(f"operator acts on {p.dim}x{p.dim}, got {n}x{n}")
    return out


def _apply(p, x):
    if p.kind == SCALAR:
        return -p.weight * x
    if p.kind == TRIANGULAR:
        return np.triu(x)
    vec = x.reshape(-1, order="F")
    return (p.matrix @ vec).reshape(x.shape, order="F")


def apply(p: RotaBaxterOperator, x) -> np.ndarray:
    """Evaluate ``P(x)`` for a square matrix ``x``."""
    (x,) = _check(p, x)
    return _apply(p, x)


def _comm(a, b):
    return a @ b - b @ a


def rb_defect(p: RotaBaxterOperator, x, y) -> np.ndarray:
    """``P(x)P(y) - P(x P(y)) - P(P(x) y) - lam P(x y)``."""
    x, y = _check(p, x, y)
    px, py = _apply(p, x), _apply(p, y)
    return px @ py - _apply(p, x @ py) - _apply(p, px @ y) - p.weight * _apply(p, x @ y)


def rb_residual(p: RotaBaxterOperator, x, y) -> float:
    """Frobenius norm of the Rota-Baxter defect at ``(x, y)``."""
    return frobenius_norm(rb_defect(p, x, y))


def _bracket(p, x, y):
    return _comm(_apply(p, x), y) + _comm(x, _apply(p, y)) + p.weight * _comm(x, y)


def induced_bracket(p: RotaBaxterOperator, x, y) -> np.ndarray:
    """``[x, y]_P = [P(x), y] + [x, P(y)] + lam [x, y]``."""
    x, y = _check(p, x, y)
    return _bracket(p, x, y)


def jacobi_residual(p: RotaBaxterOperator, x, y, z) -> float:
    """Frobenius norm of the cyclic Jacobi sum for the induced bracket."""
    x, y, z = _check(p, x, y, z)
    total = (_bracket(p, _bracket(p, x, y), z)
             + _bracket(p, _bracket(p, y, z), x)
             + _bracket(p, _bracket(p, z, x), y))
    return frobenius_norm(total)


@dataclass(frozen=True, eq=False)
class BracketWitness:
    """The three weight-proportional cyclic sums left after expanding the Jacobi sum."""

    g1: np.ndarray
    g2: np.ndarray
    h: np.ndarray

    @property
    def sum(self) -> np.ndarray:
        return self.g1 + self.h + self.g2


def group3_witness(p: RotaBaxterOperator, x, y, z) -> BracketWitness:
    """Cyclic sums ``G1 = lam S[[P(x),y],z]``, ``G2 = lam S[[x,y],P(z)]``, ``H = lam S[[x,P(y)],z]``.

    ``S`` runs over the cyclic shifts ``(x,y,z) -> (y,z,x) -> (z,x,y)``.
    """
    x, y, z = _check(p, x, y, z)
    lam = p.weight
    shifts = ((x, y, z), (y, z, x), (z, x, y))
    g1 = sum(_comm(_comm(_apply(p, a), b), c) for a, b, c in shifts)
    g2 = sum(_comm(_comm(a, b), _apply(p, c)) for a, b, c in shifts)
    h = sum(_comm(_comm(a, _apply(p, b)), c) for a, b, c in shifts)
    return BracketWitness(lam * g1, lam * g2, lam * h)


def rb_comm_residual(p: RotaBaxterOperator, x, y) -> float:
    """Frobenius norm of ``P([x, y]_P) - [P(x), P(y)]``."""
    x, y = _check(p, x, y)
    return frobenius_norm(_apply(p, _bracket(p, x, y)) - _comm(_apply(p, x), _apply(p, y)))


def commute_with_output(p: RotaBaxterOperator, c, m) -> float:
    """Frobenius norm of ``C P(M) - P(C M)`` (square ``C`` only)."""
    c, m = _check(p, c, m)
    return frobenius_norm(c @ _apply(p, m) - _apply(p, c @ m))


@dataclass(frozen=True, eq=False)
class LieCompatReport:
    closed_under_p: bool
    hyp_residual: float
    witness: Optional[tuple] = None
    membership_residual: float = 0.0

    def to_dict(self) -> dict:
        out = {"closed_under_p": self.closed_under_p,
               "hyp_residual": self.hyp_residual,
               "membership_residual": self.membership_residual,
               "witness": None}
        if self.witness is not None:
            out["witness"] = [np.real(w).tolist() for w in self.witness]
        return out


def _orthonormal_span(vectors):
    """Modified Gram-Schmidt; drops vectors that are dependent to 1e-12."""
    q = []
    for v in vectors:
        w = v.astype(np.complex128)
        scale = np.linalg.norm(w)
        for u in q:
            w = w - np.vdot(u, w) * u
        nrm = np.linalg.norm(w)
        if nrm > 1e-12 * max(scale, 1.0):
            q.append(w / nrm)
    return q


def lie_compat_check(p: RotaBaxterOperator, basis: Sequence) -> LieCompatReport:
    """Test ``P(g) in span(basis)`` and ``P([X, Y]) = [X, P(Y)]`` over basis pairs.

    The reported witness is the first violating pair in basis order; the
    reported residual is the worst over all pairs.
    """
    if basis is None or len(basis) == 0:
        raise EmptyBasis("basis is empty")
    mats = _check(p, *basis)
    if all(frobenius_norm(g) == 0.0 for g in mats):
        raise EmptyBasis("basis spans only the zero matrix")

    span = _orthonormal_span([g.reshape(-1, order="F") for g in mats])
    worst_member = 0.0
    for g in mats:
        v = _apply(p, g).reshape(-1, order="F").astype(np.complex128)
        r = v.copy()
        for u in span:
            r = r - np.vdot(u, r) * u
        worst_member = max(worst_member, float(np.linalg.norm(r)) / (1.0 + float(np.linalg.norm(v))))

    worst = 0.0
    witness = None
    for a in mats:
        for b in mats:
            res = frobenius_norm(_apply(p, _comm(a, b)) - _comm(a, _apply(p, b)))
            scale = 1.0 + frobenius_norm(a) * frobenius_norm(b)
            if witness is None and res > HYP_TOL * scale:
                witness = (a, b)
            worst = max(worst, res)
    return LieCompatReport(worst_member <= MEMBERSHIP_TOL, worst, witness, worst_member)


def unit(n: int, i: int, j: int) -> np.ndarray:
    """Matrix unit ``e_ij`` (1-based indices)."""
    e = np.zeros((n, n))
    e[i - 1, j - 1] = 1.0
    return e


# -- batch property checks ----------------------------------------------------

RB_RTOL = 1e-12
JACOBI_RTOL = 1e-9
COMM_RTOL = 1e-10
GROUP3_RTOL = 1e-10


def operator_scale(p: RotaBaxterOperator) -> float:
    """Size of ``p`` used to make residual tolerances relative."""
    s = max(1.0, abs(complex(p.weight)))
    if p.matrix is not None:
        s = max(s, float(np.max(np.sum(np.abs(p.matrix), axis=1))))
    return s


def _random(rng, n, complex_):
    x = rng.standard_normal((n, n))
    if complex_:
        x = x + 1j * rng.standard_normal((n, n))
    return x


def property_suite(p: RotaBaxterOperator, samples=200, triples=100, dims=(2, 3, 4, 5), seed=0,
                   tolerance_scale=1.0) -> dict:
    """Random-sample checks of the Rota-Baxter identity and the induced-bracket properties.

    Each check reports the worst residual-to-tolerance ratio and the first
    failing input.  The identity is probed at ``(I, I)`` before random pairs.
    """
    rng = np.random.default_rng(seed)
    dims = [p.dim] if p.dim is not None else list(dims)
    sc = operator_scale(p)
    checks = {}

    def record(name, value, tol, args):
        c = checks.setdefault(name, {"samples": 0, "max_residual": 0.0, "max_ratio": 0.0,
                                     "ok": True, "witness": None})
        c["samples"] += 1
        c["max_residual"] = max(c["max_residual"], value)
        ratio = value / tol
        c["max_ratio"] = max(c["max_ratio"], ratio)
        if ratio > 1.0 and c["ok"]:
            c["ok"] = False
            c["witness"] = [np.real_if_close(a).tolist() if np.isrealobj(np.real_if_close(a))
                            else {"re": a.real.tolist(), "im": a.imag.tolist()} for a in args]

    for n in dims:
        eye = np.eye(n)
        record("rb_identity", rb_residual(p, eye, eye), tolerance_scale * RB_RTOL * (1 + n) * sc ** 3,
               (eye, eye))
        for _ in range(samples):
            x, y = _random(rng, n, True), _random(rng, n, True)
            scale = (1.0 + frobenius_norm(x) * frobenius_norm(y)) * sc ** 3
            record("rb_identity", rb_residual(p, x, y), tolerance_scale * RB_RTOL * scale, (x, y))
            record("rb_comm", rb_comm_residual(p, x, y), tolerance_scale * COMM_RTOL * scale, (x, y))
        for _ in range(triples):
            x, y, z = (_random(rng, n, True) for _ in range(3))
            scale = (1.0 + frobenius_norm(x) * frobenius_norm(y) * frobenius_norm(z)) * sc ** 4
            record("jacobi", jacobi_residual(p, x, y, z), tolerance_scale * JACOBI_RTOL * scale,
                   (x, y, z))
            w = group3_witness(p, x, y, z)
            record("group3_sum", frobenius_norm(w.sum), tolerance_scale * GROUP3_RTOL * scale,
                   (x, y, z))
    return {"operator": p.to_dict(), "dims": dims, "checks": checks,
            "ok": all(c["ok"] for c in checks.values())}

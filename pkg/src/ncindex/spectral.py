"""Finite-dimensional spectral models and heat-kernel machinery.

A model is a finite Hilbert space with a self-adjoint matrix D, a unitary
(anti-)representation r of a finite group with r(gh) = r(h) r(g) and
[D, r(g)] = 0, and multiplication operators for the function algebra of a
finite point set M.  Even models carry a grading that anticommutes with D.

Simplex-ordered heat integrals are evaluated exactly (up to float) in the
eigenbasis of D through divided differences of exp(-x); clustered nodes
switch to a symmetric series so the recursion never divides by a small gap.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from .algebra import GroupSpec, GSetSpec, cyclic_group, regular_gset, trivial_gset

CONSTRUCTION_TOL = 1e-12
#: node windows narrower than this are integrated by series, not recursion.
#: Wider than the 1e-6 cluster threshold the interface promises: the series
#: converges fast out to spread ~1, and the recursion is only well-conditioned
#: when the end gap is O(1), so the switch happens at 1.0.
CLUSTER_SPREAD = 1.0

SQRT_2I = cmath.exp(1j * math.pi / 4) * math.sqrt(2.0)  # principal branch of sqrt(2i)


class ModelError(ValueError):
    pass


class SpectralModel:
    """Hilbert space + (D, r, pi) data; invariants checked at construction."""

    def __init__(self, group: GroupSpec, gset: GSetSpec, D, rep, pi,
                 grading=None, parity: str | None = None, meta=None,
                 tol: float = CONSTRUCTION_TOL):
        self.group = group
        self.gset = gset
        self.D = np.asarray(D, dtype=complex)
        self.dim = self.D.shape[0]
        self.rep = [np.asarray(r, dtype=complex) for r in rep]
        self.pi = [np.asarray(p, dtype=complex) for p in pi]
        self.grading = None if grading is None else np.asarray(grading, dtype=complex)
        self.parity = parity or ("even" if grading is not None else "odd")
        self.meta = meta or {}
        self.tol = tol
        self._eig = None
        self._validate()

    # -- invariants ----------------------------------------------------------

    def _validate(self):
        tol = self.tol
        D = self.D
        if D.shape != (self.dim, self.dim):
            raise ModelError("D is not square")
        if np.linalg.norm(D - D.conj().T) > tol:
            raise ModelError("D is not self-adjoint")
        if len(self.rep) != self.group.order:
            raise ModelError("one unitary per group element required")
        eye = np.eye(self.dim)
        for g, r in enumerate(self.rep):
            if np.linalg.norm(r @ r.conj().T - eye) > tol:
                raise ModelError(f"r({self.group.names[g]}) is not unitary")
            if np.linalg.norm(D @ r - r @ D) > tol:
                raise ModelError(f"[D, r({self.group.names[g]})] != 0")
        for g in range(self.group.order):
            for h in range(self.group.order):
                gh = self.group.mul(g, h)
                if np.linalg.norm(self.rep[gh] - self.rep[h] @ self.rep[g]) > tol:
                    raise ModelError(
                        f"r not anti-multiplicative at ({self.group.names[g]},{self.group.names[h]})")
        if self.parity == "even":
            G = self.grading
            if G is None:
                raise ModelError("even model needs a grading")
            if np.linalg.norm(G @ G - eye) > tol or np.linalg.norm(G - G.conj().T) > tol:
                raise ModelError("grading must be a self-adjoint involution")
            if np.linalg.norm(G @ D + D @ G) > tol:
                raise ModelError("grading must anticommute with D")
            for g, r in enumerate(self.rep):
                if np.linalg.norm(G @ r - r @ G) > tol:
                    raise ModelError(f"r({self.group.names[g]}) is not even")
        if len(self.pi) != self.gset.size:
            raise ModelError("one multiplication projector per point required")
        acc = np.zeros_like(D)
        for x, p in enumerate(self.pi):
            if np.linalg.norm(p @ p - p) > tol or np.linalg.norm(p - p.conj().T) > tol:
                raise ModelError(f"pi({self.gset.points[x]}) is not an orthogonal projector")
            acc = acc + p
        if np.linalg.norm(acc - eye) > tol:
            raise ModelError("point projectors do not sum to the identity")
        for g in range(self.group.order):
            r = self.rep[g]
            for x in range(self.gset.size):
                gx = self.gset.act(self.group.inv(g), x)
                if np.linalg.norm(r @ self.pi[x] @ r.conj().T - self.pi[gx]) > tol:
                    raise ModelError(
                        f"pi not covariant at ({self.group.names[g]},{self.gset.points[x]})")

    # -- helpers ---------------------------------------------------------

    def eig(self):
        if self._eig is None:
            evals, evecs = np.linalg.eigh(self.D)
            self._eig = (evals.real, evecs)
        return self._eig

    def pi_of_values(self, values) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for x, v in enumerate(values):
            out += complex(v) * self.pi[x]
        return out

    def tau(self, mat) -> complex:
        """Supertrace (even) or sqrt(2i) . trace (odd)."""
        if self.parity == "even":
            return complex(np.trace(self.grading @ mat))
        return SQRT_2I * complex(np.trace(mat))

    def str_trace(self, mat) -> complex:
        if self.parity == "even":
            return complex(np.trace(self.grading @ mat))
        return complex(np.trace(mat))

    def __repr__(self):
        return f"SpectralModel(dim={self.dim}, parity={self.parity}, G={self.group.order})"


# ---------------------------------------------------------------------------
# heat semigroup and simplex brackets


def heat(model: SpectralModel, s: float) -> np.ndarray:
    """exp(-s D^2)."""
    if s < 0:
        raise ValueError("heat parameter must be nonnegative")
    evals, U = model.eig()
    return (U * np.exp(-s * evals**2)) @ U.conj().T


def _hom_sym_terms(y, jmax):
    """Complete homogeneous symmetric polynomials h_0..h_jmax of the nodes y."""
    h = [1.0] + [0.0] * jmax
    for yk in y:
        # h_j(y_1..y_k) = h_j(y_1..y_{k-1}) + y_k h_{j-1}(y_1..y_k)
        for j in range(1, jmax + 1):
            h[j] = h[j] + yk * h[j - 1]
    return h


@lru_cache(maxsize=200000)
def _phi(nodes: tuple) -> float:
    """int_{simplex_m} exp(-sum s_i x_i) ds  for sorted nodes (x_0..x_m)."""
    m = len(nodes) - 1
    if m == 0:
        return math.exp(-nodes[0])
    spread = nodes[-1] - nodes[0]
    if spread <= CLUSTER_SPREAD:
        c = sum(nodes) / (m + 1)
        y = [x - c for x in nodes]
        jmax = 40
        h = _hom_sym_terms(y, jmax)
        acc = 0.0
        fact = math.factorial(m)
        for j in range(jmax + 1):
            term = ((-1) ** j) * h[j] / fact
            acc += term
            fact *= (j + m + 1)
            if abs(term) < 1e-22 * max(1.0, abs(acc)) and j > 4:
                break
        return math.exp(-c) * acc
    return (_phi(nodes[:-1]) - _phi(nodes[1:])) / spread


def simplex_volume_weights(nodes) -> float:
    return _phi(tuple(sorted(float(x) for x in nodes)))


def simplex_bracket(model: SpectralModel, mats, t: float) -> np.ndarray:
    """<A_1, ..., A_n>_t with heat factors exp(-s_i t^2 D^2) interleaved."""
    if t <= 0:
        raise ValueError("simplex bracket needs t > 0")
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if not mats:
        return heat(model, t * t)
    evals, U = model.eig()
    x = (t * t) * evals**2
    tilde = [U.conj().T @ m @ U for m in mats]
    n = len(mats)
    dim = model.dim
    out = np.zeros((dim, dim), dtype=complex)
    # path sum over the eigenbasis; Phi is symmetric so nodes are sorted
    idx = [0] * (n - 1)

    def paths(prefix_val, prefix_nodes, depth, row):
        if depth == n - 1:
            last = tilde[n - 1]
            for col in range(dim):
                v = prefix_val * last[row, col]
                if v == 0:
                    continue
                nodes = tuple(sorted(prefix_nodes + (x[col],)))
                out[prefix_row, col] += v * _phi(nodes)
            return
        mat = tilde[depth]
        for k in range(dim):
            v = prefix_val * mat[row, k]
            if v != 0:
                paths(v, prefix_nodes + (x[k],), depth + 1, k)

    for prefix_row in range(dim):
        paths(1.0, (x[prefix_row],), 0, prefix_row)
    return U @ out @ U.conj().T


# ---------------------------------------------------------------------------
# traces and index oracles


def equivariant_trace(model: SpectralModel, g: int, t: float) -> complex:
    """Str(r(g) exp(-t^2 D^2)) for even models, Tr(...) for odd ones."""
    if t <= 0:
        raise ValueError("equivariant trace needs t > 0")
    return model.str_trace(model.rep[g] @ heat(model, t * t))


def mckean_singer(model: SpectralModel, tgrid=None,
                  kernel_tol: float = 1e-9, ambiguous=(1e-11, 1e-7)):
    """Index of D+ by rank count, cross-checked against Str(exp(-t^2 D^2)).

    Returns (index, drift) where drift is the worst deviation of the
    supertrace from the integer index over the t grid.
    """
    if model.parity != "even":
        raise ModelError("McKean-Singer needs an even model")
    gr = np.real(np.diag(model.grading))
    plus = np.where(gr > 0)[0]
    minus = np.where(gr < 0)[0]
    Dplus = model.D[np.ix_(minus, plus)]  # maps H+ -> H-
    sv = np.linalg.svd(Dplus, compute_uv=False) if min(Dplus.shape) else np.array([])
    for s in sv:
        if ambiguous[0] <= s <= ambiguous[1]:
            raise ModelError(f"indeterminate kernel: singular value {s:g}")
    rank = int(np.sum(sv > kernel_tol))
    index = (len(plus) - rank) - (len(minus) - rank)
    tgrid = np.linspace(0.2, 2.0, 10) if tgrid is None else tgrid
    drift = max(abs(model.str_trace(heat(model, t * t)) - index) for t in tgrid)
    return index, drift


def schatten_norm(mat, p: float) -> float:
    if p < 1:
        raise ValueError("Schatten norm needs p >= 1")
    sv = np.linalg.svd(np.asarray(mat, dtype=complex), compute_uv=False)
    return float(np.sum(sv**p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# model constructors


def circle_dirac(lam: int, rotation_order: int, haar: str = "normalized",
                 twist: float = 0.0) -> SpectralModel:
    """Dirac operator on Fourier modes |n| <= lam of the circle, odd parity.

    The cyclic group of rotations acts by phases; twist shifts the spectrum
    (no twist: D = diag(n))."""
    if lam < 1:
        raise ValueError("lam >= 1 required")
    group = cyclic_group(rotation_order, haar=haar)
    modes = list(range(-lam, lam + 1))
    dim = len(modes)
    D = np.diag(np.array(modes, dtype=float) + twist)
    rep = []
    for k in range(rotation_order):
        # reduce k*n mod N exactly before multiplying by 2 pi / N, otherwise the
        # angle error grows with the mode number and breaks the 1e-12 checks
        red = np.array([(k * n) % rotation_order for n in modes], dtype=float)
        rep.append(np.diag(np.exp(2j * math.pi * red / rotation_order)))
    gset = trivial_gset(group, 1)
    pi = [np.eye(dim)]
    return SpectralModel(group, gset, D, rep, pi, parity="odd",
                         meta={"kind": "circle", "lam": lam, "order": rotation_order,
                               "modes": modes, "twist": twist})


def torus2_dirac(lam: int, lift_sign: int = 1, haar: str = "normalized") -> SpectralModel:
    """Dirac operator on the 2-torus window |n_i| <= lam, even parity.

    The point inversion x -> -x acts on modes by n -> -n and on spinors by
    lift_sign * diag(i, -i); its square is -1, so the symmetry group is the
    cyclic double cover of order four.
    """
    if lam < 1:
        raise ValueError("lam >= 1 required")
    if lift_sign not in (1, -1):
        raise ValueError("lift_sign must be +1 or -1")
    group = cyclic_group(4, haar=haar)
    modes = [(n1, n2) for n1 in range(-lam, lam + 1) for n2 in range(-lam, lam + 1)]
    pos = {m: i for i, m in enumerate(modes)}
    nm = len(modes)
    dim = 2 * nm

    def bi(mode_i, spinor):
        return 2 * mode_i + spinor

    D = np.zeros((dim, dim), dtype=complex)
    for i, (n1, n2) in enumerate(modes):
        D[bi(i, 1), bi(i, 0)] = n1 + 1j * n2   # D+ on chirality +
        D[bi(i, 0), bi(i, 1)] = n1 - 1j * n2
    grading = np.zeros((dim, dim), dtype=complex)
    for i in range(nm):
        grading[bi(i, 0), bi(i, 0)] = 1.0
        grading[bi(i, 1), bi(i, 1)] = -1.0
    U = np.zeros((dim, dim), dtype=complex)
    for i, (n1, n2) in enumerate(modes):
        j = pos[(-n1, -n2)]
        U[bi(j, 0), bi(i, 0)] = 1j * lift_sign
        U[bi(j, 1), bi(i, 1)] = -1j * lift_sign
    rep = [np.eye(dim, dtype=complex), U, U @ U, U @ U @ U]
    gset = trivial_gset(group, 1)
    pi = [np.eye(dim)]
    return SpectralModel(group, gset, D, rep, pi, grading=grading, parity="even",
                         meta={"kind": "torus2", "lam": lam, "lift_sign": lift_sign,
                               "modes": modes})


def _random_unitary(rng, n: int) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_model(seed: int, dim: int = 4, parity: str = "even",
                 haar: str = "discrete") -> SpectralModel:
    """Random Z/2 model on a two-point swap set; all invariants hold exactly.

    dim counts the total Hilbert dimension; the fiber over each of the two
    points has dimension dim/2 (graded (f/2 | f/2) in the even case).
    """
    if dim % 2:
        raise ValueError("dim must be even (two-point base)")
    fib = dim // 2
    if parity == "even" and fib % 2:
        raise ValueError("even parity needs dim divisible by 4")
    rng = np.random.default_rng(seed)
    group = cyclic_group(2, haar=haar)
    gset = GSetSpec(group, ["x", "y"], [[0, 1], [1, 0]])
    perm = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(fib))
    if parity == "even":
        half = fib // 2
        gfib = np.diag([1.0] * half + [-1.0] * half)
        # fiber involution, block diagonal so r stays even
        u = np.zeros((fib, fib), dtype=complex)
        for blk in (slice(0, half), slice(half, fib)):
            v = _random_unitary(rng, half)
            signs = np.diag(rng.choice([1.0, -1.0], size=half))
            u[blk, blk] = v @ signs @ v.conj().T
        grading = np.kron(np.eye(2), gfib)
    else:
        v = _random_unitary(rng, fib)
        signs = np.diag(rng.choice([1.0, -1.0], size=fib))
        u = v @ signs @ v.conj().T
        grading = None
    r1 = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(fib)) @ np.kron(np.eye(2), u)
    H = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    D = (H + H.conj().T) / 2
    if parity == "even":
        D = (D - grading @ D @ grading) / 2  # odd part
    D = (D + r1 @ D @ r1.conj().T) / 2       # group average
    rep = [np.eye(dim, dtype=complex), r1]
    pi = [np.kron(np.diag([1.0, 0.0]), np.eye(fib)),
          np.kron(np.diag([0.0, 1.0]), np.eye(fib))]
    return SpectralModel(group, gset, D, rep, pi, grading=grading, parity=parity,
                         meta={"kind": "random", "seed": seed})


def finite_regular_model(group: GroupSpec, fiber_plus: int = 1, fiber_minus: int = 1,
                         seed: int = 0, parity: str = "even") -> SpectralModel:
    """Even (or odd) model over the regular G-set with a graded fiber."""
    gset = regular_gset(group)
    n = group.order
    fib = fiber_plus + fiber_minus if parity == "even" else fiber_plus
    dim = n * fib
    rng = np.random.default_rng(seed)
    perm = np.zeros((n, n))
    reps = []
    for g in range(n):
        P = np.zeros((n, n))
        ginv = group.inv(g)
        for x in range(n):
            P[gset.act(ginv, x), x] = 1.0
        reps.append(np.kron(P, np.eye(fib)))
    if parity == "even":
        gfib = np.diag([1.0] * fiber_plus + [-1.0] * fiber_minus)
        grading = np.kron(np.eye(n), gfib)
    else:
        grading = None
    H = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    D = (H + H.conj().T) / 2
    if parity == "even":
        D = (D - grading @ D @ grading) / 2
    acc = np.zeros_like(D)
    for r in reps:
        acc += r @ D @ r.conj().T
    D = acc / n
    pi = [np.kron(np.diag([1.0 if y == x else 0.0 for y in range(n)]), np.eye(fib))
          for x in range(n)]
    return SpectralModel(group, gset, D, reps, pi, grading=grading, parity=parity,
                         meta={"kind": "finite-regular", "seed": seed})


def point_model(group: GroupSpec, D, rep, grading=None, parity=None, meta=None) -> SpectralModel:
    """Model whose function algebra is the constants (one-point base)."""
    gset = trivial_gset(group, 1)
    dim = np.asarray(D).shape[0]
    return SpectralModel(group, gset, D, rep, [np.eye(dim)], grading=grading,
                         parity=parity, meta=meta)

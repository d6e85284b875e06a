"""Finite groups, G-sets and exact finite-dimensional algebras.

Conventions fixed here and relied on everywhere else:

* The convolution product on a group algebra uses the right-invariant Haar
  weight w:  (b1*b2)(g) = sum_h w(h) b1(h) b2(g h^-1).  On delta functions
  this reads  delta_a * delta_b = w(a) * delta_{ba}  -- note the reversal;
  concatenation products of group elements therefore read right-to-left,
  matching the anti-homomorphism convention r(gh) = r(h) r(g) used by the
  spectral models.
* Haar weights are constant per group ("discrete": w = 1, "normalized":
  w = 1/|G|).  Right invariance is then automatic and convolution stays
  associative.
* The crossed product of a function algebra on a finite G-set M with G has
  basis delta_{(g,x)} and product
  delta_{(a,u)} * delta_{(b,v)} = w(a) [v == a.u] delta_{(ba, u)}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import scalars


class ConstructionError(ValueError):
    """A table failed one of its structural checks (named triple included)."""


# ---------------------------------------------------------------------------
# groups


class GroupSpec:
    """A finite group given by element names and a multiplication table."""

    def __init__(self, names: Sequence[str], mul: Sequence[Sequence[int]],
                 haar: str | Sequence[Fraction] = "discrete", check: bool = True):
        self.names = tuple(str(n) for n in names)
        self.order = len(self.names)
        self.mul_table = tuple(tuple(int(k) for k in row) for row in mul)
        if isinstance(haar, str):
            if haar == "discrete":
                w = Fraction(1)
            elif haar == "normalized":
                w = Fraction(1, self.order)
            else:
                raise ValueError(f"unknown haar mode {haar!r}")
            self.haar = (w,) * self.order
        else:
            self.haar = tuple(Fraction(x) for x in haar)
            if len(set(self.haar)) != 1:
                raise ConstructionError("Haar weight must be constant (right invariance)")
        if any(w < 0 for w in self.haar):
            raise ConstructionError("Haar weights must be nonnegative")
        if check:
            self._check_group_law()
        self.unit = self._find_unit()
        self.inv_table = self._find_inverses()

    # -- structure checks ---------------------------------------------------

    def _check_group_law(self):
        n = self.order
        mul = self.mul_table
        for row in mul:
            if len(row) != n or any(not 0 <= k < n for k in row):
                raise ConstructionError("multiplication table is not square over the element list")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if mul[mul[i][j]][k] != mul[i][mul[j][k]]:
                        raise ConstructionError(
                            f"associativity fails on triple ({self.names[i]},{self.names[j]},{self.names[k]})")

    def _find_unit(self) -> int:
        for e in range(self.order):
            if all(self.mul_table[e][j] == j and self.mul_table[j][e] == j
                   for j in range(self.order)):
                return e
        raise ConstructionError("no two-sided unit in multiplication table")

    def _find_inverses(self):
        inv = []
        for i in range(self.order):
            row = [j for j in range(self.order) if self.mul_table[i][j] == self.unit]
            if len(row) != 1 or self.mul_table[row[0]][i] != self.unit:
                raise ConstructionError(f"element {self.names[i]} has no two-sided inverse")
            inv.append(row[0])
        return tuple(inv)

    # -- group protocol -----------------------------------------------------

    def mul(self, i: int, j: int) -> int:
        return self.mul_table[i][j]

    def inv(self, i: int) -> int:
        return self.inv_table[i]

    def concat(self, indices: Sequence[int]) -> int:
        """Convolution-order product g_n ... g_1 of a tuple (g_1, ..., g_n)."""
        g = self.unit
        for i in indices:
            g = self.mul(i, g)
        return g

    def weight(self, i: int) -> Fraction:
        return self.haar[i]

    def __len__(self):
        return self.order

    def __repr__(self):
        return f"GroupSpec({self.order} elements, unit={self.names[self.unit]})"


def cyclic_group(n: int, haar: str = "discrete") -> GroupSpec:
    names = [f"g{k}" if k else "1" for k in range(n)]
    mul = [[(i + j) % n for j in range(n)] for i in range(n)]
    return GroupSpec(names, mul, haar=haar)


def product_group(a: GroupSpec, b: GroupSpec, haar: str = "discrete") -> GroupSpec:
    names = [f"({a.names[i]},{b.names[j]})" for i in range(a.order) for j in range(b.order)]

    def idx(i, j):
        return i * b.order + j

    mul = [[idx(a.mul(i1, i2), b.mul(j1, j2))
            for i2 in range(a.order) for j2 in range(b.order)]
           for i1 in range(a.order) for j1 in range(b.order)]
    return GroupSpec(names, mul, haar=haar)


def group_from_table(text: str, haar: str = "discrete") -> GroupSpec:
    """Parse a plain-text table: first line element names, then rows of names."""
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    names = lines[0]
    pos = {n: k for k, n in enumerate(names)}
    mul = [[pos[entry] for entry in row] for row in lines[1:]]
    return GroupSpec(names, mul, haar=haar)


class GSetSpec:
    """A finite set with a left G-action, checked at construction."""

    def __init__(self, group: GroupSpec, points: Sequence[str], act: Sequence[Sequence[int]]):
        self.group = group
        self.points = tuple(str(p) for p in points)
        self.size = len(self.points)
        self.act_table = tuple(tuple(int(x) for x in row) for row in act)
        e = group.unit
        for x in range(self.size):
            if self.act_table[e][x] != x:
                raise ConstructionError(f"unit does not fix point {self.points[x]}")
        for g in range(group.order):
            for h in range(group.order):
                for x in range(self.size):
                    if self.act_table[g][self.act_table[h][x]] != self.act_table[group.mul(g, h)][x]:
                        raise ConstructionError(
                            f"action fails on ({group.names[g]},{group.names[h]},{self.points[x]})")

    def act(self, g: int, x: int) -> int:
        return self.act_table[g][x]

    def orbits(self):
        seen = [False] * self.size
        out = []
        for x in range(self.size):
            if seen[x]:
                continue
            orb = sorted({self.act(g, x) for g in range(self.group.order)})
            for y in orb:
                seen[y] = True
            out.append(tuple(orb))
        return out

    def __repr__(self):
        return f"GSetSpec({self.size} points over {self.group!r})"


def regular_gset(group: GroupSpec) -> GSetSpec:
    """G acting on itself by left translation."""
    act = [[group.mul(g, x) for x in range(group.order)] for g in range(group.order)]
    return GSetSpec(group, group.names, act)


def trivial_gset(group: GroupSpec, npoints: int = 1) -> GSetSpec:
    act = [list(range(npoints)) for _ in range(group.order)]
    return GSetSpec(group, [f"p{k}" for k in range(npoints)], act)


def gset_from_table(group: GroupSpec, text: str) -> GSetSpec:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    points = lines[0]
    pos = {p: k for k, p in enumerate(points)}
    act = [[pos[entry] for entry in row] for row in lines[1:]]
    return GSetSpec(group, points, act)


# ---------------------------------------------------------------------------
# algebras


class AlgebraSpec:
    """Associative algebra with exact (or complex) structure constants.

    Structure constants are stored sparsely as mul[(i, j)] -> ((k, c), ...);
    missing pairs multiply to zero.  Associativity is checked exhaustively on
    basis triples at construction.
    """

    def __init__(self, labels: Sequence[str], mul: dict, unit=None, grading=None,
                 scalar_kind: str = scalars.EXACT, check: bool = True, meta=None):
        self.labels = tuple(str(l) for l in labels)
        self.dim = len(self.labels)
        self.scalar_kind = scalar_kind
        table = {}
        for (i, j), terms in mul.items():
            clean = tuple((int(k), scalars.coerce(scalar_kind, c)) for k, c in terms if c != 0)
            if clean:
                table[(int(i), int(j))] = clean
        self.mul = table
        self.unit = None if unit is None else dict(unit)
        self.grading = None if grading is None else tuple(int(d) % 2 for d in grading)
        self.meta = meta or {}
        if check:
            self._check_associativity()
            if self.unit is not None:
                self._check_unit()

    # -- products -------------------------------------------------------

    def basis_mul(self, i: int, j: int):
        """e_i * e_j as ((k, coeff), ...)."""
        return self.mul.get((i, j), ())

    def elem_mul(self, a: dict, b: dict) -> dict:
        out: dict = {}
        for i, ca in a.items():
            for j, cb in b.items():
                for k, c in self.basis_mul(i, j):
                    v = out.get(k, 0) + ca * cb * c
                    if v == 0:
                        out.pop(k, None)
                    else:
                        out[k] = v
        return out

    def _check_associativity(self):
        for i in range(self.dim):
            for j in range(self.dim):
                ij = {k: c for k, c in self.basis_mul(i, j)}
                for k in range(self.dim):
                    jk = {l: c for l, c in self.basis_mul(j, k)}
                    left = self.elem_mul(ij, {k: scalars.coerce(self.scalar_kind, 1)})
                    right = self.elem_mul({i: scalars.coerce(self.scalar_kind, 1)}, jk)
                    if left != right:
                        raise ConstructionError(
                            f"associativity fails on basis triple "
                            f"({self.labels[i]},{self.labels[j]},{self.labels[k]})")

    def _check_unit(self):
        one = scalars.coerce(self.scalar_kind, 1)
        for i in range(self.dim):
            x = {i: one}
            if self.elem_mul(self.unit, x) != x or self.elem_mul(x, self.unit) != x:
                raise ConstructionError(f"declared unit is not two-sided at basis {self.labels[i]}")

    def __repr__(self):
        return f"AlgebraSpec(dim={self.dim}, kind={self.scalar_kind})"


@dataclass(frozen=True)
class Element:
    """Sparse vector over an AlgebraSpec basis."""

    algebra: AlgebraSpec
    coeffs: tuple  # ((index, coeff), ...) sorted by index

    @staticmethod
    def from_dict(algebra: AlgebraSpec, data: dict) -> "Element":
        kind = algebra.scalar_kind
        items = []
        for i, c in data.items():
            if not 0 <= int(i) < algebra.dim:
                raise ConstructionError(f"coefficient index {i} outside basis")
            c = scalars.coerce(kind, c)
            if c != 0:
                items.append((int(i), c))
        return Element(algebra, tuple(sorted(items)))

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def __add__(self, other: "Element") -> "Element":
        assert self.algebra is other.algebra
        data = self.as_dict()
        for i, c in other.coeffs:
            data[i] = data.get(i, 0) + c
        return Element.from_dict(self.algebra, data)

    def __sub__(self, other: "Element") -> "Element":
        return self + other.scale(-1)

    def scale(self, s) -> "Element":
        s = scalars.coerce(self.algebra.scalar_kind, s)
        return Element.from_dict(self.algebra, {i: c * s for i, c in self.coeffs})

    def __mul__(self, other: "Element") -> "Element":
        assert self.algebra is other.algebra
        return Element.from_dict(self.algebra,
                                 self.algebra.elem_mul(self.as_dict(), other.as_dict()))

    def is_zero(self) -> bool:
        return not self.coeffs


# -- constructions ----------------------------------------------------------


def build_group_algebra(group: GroupSpec, scalar_kind: str = scalars.EXACT) -> AlgebraSpec:
    """Convolution algebra C[G] with the group's Haar weight."""
    mul = {}
    for a in range(group.order):
        w = group.weight(a)
        if w == 0:
            continue
        for b in range(group.order):
            mul[(a, b)] = ((group.mul(b, a), w),)
    unit = {group.unit: Fraction(1) / group.weight(group.unit)}
    alg = AlgebraSpec(group.names, mul, unit=unit, scalar_kind=scalar_kind,
                      meta={"group": group, "flavor": "group"})
    return alg


def build_crossed_product(mset: GSetSpec, group: GroupSpec) -> AlgebraSpec:
    """Crossed product C(M) x| G at finite scale.

    Basis delta_{(g,x)} indexed by pairs; the trivial-group case degenerates
    to the pointwise function algebra on M.
    """
    if mset.group is not group:
        raise ConstructionError("G-set references a different group")
    n = group.order
    m = mset.size

    def idx(g, x):
        return g * m + x

    labels = [f"({group.names[g]},{mset.points[x]})" for g in range(n) for x in range(m)]
    mul = {}
    for a in range(n):
        w = group.weight(a)
        for u in range(m):
            au = mset.act(a, u)
            for b in range(n):
                mul[(idx(a, u), idx(b, au))] = ((idx(group.mul(b, a), u), w),)
    wu = group.weight(group.unit)
    unit = {idx(group.unit, x): Fraction(1) / wu for x in range(m)}
    return AlgebraSpec(labels, mul, unit=unit,
                       meta={"group": group, "gset": mset, "flavor": "crossed"})


def crossed_index(alg: AlgebraSpec, g: int, x: int) -> int:
    mset = alg.meta["gset"]
    return g * mset.size + x


def crossed_pair(alg: AlgebraSpec, i: int):
    mset = alg.meta["gset"]
    return divmod(i, mset.size)


def unitalize(alg: AlgebraSpec) -> AlgebraSpec:
    """Adjoin a fresh two-sided unit (always, also to unital algebras)."""
    d = alg.dim
    one = scalars.coerce(alg.scalar_kind, 1)
    mul = {k: tuple(v) for k, v in alg.mul.items()}
    for i in range(d + 1):
        mul[(d, i)] = ((i, one),)
        if i != d:
            mul[(i, d)] = ((i, one),)
    return AlgebraSpec(list(alg.labels) + ["1~"], mul,
                       unit={d: one}, scalar_kind=alg.scalar_kind,
                       meta={"unitalized_from": alg})


def function_algebra(npoints: int, labels=None) -> AlgebraSpec:
    labels = labels or [f"p{k}" for k in range(npoints)]
    mul = {(i, i): ((i, Fraction(1)),) for i in range(npoints)}
    unit = {i: Fraction(1) for i in range(npoints)}
    return AlgebraSpec(labels, mul, unit=unit, meta={"flavor": "functions"})


# -- weighted norms ---------------------------------------------------------


def check_submultiplicative_weight(group: GroupSpec, sigma: Callable[[int], Fraction]):
    """Assert sigma(gh) <= sigma(g) sigma(h) on all pairs; return max ratio."""
    worst = Fraction(0)
    for g in range(group.order):
        sg = sigma(g)
        if sg <= 0:
            raise ValueError(f"sigma({group.names[g]}) must be positive")
        for h in range(group.order):
            lhs = sigma(group.mul(g, h))
            rhs = sg * sigma(h)
            if lhs > rhs:
                raise ValueError(
                    f"sigma not submultiplicative at ({group.names[g]},{group.names[h]})")
            if rhs:
                worst = max(worst, Fraction(lhs, 1) / rhs)
    return worst


def weighted_l1_norm(elem: Element, sigma: Callable[[int], Fraction]):
    """sum_g w(g) sigma(g) |b(g)| for an element of a group algebra."""
    alg = elem.algebra
    group = alg.meta.get("group")
    if group is None or alg.meta.get("flavor") != "group":
        raise ValueError("weighted_l1_norm needs an element of a group algebra")
    total = Fraction(0)
    for i, c in elem.coeffs:
        s = sigma(i)
        if s <= 0:
            raise ValueError(f"sigma({group.names[i]}) must be positive")
        total += group.weight(i) * s * abs(c)
    return total


# ---------------------------------------------------------------------------
# windowed lattice "groups" (Z^d truncations; partial multiplication)


class LatticeWindow:
    """Truncated Z^d window [-W, W]^d.

    Not a group: products falling outside the window are undefined (None).
    Carries exactly the structure the group-cocycle pairings and weighted
    norms need; chains over the window algebra drop out-of-window products.
    """

    def __init__(self, dim: int, width: int):
        self.dimension = dim
        self.width = width
        rng = range(-width, width + 1)
        pts = [()]
        for _ in range(dim):
            pts = [p + (k,) for p in pts for k in rng]
        self.vectors = tuple(pts)
        self.index = {v: i for i, v in enumerate(self.vectors)}
        self.names = tuple(str(v) if dim > 1 else str(v[0]) for v in self.vectors)
        self.order = len(self.vectors)
        self.unit = self.index[(0,) * dim]
        self.haar = (Fraction(1),) * self.order

    def mul(self, i: int, j: int) -> Optional[int]:
        v = tuple(a + b for a, b in zip(self.vectors[i], self.vectors[j]))
        return self.index.get(v)

    def inv(self, i: int) -> int:
        return self.index[tuple(-a for a in self.vectors[i])]

    def concat(self, indices: Sequence[int]) -> Optional[int]:
        g = self.unit
        for i in indices:
            g = self.mul(i, g)
            if g is None:
                return None
        return g

    def weight(self, i: int) -> Fraction:
        return Fraction(1)

    def __len__(self):
        return self.order


class WindowAlgebra:
    """Convolution algebra of a LatticeWindow; out-of-window products drop.

    Associativity can fail at the window boundary, so this deliberately does
    not pass through AlgebraSpec's checks.  Dropped products are counted in
    .dropped for inspection.
    """

    scalar_kind = scalars.EXACT

    def __init__(self, window: LatticeWindow):
        self.window = window
        self.labels = window.names
        self.dim = window.order
        self.unit = {window.unit: Fraction(1)}
        self.dropped = 0
        self.meta = {"group": window, "flavor": "group-window"}

    def basis_mul(self, i: int, j: int):
        k = self.window.mul(j, i)  # delta_i * delta_j = delta_{ji}, w = 1
        if k is None:
            self.dropped += 1
            return ()
        return ((k, Fraction(1)),)

    def elem_mul(self, a: dict, b: dict) -> dict:
        out: dict = {}
        for i, ca in a.items():
            for j, cb in b.items():
                for k, c in self.basis_mul(i, j):
                    v = out.get(k, 0) + ca * cb * c
                    if v == 0:
                        out.pop(k, None)
                    else:
                        out[k] = v
        return out


# ---------------------------------------------------------------------------
# plain-text scenario fragments


def parse_group(textval: str, haar: str = "discrete") -> GroupSpec:
    """group = cyclic:<n> | product:<spec>,<spec> | table:<file>"""
    kind, _, rest = textval.partition(":")
    kind = kind.strip()
    if kind == "cyclic":
        return cyclic_group(int(rest), haar=haar)
    if kind == "product":
        left, _, right = rest.partition(",")
        return product_group(parse_group(left.strip(), haar),
                             parse_group(right.strip(), haar), haar=haar)
    if kind == "table":
        with open(rest.strip()) as fh:
            return group_from_table(fh.read(), haar=haar)
    raise ValueError(f"unknown group spec {textval!r}")


def parse_gset(textval: str, group: GroupSpec) -> GSetSpec:
    """gset = regular | trivial[:n] | table:<file>"""
    kind, _, rest = textval.partition(":")
    kind = kind.strip()
    if kind == "regular":
        return regular_gset(group)
    if kind == "trivial":
        return trivial_gset(group, int(rest) if rest else 1)
    if kind == "table":
        with open(rest.strip()) as fh:
            return gset_from_table(group, fh.read())
    raise ValueError(f"unknown gset spec {textval!r}")

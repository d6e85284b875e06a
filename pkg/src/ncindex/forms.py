"""Noncommutative differential forms over a finite-dimensional algebra.

A chain is a sparse sum of elementary words (lead, i1, ..., in) standing for
lead . d e_{i1} ... d e_{in};  the lead slot is a basis index or UNIT (the
adjoined unit of the unitalization), the differential slots are always basis
indices.  Degree-0 words are (lead,).

Operators implemented on chains:

    d                      d(a0 da1 ... dan) = da0 da1 ... dan,  d 1 = 0
    b                      b(w da) = (-1)^{|w|} [w, a],  b = 0 in degree 0
    kappa                  1 - db - bd   (single source of truth; the shuffle
                           identity kappa(w da) = (-1)^{|w|} da.w is a test)
    connes_B               (1 + kappa + ... + kappa^n) d  on degree n
    dg_multiply            graded product with the Leibniz rule
    fedosov                x (.) y = xy - dx dy  on even chains

Truncation above the chain's order N is never silent: every drop is recorded
in a TruncationReport on the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from . import scalars

UNIT = -1  # adjoined-unit marker, only legal in the lead slot

#: optional callback invoked with every TruncationReport as it is created
truncation_hook: Optional[Callable[["TruncationReport"], None]] = None


@dataclass(frozen=True)
class TruncationReport:
    operation: str
    degrees: tuple
    terms_dropped: int


def _emit(op: str, dropped: dict) -> tuple:
    if not dropped:
        return ()
    rep = TruncationReport(op, tuple(sorted(dropped)), sum(dropped.values()))
    if truncation_hook is not None:
        truncation_hook(rep)
    return (rep,)


class FormChain:
    """Sparse element of Omega(A), truncated at a fixed top degree."""

    __slots__ = ("base", "trunc", "data", "reports")

    def __init__(self, base, trunc: int, data: dict | None = None, reports: tuple = ()):
        self.base = base
        self.trunc = int(trunc)
        self.data = {}
        if data:
            kind = base.scalar_kind
            for key, val in data.items():
                val = scalars.coerce(kind, val)
                if val != 0:
                    self.data[key] = val
        self.reports = reports

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(base, trunc: int) -> "FormChain":
        return FormChain(base, trunc)

    @staticmethod
    def word(base, trunc: int, key: Sequence[int], coeff=1) -> "FormChain":
        key = tuple(int(k) for k in key)
        if len(key) - 1 > trunc:
            raise ValueError(f"word degree {len(key) - 1} exceeds truncation {trunc}")
        if any(k == UNIT for k in key[1:]):
            raise ValueError("adjoined unit is only legal in the lead slot")
        return FormChain(base, trunc, {key: coeff})

    @staticmethod
    def unit(base, trunc: int) -> "FormChain":
        return FormChain.word(base, trunc, (UNIT,))

    @staticmethod
    def from_element(elem, trunc: int) -> "FormChain":
        return FormChain(elem.algebra, trunc, {(i,): c for i, c in elem.coeffs})

    # -- bookkeeping ---------------------------------------------------------

    def degrees(self) -> tuple:
        return tuple(sorted({len(k) - 1 for k in self.data}))

    def component(self, n: int) -> "FormChain":
        return FormChain(self.base, self.trunc,
                         {k: v for k, v in self.data.items() if len(k) - 1 == n})

    def is_zero(self) -> bool:
        return not self.data

    def is_even(self) -> bool:
        return all((len(k) - 1) % 2 == 0 for k in self.data)

    def is_odd(self) -> bool:
        return all((len(k) - 1) % 2 == 1 for k in self.data)

    def freeze(self):
        """Canonical hashable content key (used for interning slot chains)."""
        return (self.trunc, tuple(sorted(self.data.items())))

    def with_trunc(self, trunc: int, op: str = "retruncate") -> "FormChain":
        dropped: dict = {}
        data = {}
        for k, v in self.data.items():
            n = len(k) - 1
            if n > trunc:
                dropped[n] = dropped.get(n, 0) + 1
            else:
                data[k] = v
        return FormChain(self.base, trunc, data, self.reports + _emit(op, dropped))

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "FormChain") -> "FormChain":
        assert self.base is other.base
        data = dict(self.data)
        for k, v in other.data.items():
            s = data.get(k, 0) + v
            if s == 0:
                data.pop(k, None)
            else:
                data[k] = s
        return FormChain(self.base, min(self.trunc, other.trunc), data,
                         self.reports + other.reports)

    def __sub__(self, other: "FormChain") -> "FormChain":
        return self + other.scale(-1)

    def scale(self, s) -> "FormChain":
        s = scalars.coerce(self.base.scalar_kind, s)
        if s == 0:
            return FormChain(self.base, self.trunc, {}, self.reports)
        return FormChain(self.base, self.trunc,
                         {k: v * s for k, v in self.data.items()}, self.reports)

    def __eq__(self, other) -> bool:
        return (isinstance(other, FormChain) and self.base is other.base
                and self.data == other.data)

    def __repr__(self):
        return f"FormChain({len(self.data)} terms, degrees={self.degrees()})"

    # -- serialization -------------------------------------------------------

    def dumps(self) -> str:
        """Line-oriented text form: ``deg n: coeff * [i0|i1|...|in]``."""
        lines = []
        for key in sorted(self.data, key=lambda k: (len(k), k)):
            n = len(key) - 1
            slots = "|".join("1" if i == UNIT else str(i) for i in key)
            lines.append(f"deg {n}: {self.data[key]} * [{slots}]")
        return "\n".join(lines)

    @staticmethod
    def loads(base, trunc: int, text: str) -> "FormChain":
        data: dict = {}
        for line in text.strip().splitlines():
            line = line.strip()
            if not line:
                continue
            head, _, rest = line.partition(":")
            coeff_s, _, slots_s = rest.partition("*")
            slots = slots_s.strip().strip("[]").split("|")
            key = tuple(UNIT if s == "1" else int(s) for s in slots)
            coeff = (Fraction(coeff_s.strip()) if base.scalar_kind == scalars.EXACT
                     else complex(coeff_s.strip()))
            data[key] = data.get(key, 0) + coeff
        return FormChain(base, trunc, data)


# ---------------------------------------------------------------------------
# elementary word arithmetic


def _word_lmul(base, j: int, word: tuple):
    """e_j . (lead, rest):  multiplies into the lead slot only."""
    lead, rest = word[0], word[1:]
    if lead == UNIT:
        return [((j,) + rest, 1)]
    return [((k,) + rest, c) for k, c in base.basis_mul(j, lead)]


def _word_rmul(base, word: tuple, j: int):
    """(lead, ...) . e_j  via the Leibniz cascade  (w da) c = w d(ac) - (wa) dc."""
    if len(word) == 1:
        lead = word[0]
        if lead == UNIT:
            return [((j,), 1)]
        return [((k,), c) for k, c in base.basis_mul(lead, j)]
    head, last = word[:-1], word[-1]
    out = [(head + (k,), c) for k, c in base.basis_mul(last, j)]
    for w, c in _word_rmul(base, head, last):
        out.append((w + (j,), -c))
    return out


def _accumulate(data: dict, key: tuple, val):
    s = data.get(key, 0) + val
    if s == 0:
        data.pop(key, None)
    else:
        data[key] = s


# ---------------------------------------------------------------------------
# the operators


def d(chain: FormChain) -> FormChain:
    data: dict = {}
    dropped: dict = {}
    for key, val in chain.data.items():
        if key[0] == UNIT:
            continue  # d 1 = 0
        n = len(key)  # new degree
        if n > chain.trunc:
            dropped[n] = dropped.get(n, 0) + 1
            continue
        _accumulate(data, (UNIT,) + key, val)
    return FormChain(chain.base, chain.trunc, data, chain.reports + _emit("d", dropped))


def b(chain: FormChain) -> FormChain:
    base = chain.base
    data: dict = {}
    for key, val in chain.data.items():
        n = len(key) - 1
        if n == 0:
            continue
        sign = -1 if (n - 1) % 2 else 1
        head, a = key[:-1], key[-1]
        for w, c in _word_rmul(base, head, a):
            _accumulate(data, w, val * c * sign)
        for w, c in _word_lmul(base, a, head):
            _accumulate(data, w, -val * c * sign)
    return FormChain(base, chain.trunc, data, chain.reports)


def kappa(chain: FormChain) -> FormChain:
    return chain - d(b(chain)) - b(d(chain))


def kappa_power(chain: FormChain, k: int) -> FormChain:
    out = chain
    for _ in range(k):
        out = kappa(out)
    return out


def kappa_shuffle(chain: FormChain) -> FormChain:
    """Derived identity kappa(w da) = (-1)^{|w|} da . w   (test oracle only)."""
    base = chain.base
    out = FormChain.zero(base, chain.trunc)
    for key, val in chain.data.items():
        n = len(key) - 1
        if n == 0:
            out = out + FormChain(base, chain.trunc, {key: val})
            continue
        head, a = key[:-1], key[-1]
        da = d(FormChain.word(base, chain.trunc, (a,)))
        w = FormChain(base, chain.trunc, {head: val})
        sign = -1 if (n - 1) % 2 else 1
        out = out + dg_multiply(da, w).scale(sign)
    return out


def connes_B(chain: FormChain) -> FormChain:
    out = FormChain.zero(chain.base, chain.trunc)
    for n in chain.degrees():
        term = d(chain.component(n))
        acc = term
        for _ in range(n):
            term = kappa(term)
            acc = acc + term
        out = out + acc
    return out


def dg_multiply(left: FormChain, right: FormChain) -> FormChain:
    if left.base is not right.base:
        raise ValueError("dg_multiply needs chains over the same algebra")
    base = left.base
    trunc = min(left.trunc, right.trunc)
    data: dict = {}
    dropped: dict = {}
    for k2, v2 in right.data.items():
        lead2, tail2 = k2[0], k2[1:]
        for k1, v1 in left.data.items():
            coeff = v1 * v2
            if lead2 == UNIT:
                base_terms = [(k1, 1)]
            else:
                base_terms = _word_rmul(base, k1, lead2)
            for w, c in base_terms:
                key = w + tail2
                n = len(key) - 1
                if n > trunc:
                    dropped[n] = dropped.get(n, 0) + 1
                    continue
                _accumulate(data, key, coeff * c)
    return FormChain(base, trunc, data,
                     left.reports + right.reports + _emit("dg_multiply", dropped))


def fedosov(x: FormChain, y: FormChain) -> FormChain:
    """Fedosov product x (.) y = xy - dx dy on even chains."""
    if not (x.is_even() and y.is_even()):
        raise ValueError("fedosov product is defined on even chains only")
    return dg_multiply(x, y) - dg_multiply(d(x), d(y))


# ---------------------------------------------------------------------------
# tensor-algebra correspondence  a0 da1 ... da2n <-> a0 (x) w(a1,a2) (x) ...


def to_tensor_words(chain: FormChain) -> dict:
    """Even chain -> dict mapping tensor words (i1, ..., im) to coefficients.

    The empty word () is the adjoined unit of the tensor algebra.  Curvatures
    expand as w(a, b) = ab - a (x) b.
    """
    if not chain.is_even():
        raise ValueError("tensor correspondence needs an even chain")
    base = chain.base
    out: dict = {}
    for key, val in chain.data.items():
        lead, tail = key[0], key[1:]
        words = [((), val)] if lead == UNIT else [((lead,), val)]
        for p in range(0, len(tail), 2):
            i, j = tail[p], tail[p + 1]
            new = []
            for w, c in words:
                for k, cc in base.basis_mul(i, j):
                    new.append((w + (k,), c * cc))
                new.append((w + (i, j), -c))
            words = new
        for w, c in words:
            s = out.get(w, 0) + c
            if s == 0:
                out.pop(w, None)
            else:
                out[w] = s
    return out


def from_tensor_words(base, trunc: int, words: dict) -> FormChain:
    """Inverse correspondence: (i1, ..., im) -> e_{i1} (.) ... (.) e_{im}."""
    out = FormChain.zero(base, trunc)
    for w, c in words.items():
        if not w:
            out = out + FormChain.unit(base, trunc).scale(c)
            continue
        term = FormChain.word(base, trunc, (w[0],))
        for j in w[1:]:
            term = fedosov(term, FormChain.word(base, trunc, (j,)))
        out = out + term.scale(c)
    return out


def tensor_correspondence_roundtrip(chain: FormChain) -> FormChain:
    return from_tensor_words(chain.base, chain.trunc, to_tensor_words(chain))


# ---------------------------------------------------------------------------
# forms over the tensor algebra (slots are themselves even chains)

OUTER_UNIT = -1


class OuterChain:
    """Element of Omega(TA): outer words whose slots are even chains over A.

    Slots are interned by content so outer words stay hashable; outer products
    merge slots with the Fedosov product.  Used for gamma(e-hat) and for
    feeding the JLO components.
    """

    def __init__(self, base, inner_trunc: int, outer_trunc: int,
                 registry=None, data: dict | None = None, reports: tuple = ()):
        self.base = base
        self.inner_trunc = inner_trunc
        self.outer_trunc = outer_trunc
        self.registry: list = list(registry) if registry else []
        self._intern = {c.freeze(): i for i, c in enumerate(self.registry)}
        self.data = dict(data) if data else {}
        self.reports = reports

    def copy_shell(self) -> "OuterChain":
        out = OuterChain(self.base, self.inner_trunc, self.outer_trunc)
        out.registry = list(self.registry)
        out._intern = dict(self._intern)
        return out

    def intern(self, chain: FormChain) -> Optional[int]:
        chain = chain.with_trunc(self.inner_trunc, "outer-slot") \
            if chain.trunc > self.inner_trunc else chain
        if chain.is_zero():
            return None
        key = chain.freeze()
        sid = self._intern.get(key)
        if sid is None:
            sid = len(self.registry)
            self.registry.append(chain)
            self._intern[key] = sid
        return sid

    def slot(self, sid: int) -> FormChain:
        return self.registry[sid]

    def add_word(self, key: tuple, coeff):
        coeff = Fraction(coeff) if not isinstance(coeff, complex) else coeff
        s = self.data.get(key, 0) + coeff
        if s == 0:
            self.data.pop(key, None)
        else:
            self.data[key] = s

    def degrees(self) -> tuple:
        return tuple(sorted({len(k) - 1 for k in self.data}))

    def component(self, n: int) -> "OuterChain":
        out = self.copy_shell()
        out.data = {k: v for k, v in self.data.items() if len(k) - 1 == n}
        return out

    def is_zero(self) -> bool:
        return not self.data

    def __add__(self, other: "OuterChain") -> "OuterChain":
        out = self.copy_shell()
        out.data = dict(self.data)
        out.reports = self.reports + other.reports
        for key, val in other.data.items():
            # remap other's slot ids into our registry
            new_key = tuple(s if s == OUTER_UNIT else out.intern(other.slot(s)) for s in key)
            out.add_word(new_key, val)
        return out

    def scale(self, s) -> "OuterChain":
        out = self.copy_shell()
        out.reports = self.reports
        if s != 0:
            out.data = {k: v * s for k, v in self.data.items()}
        return out

    def __sub__(self, other: "OuterChain") -> "OuterChain":
        return self + other.scale(-1)

    # -- outer operators (mirror the inner ones; products are Fedosov) ------

    def _rmul_word(self, word: tuple, sid: int):
        if len(word) == 1:
            lead = word[0]
            if lead == OUTER_UNIT:
                return [((sid,), 1)]
            prod = self.intern(fedosov(self.slot(lead), self.slot(sid)))
            return [] if prod is None else [((prod,), 1)]
        head, last = word[:-1], word[-1]
        out = []
        prod = self.intern(fedosov(self.slot(last), self.slot(sid)))
        if prod is not None:
            out.append((head + (prod,), 1))
        for w, c in self._rmul_word(head, last):
            out.append((w + (sid,), -c))
        return out

    def _lmul_word(self, sid: int, word: tuple):
        lead, rest = word[0], word[1:]
        if lead == OUTER_UNIT:
            return [((sid,) + rest, 1)]
        prod = self.intern(fedosov(self.slot(sid), self.slot(lead)))
        return [] if prod is None else [((prod,) + rest, 1)]

    def outer_d(self) -> "OuterChain":
        out = self.copy_shell()
        out.reports = self.reports
        dropped: dict = {}
        for key, val in self.data.items():
            if key[0] == OUTER_UNIT:
                continue
            if len(key) > self.outer_trunc:
                dropped[len(key)] = dropped.get(len(key), 0) + 1
                continue
            out.add_word((OUTER_UNIT,) + key, val)
        out.reports = out.reports + _emit("outer_d", dropped)
        return out

    def outer_b(self) -> "OuterChain":
        out = self.copy_shell()
        out.reports = self.reports
        for key, val in self.data.items():
            n = len(key) - 1
            if n == 0:
                continue
            sign = -1 if (n - 1) % 2 else 1
            head, a = key[:-1], key[-1]
            for w, c in self._rmul_word(head, a):
                out.add_word(w, val * c * sign)
            for w, c in self._lmul_word(a, head):
                out.add_word(w, -val * c * sign)
        return out

    def outer_kappa(self) -> "OuterChain":
        return self - self.outer_b().outer_d() - self.outer_d().outer_b()

    def outer_B(self) -> "OuterChain":
        total = self.copy_shell()
        for n in self.degrees():
            term = self.component(n).outer_d()
            acc = term
            for _ in range(n):
                term = term.outer_kappa()
                acc = acc + term
            total = total + acc
        return total

    def outer_b_plus_B(self) -> "OuterChain":
        return self.outer_b() + self.outer_B()

    def __repr__(self):
        return (f"OuterChain({len(self.data)} words, outer degrees={self.degrees()}, "
                f"{len(self.registry)} slots)")

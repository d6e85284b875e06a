"""The X-complex of the tensor algebra, realized on differential forms.

We never materialize Omega^1(TA)_natural as a quotient; the boundaries are
the explicit translations onto forms:

    bbar = b - (1 + kappa) d            on odd degrees 2n+1
    natd = sum_{i=0}^{2n} kappa^i d  -  sum_{i=0}^{n-1} kappa^{2i} b
                                        on even degrees 2n

The identification of the odd part with one-forms reads
natural(x dd a) = x . da for a of degree zero, extended by the Leibniz rule
through the tensor-word expansion; `natd_of_product` below computes
natural(P dd w) for an even prefix P and even word w, and `bbar_of_product`
its partner [P, w] under the Fedosov commutator.  Both are cross-checked in
the tests against the closed formulas above.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import scalars
from .forms import (FormChain, b, d, dg_multiply, fedosov, from_tensor_words,
                    kappa, to_tensor_words)


class ParityError(ValueError):
    pass


@dataclass(frozen=True)
class XChain:
    """A chain tagged with its X-complex parity (even = sum of Omega^{2n})."""

    chain: FormChain
    parity: int  # 0 even, 1 odd

    def __post_init__(self):
        for n in self.chain.degrees():
            if n % 2 != self.parity:
                raise ParityError(f"degree {n} component in parity-{self.parity} chain")


def x_bbar(omega: XChain) -> XChain:
    """bbar = b - (1 + kappa) d, odd -> even."""
    if omega.parity != 1:
        raise ParityError("x_bbar expects the odd part of the X-complex")
    ch = omega.chain
    out = FormChain.zero(ch.base, ch.trunc)
    for n in ch.degrees():
        comp = ch.component(n)
        dc = d(comp)
        out = out + b(comp) - dc - kappa(dc)
    return XChain(out, 0)


def x_natd(omega: XChain) -> XChain:
    """natd = sum_{i<=2n} kappa^i d - sum_{i<n} kappa^{2i} b, even -> odd."""
    if omega.parity != 0:
        raise ParityError("x_natd expects the even part of the X-complex")
    ch = omega.chain
    out = FormChain.zero(ch.base, ch.trunc)
    for deg in ch.degrees():
        n = deg // 2
        comp = ch.component(deg)
        term = d(comp)
        acc = term
        for _ in range(2 * n):
            term = kappa(term)
            acc = acc + term
        bterm = b(comp)
        bacc = FormChain.zero(ch.base, ch.trunc)
        for i in range(n):
            bacc = bacc + bterm
            if i + 1 < n:
                bterm = kappa(kappa(bterm))
        out = out + acc - bacc
    return XChain(out, 0 if out.is_zero() else 1)


def x_boundary(omega: XChain) -> XChain:
    return x_natd(omega) if omega.parity == 0 else x_bbar(omega)


# ---------------------------------------------------------------------------
# natural projection of one-forms over the tensor algebra


def natd_of_product(prefix: FormChain, word: FormChain) -> FormChain:
    """natural(prefix . dd(word)) in Omega^1(TA)_nat, realized as an odd chain.

    Expands word into tensor words c_1 (x) ... (x) c_m, applies the Leibniz
    rule dd(c_1 ... c_m) = sum_i (c_1...c_{i-1}) dd c_i (c_{i+1}...c_m) and
    rotates the right factor:  natural(P x dd c y) = (y (.) P (.) x) dc.
    """
    base = prefix.base
    trunc = prefix.trunc
    out = FormChain.zero(base, trunc)
    for tw, coeff in to_tensor_words(word).items():
        for i, c in enumerate(tw):
            x = from_tensor_words(base, trunc, {tw[:i]: 1})
            y = from_tensor_words(base, trunc, {tw[i + 1:]: 1})
            wrap = fedosov(fedosov(y, prefix), x)
            dc = d(FormChain.word(base, trunc, (c,)))
            out = out + dg_multiply(wrap, dc).scale(coeff)
    return out


def bbar_of_product(prefix: FormChain, word: FormChain) -> FormChain:
    """bbar(natural(prefix dd word)) = [prefix, word] under the Fedosov product."""
    return fedosov(prefix, word) - fedosov(word, prefix)


# ---------------------------------------------------------------------------
# morphisms induced by algebra homomorphisms


def check_homomorphism(rho: dict, source, target) -> None:
    """rho maps source basis index -> target Element dict; verified on pairs."""
    kind = target.scalar_kind
    for i in range(source.dim):
        if i not in rho:
            raise ValueError(f"homomorphism undefined on basis {source.labels[i]}")
    for i in range(source.dim):
        for j in range(source.dim):
            lhs = target.elem_mul(rho[i], rho[j])
            rhs: dict = {}
            for k, c in source.basis_mul(i, j):
                for l, cl in rho[k].items():
                    v = rhs.get(l, 0) + scalars.coerce(kind, c) * cl
                    if v == 0:
                        rhs.pop(l, None)
                    else:
                        rhs[l] = v
            if lhs != rhs:
                raise ValueError(
                    f"not an algebra homomorphism on pair ({source.labels[i]},{source.labels[j]})")


def x_morphism_from_hom(rho: dict, source, target):
    """Chain map on X-chains induced by a homomorphism (checked on pairs).

    Returns a function FormChain -> FormChain applying rho to every slot;
    the adjoined unit maps to the adjoined unit.
    """
    check_homomorphism(rho, source, target)

    def push(chain: FormChain) -> FormChain:
        from .forms import UNIT, _accumulate
        out: dict = {}
        for key, val in chain.data.items():
            if key[0] == UNIT:
                words = [((UNIT,), val)]
            else:
                words = [((l,), val * c) for l, c in rho[key[0]].items()]
            for s in key[1:]:
                words = [(w + (l,), cw * c) for w, cw in words for l, c in rho[s].items()]
            for w, cw in words:
                _accumulate(out, w, cw)
        return FormChain(target, chain.trunc, out, chain.reports)

    return push

"""The minimal resolution of a polynomial algebra as a noncommutative DG algebra.

R is the tensor algebra on letters lam[I] (I a nonempty subset of {1..N}),
where lam[i1,...,ik] has homological degree k-1 and weight k.  Words multiply
by concatenation.  The differential is the derivation acting on a letter by
the signed shuffle sum

  delta lam(v1,...,vn) = sum_{p+q=n, 1<=p<=q} (-1)^p sum_{shuffles}
                         (-1)^sigma [lam(v_sigma(1..p)), lam(v_sigma(p+1..n))]

with the shuffle sign counting the arguments as odd and the p = q case run
over shuffles whose first block contains v1 (each unordered pair of blocks is
counted once).  This normalization reproduces delta lam(v1,v2) = -[v1,v2].

Abelianizing a word multiplies its letters in the graded-commutative algebra
of :mod:`symtrace.gcalg`, with singleton letters becoming even variables.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .derham import Form, bigrade_split
from .gcalg import (
    DX_KIND,
    LAM_KIND,
    X_KIND,
    AlgebraElement,
    InvalidInputError,
    lam_letter,
    monomial_from_factors,
)

Letter = Tuple[int, ...]  # strictly increasing variable indices, len >= 1
RWord = Tuple[Letter, ...]

EMPTY_WORD: RWord = ()


def letter_degree(letter: Letter) -> int:
    return len(letter) - 1


def letter_weight(letter: Letter) -> int:
    return len(letter)


def word_degree(word: RWord) -> int:
    return sum(len(l) - 1 for l in word)


def word_weight(word: RWord) -> int:
    return sum(len(l) for l in word)


class RElement:
    """Rational linear combination of words in the free algebra R."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[RWord, Fraction]] = None):
        self.terms = {w: c for w, c in (terms or {}).items() if c != 0}

    @staticmethod
    def zero() -> "RElement":
        return RElement()

    @staticmethod
    def from_word(word: RWord, c=1) -> "RElement":
        return RElement({word: Fraction(c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, RElement) and self.terms == other.terms

    def __add__(self, other: "RElement") -> "RElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) + c
        return RElement(out)

    def __sub__(self, other: "RElement") -> "RElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) - c
        return RElement(out)

    def __neg__(self) -> "RElement":
        return RElement({w: -c for w, c in self.terms.items()})

    def scale(self, c) -> "RElement":
        c = Fraction(c)
        return RElement({w: c * v for w, v in self.terms.items()})

    def __rmul__(self, c) -> "RElement":
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __mul__(self, other) -> "RElement":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: Dict[RWord, Fraction] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, Fraction(0)) + c1 * c2
        return RElement(out)

    def degree_components(self) -> Dict[int, "RElement"]:
        buckets: Dict[int, Dict[RWord, Fraction]] = {}
        for w, c in self.terms.items():
            buckets.setdefault(word_degree(w), {})[w] = c
        return {deg: RElement(t) for deg, t in buckets.items()}

    def __repr__(self):
        if not self.terms:
            return "RElement(0)"
        bits = []
        for w in sorted(self.terms):
            c = self.terms[w]
            word = ".".join("(" + ",".join(map(str, l)) + ")" for l in w) or "1"
            bits.append(f"{c}*{word}")
        return "RElement(" + " + ".join(bits) + ")"


def commutator(a: RElement, b: RElement) -> RElement:
    """Graded commutator [a, b] = ab - (-1)^{|a||b|} ba, degreewise."""
    out = RElement.zero()
    for da, ea in a.degree_components().items():
        for db, eb in b.degree_components().items():
            sign = -1 if (da * db) % 2 else 1
            out = out + ea * eb - sign * (eb * ea)
    return out


def lam_element(indices: Sequence[int]) -> RElement:
    """The letter lam(indices) as an element of R (zero on repeats)."""
    r = lam_letter(indices)
    if r is None:
        return RElement.zero()
    sign, g = r
    letter = g[1] if g[0] == LAM_KIND else (g[1],)
    return RElement({(letter,): Fraction(sign)})


def _shuffles(n: int, p: int):
    """(p, n-p)-shuffles as (first block, second block, signature)."""
    positions = tuple(range(n))
    for first in combinations(positions, p):
        second = tuple(i for i in positions if i not in first)
        perm = first + second
        inv = sum(
            1
            for a in range(n)
            for b in range(a + 1, n)
            if perm[a] > perm[b]
        )
        yield first, second, (-1 if inv % 2 else 1)


def delta_letter(letter: Letter) -> RElement:
    """The shuffle differential on a single letter."""
    n = len(letter)
    if n <= 1:
        return RElement.zero()
    out = RElement.zero()
    for p in range(1, n // 2 + 1):
        q = n - p
        sign_p = -1 if p % 2 else 1
        for first, second, sign_sh in _shuffles(n, p):
            if p == q and 0 not in first:
                continue
            a = lam_element([letter[i] for i in first])
            b = lam_element([letter[i] for i in second])
            out = out + (sign_p * sign_sh) * commutator(a, b)
    return out


def delta_R(e: RElement) -> RElement:
    """Degree -1 derivation extending the shuffle differential on letters."""
    out: Dict[RWord, Fraction] = {}
    result = RElement(out)
    for word, c in e.terms.items():
        prefix_deg = 0
        for pos, letter in enumerate(word):
            dl = delta_letter(letter)
            if not dl.is_zero():
                sign = -1 if prefix_deg % 2 else 1
                for mid, cm in dl.terms.items():
                    w = word[:pos] + mid + word[pos + 1 :]
                    result.terms[w] = result.terms.get(w, Fraction(0)) + sign * c * cm
            prefix_deg += letter_degree(letter)
    return RElement(result.terms)


def abelianize(e: RElement) -> AlgebraElement:
    """Image in the graded-commutative algebra; commutators die."""
    out: Dict = {}
    for word, c in e.terms.items():
        factors = []
        ok = True
        for letter in word:
            r = lam_letter(letter)
            if r is None:
                ok = False
                break
            s, g = r
            c = c * s  # letters are stored sorted, so s is always 1
            factors.append(g)
        if not ok:
            continue
        m = monomial_from_factors(factors)
        if m is None:
            continue
        s, mono = m
        out[mono] = out.get(mono, Fraction(0)) + s * c
    return AlgebraElement(out)


def s_inv(omega: Form) -> AlgebraElement:
    """a dv1...dvk  ->  a lam(v1,...,vk), linearly over form monomials.

    Every term must have form degree >= 1.
    """
    out = AlgebraElement.zero()
    for w, p, part in bigrade_split(omega):
        if p == 0:
            raise InvalidInputError("s_inv needs form degree >= 1 in every term")
        for m, c in part.body.terms.items():
            poly = tuple((g, e) for g, e in m if g[0] == X_KIND)
            dxs = [g[1] for g, e in m if g[0] == DX_KIND]
            r = lam_letter(dxs)
            if r is None:
                continue
            sign, g = r
            mm = monomial_from_factors([gen for gen, e in poly for _ in range(e)] + [g])
            if mm is None:
                continue
            s2, mono = mm
            out = out + AlgebraElement.from_monomial(mono, sign * s2 * c)
    return out


def r_word_basis(nvars: int, weight: int, degree: int) -> List[RWord]:
    """All words of the given weight and homological degree, graded-lex order."""
    letters = []
    for k in range(1, nvars + 1):
        letters.extend(combinations(range(1, nvars + 1), k))
    result: List[RWord] = []

    def rec(acc: List[Letter], w: int, dg: int):
        if w == weight and dg == degree:
            result.append(tuple(acc))
        if w >= weight:
            return
        for letter in letters:
            lw, ld = len(letter), len(letter) - 1
            if w + lw <= weight and dg + ld <= degree:
                acc.append(letter)
                rec(acc, w + lw, dg + ld)
                acc.pop()

    rec([], 0, 0)
    result.sort(key=lambda word: (len(word), word))
    return result

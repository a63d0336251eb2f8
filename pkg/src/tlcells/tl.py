"""
The generalized Temperley-Lieb quotient TL = H / J, where J is generated by
the sums of T_u over each parabolic subgroup <s, s'> with m(s, s') >= 3.

Elements are held in the basis tt_w = theta(Tt_w), w fully commutative.
The monomial basis b_w is the product of b_s = tt_s + v^-1 along a reduced
word of w; the canonical basis c_w is its bar-invariant triangular
correction.

>>> g = build_graph("A", 2)
>>> print(theta_T(element(g, (1, 2, 1))))
(-1:-3) * tt(e) + (-1:-2) * tt(1) + (-1:-2) * tt(2) + (-1:-1) * tt(1.2) + (-1:-1) * tt(2.1)
>>> print(tl_mult(t_elt(element(g, (1,))), t_elt(element(g, (1,)))))
(1:0) * tt(e) + (-1:-1 1:1) * tt(1)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .coxeter import (CoxeterElement, CoxeterGraph, CoxeterGroup, _braid_at,
                      braid_word, build_graph, commutation_class, element,
                      group_of, identity, is_fully_commutative, mult_gen,
                      parse_element, parse_nonfc_B)
from .hecke import HeckeElt, KLCache, _bar_basis, hecke_mult
from .laurent import ONE, ZERO, LaurentPoly, QC, V, VINV, parse_poly

__all__ = [
    "TLElt", "TLAlgebra", "MonomialNF", "CanonicalTable", "tl_of", "theta_T",
    "theta_hecke", "tl_mult", "tl_bar", "t_elt", "b_elt", "b_word",
    "to_b_basis", "from_b_basis", "canonical", "rewrite_B", "fold_rewrite_B",
    "lattice_member", "theta_clprime_all", "parse_canonical_dump",
]

V_MINUS_VINV = V - VINV


def _acc(out: dict[int, LaurentPoly], x: int, c: LaurentPoly) -> None:
    s = out.get(x, ZERO) + c
    if s:
        out[x] = s
    else:
        out.pop(x, None)


class TLElt:
    """A combination of tt_w over fully commutative w; keyed by group index."""

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: TLAlgebra, coords: Mapping[int, LaurentPoly] | None = None):
        self.algebra = algebra
        fc = algebra.fc
        out = {}
        for x, c in (coords or {}).items():
            if not c:
                continue
            if not fc[x]:
                raise ValueError(f"{algebra.group.element(x).text} is not fully commutative")
            out[x] = c
        self.coords: dict[int, LaurentPoly] = out

    @property
    def group(self) -> CoxeterGroup:
        return self.algebra.group

    def coeff(self, w: CoxeterElement | int) -> LaurentPoly:
        i = w if isinstance(w, int) else self.group.idx(w)
        return self.coords.get(i, ZERO)

    def items_by_element(self) -> list[tuple[CoxeterElement, LaurentPoly]]:
        return [(self.group.element(i), self.coords[i]) for i in sorted(self.coords)]

    def __bool__(self) -> bool:
        return bool(self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TLElt):
            return NotImplemented
        return self.algebra is other.algebra and self.coords == other.coords

    def __add__(self, other: TLElt) -> TLElt:
        out = dict(self.coords)
        for x, c in other.coords.items():
            _acc(out, x, c)
        return TLElt(self.algebra, out)

    def __neg__(self) -> TLElt:
        return TLElt(self.algebra, {x: -c for x, c in self.coords.items()})

    def __sub__(self, other: TLElt) -> TLElt:
        return self + (-other)

    def scale(self, a: LaurentPoly | int) -> TLElt:
        if isinstance(a, int):
            a = LaurentPoly.const(a)
        return TLElt(self.algebra, {x: a * c for x, c in self.coords.items()})

    def __mul__(self, other):
        if isinstance(other, TLElt):
            return tl_mult(self, other)
        return self.scale(other)

    def __rmul__(self, a):
        return self.scale(a)

    def lift(self) -> HeckeElt:
        """The preimage sum c_x Tt_x."""
        return HeckeElt(self.group, self.coords)

    def __str__(self) -> str:
        if not self.coords:
            return "0"
        return " + ".join(f"({c}) * tt({self.group.element(i).text})"
                          for i, c in sorted(self.coords.items()))


class TLAlgebra:
    """
    The quotient for one graph: the theta table, the monomial basis and the
    bar involution, all memoized by group index.

    `occurrence` picks the braid factor used to reduce a non fully
    commutative Tt_w: the leftmost one in the canonical word, or the
    rightmost one found anywhere in its commutation class.
    """

    def __init__(self, graph: CoxeterGraph, occurrence: str = "leftmost"):
        if occurrence not in ("leftmost", "rightmost"):
            raise ValueError("occurrence must be 'leftmost' or 'rightmost'")
        self.graph = graph
        self.group = group_of(graph)
        self.occurrence = occurrence
        self.fc: list[bool] = self.group.fc_flags()
        self.fc_list: list[int] = [i for i in range(self.group.order) if self.fc[i]]
        self._theta: list[dict[int, LaurentPoly]] = []
        self._b: dict[int, dict[int, LaurentPoly]] = {0: {0: ONE}}
        self._bar_t: dict[int, dict[int, LaurentPoly]] = {}

    # --- theta ---------------------------------------------------------

    def factor(self, w: int) -> tuple[tuple[int, ...], tuple[int, int, int], tuple[int, ...]]:
        """w = x1 * w_{ss'} * x2 reduced, returned as (x1 word, (s, s', m), x2 word)."""
        g = self.group
        word = g.words[w]
        if self.occurrence == "leftmost":
            hit = braid_word(word, self.graph)
            if hit is None:
                raise ValueError(f"{g.element(w).text} is fully commutative")
            u, pos = hit
        else:
            best = None
            for u in commutation_class(word, self.graph):
                for pos in range(len(u)):
                    if _braid_at(u[pos:], self.graph) == 0 and (best is None or pos > best[1]):
                        best = (u, pos)
            if best is None:
                raise ValueError(f"{g.element(w).text} is fully commutative")
            u, pos = best
        s, t = u[pos], u[pos + 1]
        m = self.graph.m(s, t)
        return u[:pos], (s, t, m), u[pos + m:]

    def theta_coords(self, w: int) -> dict[int, LaurentPoly]:
        """tt-coordinates of theta(Tt_w); the table grows in index order."""
        while len(self._theta) <= w:
            self._theta.append(self._theta_next())
        return self._theta[w]

    def _theta_next(self) -> dict[int, LaurentPoly]:
        g = self.group
        w = len(self._theta)
        if self.fc[w]:
            return {w: ONE}
        L = g.length
        x1, (s, t, m), x2 = self.factor(w)
        out: dict[int, LaurentPoly] = {}
        # Tt_{w_st} = -sum_{u < w_st} v^(l(u)-m) Tt_u modulo J
        for u in _dihedral_below(g, s, t, m):
            h = HeckeElt(g, {u: LaurentPoly.monomial(L[u] - m, -1)})
            for a in reversed(x1):
                h = h.gen_mul(a, "left")
            for a in x2:
                h = h.gen_mul(a, "right")
            for y, c in h.coords.items():
                if L[y] >= L[w]:
                    raise RuntimeError(
                        f"theta reduction of {g.words[w]} reached {g.words[y]} of no smaller length")
                for x, d in self._theta[y].items():
                    _acc(out, x, c * d)
        return out

    def theta_hecke(self, h: HeckeElt) -> TLElt:
        out: dict[int, LaurentPoly] = {}
        for y, c in h.coords.items():
            for x, d in self.theta_coords(y).items():
                _acc(out, x, c * d)
        return TLElt(self, out)

    # --- multiplication by generators ------------------------------------

    def gen_mul(self, coords: Mapping[int, LaurentPoly], s: int, side: str = "right") -> dict[int, LaurentPoly]:
        """coords * tt_s (side="right") or tt_s * coords."""
        g = self.group
        table = g.rmul[s - 1] if side == "right" else g.lmul[s - 1]
        L = g.length
        out: dict[int, LaurentPoly] = {}
        for x, c in coords.items():
            y = table[x]
            if L[y] < L[x]:
                _acc(out, y, c)
                _acc(out, x, V_MINUS_VINV * c)
            elif self.fc[y]:
                _acc(out, y, c)
            else:
                for z, d in self.theta_coords(y).items():
                    _acc(out, z, c * d)
        return out

    def b_gen_mul(self, coords: Mapping[int, LaurentPoly], s: int, side: str = "right") -> dict[int, LaurentPoly]:
        """Multiply by b_s = tt_s + v^-1."""
        out = self.gen_mul(coords, s, side)
        for x, c in coords.items():
            _acc(out, x, c.shift(-1))
        return out

    # --- bar involution ----------------------------------------------------

    def bar_t(self, x: int) -> dict[int, LaurentPoly]:
        """bar(tt_x) = theta(bar(Tt_x))."""
        hit = self._bar_t.get(x)
        if hit is None:
            hit = self.theta_hecke(_bar_basis(self.group, x)).coords
            self._bar_t[x] = hit
        return hit

    # --- monomial basis ------------------------------------------------

    def b_coords(self, w: int) -> dict[int, LaurentPoly]:
        """tt-coordinates of b_w, built along the canonical word."""
        hit = self._b.get(w)
        if hit is not None:
            return hit
        if not self.fc[w]:
            raise ValueError(f"{self.group.element(w).text} is not fully commutative")
        g = self.group
        s = g.words[w][-1]
        out = self.b_gen_mul(self.b_coords(g.rmul[s - 1][w]), s)
        self._b[w] = out
        return out

    def to_b(self, coords: Mapping[int, LaurentPoly]) -> dict[int, LaurentPoly]:
        # b_y = tt_y + (terms of smaller length): peel off the top index
        rest = {x: c for x, c in coords.items() if c}
        out: dict[int, LaurentPoly] = {}
        while rest:
            y = max(rest)
            a = rest.pop(y)
            out[y] = a
            for x, c in self.b_coords(y).items():
                if x != y:
                    _acc(rest, x, -(a * c))
        return dict(sorted(out.items()))

    def from_b(self, coords: Mapping[int, LaurentPoly]) -> TLElt:
        out: dict[int, LaurentPoly] = {}
        for y, a in coords.items():
            for x, c in self.b_coords(y).items():
                _acc(out, x, a * c)
        return TLElt(self, out)

    # --- bulk theta of the KL basis ------------------------------------

    def theta_clprime_all(self, cache: KLCache) -> list[TLElt]:
        """theta(C'_w) for every w, using a dense copy of the theta table."""
        g = self.group
        cache.ensure_all()
        N = g.order
        Lmax = g.length[-1]
        for w in range(N):
            self.theta_coords(w)
        E = 0
        for row in self._theta:
            for c in row.values():
                E = max(E, abs(c.min_exp()), abs(c.max_exp()))
        # slot k holds v^(k - off); theta(C'_w) spans exponents [-Lmax - E, E]
        off = Lmax + E
        D = 2 * off + 1
        pos = {x: r for r, x in enumerate(self.fc_list)}
        F = len(self.fc_list)
        T = np.zeros((N, F, D), dtype=np.int64)
        for y, row in enumerate(self._theta):
            for x, c in row.items():
                for e, a in c.items():
                    T[y, pos[x], e + off] = a
        length = np.asarray(g.length, dtype=np.int64)
        out = []
        for w in range(N):
            rows = cache.supp[w]
            P = cache.poly[w]
            acc = np.zeros((F, D), dtype=np.int64)
            base = length[rows] - g.length[w]
            for k in range(P.shape[1]):
                sel = np.nonzero(P[:, k])[0]
                for r in sel:
                    sh = int(base[r]) + 2 * k
                    part = int(P[r, k]) * T[rows[r]]
                    if sh < 0:
                        acc[:, :D + sh] += part[:, -sh:]
                    else:
                        acc[:, sh:] += part[:, :D - sh]
            if acc.size and np.abs(acc).max() >= 1 << 60:
                raise OverflowError(f"theta(C'_{g.words[w]}) coefficient out of range")
            coords = {}
            for f, e in zip(*np.nonzero(acc)):
                x = self.fc_list[f]
                coords.setdefault(x, {})[int(e) - off] = int(acc[f, e])
            out.append(TLElt(self, {x: LaurentPoly(t) for x, t in coords.items()}))
        return out


def _dihedral_below(g: CoxeterGroup, s: int, t: int, m: int) -> list[int]:
    """Indices of the elements of <s, t> of length < m."""
    out = {0}
    for first, second in ((s, t), (t, s)):
        i = 0
        for k in range(m - 1):
            i = g.rmul[(first if k % 2 == 0 else second) - 1][i]
            out.add(i)
    return sorted(out)


@lru_cache(maxsize=None)
def tl_of(graph: CoxeterGraph) -> TLAlgebra:
    """The shared quotient for `graph`."""
    return TLAlgebra(graph)


def _alg(w: CoxeterElement, table: TLAlgebra | None) -> TLAlgebra:
    return table if table is not None else tl_of(w.graph)


def t_elt(w: CoxeterElement, coeff: LaurentPoly = ONE) -> TLElt:
    """tt_w for fully commutative w."""
    alg = tl_of(w.graph)
    return TLElt(alg, {alg.group.idx(w): coeff})


def theta_T(w: CoxeterElement, table: TLAlgebra | None = None) -> TLElt:
    alg = _alg(w, table)
    return TLElt(alg, alg.theta_coords(alg.group.idx(w)))


def theta_hecke(h: HeckeElt, table: TLAlgebra | None = None) -> TLElt:
    alg = table if table is not None else tl_of(h.group.graph)
    return alg.theta_hecke(h)


def theta_clprime_all(cache: KLCache) -> list[TLElt]:
    return tl_of(cache.graph).theta_clprime_all(cache)


def tl_mult(u: TLElt, w: TLElt) -> TLElt:
    """Lift both factors to the Hecke algebra, multiply, and project."""
    if u.algebra is not w.algebra:
        raise ValueError("TL elements from different algebras")
    return u.algebra.theta_hecke(hecke_mult(u.lift(), w.lift()))


def tl_bar(u: TLElt) -> TLElt:
    alg = u.algebra
    out: dict[int, LaurentPoly] = {}
    for x, c in u.coords.items():
        cb = c.bar()
        for y, d in alg.bar_t(x).items():
            _acc(out, y, cb * d)
    return TLElt(alg, out)


def b_elt(w: CoxeterElement) -> TLElt:
    alg = tl_of(w.graph)
    return TLElt(alg, alg.b_coords(alg.group.idx(w)))


def b_word(letters: Iterable[int], graph: CoxeterGraph) -> TLElt:
    """The product b_{s1} ... b_{sk} for an arbitrary word."""
    alg = tl_of(graph)
    coords: dict[int, LaurentPoly] = {0: ONE}
    for s in letters:
        coords = alg.b_gen_mul(coords, s)
    return TLElt(alg, coords)


def to_b_basis(u: TLElt) -> dict[CoxeterElement, LaurentPoly]:
    """
    >>> g = build_graph("A", 2)
    >>> {w.text: str(c) for w, c in to_b_basis(t_elt(element(g, (1,)))).items()}
    {'e': '-1:-1', '1': '1:0'}
    """
    g = u.group
    return {g.element(x): c for x, c in u.algebra.to_b(u.coords).items()}


def from_b_basis(coords: Mapping[CoxeterElement, LaurentPoly], graph: CoxeterGraph) -> TLElt:
    alg = tl_of(graph)
    return alg.from_b({alg.group.idx(w): c for w, c in coords.items()})


# --- canonical basis ---------------------------------------------------------

def _symmetric_part(p: LaurentPoly) -> LaurentPoly:
    """The bar-invariant q with p - q in v^-1 Z[v^-1]."""
    terms: dict[int, int] = {}
    for e, c in p.items():
        if e >= 0:
            terms[e] = terms.get(e, 0) + c
            if e > 0:
                terms[-e] = terms.get(-e, 0) + c
    return LaurentPoly(terms)


@dataclass
class CanonicalTable:
    """c_w for fully commutative w, filled on demand."""
    graph: CoxeterGraph
    order: str = "descending"
    entries: dict[int, TLElt] = field(default_factory=dict)

    def __post_init__(self):
        if self.order not in ("descending", "ascending"):
            raise ValueError("order must be 'descending' or 'ascending'")

    @property
    def algebra(self) -> TLAlgebra:
        return tl_of(self.graph)

    def get(self, w: int) -> TLElt:
        hit = self.entries.get(w)
        if hit is None:
            hit = self._compute(w)
            self.entries[w] = hit
        return hit

    def _compute(self, w: int) -> TLElt:
        alg = self.algebra
        cur = dict(alg.b_coords(w))
        # repeat sweeps until every x != w has its coefficient in v^-1 Z[v^-1];
        # a corrected coordinate only moves through corrections from above
        while True:
            bad = [x for x, c in cur.items() if x != w and not c.in_lattice(1)]
            if not bad:
                break
            bad.sort(reverse=(self.order == "descending"))
            for x in bad:
                c = cur.get(x, ZERO)
                if c.in_lattice(1):
                    continue
                q = _symmetric_part(c)
                for y, d in self.get(x).coords.items():
                    _acc(cur, y, -(q * d))
        return TLElt(alg, cur)

    def build(self) -> CanonicalTable:
        for w in self.algebra.fc_list:
            self.get(w)
        return self

    def dump(self) -> str:
        """One line per w: `<w> : <x>=<poly>, ...`."""
        g = self.algebra.group
        lines = []
        for w in sorted(self.entries):
            body = ", ".join(f"{g.element(x).text}={c}" for x, c in sorted(self.entries[w].coords.items()))
            lines.append(f"{g.element(w).text} : {body}")
        return "\n".join(lines) + ("\n" if lines else "")


def parse_canonical_dump(text: str, graph: CoxeterGraph) -> dict[CoxeterElement, TLElt]:
    alg = tl_of(graph)
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        head, _, body = line.partition(" : ")
        w = parse_element(head, graph)
        coords = {}
        for part in body.split(", "):
            x, _, poly = part.partition("=")
            coords[alg.group.idx(parse_element(x, graph))] = parse_poly(poly)
        out[w] = TLElt(alg, coords)
    return out


def canonical(w: CoxeterElement, table: CanonicalTable | None = None) -> TLElt:
    """
    The canonical basis element c_w.

    >>> g = build_graph("A", 2)
    >>> print(canonical(element(g, (1,))))
    (1:-1) * tt(e) + (1:0) * tt(1)
    """
    if table is None:
        table = _default_table(w.graph)
    return table.get(group_of(w.graph).idx(w))


@lru_cache(maxsize=None)
def _default_table(graph: CoxeterGraph) -> CanonicalTable:
    return CanonicalTable(graph)


# --- type B rewriting -------------------------------------------------------

@dataclass(frozen=True)
class MonomialNF:
    """The element a * q_c^mu_exp * b_w."""
    a: int
    mu_exp: int
    w: CoxeterElement

    def __post_init__(self):
        if self.a < 0 or self.mu_exp < 0:
            raise ValueError("a and mu_exp must be nonnegative")

    def value(self) -> TLElt:
        return b_elt(self.w).scale(LaurentPoly.const(self.a) * QC ** self.mu_exp)

    def __str__(self) -> str:
        return f"{self.a} * qc^{self.mu_exp} * b({self.w.text})"


def rewrite_B(nf: MonomialNF, s: int) -> MonomialNF:
    """
    (a q_c^mu b_w) * b_s as a single monomial, in type B.

    >>> g = build_graph("B", 2)
    >>> print(rewrite_B(MonomialNF(1, 0, element(g, (1, 2, 1))), 2))
    2 * qc^0 * b(1.2)
    """
    w = nf.w
    graph = w.graph
    if graph.type_tag != "B":
        raise ValueError(f"rewrite_B needs type B, got {graph.name}")
    if not is_fully_commutative(w):
        raise ValueError(f"{w.text} is not fully commutative")
    ws = mult_gen(w, s, "right")
    if ws.length < w.length:
        out = MonomialNF(nf.a, nf.mu_exp + 1, w)
    elif is_fully_commutative(ws):
        out = MonomialNF(nf.a, nf.mu_exp, ws)
    else:
        p = parse_nonfc_B(w, s)
        if p.case == "i":
            w1, w2, w3 = p.factors
            letters = w1.word + w2.word + (s,) + w3.word
            a = nf.a
        else:
            w1, w2, w3, w4 = p.factors
            letters = w1.word + w2.word + (p.s_prime, s) + w3.word + w4.word
            a = 2 * nf.a
        # the rewritten word is shorter than ws but need not be reduced;
        # every rewrite it triggers acts on an element shorter than w
        rest = fold_rewrite_B(letters, graph)
        out = MonomialNF(a * rest.a, nf.mu_exp + rest.mu_exp, rest.w)
    if s not in out.w.right_descents():
        raise RuntimeError(f"rewrite of {w.text} by {s}: s is not a right descent of the result")
    if out.mu_exp > nf.mu_exp + 1:
        raise RuntimeError(f"rewrite of {w.text} by {s} raised mu by more than 1")
    if out.mu_exp > nf.mu_exp:
        for sp in graph.neighbours(s):
            if mult_gen(w, sp, "right").length < w.length:
                raise RuntimeError(f"rewrite of {w.text} by {s} raised mu despite descent {sp}")
    return out


def fold_rewrite_B(letters: Iterable[int], graph: CoxeterGraph, start: MonomialNF | None = None) -> MonomialNF:
    """b_{s1} ... b_{sk} as a monomial, by repeated rewriting."""
    nf = start if start is not None else MonomialNF(1, 0, identity(graph))
    for s in letters:
        nf = rewrite_B(nf, s)
    return nf


# --- lattices ---------------------------------------------------------------

def lattice_member(u: TLElt, w: CoxeterElement, k: int = 0, basis: str = "t") -> bool:
    """
    Whether u lies in v^-k L_w (basis "t") or v^-k L'_w (basis "b"): its
    coordinates sit on fully commutative x <= w, each in v^-k Z[v^-1].

    >>> g = build_graph("A", 2)
    >>> s = element(g, (1,))
    >>> lattice_member(t_elt(s), s, 0, "b")
    True
    """
    if basis not in ("t", "b"):
        raise ValueError("basis must be 't' or 'b'")
    alg = u.algebra
    g = alg.group
    coords = u.coords if basis == "t" else alg.to_b(u.coords)
    wi = g.idx(w)
    return all(alg.fc[x] and g.bruhat_leq(x, wi) and c.in_lattice(k) for x, c in coords.items())

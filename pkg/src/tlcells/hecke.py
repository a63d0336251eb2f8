"""
The Hecke algebra in the normalized basis Tt_w = v^-l(w) T_w, its bar
involution, and the Kazhdan-Lusztig basis C'_w.

Internally the KL polynomials are held as q-polynomials P_{x,w} (q = v^2);
the normalized coefficient is Pt_{x,w} = v^(l(x) - l(w)) P_{x,w}(v^2).
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .coxeter import CoxeterElement, CoxeterGraph, CoxeterGroup, group_of
from .laurent import ONE, ZERO, LaurentPoly, V, VINV, parse_poly, CoefficientOverflowError

__all__ = [
    "HeckeElt", "KLCache", "KLEntry", "CacheError", "tt", "hecke_mult",
    "hecke_bar", "clprime", "mu", "cs_times_clprime", "to_clprime_basis",
    "clprime_elt",
]

log = logging.getLogger(__name__)

V_MINUS_VINV = V - VINV

# magnitude bound for stored KL coefficients; crossing it is reported, not wrapped
_INT_GUARD = 1 << 60


class HeckeElt:
    """A finite combination of Tt_w; coordinates keyed by group index."""

    __slots__ = ("group", "coords")

    def __init__(self, group: CoxeterGroup, coords: Mapping[int, LaurentPoly] | None = None):
        self.group = group
        self.coords: dict[int, LaurentPoly] = {k: c for k, c in (coords or {}).items() if c}

    @classmethod
    def from_elements(cls, graph: CoxeterGraph, coords: Mapping[CoxeterElement, LaurentPoly]) -> HeckeElt:
        g = group_of(graph)
        out: dict[int, LaurentPoly] = {}
        for w, c in coords.items():
            i = g.idx(w)
            out[i] = out.get(i, ZERO) + c
        return cls(g, out)

    def items_by_element(self) -> list[tuple[CoxeterElement, LaurentPoly]]:
        return [(self.group.element(i), self.coords[i]) for i in sorted(self.coords)]

    def coeff(self, w: CoxeterElement | int) -> LaurentPoly:
        i = w if isinstance(w, int) else self.group.idx(w)
        return self.coords.get(i, ZERO)

    def __bool__(self) -> bool:
        return bool(self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HeckeElt):
            return NotImplemented
        return self.group is other.group and self.coords == other.coords

    def __add__(self, other: HeckeElt) -> HeckeElt:
        out = dict(self.coords)
        for k, c in other.coords.items():
            out[k] = out.get(k, ZERO) + c
        return HeckeElt(self.group, out)

    def __neg__(self) -> HeckeElt:
        return HeckeElt(self.group, {k: -c for k, c in self.coords.items()})

    def __sub__(self, other: HeckeElt) -> HeckeElt:
        return self + (-other)

    def scale(self, a: LaurentPoly | int) -> HeckeElt:
        if isinstance(a, int):
            a = LaurentPoly.const(a)
        return HeckeElt(self.group, {k: a * c for k, c in self.coords.items()})

    def __mul__(self, other):
        if isinstance(other, HeckeElt):
            return hecke_mult(self, other)
        return self.scale(other)

    def __rmul__(self, a):
        return self.scale(a)

    def gen_mul(self, s: int, side: str = "left") -> HeckeElt:
        """Tt_s * h (side="left") or h * Tt_s."""
        g = self.group
        table = g.lmul[s - 1] if side == "left" else g.rmul[s - 1]
        L = g.length
        out: dict[int, LaurentPoly] = {}
        for x, c in self.coords.items():
            y = table[x]
            out[y] = out.get(y, ZERO) + c
            if L[y] < L[x]:
                out[x] = out.get(x, ZERO) + V_MINUS_VINV * c
        return HeckeElt(g, out)

    def gen_inv_mul(self, s: int, side: str = "left") -> HeckeElt:
        """Multiply by Tt_s^-1 = Tt_s - (v - v^-1)."""
        return self.gen_mul(s, side) - self.scale(V_MINUS_VINV)

    def __str__(self) -> str:
        if not self.coords:
            return "0"
        return " + ".join(f"({c}) * Tt({self.group.element(i).text})"
                          for i, c in sorted(self.coords.items()))


def tt(w: CoxeterElement, coeff: LaurentPoly = ONE) -> HeckeElt:
    """The basis element Tt_w (times `coeff`)."""
    g = w.group
    return HeckeElt(g, {g.idx(w): coeff})


def hecke_mult(h1: HeckeElt, h2: HeckeElt) -> HeckeElt:
    if h1.group is not h2.group:
        raise ValueError("Hecke elements from different groups")
    g = h1.group
    out = HeckeElt(g)
    for y, c in h2.coords.items():
        part = h1
        for s in g.words[y]:
            part = part.gen_mul(s, "right")
        out = out + part.scale(c)
    return out


_BAR_MEMO: dict[tuple[CoxeterGraph, int], HeckeElt] = {}


def _bar_basis(g: CoxeterGroup, w: int) -> HeckeElt:
    """bar(Tt_w) = Tt_{s1}^-1 ... Tt_{sk}^-1 for w = s1...sk."""
    key = (g.graph, w)
    hit = _BAR_MEMO.get(key)
    if hit is not None:
        return hit
    if w == 0:
        out = HeckeElt(g, {0: ONE})
    else:
        s = g.words[w][-1]
        out = _bar_basis(g, g.rmul[s - 1][w]).gen_inv_mul(s, "right")
    _BAR_MEMO[key] = out
    return out


def hecke_bar(h: HeckeElt) -> HeckeElt:
    g = h.group
    out = HeckeElt(g)
    for x, c in h.coords.items():
        out = out + _bar_basis(g, x).scale(c.bar())
    return out


def _narrowest(P: np.ndarray):
    top = int(np.abs(P).max()) if P.size else 0
    for dt in (np.int8, np.int16, np.int32):
        if top <= np.iinfo(dt).max:
            return dt
    return np.int64


class CacheError(ValueError):
    """A KL cache file failed validation."""


@dataclass
class KLEntry:
    """C'_w as Tt-coordinates, with the mu row of w."""
    w: CoxeterElement
    coords: dict[CoxeterElement, LaurentPoly]
    mu_row: dict[CoxeterElement, int]


class KLCache:
    """
    Kazhdan-Lusztig data for one group, computed in index order.

    `supp[w]` lists x <= w (ascending indices) with P_{x,w} != 0 and
    `poly[w][r]` holds the q-coefficients of P_{supp[w][r], w}.
    """

    def __init__(self, graph: CoxeterGraph, descent: str = "lowest",
                 path: str | os.PathLike | None = None, max_order: int | None = None):
        if descent not in ("lowest", "highest"):
            raise ValueError("descent must be 'lowest' or 'highest'")
        self.graph = graph
        self.group = group_of(graph) if max_order is None else group_of(graph, max_order)
        self.descent = descent
        g = self.group
        self._len = np.asarray(g.length, dtype=np.int64)
        self._lmul = [np.asarray(t, dtype=np.int64) for t in g.lmul]
        self._desc = [self._len[t] < self._len for t in self._lmul]
        self.supp: list[np.ndarray] = []
        self.poly: list[np.ndarray] = []
        self.mu_idx: list[np.ndarray] = []
        self.mu_val: list[np.ndarray] = []
        self._pos: list[dict[int, int] | None] = []
        self.path = Path(path) if path is not None else None
        self._persisted = 0
        if self.path is not None and self.path.exists():
            try:
                self._load(self.path)
            except CacheError as exc:
                bad = self.path.with_suffix(self.path.suffix + ".corrupt")
                log.warning("quarantining KL cache %s: %s", self.path, exc)
                os.replace(self.path, bad)
                self._reset()

    def _reset(self):
        self.supp, self.poly, self.mu_idx, self.mu_val, self._pos = [], [], [], [], []
        self._persisted = 0

    @property
    def computed(self) -> int:
        return len(self.supp)

    def ensure(self, w: int) -> None:
        """Compute all entries with index <= w."""
        while len(self.supp) <= w:
            self._compute_next()

    def ensure_all(self) -> "KLCache":
        self.ensure(self.group.order - 1)
        return self

    def _pick_descent(self, w: int) -> int:
        ds = self.group.left_descents(w)
        return (ds[0] if self.descent == "lowest" else ds[-1]) - 1

    def _compute_next(self):
        g = self.group
        w = len(self.supp)
        Lw = g.length[w]
        if w == 0:
            self._store(w, np.array([0], dtype=np.int64), np.ones((1, 1), dtype=np.int64))
            return
        k = self._pick_descent(w)
        v = g.lmul[k][w]
        supp_v, P_v = self.supp[v], self.poly[v]
        Dv = P_v.shape[1]
        lm = self._lmul[k]
        rows = np.union1d(supp_v, lm[supp_v])
        D = Lw // 2 + 2
        dense = np.zeros((g.order, Dv), dtype=np.int64)
        dense[supp_v] = P_v
        a = dense[lm[rows]]          # P_{sx, v}
        b = dense[rows]              # P_{x, v}
        c = self._desc[k][rows]      # sx < x
        res = np.zeros((len(rows), D), dtype=np.int64)
        res[c, :Dv] += a[c]
        res[c, 1:Dv + 1] += b[c]
        res[~c, 1:Dv + 1] += a[~c]
        res[~c, :Dv] += b[~c]
        desc_k = self._desc[k]
        for z, m in zip(self.mu_idx[v], self.mu_val[v]):
            if not desc_k[z]:
                continue
            sh = (Lw - g.length[z]) // 2
            Pz = self.poly[z]
            pos = np.searchsorted(rows, self.supp[z])
            res[pos, sh:sh + Pz.shape[1]] -= int(m) * Pz.astype(np.int64)
        if res.size and np.abs(res).max() >= _INT_GUARD:
            raise CoefficientOverflowError(f"KL coefficient out of range at {g.words[w]}")
        keep = res.any(axis=1)
        rows, res = rows[keep], res[keep]
        nz_cols = np.nonzero(res.any(axis=0))[0]
        res = res[:, : nz_cols[-1] + 1]
        self._store(w, rows, res)

    def _store(self, w: int, rows: np.ndarray, P: np.ndarray):
        g = self.group
        Lw = g.length[w]
        # stored compactly; all arithmetic on them is done after widening to int64
        rows = rows.astype(np.int32)
        P = P.astype(_narrowest(P))
        self.supp.append(rows)
        self.poly.append(P)
        self._pos.append(None)
        # mu(x, w) for x < w: coefficient of q^((l(w)-l(x)-1)/2) in P_{x,w}
        gap = Lw - self._len[rows]
        odd = (gap % 2 == 1)
        deg = (gap - 1) // 2
        ok = odd & (deg < P.shape[1])
        idx = np.nonzero(ok)[0]
        vals = P[idx, deg[idx]]
        nz = vals != 0
        self.mu_idx.append(rows[idx[nz]])
        self.mu_val.append(vals[nz].astype(np.int64))

    def position(self, w: int) -> dict[int, int]:
        self.ensure(w)
        pos = self._pos[w]
        if pos is None:
            pos = {int(x): r for r, x in enumerate(self.supp[w])}
            self._pos[w] = pos
        return pos

    def q_poly(self, x: int, w: int) -> tuple[int, ...]:
        r = self.position(w).get(x)
        if r is None:
            return ()
        row = self.poly[w][r]
        return tuple(int(c) for c in row[: np.nonzero(row)[0][-1] + 1])

    def p_tilde(self, x: int, w: int) -> LaurentPoly:
        """Pt_{x,w} as a Laurent polynomial."""
        coeffs = self.q_poly(x, w)
        base = self.group.length[x] - self.group.length[w]
        return LaurentPoly._raw({base + 2 * d: c for d, c in enumerate(coeffs) if c})

    def mu(self, x: int, w: int) -> int:
        self.ensure(w)
        hits = np.nonzero(self.mu_idx[w] == x)[0]
        return int(self.mu_val[w][hits[0]]) if len(hits) else 0

    def mu_row(self, w: int) -> dict[int, int]:
        self.ensure(w)
        return {int(z): int(m) for z, m in zip(self.mu_idx[w], self.mu_val[w])}

    def element(self, w: int) -> HeckeElt:
        """C'_w in the Tt basis."""
        self.ensure(w)
        return HeckeElt(self.group, {int(x): self.p_tilde(int(x), w) for x in self.supp[w]})

    # --- persistence -------------------------------------------------------

    def header(self) -> str:
        return f"KLC1 {self.graph.type_tag} {self.graph.size_param}"

    def persist(self) -> None:
        """Append entries computed since the last call."""
        if self.path is None:
            return
        g = self.group
        new_file = not self.path.exists()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="ascii") as fh:
            if new_file:
                fh.write(self.header() + "\n")
            for w in range(self._persisted, self.computed):
                wt = _word_text(g.words[w])
                for x in self.supp[w]:
                    x = int(x)
                    fh.write(f"{wt} {_word_text(g.words[x])} {self.p_tilde(x, w)}\n")
        self._persisted = self.computed

    def _load(self, path: Path) -> None:
        g = self.group
        L = g.length
        with open(path, encoding="ascii") as fh:
            head = fh.readline().rstrip("\n")
            if head != self.header():
                raise CacheError(f"header {head!r} does not match {self.header()!r}")
            blocks: dict[int, list[tuple[int, LaurentPoly]]] = {}
            order: list[int] = []
            for lineno, line in enumerate(fh, 2):
                parts = line.rstrip("\n").split(" ", 2)
                if len(parts) != 3:
                    raise CacheError(f"line {lineno}: malformed")
                try:
                    w = g.index[_parse_word(parts[0])]
                    x = g.index[_parse_word(parts[1])]
                    p = parse_poly(parts[2])
                except (KeyError, ValueError) as exc:
                    raise CacheError(f"line {lineno}: {exc}") from None
                if not order or order[-1] != w:
                    if w in blocks:
                        raise CacheError(f"line {lineno}: entries for {parts[0]} are not contiguous")
                    order.append(w)
                    blocks[w] = []
                blocks[w].append((x, p))
        if order != list(range(len(order))):
            raise CacheError("cache does not hold a prefix of the element order")
        for w in order:
            entries = sorted(blocks[w])
            xs = [x for x, _ in entries]
            if len(set(xs)) != len(xs) or xs[-1] != w or entries[-1][1] != ONE:
                raise CacheError(f"bad diagonal or duplicates for {_word_text(g.words[w])}")
            D = max(1, L[w] // 2 + 1)
            P = np.zeros((len(xs), D), dtype=np.int64)
            for r, (x, p) in enumerate(entries):
                base = L[x] - L[w]
                for e, c in p.items():
                    d, odd = divmod(e - base, 2)
                    if odd or d < 0 or d >= D or (x != w and e >= 0):
                        raise CacheError(f"impossible KL term {e} for ({x}, {w})")
                    P[r, d] = c
            nz = np.nonzero(P.any(axis=0))[0]
            self._store(w, np.asarray(xs, dtype=np.int64), P[:, : nz[-1] + 1])
        self._persisted = len(order)


def _word_text(word: tuple[int, ...]) -> str:
    return ".".join(map(str, word)) if word else "e"


def _parse_word(text: str) -> tuple[int, ...]:
    if text == "e":
        return ()
    return tuple(int(t) for t in text.split("."))


def clprime(w: CoxeterElement, cache: KLCache) -> KLEntry:
    g = cache.group
    i = g.idx(w)
    cache.ensure(i)
    coords = {g.element(int(x)): cache.p_tilde(int(x), i) for x in cache.supp[i]}
    mu_row = {g.element(z): m for z, m in cache.mu_row(i).items()}
    return KLEntry(w, coords, mu_row)


def clprime_elt(w: CoxeterElement, cache: KLCache) -> HeckeElt:
    return cache.element(cache.group.idx(w))


def mu(x: CoxeterElement, w: CoxeterElement, cache: KLCache) -> int:
    g = cache.group
    return cache.mu(g.idx(x), g.idx(w))


def cs_times_clprime(s: int, w: CoxeterElement, cache: KLCache) -> dict[CoxeterElement, LaurentPoly]:
    """C'_s C'_w in C'-coordinates, by the descent rule."""
    g = cache.group
    i = g.idx(w)
    si = g.lmul[s - 1][i]
    if g.length[si] < g.length[i]:
        return {w: V + VINV}
    out = {g.element(si): ONE}
    for z, m in sorted(cache.mu_row(i).items()):
        if g.length[g.lmul[s - 1][z]] < g.length[z]:
            out[g.element(z)] = LaurentPoly.const(m)
    return out


def to_clprime_basis(h: HeckeElt, cache: KLCache) -> dict[int, LaurentPoly]:
    """Coordinates of h in the C' basis (unitriangular solve, top down)."""
    rest = dict(h.coords)
    out: dict[int, LaurentPoly] = {}
    while rest:
        y = max(rest)
        a = rest.pop(y)
        out[y] = a
        cache.ensure(y)
        for x in cache.supp[y]:
            x = int(x)
            if x == y:
                continue
            c = rest.get(x, ZERO) - a * cache.p_tilde(x, y)
            if c:
                rest[x] = c
            else:
                rest.pop(x, None)
    return out

"""
Finite Coxeter groups: graphs, elements in lexicographically least reduced
form, Bruhat order, full commutativity and the type B coset combinatorics.

Generators are labelled 1..n. An element's textual form is its canonical
word with letters joined by dots, or `e` for the identity.

>>> g = build_graph("A", 2)
>>> w = element(g, (2, 1, 2))
>>> w.text
'1.2.1'
>>> mult_gen(w, 2, "right").text
'2.1'
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

__all__ = [
    "CapacityError", "CoxeterGraph", "CoxeterElement", "CoxeterGroup",
    "BCosetNF", "NonFCParse", "build_graph", "group_of", "element",
    "identity", "parse_element", "mult_gen", "bruhat_leq", "enumerate_elements",
    "is_fully_commutative", "commutation_class", "braid_word",
    "parse_nonfc_B", "coset_decompose_B", "b_coset_reps",
    "contains_d4_subgraph", "DEFAULT_MAX_ORDER",
]

DEFAULT_MAX_ORDER = 2_000_000


class CapacityError(ValueError):
    """The requested group is larger than the configured bound."""


@dataclass(frozen=True)
class CoxeterGraph:
    """
    A Coxeter graph on generators 1..rank.

    `bond[i][j]` is the order of s_{i+1} s_{j+1}; the diagonal is 1.
    """
    type_tag: str
    rank: int
    bond: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.rank
        if n < 1 or len(self.bond) != n or any(len(r) != n for r in self.bond):
            raise ValueError("bond matrix must be rank x rank")
        for i in range(n):
            if self.bond[i][i] != 1:
                raise ValueError("bond matrix diagonal must be 1")
            for j in range(n):
                if i != j:
                    m = self.bond[i][j]
                    if m != self.bond[j][i]:
                        raise ValueError("bond matrix must be symmetric")
                    if not (isinstance(m, int) and m >= 2):
                        raise ValueError(f"bond order {m!r} must be a finite integer >= 2")

    @property
    def name(self) -> str:
        if self.type_tag == "I2":
            return f"I2({self.bond[0][1]})"
        return f"{self.type_tag}{self.rank}"

    @property
    def size_param(self) -> int:
        """Rank, or m for a dihedral graph."""
        return self.bond[0][1] if self.type_tag == "I2" else self.rank

    def m(self, s: int, t: int) -> int:
        return self.bond[s - 1][t - 1]

    def commute(self, s: int, t: int) -> bool:
        return self.bond[s - 1][t - 1] == 2

    @property
    def generators(self) -> range:
        return range(1, self.rank + 1)

    def neighbours(self, s: int) -> list[int]:
        return [t for t in self.generators if t != s and not self.commute(s, t)]

    def order(self) -> int:
        """Group order from the classification."""
        n, t = self.rank, self.type_tag
        if t == "A":
            return math.factorial(n + 1)
        if t == "B":
            return 2 ** n * math.factorial(n)
        if t == "D":
            return 2 ** (n - 1) * math.factorial(n)
        if t == "I2":
            return 2 * self.bond[0][1]
        return {"F4": 1152, "H3": 120, "H4": 14400, "E6": 51840,
                "E7": 2903040, "E8": 696729600}[f"{t}{n}"]

    def __str__(self) -> str:
        return self.name


def _chain(n: int, special: dict[int, int] | None = None) -> list[list[int]]:
    bond = [[1 if i == j else 2 for j in range(n)] for i in range(n)]
    for i in range(n - 1):
        m = (special or {}).get(i + 1, 3)
        bond[i][i + 1] = bond[i + 1][i] = m
    return bond


def _freeze(bond) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(r) for r in bond)


def build_graph(type_tag: str, rank_or_m: int, allow_d3: bool = False) -> CoxeterGraph:
    """
    Named Coxeter graph with this package's labelling.

    B_n: m(1,2) = 4. D_n: node 3 is the branch, nodes 1 and 2 hang off it,
    3-4-...-n is a chain. F4: m(2,3) = 4. H_n: m(1,2) = 5. E_n: chain
    1..n-1 with node n attached to node 3. I2(m): m(1,2) = m.

    >>> build_graph("B", 2).m(1, 2)
    4
    """
    t = type_tag.upper()
    n = rank_or_m
    if t in ("I", "I2"):
        m = n
        if not isinstance(m, int) or m < 3:
            raise ValueError("I2(m) needs a finite m >= 3")
        return CoxeterGraph("I2", 2, _freeze([[1, m], [m, 1]]))
    if t in ("F", "F4") and n == 4:
        return CoxeterGraph("F", 4, _freeze(_chain(4, {2: 4})))
    if t in ("H", "H3", "H4") and n in (3, 4):
        return CoxeterGraph("H", n, _freeze(_chain(n, {1: 5})))
    if t in ("E", "E6", "E7", "E8") and n in (6, 7, 8):
        bond = _chain(n - 1)
        for r in bond:
            r.append(2)
        bond.append([2] * (n - 1) + [1])
        bond[2][n - 1] = bond[n - 1][2] = 3
        return CoxeterGraph("E", n, _freeze(bond))
    if t == "A" and n >= 1:
        return CoxeterGraph("A", n, _freeze(_chain(n)))
    if t == "B" and n >= 2:
        return CoxeterGraph("B", n, _freeze(_chain(n, {1: 4})))
    if t == "D":
        if n == 3:
            if not allow_d3:
                raise ValueError("D3 is not supported (use allow_d3 for the A3 alias)")
            return build_graph("A", 3)
        if n >= 4:
            bond = [[1 if i == j else 2 for j in range(n)] for i in range(n)]
            edges = [(1, 3), (2, 3)] + [(i, i + 1) for i in range(3, n)]
            for a, b in edges:
                bond[a - 1][b - 1] = bond[b - 1][a - 1] = 3
            return CoxeterGraph("D", n, _freeze(bond))
    raise ValueError(f"unsupported Coxeter type {type_tag!r} with rank {rank_or_m!r}")


def contains_d4_subgraph(graph: CoxeterGraph) -> bool:
    """True iff some node has three pairwise commuting simple-bond neighbours."""
    for s in graph.generators:
        nbrs = [t for t in graph.neighbours(s) if graph.m(s, t) == 3]
        for i, a in enumerate(nbrs):
            for j, b in enumerate(nbrs[i + 1:], i + 1):
                for c in nbrs[j + 1:]:
                    if graph.commute(a, b) and graph.commute(a, c) and graph.commute(b, c):
                        return True
    return False


def _cartan(graph: CoxeterGraph):
    """Cartan-type matrix; integral whenever every bond is in {2, 3, 4, 6}."""
    n = graph.rank
    exact = all(graph.bond[i][j] in (1, 2, 3, 4, 6) for i in range(n) for j in range(n))
    C = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            m = graph.bond[i][j]
            if m == 2:
                continue
            if exact:
                C[i][j], C[j][i] = {3: (-1, -1), 4: (-2, -1), 6: (-3, -1)}[m]
            else:
                c = -2 * math.cos(math.pi / m)
                C[i][j] = C[j][i] = c
    return C, exact


class CoxeterGroup:
    """
    Multiplication tables for a finite Coxeter group.

    Elements are numbered 0..N-1 in (length, canonical word) order; index 0
    is the identity. Tables use 0-based generator positions: `lmul[k][i]` is
    the index of s_{k+1} * w_i.

    The word problem is solved through the action of W on weight
    coordinates: s is a left descent of w exactly when the s-coordinate of
    w(rho) is negative.
    """

    def __init__(self, graph: CoxeterGraph, max_order: int = DEFAULT_MAX_ORDER):
        order = graph.order()
        if order > max_order:
            raise CapacityError(f"{graph.name} has order {order} > {max_order}")
        self.graph = graph
        n = graph.rank
        C, exact = _cartan(graph)
        cols = [[C[i][j] for i in range(n)] for j in range(n)]

        def key(lam):
            return lam if exact else tuple(round(x, 6) for x in lam)

        rho = tuple(1 for _ in range(n)) if exact else tuple(1.0 for _ in range(n))
        lams = [rho]
        seen = {key(rho): 0}
        raw_len = [0]
        frontier = [0]
        while frontier:
            nxt = []
            for i in frontier:
                lam = lams[i]
                for k in range(n):
                    c = lam[k]
                    if c < 0:
                        continue
                    new = tuple(x - c * y for x, y in zip(lam, cols[k]))
                    kk = key(new)
                    if kk not in seen:
                        seen[kk] = len(lams)
                        lams.append(new)
                        raw_len.append(raw_len[i] + 1)
                        nxt.append(seen[kk])
                        if len(lams) > order:
                            raise RuntimeError(f"enumeration of {graph.name} overran its order")
            frontier = nxt
        if len(lams) != order:
            raise RuntimeError(f"enumerated {len(lams)} elements of {graph.name}, expected {order}")
        N = order
        lm = [[0] * N for _ in range(n)]
        for i in range(N):
            lam = lams[i]
            for k in range(n):
                c = lam[k]
                new = tuple(x - c * y for x, y in zip(lam, cols[k]))
                lm[k][i] = seen[key(new)]
        # canonical word: smallest left descent, then recurse
        order_by_len = sorted(range(N), key=lambda i: raw_len[i])
        words: list[tuple[int, ...] | None] = [None] * N
        for i in order_by_len:
            if raw_len[i] == 0:
                words[i] = ()
                continue
            lam = lams[i]
            k = next(k for k in range(n) if lam[k] < 0)
            words[i] = (k + 1,) + words[lm[k][i]]
        perm = sorted(range(N), key=lambda i: (raw_len[i], words[i]))
        new_of = [0] * N
        for new, old in enumerate(perm):
            new_of[old] = new
        self.order = N
        self.words: list[tuple[int, ...]] = [words[old] for old in perm]
        self.length: list[int] = [raw_len[old] for old in perm]
        self.index: dict[tuple[int, ...], int] = {w: i for i, w in enumerate(self.words)}
        self.lmul: list[list[int]] = [[new_of[lm[k][old]] for old in perm] for k in range(n)]
        inv = [0] * N
        for i, w in enumerate(self.words):
            j = 0
            for s in w:
                j = self.lmul[s - 1][j]
            inv[i] = j
        self.inv: list[int] = inv
        self.rmul: list[list[int]] = [[inv[self.lmul[k][inv[i]]] for i in range(N)] for k in range(n)]
        self._fc: list[bool] | None = None
        self._bruhat = None

    def __len__(self) -> int:
        return self.order

    @property
    def rank(self) -> int:
        return self.graph.rank

    @property
    def longest(self) -> int:
        return self.order - 1

    def mul_word(self, i: int, word: Iterable[int], side: str = "right") -> int:
        table = self.rmul if side == "right" else self.lmul
        for s in word:
            i = table[s - 1][i]
        return i

    def multiply(self, i: int, j: int) -> int:
        return self.mul_word(i, self.words[j], "right")

    def left_descents(self, i: int) -> list[int]:
        L = self.length
        return [k + 1 for k in range(self.rank) if L[self.lmul[k][i]] < L[i]]

    def right_descents(self, i: int) -> list[int]:
        L = self.length
        return [k + 1 for k in range(self.rank) if L[self.rmul[k][i]] < L[i]]

    def element(self, i: int) -> CoxeterElement:
        return CoxeterElement(self.words[i], self.graph)

    def elements(self) -> list[CoxeterElement]:
        return [CoxeterElement(w, self.graph) for w in self.words]

    def idx(self, w: CoxeterElement) -> int:
        if w.graph != self.graph:
            raise ValueError(f"element of {w.graph.name} used with {self.graph.name}")
        return self.index[w.word]

    def fc_flags(self) -> list[bool]:
        """Full commutativity of every element (commutation-class search)."""
        if self._fc is None:
            self._fc = [braid_word(self.words[i], self.graph) is None for i in range(self.order)]
        return self._fc

    def bruhat_leq(self, x: int, w: int) -> bool:
        L, rmul = self.length, self.rmul
        if L[x] > L[w]:
            return False
        while L[w] > 0:
            s = self.words[w][-1] - 1
            xs = rmul[s][x]
            if L[xs] < L[x]:
                x = xs
            w = rmul[s][w]
            if L[x] > L[w]:
                return False
        return x == 0

    def below(self, w: int) -> list[int]:
        """Indices of the lower Bruhat interval [e, w], ascending."""
        out = {0}
        # [e, ws] u [e, ws]s = [e, w] for a right descent s; unroll along the word
        for s in self.words[w]:
            col = self.rmul[s - 1]
            out |= {col[x] for x in out}
        return sorted(out)


@lru_cache(maxsize=None)
def _group_cached(graph: CoxeterGraph) -> CoxeterGroup:
    return CoxeterGroup(graph, max_order=graph.order())


def group_of(graph: CoxeterGraph, max_order: int = DEFAULT_MAX_ORDER) -> CoxeterGroup:
    """The (cached) multiplication tables of `graph`, subject to a size bound."""
    order = graph.order()
    if order > max_order:
        raise CapacityError(f"{graph.name} has order {order} > {max_order}")
    return _group_cached(graph)


@dataclass(frozen=True, order=False)
class CoxeterElement:
    """A group element stored as its canonical (lex least reduced) word."""
    word: tuple[int, ...]
    graph: CoxeterGraph = field(repr=False)

    @property
    def group(self) -> CoxeterGroup:
        return group_of(self.graph)

    @property
    def index(self) -> int:
        return self.group.index[self.word]

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def text(self) -> str:
        return ".".join(map(str, self.word)) if self.word else "e"

    def __str__(self) -> str:
        return self.text

    def sort_key(self):
        return (len(self.word), self.word)

    def __lt__(self, other: CoxeterElement) -> bool:
        return self.sort_key() < other.sort_key()

    def content(self) -> frozenset[int]:
        return frozenset(self.word)

    def inverse(self) -> CoxeterElement:
        g = self.group
        return g.element(g.inv[g.index[self.word]])

    def __mul__(self, other: CoxeterElement) -> CoxeterElement:
        g = self.group
        return g.element(g.mul_word(g.index[self.word], other.word, "right"))

    def left_descents(self) -> list[int]:
        g = self.group
        return g.left_descents(g.index[self.word])

    def right_descents(self) -> list[int]:
        g = self.group
        return g.right_descents(g.index[self.word])


def identity(graph: CoxeterGraph) -> CoxeterElement:
    return CoxeterElement((), graph)


def element(graph: CoxeterGraph, letters: Iterable[int]) -> CoxeterElement:
    """The product of the given generators, in canonical form."""
    g = group_of(graph)
    i = 0
    for s in letters:
        if s not in graph.generators:
            raise ValueError(f"generator {s} not in {graph.name}")
        i = g.rmul[s - 1][i]
    return g.element(i)


def parse_element(text: str, graph: CoxeterGraph) -> CoxeterElement:
    """
    Parse the dotted form. Non-reduced or non-canonical words are accepted
    and multiplied out.

    >>> parse_element("2.1.2", build_graph("A", 2)).text
    '1.2.1'
    """
    text = text.strip()
    if text == "e":
        return identity(graph)
    try:
        letters = [int(t) for t in text.split(".")]
    except ValueError:
        raise ValueError(f"bad element text {text!r}") from None
    return element(graph, letters)


def mult_gen(w: CoxeterElement, s: int, side: str = "right") -> CoxeterElement:
    if s not in w.graph.generators:
        raise ValueError(f"generator {s} not in {w.graph.name}")
    g = w.group
    i = g.index[w.word]
    table = g.rmul if side == "right" else g.lmul
    return g.element(table[s - 1][i])


def bruhat_leq(x: CoxeterElement, w: CoxeterElement) -> bool:
    if x.graph != w.graph:
        raise ValueError("elements from different groups")
    g = x.group
    return g.bruhat_leq(g.index[x.word], g.index[w.word])


def enumerate_elements(graph: CoxeterGraph, max_length: int | None = None,
                       max_order: int = DEFAULT_MAX_ORDER) -> list[CoxeterElement]:
    g = group_of(graph, max_order)
    return [g.element(i) for i in range(g.order)
            if max_length is None or g.length[i] <= max_length]


def commutation_class(word: tuple[int, ...], graph: CoxeterGraph) -> Iterator[tuple[int, ...]]:
    """Breadth-first walk over words reachable by commuting adjacent letters."""
    seen = {word}
    queue = deque([word])
    while queue:
        u = queue.popleft()
        yield u
        for i in range(len(u) - 1):
            a, b = u[i], u[i + 1]
            if a != b and graph.commute(a, b):
                nu = u[:i] + (b, a) + u[i + 2:]
                if nu not in seen:
                    seen.add(nu)
                    queue.append(nu)


def _braid_at(u: tuple[int, ...], graph: CoxeterGraph) -> int | None:
    """Leftmost position of an alternating factor s s' s ... of length m(s,s') >= 3."""
    for i in range(len(u) - 2):
        a, b = u[i], u[i + 1]
        if a == b:
            continue
        m = graph.m(a, b)
        if m < 3 or i + m > len(u):
            continue
        if all(u[i + k] == (a if k % 2 == 0 else b) for k in range(m)):
            return i
    return None


def braid_word(word: tuple[int, ...], graph: CoxeterGraph) -> tuple[tuple[int, ...], int] | None:
    """
    First word in the commutation class (breadth-first from `word`) that
    contains a long braid factor, with the factor's leftmost position;
    None if the class has none.
    """
    for u in commutation_class(word, graph):
        pos = _braid_at(u, graph)
        if pos is not None:
            return u, pos
    return None


def is_fully_commutative(w: CoxeterElement) -> bool:
    return braid_word(w.word, w.graph) is None


@dataclass(frozen=True)
class NonFCParse:
    """How w parses when w is fully commutative but ws is not."""
    case: str                         # "i" or "ii"
    s: int
    s_prime: int
    factors: tuple[CoxeterElement, ...]


def _require_b(graph: CoxeterGraph):
    if graph.type_tag != "B":
        raise ValueError(f"type B required, got {graph.name}")


def parse_nonfc_B(w: CoxeterElement, s: int) -> NonFCParse:
    """
    Locate s' with w = w1 s w2 s' w3 (order 3) or w = w1 s' w2 s w3 s' w4
    (order 4), the commutation conditions holding as required.

    >>> g = build_graph("B", 3)
    >>> p = parse_nonfc_B(element(g, (2, 3)), 2)
    >>> (p.case, p.s_prime, [f.text for f in p.factors])
    ('i', 3, ['e', 'e', 'e'])
    """
    graph = w.graph
    _require_b(graph)
    if not is_fully_commutative(w):
        raise ValueError(f"{w.text} is not fully commutative")
    ws = mult_gen(w, s, "right")
    if ws.length < w.length or is_fully_commutative(ws):
        raise ValueError(f"{w.text}*{s} is fully commutative; nothing to parse")
    word = w.word
    n = len(word)

    def comm_all(t, letters):
        return all(graph.commute(t, u) for u in letters)

    def elt(letters):
        return element(graph, letters)

    found = []
    for sp in graph.neighbours(s):
        m = graph.m(s, sp)
        if m == 3:
            for j in range(n):
                if word[j] != sp:
                    continue
                for i in range(j):
                    if word[i] != s:
                        continue
                    if comm_all(s, word[i + 1:j]) and comm_all(s, word[j + 1:]):
                        found.append(NonFCParse("i", s, sp, (
                            elt(word[:i]), elt(word[i + 1:j]), elt(word[j + 1:]))))
        elif m == 4:
            for k in range(n):
                if word[k] != sp:
                    continue
                for j in range(k):
                    if word[j] != s:
                        continue
                    for i in range(j):
                        if word[i] != sp:
                            continue
                        if (comm_all(s, word[j + 1:k]) and comm_all(s, word[k + 1:])
                                and comm_all(sp, word[i + 1:j]) and comm_all(sp, word[j + 1:k])):
                            found.append(NonFCParse("ii", s, sp, (
                                elt(word[:i]), elt(word[i + 1:j]),
                                elt(word[j + 1:k]), elt(word[k + 1:]))))
    primes = {p.s_prime for p in found}
    if len(primes) != 1:
        raise RuntimeError(f"parse of {w.text} by {s} found s' in {sorted(primes)}")
    return found[0]


def b_coset_reps(graph: CoxeterGraph, r: int) -> list[CoxeterElement]:
    """
    The minimal right coset representatives of W(B_{r-1}) in W(B_r):
    e, s_r, s_r s_{r-1}, ..., s_r...s_1, s_r...s_1 s_2, ..., s_r...s_1...s_r.
    """
    _require_b(graph)
    if not 1 <= r <= graph.rank:
        raise ValueError(f"r must lie in 1..{graph.rank}")
    down = list(range(r, 0, -1))
    up = list(range(2, r + 1))
    words = [()] + [tuple(down[:k]) for k in range(1, r + 1)] + \
        [tuple(down + up[:k]) for k in range(1, r)]
    return [element(graph, w) for w in words]


@dataclass(frozen=True)
class BCosetNF:
    """w = w_1 w_2 ... w_n with w_i in the r = i coset representatives."""
    factors: tuple[CoxeterElement, ...]

    def product(self) -> CoxeterElement:
        out = identity(self.factors[0].graph)
        for f in self.factors:
            out = out * f
        return out

    def normal_word(self) -> tuple[int, ...]:
        return tuple(s for f in self.factors for s in f.word)


def coset_decompose_B(w: CoxeterElement) -> BCosetNF:
    """
    >>> g = build_graph("B", 2)
    >>> [f.text for f in coset_decompose_B(element(g, (1, 2, 1, 2))).factors]
    ['1', '2.1.2']
    """
    graph = w.graph
    _require_b(graph)
    g = w.group
    i = g.index[w.word]
    factors = []
    for r in range(graph.rank, 0, -1):
        # strip left descents among s_1..s_{r-1}; the rest is the coset rep
        x = 0
        rep = i
        moved = True
        while moved:
            moved = False
            for k in range(r - 1):
                j = g.lmul[k][rep]
                if g.length[j] < g.length[rep]:
                    rep = j
                    x = g.rmul[k][x]
                    moved = True
                    break
        factors.append(g.element(rep))
        i = x
    if i != 0:
        raise RuntimeError("coset decomposition did not terminate at e")
    return BCosetNF(tuple(reversed(factors)))

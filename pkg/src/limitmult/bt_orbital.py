"""Fixed vertices of 2x2 integer matrices on the Bruhat-Tits tree of PGL2(Q_p).

A vertex is the homothety class of a Z_p-lattice L in Q_p^2. Scaled to be
primitive integral, L is spanned by the columns of [[p^a, c], [0, p^b]] with
0 <= c < p^a and c prime to p when a, b >= 1; the triple (a, b, c) is the
canonical key and a + b is the distance from the root Z_p^2.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .errors import DomainError, GuardError, NotEllipticError

Vertex = tuple[int, int, int]
ROOT: Vertex = (0, 0, 0)
MAX_VERTICES = 3_000_000


@dataclass(frozen=True)
class TreeVertex:
    a: int
    b: int
    c: int
    p: int

    @property
    def level(self) -> int:
        return self.a + self.b

    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.p ** self.a, self.c), (0, self.p ** self.b))


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise DomainError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def canonical(m: tuple[tuple[int, int], tuple[int, int]], p: int) -> Vertex:
    """Canonical key of the lattice spanned by the columns of an integer matrix."""
    (m11, m12), (m21, m22) = m
    det = m11 * m22 - m12 * m21
    if det == 0:
        raise DomainError("singular matrix")
    # column operations over Z: bring the bottom row to (0, g)
    if m21 == 0:
        top, g, c = m11, m22, m12
    else:
        x, y = m21, m22
        # extended gcd: s*x + t*y = g
        g, s, t = _egcd(x, y)
        # new columns: col2' = s*col1 + t*col2 (bottom g), col1' = (y/g)*col1 - (x/g)*col2 (bottom 0)
        top = (y // g) * m11 - (x // g) * m12
        c = s * m11 + t * m12
    if g < 0:
        g, c = -g, -c
    top = abs(top)
    a, b = _vp(top, p), _vp(g, p)
    if top != p ** a or g != p ** b:
        raise DomainError("lattice index is not a power of p")
    c %= p ** a
    while a >= 1 and b >= 1 and c % p == 0:
        a, b, c = a - 1, b - 1, c // p
    return a, b, c


def _egcd(x: int, y: int) -> tuple[int, int, int]:
    s0, s1, t0, t1 = 1, 0, 0, 1
    while y:
        q, r = divmod(x, y)
        x, y = y, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return x, s0, t0


def neighbors(v: Vertex, p: int) -> list[Vertex]:
    a, b, c = v
    pa, pb = p ** a, p ** b
    out = []
    # M @ [[p, j], [0, 1]] and M @ [[1, 0], [0, p]]
    for j in range(p):
        out.append(canonical(((pa * p, pa * j + c), (0, pb)), p))
    out.append(canonical(((pa, c * p), (0, pb * p)), p))
    return out


@lru_cache(maxsize=16)
def _tree(p: int, depth: int) -> tuple[tuple[Vertex, ...], dict[Vertex, int]]:
    size = 1 + (p + 1) * (p ** depth - 1) // (p - 1)
    if depth > 12 or size > MAX_VERTICES:
        raise GuardError(f"tree of depth {depth} at p={p} has {size} vertices")
    dist = {ROOT: 0}
    order = [ROOT]
    queue = deque([ROOT])
    while queue:
        v = queue.popleft()
        dv = dist[v]
        if dv == depth:
            continue
        for w in neighbors(v, p):
            if w not in dist:
                dist[w] = dv + 1
                order.append(w)
                queue.append(w)
    return tuple(order), dist


def enumerate_tree(p: int, depth: int) -> list[TreeVertex]:
    """All vertices within distance depth of the root, each once, in BFS order."""
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    order, _ = _tree(p, depth)
    return [TreeVertex(a, b, c, p) for a, b, c in order]


def sphere_sizes(p: int, depth: int) -> list[int]:
    _, dist = _tree(p, depth)
    sizes = [0] * (depth + 1)
    for d in dist.values():
        sizes[d] += 1
    return sizes


# ---------------------------------------------------------------- elements

@dataclass(frozen=True)
class LocalType:
    """Splitting type of Q_p[X]/(X^2 - tX + n) and the conductor exponent k."""

    kind: str  # "split" | "unramified" | "ramified"
    k: int
    disc_valuation: int


def _is_qr(u: int, p: int) -> bool:
    return pow(u % p, (p - 1) // 2, p) == 1


def local_type(t: int, n: int, p: int) -> LocalType:
    disc = t * t - 4 * n
    if disc == 0:
        return LocalType("split", 0, -1)
    v = _vp(disc, p)
    if p == 2:
        d, k = disc, 0
        while d % 4 == 0 and (d // 4) % 4 in (0, 1):
            d //= 4
            k += 1
        if d % 8 == 1:
            kind = "split"
        elif d % 8 == 5:
            kind = "unramified"
        else:
            kind = "ramified"
        return LocalType(kind, k, v)
    u = disc // p ** v
    if v % 2:
        return LocalType("ramified", (v - 1) // 2, v)
    return LocalType("split" if _is_qr(u, p) else "unramified", v // 2, v)


@dataclass(frozen=True)
class EllipticElement:
    entries: tuple[tuple[int, int], tuple[int, int]]

    @property
    def trace(self) -> int:
        return self.entries[0][0] + self.entries[1][1]

    @property
    def det(self) -> int:
        (a, b), (c, d) = self.entries
        return a * d - b * c

    @property
    def disc(self) -> int:
        return self.trace ** 2 - 4 * self.det

    def local(self, p: int) -> LocalType:
        return local_type(self.trace, self.det, p)

    def depth(self, p: int) -> int:
        """d_gamma: the conductor exponent of Z_p[gamma] in the maximal order."""
        return self.local(p).k

    def conjugate(self, k: tuple[tuple[int, int], tuple[int, int]]) -> "EllipticElement":
        """k gamma k^-1 for k in GL2(Z)."""
        (k11, k12), (k21, k22) = k
        dk = k11 * k22 - k12 * k21
        if dk not in (1, -1):
            raise DomainError("conjugating matrix must lie in GL2(Z)")
        inv = ((k22 * dk, -k12 * dk), (-k21 * dk, k11 * dk))
        return EllipticElement(_mul(_mul(k, self.entries), inv))


def _mul(x, y):
    return ((x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
            (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]))


def _nonresidue(p: int) -> int:
    for u in range(2, p):
        if not _is_qr(u, p):
            return u
    raise DomainError("no non-residue")


def unramified_element(p: int, k: int, a: int = 1, b: int = 1) -> EllipticElement:
    """gamma = a + b p^k beta with Z_p[beta] the unramified maximal order fixing the root."""
    if p == 2:
        c = 2 ** k * b
        if b % 2 == 0 or (a * a - a * c + c * c) % 2 == 0:
            raise DomainError("choose b odd and a making the determinant odd")
        return EllipticElement(((a, -c), (c, a - c)))
    u = _nonresidue(p)
    c = b * p ** k
    g = EllipticElement(((a, c * u), (c, a)))
    if b % p == 0 or g.det % p == 0:
        raise DomainError("choose b prime to p and a making the determinant a unit")
    return g


def ramified_element(p: int, k: int, a: int = 1, b: int = 1) -> EllipticElement:
    """gamma = a + b p^k pi with pi^2 = p."""
    g = EllipticElement(((a, b * p ** (k + 1)), (b * p ** k, a)))
    if b % p == 0 or g.det % p == 0:
        raise DomainError("choose b prime to p and a making the determinant a unit")
    return g


def sample_unramified(p: int, k: int, count: int = 3) -> list[EllipticElement]:
    """Distinct unramified elements with conductor exponent k, some conjugated by GL2(Z)."""
    conj = [((1, 0), (0, 1)), ((1, 1), (0, 1)), ((2, 1), (1, 1)), ((1, 0), (3, 1)), ((0, 1), (1, 0))]
    out: list[EllipticElement] = []
    seen = set()
    i = 0
    for a in range(1, 4 * p + 8):
        for b in (1, 3, 5, 7, 9, 11):
            try:
                g = unramified_element(p, k, a, b)
            except DomainError:
                continue
            g = g.conjugate(conj[i % len(conj)])
            i += 1
            if g.entries in seen:
                continue
            seen.add(g.entries)
            out.append(g)
            if len(out) == count:
                return out
    return out


# ---------------------------------------------------------------- counting

def _fixed_mask(g: EllipticElement, p: int, verts: Iterable[Vertex]) -> np.ndarray:
    """adj(M) g M == 0 mod p^(a+b) for each canonical vertex matrix M."""
    arr = np.array(list(verts), dtype=object)
    a, b, c = arr[:, 0], arr[:, 1], arr[:, 2]
    depth = int(max((a + b).max(), 0))
    big = p ** (3 * depth) * 4 > 2 ** 62
    dtype = object if big else np.int64
    mod = p ** max(depth, 1)
    (g11, g12), (g21, g22) = ((x % mod for x in row) for row in g.entries)
    pa = np.array([p ** int(x) for x in a], dtype=dtype)
    pb = np.array([p ** int(x) for x in b], dtype=dtype)
    c = c.astype(dtype)
    det = pa * pb
    # g M = [[g11 pa, g11 c + g12 pb], [g21 pa, g21 c + g22 pb]]
    x11, x12 = g11 * pa, g11 * c + g12 * pb
    x21, x22 = g21 * pa, g21 * c + g22 * pb
    # adj(M) = [[pb, -c], [0, pa]]
    y11 = pb * x11 - c * x21
    y12 = pb * x12 - c * x22
    y21 = pa * x21
    y22 = pa * x22
    ok = (y11 % det == 0) & (y12 % det == 0) & (y21 % det == 0) & (y22 % det == 0)
    return np.asarray(ok, dtype=bool)


def fixed_vertices(g: EllipticElement, p: int, depth: int) -> list[Vertex]:
    if g.det % p == 0:
        raise DomainError("determinant must be a p-adic unit")
    lt = g.local(p)
    if lt.kind == "split":
        raise NotEllipticError(f"characteristic polynomial of {g.entries} splits over Q_{p}")
    order, _ = _tree(p, depth)
    mask = _fixed_mask(g, p, order)
    return [v for v, m in zip(order, mask) if m]


def count_fixed_vertices(g: EllipticElement, p: int, depth: int, group: str = "GL2") -> int:
    """Number of vertices within depth of the root that g fixes.

    group="SL2" counts only vertices at even distance from the root, the ones
    in the SL2(Q_p)-orbit of the root.
    """
    fixed = fixed_vertices(g, p, depth)
    if group == "SL2":
        return sum(1 for a, b, _ in fixed if (a + b) % 2 == 0)
    return len(fixed)


def orbital_closed_form(q: int, d: int, ramified: bool = False) -> Fraction:
    """(q^(d+1)-1)/(q-1) + (q^d-1)/(q-1), or 2(q^(d+1)-1)/(q-1) when ramified."""
    if d < 0:
        raise DomainError("d_gamma must be nonnegative")
    if ramified:
        return Fraction(2 * (q ** (d + 1) - 1), q - 1)
    return Fraction(q ** (d + 1) - 1, q - 1) + Fraction(q ** d - 1, q - 1)


def split_local_orbital(diff_valuation: int | None, q: int, different_norm: int = 1) -> float:
    """|gamma1 - gamma2|_v^-1 N(partial_v)^(-1/2), with |x|_v = q^-val(x)."""
    if diff_valuation is None:
        raise DomainError("gamma1 = gamma2 is not regular")
    return q ** diff_valuation / math.sqrt(different_norm)


def fixed_subtree_dot(g: EllipticElement, p: int, depth: int) -> str:
    """Graphviz description of the fixed vertices and the tree edges between them."""
    fixed = set(fixed_vertices(g, p, depth))
    lines = [f"graph fixed_p{p} {{"]
    for v in sorted(fixed):
        lines.append(f'  "{v[0]},{v[1]},{v[2]}";')
    for v in sorted(fixed):
        for w in neighbors(v, p):
            if w in fixed and v < w:
                lines.append(f'  "{v[0]},{v[1]},{v[2]}" -- "{w[0]},{w[1]},{w[2]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def global_elliptic_bound(inv, poly, ingested=None, group="GL2", cfg=None):
    """Global elliptic orbital bound for one polynomial class; see bounds.global_elliptic_bound."""
    from . import bounds
    from .volumes import GroupKind

    g = GroupKind.parse(str(group))
    return bounds.global_elliptic_bound(inv, poly, ingested, g, cfg or bounds.HarnessConfig())

"""Exact engine for permutations and fully-enumerated groups of small degree.

Conventions used throughout the package:

* A permutation of degree ``n`` is a tuple ``p`` of length ``n``; ``p[x]`` is
  the image of the point ``x`` under the *right* action, written ``x . p``.
* ``compose(p, q)`` applies ``p`` first: ``x . compose(p, q) == (x . p) . q``.
* Every group here is given by generators and materialised by breadth-first
  closure.  Nothing is meant to scale past degree 7; there is deliberately no
  stabilizer-chain machinery.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter, deque
from functools import lru_cache
from math import factorial

Perm = tuple[int, ...]

DEFAULT_CAP = 10_000


class ClosureExceedsCap(RuntimeError):
    """Closure produced more elements than the caller's cap allows."""


class DegreeTooLarge(ValueError):
    """Exhaustive enumeration was requested past the supported degree."""


class NotTransitive(ValueError):
    """A block-system computation needs a transitive action."""


# ---------------------------------------------------------------------------
# elementary permutation calculus
# ---------------------------------------------------------------------------

def identity(degree: int) -> Perm:
    return tuple(range(degree))


def is_perm(p) -> bool:
    return sorted(p) == list(range(len(p)))


def compose(p: Perm, q: Perm) -> Perm:
    """p then q, so the image of x is q[p[x]]."""
    if len(p) != len(q):
        raise ValueError(f"degree mismatch: {len(p)} vs {len(q)}")
    return tuple(q[x] for x in p)


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def conjugate(p: Perm, g: Perm) -> Perm:
    """g^-1 p g  (apply g^-1, then p, then g)."""
    gp = [0] * len(p)
    for x, y in enumerate(g):
        gp[y] = g[p[x]]
    return tuple(gp)


def cycle_type(p: Perm) -> tuple[int, ...]:
    seen = [False] * len(p)
    lens = []
    for x in range(len(p)):
        if seen[x]:
            continue
        m = 0
        y = x
        while not seen[y]:
            seen[y] = True
            y = p[y]
            m += 1
        lens.append(m)
    return tuple(sorted(lens))


def is_even(p: Perm) -> bool:
    return sum(m - 1 for m in cycle_type(p)) % 2 == 0


def from_cycles(degree: int, *cycles) -> Perm:
    """Build a permutation from point cycles, e.g. from_cycles(4, (0, 1), (2, 3))."""
    images = list(range(degree))
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + (cyc[0],)):
            images[a] = b
    p = tuple(images)
    if not is_perm(p):
        raise ValueError(f"cycles overlap: {cycles}")
    return p


def restrict(p: Perm, points: tuple[int, ...]) -> Perm:
    """Restriction of p to an invariant point set, reindexed along sorted(points)."""
    pos = {x: i for i, x in enumerate(points)}
    return tuple(pos[p[x]] for x in points)


def close(generators, cap: int = DEFAULT_CAP, *, degree: int | None = None) -> tuple[Perm, ...]:
    """Breadth-first closure from the identity, multiplying by generators in order.

    The returned tuple is in first-discovery order, so it is deterministic for
    a fixed generator sequence.
    """
    gens = [tuple(g) for g in generators]
    if degree is None:
        if not gens:
            raise ValueError("empty generating set needs an explicit degree")
        degree = len(gens[0])
    for g in gens:
        if len(g) != degree:
            raise ValueError("generators of mixed degree")
        if not is_perm(g):
            raise ValueError(f"not a permutation: {g}")
    e = identity(degree)
    out = [e]
    seen = {e}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = tuple(g[i] for i in x)
            if y not in seen:
                if len(out) >= cap:
                    raise ClosureExceedsCap(f"closure exceeds cap={cap}")
                seen.add(y)
                out.append(y)
                queue.append(y)
    return tuple(out)


# ---------------------------------------------------------------------------
# generated groups
# ---------------------------------------------------------------------------

class GeneratedGroup:
    """A permutation group held by generators, with a fully cached element list.

    Immutable after construction; the element closure is computed lazily and
    at most once.
    """

    __slots__ = ("degree", "generators", "cap", "_elements", "_eset")

    def __init__(self, degree: int, generators, cap: int = DEFAULT_CAP, _elements=None):
        self.degree = degree
        self.generators = tuple(tuple(g) for g in generators)
        self.cap = cap
        self._elements = tuple(_elements) if _elements is not None else None
        self._eset = frozenset(self._elements) if self._elements is not None else None

    @property
    def elements(self) -> tuple[Perm, ...]:
        if self._elements is None:
            self._elements = close(self.generators, self.cap, degree=self.degree)
            self._eset = frozenset(self._elements)
        return self._elements

    @property
    def element_set(self) -> frozenset:
        self.elements
        return self._eset

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, p) -> bool:
        return tuple(p) in self.element_set

    def __eq__(self, other) -> bool:
        return (isinstance(other, GeneratedGroup)
                and self.degree == other.degree
                and self.element_set == other.element_set)

    def __hash__(self) -> int:
        return hash((self.degree, self.element_set))

    def __repr__(self) -> str:
        return f"GeneratedGroup(degree={self.degree}, order={self.order})"

    def is_subgroup_of(self, other: "GeneratedGroup") -> bool:
        return self.degree == other.degree and self.element_set <= other.element_set

    def conjugated(self, g: Perm) -> "GeneratedGroup":
        els = tuple(sorted(conjugate(h, g) for h in self.elements))
        return GeneratedGroup(self.degree, [conjugate(h, g) for h in self.generators] or els,
                              self.cap, _elements=els)

    def restricted(self, points) -> "GeneratedGroup":
        """The action on an invariant point set, on {0..len(points)-1}."""
        pts = tuple(sorted(points))
        els = tuple(sorted({restrict(p, pts) for p in self.elements}))
        return GeneratedGroup(len(pts), els or [identity(len(pts))], self.cap, _elements=els)


def symmetric_group(n: int, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    if n <= 1:
        return GeneratedGroup(max(n, 1), [], cap, _elements=[identity(max(n, 1))])
    gens = [from_cycles(n, (0, 1))]
    if n >= 3:
        gens.append(from_cycles(n, tuple(range(n))))
    return GeneratedGroup(n, gens, cap)


def alternating_group(n: int, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    if n <= 2:
        return GeneratedGroup(max(n, 1), [], cap, _elements=[identity(max(n, 1))])
    gens = [from_cycles(n, (i, i + 1, i + 2)) for i in range(n - 2)]
    return GeneratedGroup(n, gens, cap)


def product_of_symmetric(sizes, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    """Sym(n1) x Sym(n2) x ... acting on consecutive point blocks."""
    degree = sum(sizes)
    gens = []
    off = 0
    for n in sizes:
        if n >= 2:
            gens.append(from_cycles(degree, (off, off + 1)))
        if n >= 3:
            gens.append(from_cycles(degree, tuple(range(off, off + n))))
        off += n
    return GeneratedGroup(degree, gens, cap)


# ---------------------------------------------------------------------------
# orbits, blocks, rigid stabilizers
# ---------------------------------------------------------------------------

def orbits(G: GeneratedGroup) -> tuple[tuple[int, ...], ...]:
    """Transitive components, each sorted, ordered by smallest point."""
    seen = [False] * G.degree
    out = []
    for x in range(G.degree):
        if seen[x]:
            continue
        orb = [x]
        seen[x] = True
        queue = deque([x])
        while queue:
            y = queue.popleft()
            for g in G.generators:
                z = g[y]
                if not seen[z]:
                    seen[z] = True
                    orb.append(z)
                    queue.append(z)
        out.append(tuple(sorted(orb)))
    return tuple(out)


class BlockSystem:
    """A nontrivial invariant partition of a transitive component."""

    __slots__ = ("blocks", "block_size")

    def __init__(self, blocks):
        self.blocks = tuple(tuple(sorted(b)) for b in sorted(blocks, key=min))
        self.block_size = len(self.blocks[0])

    def __repr__(self):
        return f"BlockSystem(size={self.block_size}, blocks={self.blocks})"


def _min_block_with(G: GeneratedGroup, component, a: int, b: int):
    """Classes of the minimal G-congruence on component identifying a and b."""
    parent = {x: x for x in component}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx == ry:
            return None
        if rx > ry:
            rx, ry = ry, rx
        parent[ry] = rx
        return rx, ry

    queue = deque()
    first = union(a, b)
    if first:
        queue.append(first)
    while queue:
        x, y = queue.popleft()
        for g in G.generators:
            merged = union(g[x], g[y])
            if merged:
                queue.append(merged)
    classes = {}
    for x in component:
        classes.setdefault(find(x), []).append(x)
    return list(classes.values())


def minimal_blocks(G: GeneratedGroup, component=None) -> BlockSystem | None:
    """A nontrivial block system of minimal block size, or None if primitive.

    Deterministic: block seeds (component[0], b) are tried with b ascending and
    the smallest resulting nontrivial block wins.
    """
    if component is None:
        component = tuple(range(G.degree))
    component = tuple(sorted(component))
    orbs = [o for o in orbits(G) if set(o) & set(component)]
    if len(orbs) != 1 or set(orbs[0]) != set(component):
        raise NotTransitive(f"group is not transitive on {component}")
    n = len(component)
    if n == 1:
        return None
    a = component[0]
    best = None
    for b in component[1:]:
        classes = _min_block_with(G, component, a, b)
        size = len(classes[0]) if all(len(c) == len(classes[0]) for c in classes) else None
        if size is None or size in (1, n):
            continue
        if best is None or size < best.block_size:
            best = BlockSystem(classes)
    return best


def is_primitive(G: GeneratedGroup, component=None) -> bool:
    return minimal_blocks(G, component) is None


def rigid_stabilizer(G: GeneratedGroup, U) -> GeneratedGroup:
    """Subgroup of elements fixing every point outside U."""
    Uset = set(U)
    outside = [x for x in range(G.degree) if x not in Uset]
    els = tuple(sorted(p for p in G.elements if all(p[x] == x for x in outside)))
    return GeneratedGroup(G.degree, els or [identity(G.degree)], G.cap, _elements=els)


def contains_alt_on(G: GeneratedGroup, U) -> bool:
    """Does the rigid stabilizer of U, restricted to U, contain Alt(U)?

    Vacuously true for |U| <= 2.  Instead of testing membership of every even
    permutation we count the even elements of the restricted rigid stabilizer:
    that count equals |U|!/2 exactly when the restriction contains Alt(U).
    """
    U = tuple(sorted(U))
    if len(U) <= 2:
        return True
    R = rigid_stabilizer(G, U)
    target = factorial(len(U)) // 2
    if R.order < target:
        return False
    evens = sum(1 for p in {restrict(h, U) for h in R.elements} if is_even(p))
    return evens == target


# ---------------------------------------------------------------------------
# subgroup enumeration
# ---------------------------------------------------------------------------

def _subgroup_fingerprint(els) -> tuple:
    """Conjugation-invariant fingerprint: order plus cycle-type histogram."""
    hist = Counter(cycle_type(p) for p in els)
    return (len(els), tuple(sorted(hist.items())))


def _find_conjugator(gens, k_order, target_set, ambient_elements):
    """Some s with s^-1 <gens> s == target (as sets), or None."""
    for s in ambient_elements:
        if all(conjugate(g, s) in target_set for g in gens):
            if k_order == len(target_set):
                return s
    return None


def _double_coset_reps(H_els, ambient_elements):
    """Representatives of H\\G/H, in ambient element order."""
    visited = set()
    reps = []
    for g in ambient_elements:
        if g in visited:
            continue
        reps.append(g)
        for a in H_els:
            ag = compose(a, g)
            for b in H_els:
                visited.add(compose(ag, b))
    return reps


@lru_cache(maxsize=None)
def _subgroup_classes(degree: int, cap: int):
    """Conjugacy-class representatives of subgroups of Sym(degree).

    Works up the lattice by joining each known class representative with one
    element per double coset; <H, a g b> == <H, g> for a, b in H, so double
    coset representatives cover every join.  New groups are identified up to
    conjugacy by fingerprint plus an explicit conjugator search.
    """
    ambient = tuple(sorted(itertools.permutations(range(degree))))
    e = identity(degree)
    reps: list[dict] = []
    by_fp: dict[tuple, list[int]] = {}
    seen_exact: dict[frozenset, int] = {}

    def register(gens, els):
        key = frozenset(els)
        fp = _subgroup_fingerprint(els)
        for idx in by_fp.get(fp, []):
            if _find_conjugator(gens, len(els), reps[idx]["eset"], ambient) is not None:
                seen_exact[key] = idx
                return None
        idx = len(reps)
        reps.append({"gens": tuple(gens), "elements": tuple(sorted(els)), "eset": key})
        by_fp.setdefault(fp, []).append(idx)
        seen_exact[key] = idx
        return idx

    register((), (e,))
    todo = deque([0])
    while todo:
        i = todo.popleft()
        rep = reps[i]
        for g in _double_coset_reps(rep["elements"], ambient):
            if g in rep["eset"]:
                continue
            els = close(rep["gens"] + (g,), cap, degree=degree)
            if frozenset(els) in seen_exact:
                continue
            new_idx = register(rep["gens"] + (g,), els)
            if new_idx is not None:
                todo.append(new_idx)
    return ambient, tuple((r["gens"], r["elements"]) for r in reps)


@lru_cache(maxsize=None)
def enumerate_subgroups(degree: int, cap: int = DEFAULT_CAP):
    """All subgroups of Sym(degree), each exactly once, plus conjugacy classes.

    Returns (subgroups, classes): subgroups is a tuple of GeneratedGroup in a
    deterministic order (by order, then by sorted element list); classes is a
    tuple of tuples of indices into it, one per conjugacy class.
    """
    if degree < 1:
        raise ValueError("degree must be positive")
    if degree > 6:
        raise DegreeTooLarge("exhaustive subgroup enumeration supports degree <= 6")
    if factorial(degree) > cap:
        raise ClosureExceedsCap(f"|Sym({degree})| exceeds cap={cap}")
    ambient, classes_raw = _subgroup_classes(degree, cap)
    expanded = []
    for gens, els in classes_raw:
        seen = {}
        for s in ambient:
            key = tuple(sorted(conjugate(h, s) for h in els))
            if key not in seen:
                seen[key] = None
        expanded.append(sorted(seen))
    flat = sorted({els for cls in expanded for els in cls}, key=lambda e: (len(e), e))
    index = {els: i for i, els in enumerate(flat)}
    subgroups = tuple(
        GeneratedGroup(degree, els, cap, _elements=els) for els in flat
    )
    classes = tuple(tuple(sorted(index[e] for e in cls)) for cls in expanded)
    classes = tuple(sorted(classes, key=lambda c: c[0]))
    return subgroups, classes


def subgroups_of(G: GeneratedGroup, cap: int = DEFAULT_CAP) -> tuple[GeneratedGroup, ...]:
    """All subgroups of an explicitly enumerable ambient group.

    Join closure with cyclic subgroups; fine for ambient orders in the dozens.
    """
    els = G.elements
    e = identity(G.degree)
    cyclics = {}
    for g in els:
        c = close([g], cap, degree=G.degree)
        cyclics.setdefault(frozenset(c), (g,))
    found = {frozenset([e]): ()}
    frontier = list(found)
    while frontier:
        fresh = []
        for key in frontier:
            gens = found[key]
            for ckey, cgens in cyclics.items():
                if ckey <= key:
                    continue
                joined = close(gens + cgens, cap, degree=G.degree)
                jkey = frozenset(joined)
                if jkey not in found:
                    found[jkey] = gens + cgens
                    fresh.append(jkey)
        frontier = fresh
    out = []
    for key in sorted(found, key=lambda k: (len(k), tuple(sorted(k)))):
        lst = tuple(sorted(key))
        out.append(GeneratedGroup(G.degree, found[key] or lst, cap, _elements=lst))
    return tuple(out)


def overgroups_of_cycle(degree: int, cap: int = DEFAULT_CAP) -> tuple[GeneratedGroup, ...]:
    """Every subgroup of Sym(degree) containing the standard degree-cycle.

    Every transitive subgroup of prime degree p contains a p-cycle (Cauchy),
    and all p-cycles are conjugate, so for prime degree this interval carries
    a representative of every transitive conjugacy class.
    """
    ambient = tuple(sorted(itertools.permutations(range(degree))))
    seed = close([from_cycles(degree, tuple(range(degree)))], cap, degree=degree)
    found = {frozenset(seed): (from_cycles(degree, tuple(range(degree))),)}
    todo = deque([frozenset(seed)])
    while todo:
        key = todo.popleft()
        gens = found[key]
        els = tuple(sorted(key))
        for g in _double_coset_reps(els, ambient):
            if g in key:
                continue
            joined = close(gens + (g,), cap, degree=degree)
            jkey = frozenset(joined)
            if jkey not in found:
                found[jkey] = gens + (g,)
                todo.append(jkey)
    out = []
    for key in sorted(found, key=lambda k: (len(k), tuple(sorted(k)))):
        lst = tuple(sorted(key))
        out.append(GeneratedGroup(degree, found[key], cap, _elements=lst))
    return tuple(out)


# ---------------------------------------------------------------------------
# group files
# ---------------------------------------------------------------------------

def group_to_json(G: GeneratedGroup, include_elements: bool = False) -> dict:
    data = {"degree": G.degree, "generators": [list(g) for g in G.generators]}
    if include_elements:
        data["elements"] = [list(p) for p in G.elements]
    return data


def group_from_json(data, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    degree = int(data["degree"])
    gens = [tuple(int(x) for x in g) for g in data["generators"]]
    for g in gens:
        if len(g) != degree or not is_perm(g):
            raise ValueError(f"bad generator for degree {degree}: {g}")
    return GeneratedGroup(degree, gens, cap)


def load_group(path, cap: int = DEFAULT_CAP) -> GeneratedGroup:
    with open(path, "r", encoding="utf-8") as fh:
        return group_from_json(json.load(fh), cap)

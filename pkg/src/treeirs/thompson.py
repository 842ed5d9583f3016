"""Tree-pair calculus for prefix-replacement maps on the rooted tree T_{d,q}.

An element is a reduced triple (A, B, sigma): two complete finite subtrees
with equally many leaves and a leaf bijection.  It acts on addresses by
replacing the unique A-leaf prefix with its sigma image; below the leaves the
identification is order preserving by construction.  Composition goes through
the common refinement of the middle trees; reduction collapses sibling
families that map order-preservingly onto sibling families, and the reduced
representative is the canonical form used for equality.

Subtrees are stored as their leaf sets: sorted tuples of digit-tuple
addresses (the root-only tree is ``((),)``).
"""

from __future__ import annotations

from dataclasses import dataclass

from .tree import ColourScheme, TreeShape, orbit_label

Address = tuple[int, ...]


class MalformedPair(ValueError):
    pass


class AddressTooShallow(ValueError):
    pass


def _arity(prefix: Address, d: int, q: int) -> int:
    return q if prefix == () else d


def _check_leafset(leaves, d: int, q: int) -> tuple[Address, ...]:
    """Validate a complete-subtree leaf set: a prefix-free cover of the boundary."""
    leaves = tuple(sorted(tuple(a) for a in leaves))
    if not leaves:
        raise MalformedPair("empty leaf set")
    if len(set(leaves)) != len(leaves):
        raise MalformedPair("duplicate leaves")
    max_depth = max(len(a) for a in leaves)
    for a in leaves:
        for j, digit in enumerate(a):
            if not 0 <= digit < _arity(a[:j], d, q):
                raise MalformedPair(f"bad digit in address {a}")
    leafset = set(leaves)

    def cover(prefix: Address) -> int:
        if prefix in leafset:
            return 1
        if len(prefix) >= max_depth:
            raise MalformedPair(f"boundary not covered below {prefix}")
        return sum(cover(prefix + (j,)) for j in range(_arity(prefix, d, q)))

    if cover(()) != len(leaves):
        raise MalformedPair("leaf set is not a complete subtree frontier")
    return leaves


@dataclass(frozen=True)
class TreePair:
    """A (domain tree, range tree, leaf bijection) triple; not auto-reduced.

    ``sigma[i]`` is the index into ``range_leaves`` of the image of
    ``domain_leaves[i]``.  Use :func:`reduce_pair` (or the ``reduced``
    convenience) to get the canonical representative.
    """

    d: int
    q: int
    domain_leaves: tuple[Address, ...]
    range_leaves: tuple[Address, ...]
    sigma: tuple[int, ...]

    def __post_init__(self):
        if self.d < 2 or self.q < 2:
            raise MalformedPair("need d >= 2 and q >= 2")
        dom = _check_leafset(self.domain_leaves, self.d, self.q)
        rng = _check_leafset(self.range_leaves, self.d, self.q)
        object.__setattr__(self, "domain_leaves", dom)
        object.__setattr__(self, "range_leaves", rng)
        object.__setattr__(self, "sigma", tuple(self.sigma))
        if len(dom) != len(rng):
            raise MalformedPair("domain and range leaf counts differ")
        if sorted(self.sigma) != list(range(len(dom))):
            raise MalformedPair("sigma is not a bijection of leaf indices")

    @classmethod
    def identity(cls, d: int, q: int) -> "TreePair":
        return cls(d, q, ((),), ((),), (0,))

    @classmethod
    def from_mapping(cls, d: int, q: int, mapping) -> "TreePair":
        """Build from {domain address: range address} pairs."""
        items = sorted((tuple(a), tuple(b)) for a, b in dict(mapping).items())
        dom = tuple(a for a, _ in items)
        rng = tuple(sorted(b for _, b in items))
        pos = {b: j for j, b in enumerate(rng)}
        return cls(d, q, dom, rng, tuple(pos[b] for _, b in items))

    def image_of_leaf(self, a: Address) -> Address:
        i = self.domain_leaves.index(tuple(a))
        return self.range_leaves[self.sigma[i]]

    def mapping(self) -> dict[Address, Address]:
        return {a: self.range_leaves[self.sigma[i]]
                for i, a in enumerate(self.domain_leaves)}

    def reduced(self) -> "TreePair":
        return reduce_pair(self)


def _expand_once(pair: TreePair, domain_leaf: Address) -> TreePair:
    """Expand one domain leaf and its image into their children, in order."""
    a = tuple(domain_leaf)
    b = pair.image_of_leaf(a)
    arity = _arity(a, pair.d, pair.q)  # a == () iff b == (), so arities agree
    m = pair.mapping()
    del m[a]
    for j in range(arity):
        m[a + (j,)] = b + (j,)
    return TreePair.from_mapping(pair.d, pair.q, m)


def _internal_vertices(leaves) -> set[Address]:
    out = set()
    for a in leaves:
        for j in range(len(a)):
            out.add(a[:j])
    return out


def join_frontiers(l1, l2, d: int, q: int) -> tuple[Address, ...]:
    """Frontier of the smallest complete subtree refining both frontiers."""
    internal = _internal_vertices(l1) | _internal_vertices(l2)
    out = []

    def walk(prefix: Address):
        if prefix in internal:
            for j in range(_arity(prefix, d, q)):
                walk(prefix + (j,))
        else:
            out.append(prefix)

    walk(())
    return tuple(sorted(out))


def _expand_side_to(pair: TreePair, side: str, target) -> TreePair:
    """Expand the pair until the chosen side's frontier equals ``target``."""
    target_internal = _internal_vertices(target)
    while True:
        leaves = pair.range_leaves if side == "range" else pair.domain_leaves
        todo = [a for a in leaves if a in target_internal]
        if not todo:
            return pair
        a = todo[0]
        if side == "range":
            inv = {pair.range_leaves[pair.sigma[i]]: pair.domain_leaves[i]
                   for i in range(len(pair.sigma))}
            pair = _expand_once(pair, inv[a])
        else:
            pair = _expand_once(pair, a)


def reduce_pair(pair: TreePair) -> TreePair:
    """Collapse order-preserving sibling-family matches until none remain."""
    while True:
        m = pair.mapping()
        dom = set(m)
        collapsed = False
        for parent in sorted(_internal_vertices(pair.domain_leaves)):
            arity = _arity(parent, pair.d, pair.q)
            kids = [parent + (j,) for j in range(arity)]
            if not all(k in dom for k in kids):
                continue
            images = [m[k] for k in kids]
            w = images[0][:-1] if images[0] else None
            if w is None:
                continue
            if _arity(w, pair.d, pair.q) != arity:
                continue
            if all(img == w + (j,) for j, img in enumerate(images)):
                for k in kids:
                    del m[k]
                m[parent] = w
                pair = TreePair.from_mapping(pair.d, pair.q, m)
                collapsed = True
                break
        if not collapsed:
            return pair


def compose(p1: TreePair, p2: TreePair) -> TreePair:
    """p1 then p2, returned in reduced form."""
    if (p1.d, p1.q) != (p2.d, p2.q):
        raise MalformedPair("tree parameters differ")
    middle = join_frontiers(p1.range_leaves, p2.domain_leaves, p1.d, p1.q)
    a = _expand_side_to(p1, "range", middle)
    b = _expand_side_to(p2, "domain", middle)
    # a.range_leaves == b.domain_leaves == middle (both sorted)
    sigma = tuple(b.sigma[a.sigma[i]] for i in range(len(a.sigma)))
    return reduce_pair(TreePair(p1.d, p1.q, a.domain_leaves, b.range_leaves, sigma))


def inverse(pair: TreePair) -> TreePair:
    inv = [0] * len(pair.sigma)
    for i, j in enumerate(pair.sigma):
        inv[j] = i
    return TreePair(pair.d, pair.q, pair.range_leaves, pair.domain_leaves,
                    tuple(inv))


def act_on_address(pair: TreePair, w, deepen: bool = False):
    """Image of an address: replace its domain-leaf prefix with the sigma image.

    If ``w`` is a proper prefix of a domain leaf the action is not determined
    at this depth; with ``deepen=True`` the minimal deepenings are returned as
    (address, image) pairs instead of raising.
    """
    w = tuple(w)
    for i, a in enumerate(pair.domain_leaves):
        if w[:len(a)] == a:
            return pair.range_leaves[pair.sigma[i]] + w[len(a):]
    below = [a for a in pair.domain_leaves if a[:len(w)] == w]
    if not below:
        raise MalformedPair(f"address {w} is outside the tree")
    if not deepen:
        raise AddressTooShallow(
            f"address {w} is shallower than the domain frontier")
    return tuple((a, pair.range_leaves[pair.sigma[pair.domain_leaves.index(a)]])
                 for a in below)


def is_label_preserving(pair: TreePair, scheme: ColourScheme,
                        policy: str = "orbit") -> bool:
    """Does the leaf bijection preserve the parent-edge label everywhere?

    Order preservation below the leaves is built into the calculus; this
    checks the labels of matched frontier leaves.  Needs q <= d+1 so the root
    edges can be coloured.
    """
    if pair.q > scheme.d + 1:
        raise MalformedPair("root arity exceeds the number of colours")
    shape = TreeShape(pair.d, pair.q,
                      n_max=max(len(a) for a in
                                pair.domain_leaves + pair.range_leaves) + 1)
    for i, a in enumerate(pair.domain_leaves):
        if not a:
            continue  # root-only pair: nothing to check
        b = pair.range_leaves[pair.sigma[i]]
        if orbit_label(shape, scheme, a, policy) != orbit_label(shape, scheme, b, policy):
            return False
    return True


def pair_to_json(pair: TreePair) -> dict:
    return {
        "d": pair.d,
        "q": pair.q,
        "domain_leaves": ["".join(map(str, a)) for a in pair.domain_leaves],
        "range_leaves": ["".join(map(str, a)) for a in pair.range_leaves],
        "sigma": list(pair.sigma),
    }


def pair_from_json(data) -> TreePair:
    return TreePair(
        int(data["d"]), int(data["q"]),
        tuple(tuple(int(ch) for ch in s) for s in data["domain_leaves"]),
        tuple(tuple(int(ch) for ch in s) for s in data["range_leaves"]),
        tuple(int(x) for x in data["sigma"]),
    )

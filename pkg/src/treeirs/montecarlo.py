"""Seeded Monte Carlo estimators for the tree-orbit matching experiments.

Reproducibility contract: the random bits consumed by trial ``t`` of a run
depend only on ``(seed, t)`` -- never on scheduling -- so identical
(config, seed) pairs give bit-identical results for any worker count.
Workers simply split the trial index range; merging is addition.

The generator is SplitMix64: a 64-bit counter stream with a strong mixing
finalizer, keyed here by hashing the seed and the trial index together.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, sqrt

from .canon import BudgetExceeded, canon_coloured, canon_full, orbit_census
from .tree import ColourScheme, cone_leaf_labels

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class KTooLarge(ValueError):
    pass


class InvalidExperiment(ValueError):
    pass


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class TrialRng:
    """Deterministic SplitMix64 stream for one (seed, trial) pair."""

    __slots__ = ("_state",)

    def __init__(self, seed: int, trial: int):
        s = _mix64((seed & _MASK64) ^ _GOLDEN)
        self._state = _mix64(s ^ _mix64((trial * _GOLDEN + 0x1F) & _MASK64))

    def next64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection."""
        if n <= 1:
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            r = self.next64() & mask
            if r < n:
                return r

    def sample(self, m: int, k: int) -> tuple[int, ...]:
        """Sorted uniform k-subset of range(m), by partial Fisher-Yates."""
        if k > m:
            raise KTooLarge(f"k={k} exceeds population {m}")
        arr = list(range(m))
        for i in range(k):
            j = i + self.randbelow(m - i)
            arr[i], arr[j] = arr[j], arr[i]
        return tuple(sorted(arr[:k]))

    def sample_seq(self, m: int, k: int) -> tuple[int, ...]:
        """Uniform ordered sequence of k distinct values from range(m)."""
        if k > m:
            raise KTooLarge(f"k={k} exceeds population {m}")
        arr = list(range(m))
        for i in range(k):
            j = i + self.randbelow(m - i)
            arr[i], arr[j] = arr[j], arr[i]
        return tuple(arr[:k])


@dataclass(frozen=True)
class Estimate:
    experiment: str
    params: tuple[tuple[str, object], ...]
    trials: int
    successes: int
    seed: int

    @property
    def p_hat(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        if not self.trials:
            return 0.0
        p = self.p_hat
        return sqrt(p * (1.0 - p) / self.trials)

    def merge(self, other: "Estimate") -> "Estimate":
        if (self.experiment, self.params, self.seed) != \
                (other.experiment, other.params, other.seed):
            raise ValueError("can only merge estimates with identical configs")
        return Estimate(self.experiment, self.params,
                        self.trials + other.trials,
                        self.successes + other.successes, self.seed)


def _run_trials(trial_fn, trials: int, workers: int = 1) -> int:
    """Sum of trial_fn(t) over t in range(trials); worker-count invariant."""
    if trials < 0:
        raise ValueError("trials must be >= 0")
    workers = max(1, workers)
    if workers == 1 or trials < 2 * workers:
        return sum(1 for t in range(trials) if trial_fn(t))
    step = (trials + workers - 1) // workers
    ranges = [range(lo, min(lo + step, trials)) for lo in range(0, trials, step)]

    def chunk(r):
        return sum(1 for t in r if trial_fn(t))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(chunk, ranges))


def _warn_if_outside_paper_range(k: int, half: float) -> None:
    if not 2 <= k <= half:
        warnings.warn(f"k={k} is outside the bound's stated range [2, {half:g}]",
                      stacklevel=3)


def estimate_treematch(d: int, n: int, k: int, trials: int, seed: int,
                       scheme: ColourScheme | None = None,
                       parent_colour: int | None = None,
                       workers: int = 1) -> Estimate:
    """P(E ~ F) for independent uniform k-subsets of two depth-n cones.

    Full mode by default; pass a scheme for colour-constrained equivalence
    (both cone roots get the same parent colour, so forms are comparable).
    """
    leaves = d ** n
    if k > leaves:
        raise KTooLarge(f"k={k} exceeds {leaves} leaves")
    _warn_if_outside_paper_range(k, leaves / 2)
    if scheme is not None and parent_colour is None:
        parent_colour = scheme.reps[0]

    def trial(t: int) -> bool:
        rng = TrialRng(seed, t)
        E = rng.sample(leaves, k)
        F2 = rng.sample(leaves, k)
        if scheme is None:
            return canon_full(E, n, d) == canon_full(F2, n, d)
        return (canon_coloured(E, n, scheme, parent_colour)
                == canon_coloured(F2, n, scheme, parent_colour))

    succ = _run_trials(trial, trials, workers)
    mode = "full" if scheme is None else "coloured"
    return Estimate("treematch", (("d", d), ("n", n), ("k", k), ("mode", mode)),
                    trials, succ, seed)


def _split_two_cones(subset, cone_size: int):
    e1 = [x for x in subset if x < cone_size]
    e2 = [x - cone_size for x in subset if cone_size <= x < 2 * cone_size]
    return tuple(e1), tuple(e2)


def estimate_cut1(d: int, q: int, n: int, k: int, trials: int, seed: int,
                  workers: int = 1, K: tuple[int, ...] | None = None) -> Estimate:
    """P((K sigma) n C_u ~ (K sigma) n C_v) for uniform sigma on q d^n leaves.

    K defaults to the first k leaves; the distribution of K sigma depends on
    K only through k, so any fixed K gives the same law (unit-tested).  The
    image of a fixed k-set under uniform sigma is sampled directly as a
    uniform k-subset.
    """
    m = q * d ** n
    if K is None:
        K = tuple(range(k))
    if len(K) != k or any(not 0 <= x < m for x in K):
        raise ValueError("K must be a k-subset of the leaf range")
    if k > m:
        raise KTooLarge(f"k={k} exceeds {m} leaves")
    cone_size = d ** n

    def trial(t: int) -> bool:
        rng = TrialRng(seed, t)
        image = rng.sample(m, k)
        e1, e2 = _split_two_cones(image, cone_size)
        if len(e1) != len(e2):
            return False  # orbits preserve cardinality; never evaluated as a match
        return canon_full(e1, n, d) == canon_full(e2, n, d)

    succ = _run_trials(trial, trials, workers)
    return Estimate("cut1", (("d", d), ("q", q), ("n", n), ("k", k)),
                    trials, succ, seed)


def estimate_cut2(d: int, q: int, n: int, k: int, trials: int, seed: int,
                  workers: int = 1) -> Estimate:
    """P((K1 sigma) n C_u ~ (K2 sigma) n C_v) for disjoint fixed k-sets K1, K2."""
    m = q * d ** n
    if 2 * k > m:
        raise KTooLarge(f"2k={2 * k} exceeds {m} leaves")
    cone_size = d ** n

    def trial(t: int) -> bool:
        rng = TrialRng(seed, t)
        seq = rng.sample_seq(m, 2 * k)
        img1, img2 = seq[:k], seq[k:]
        e1 = tuple(sorted(x for x in img1 if x < cone_size))
        e2 = tuple(sorted(x - cone_size for x in img2
                          if cone_size <= x < 2 * cone_size))
        if len(e1) != len(e2):
            return False
        return canon_full(e1, n, d) == canon_full(e2, n, d)

    succ = _run_trials(trial, trials, workers)
    return Estimate("cut2", (("d", d), ("q", q), ("n", n), ("k", k)),
                    trials, succ, seed)


def estimate_colormatch(scheme: ColourScheme, n: int, k: int, orbit_i: int,
                        trials: int, seed: int, root_label: int = 0,
                        workers: int = 1) -> Estimate:
    """P(E1 ~ E2) for independent uniform k-subsets of the label-i leaf slots.

    Both cones carry the representative colour of ``root_label`` on their
    parent edges; equivalence is the colour-constrained one.
    """
    parent_colour = scheme.reps[root_label]
    labels = cone_leaf_labels(scheme, parent_colour, n)
    ground = tuple(i for i, lab in enumerate(labels) if lab == orbit_i)
    if k > len(ground):
        raise KTooLarge(f"k={k} exceeds {len(ground)} label-{orbit_i} leaves")
    _warn_if_outside_paper_range(k, len(ground) / 2)

    def trial(t: int) -> bool:
        rng = TrialRng(seed, t)
        e1 = tuple(ground[i] for i in rng.sample(len(ground), k))
        e2 = tuple(ground[i] for i in rng.sample(len(ground), k))
        return (canon_coloured(e1, n, scheme, parent_colour)
                == canon_coloured(e2, n, scheme, parent_colour))

    succ = _run_trials(trial, trials, workers)
    return Estimate("colormatch",
                    (("d", scheme.d), ("n", n), ("k", k), ("orbit", orbit_i),
                     ("root_label", root_label)),
                    trials, succ, seed)


ESTIMATORS = {
    "treematch": estimate_treematch,
    "cut1": estimate_cut1,
    "cut2": estimate_cut2,
    "colormatch": estimate_colormatch,
}


# ---------------------------------------------------------------------------
# exact enumeration oracles for the small configurations
# ---------------------------------------------------------------------------

def exact_treematch(d: int, n: int, k: int, scheme: ColourScheme | None = None,
                    parent_colour: int | None = None,
                    budget: int = 2_000_000) -> Fraction:
    """Census-derived exact match probability: sum of (class/total)^2."""
    return orbit_census(d, n, k, scheme, parent_colour,
                        budget=budget).match_probability()


def exact_colormatch(scheme: ColourScheme, n: int, k: int, orbit_i: int,
                     root_label: int = 0, budget: int = 2_000_000) -> Fraction:
    """Exact colormatch probability by canonicalizing all k-subsets of the slots."""
    parent_colour = scheme.reps[root_label]
    labels = cone_leaf_labels(scheme, parent_colour, n)
    ground = [i for i, lab in enumerate(labels) if lab == orbit_i]
    total = comb(len(ground), k)
    if total > budget:
        raise BudgetExceeded(f"{total} subsets exceed budget={budget}")
    counts: dict[int, int] = {}
    for sel in combinations(ground, k):
        fid = canon_coloured(sel, n, scheme, parent_colour)
        counts[fid] = counts.get(fid, 0) + 1
    return sum((Fraction(c, total) ** 2 for c in counts.values()), Fraction(0))


def exact_cut1(d: int, q: int, n: int, k: int, budget: int = 2_000_000) -> Fraction:
    """Exact cut1 probability by enumerating all images K sigma."""
    m = q * d ** n
    total = comb(m, k)
    if total > budget:
        raise BudgetExceeded(f"{total} subsets exceed budget={budget}")
    cone_size = d ** n
    hits = 0
    for image in combinations(range(m), k):
        e1, e2 = _split_two_cones(image, cone_size)
        if len(e1) == len(e2) and canon_full(e1, n, d) == canon_full(e2, n, d):
            hits += 1
    return Fraction(hits, total)


def exact_cut2(d: int, q: int, n: int, k: int, budget: int = 2_000_000) -> Fraction:
    """Exact cut2 probability over ordered pairs of disjoint k-subsets."""
    m = q * d ** n
    total = comb(m, k) * comb(m - k, k)
    if total > budget:
        raise BudgetExceeded(f"{total} pairs exceed budget={budget}")
    cone_size = d ** n
    hits = 0
    universe = range(m)
    for img1 in combinations(universe, k):
        rest = [x for x in universe if x not in set(img1)]
        e1 = tuple(sorted(x for x in img1 if x < cone_size))
        f1 = canon_full(e1, n, d)
        for img2 in combinations(rest, k):
            e2 = tuple(sorted(x - cone_size for x in img2
                              if cone_size <= x < 2 * cone_size))
            if len(e1) == len(e2) and f1 == canon_full(e2, n, d):
                hits += 1
    return Fraction(hits, total)

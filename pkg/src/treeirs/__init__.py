"""treeirs: finite-scale verification of conjugation-invariant subgroup measures.

Exact counting-lemma checks on small permutation groups, canonical forms for
rooted-tree orbit matching, closed-form probability bounds, and seeded Monte
Carlo estimators, wired together by a batch CLI.
"""

__version__ = "0.1.0"

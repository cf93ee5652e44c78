"""Independent oracles shared by the test modules.

Nothing here imports the code paths it is used to check: pair conditions are
recomputed on Python sets, ranks come from sympy, cliques from brute force or
networkx.
"""
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
import pytest
import sympy
from sympy import GF, ZZ
from sympy.polys.matrices import DomainMatrix

from fracfam.core import Family


def oracle_pair(A: frozenset, B: frozenset, fracs) -> bool:
    k = len(A & B)
    return any(k == Fraction(f) * len(A) or k == Fraction(f) * len(B) for f in fracs)


def oracle_valid(sets, fracs) -> bool:
    sets = [frozenset(s) for s in sets]
    return all(oracle_pair(A, B, fracs) for A, B in combinations(sets, 2))


def oracle_violations(sets, fracs) -> list[tuple[int, int]]:
    sets = [frozenset(s) for s in sets]
    return [(i, j) for i, j in combinations(range(len(sets)), 2)
            if not oracle_pair(sets[i], sets[j], fracs)]


def oracle_universe(n: int, sizes=None) -> list[frozenset]:
    sizes = range(1, n + 1) if sizes is None else sizes
    return [frozenset(c) for k in sizes for c in combinations(range(1, n + 1), k)]


def naive_max_clique(vertices, fracs) -> int:
    """Enumerate every vertex subset; only for small universes."""
    nv = len(vertices)
    assert nv <= 20
    ok = {(i, j): oracle_pair(vertices[i], vertices[j], fracs)
          for i in range(nv) for j in range(nv) if i != j}
    best = 0
    for mask in range(1 << nv):
        size = bin(mask).count("1")
        if size <= best:
            continue
        idx = [i for i in range(nv) if mask >> i & 1]
        if all(ok[i, j] for i, j in combinations(idx, 2)):
            best = size
    return best


def nx_max_clique(vertices, fracs) -> int:
    G = nx.Graph()
    G.add_nodes_from(range(len(vertices)))
    G.add_edges_from((i, j) for i, j in combinations(range(len(vertices)), 2)
                     if oracle_pair(vertices[i], vertices[j], fracs))
    return max((len(c) for c in nx.find_cliques(G)), default=0)


def sympy_rank(M) -> int:
    return sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator)
                          for x in row] for row in M]).rank()


def sympy_rank_mod_p(M, p: int) -> int:
    rows = [[ZZ(int(x)) for x in row] for row in M]
    return DomainMatrix(rows, (len(rows), len(rows[0])), ZZ).convert_to(GF(p)).rank()


def _paley_hadamard(q: int) -> np.ndarray:
    """Paley construction I for a prime q = 3 mod 4; order q + 1."""
    residues = {(x * x) % q for x in range(1, q)}
    chi = lambda x: 0 if x % q == 0 else (1 if x % q in residues else -1)
    Q = np.array([[chi(j - i) for j in range(q)] for i in range(q)])
    S = np.zeros((q + 1, q + 1), dtype=int)
    S[0, 1:] = 1
    S[1:, 0] = -1
    S[1:, 1:] = Q
    H = S + np.eye(q + 1, dtype=int)
    # normalise: first row and column all +1
    H = H * H[:, :1]
    H = H * H[:1, :]
    return H


def window_family_n100() -> Family:
    """95 sets of size 48 on [100], pairwise meeting in 24: a bisection-closed window family."""
    H12 = _paley_hadamard(11)
    H8 = np.array([[1]])
    for _ in range(3):
        H8 = np.block([[H8, H8], [H8, -H8]])
    H = np.kron(H12, H8)
    assert (H @ H.T == 96 * np.eye(96)).all()
    sets = [[int(c) + 1 for c in np.flatnonzero(row == -1)] for row in H[1:]]
    return Family.from_sets(sets, 100)


@pytest.fixture(scope="session")
def window_family():
    return window_family_n100()

#!/usr/bin/env python3
"""Independent reference values for the C++ test suite.

Nothing here imports or calls the C++ engine. Representations are built from
textbook formulas (spin matrices, symmetric powers of the defining rep of
SU(3)) and the Laplacian is assembled densely with numpy. Lattice values use
elementary geometry. Run it and paste the printed numbers into
tests/test_oracle.cpp when a reference needs to change.

    python3 tests/oracle/oracle.py > tests/oracle/frozen.json
"""

import itertools
import json
import math

import numpy as np


# ---------------------------------------------------------------- SU(2)

def spin_matrices(two_j):
    """Standard angular momentum matrices J1, J2, J3 for spin j = two_j / 2."""
    j = two_j / 2.0
    m = np.arange(j, -j - 1, -1)
    d = len(m)
    jp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        jp[k - 1, k] = math.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jm = jp.conj().T
    return [(jp + jm) / 2, (jp - jm) / 2j, np.diag(m).astype(complex)]


def su2_generators(two_j):
    # E_a = -i sigma_a in the spin-1/2 rep gives [E1, E2] = 2 E3 and unit length
    # for -1/2 tr; in spin j this is -2i J_a.
    return [-2j * J for J in spin_matrices(two_j)]


def laplacian_min(gens, T):
    """Smallest eigenvalue of -sum T_ab pi(X_a) pi(X_b)."""
    d = gens[0].shape[0]
    A = np.zeros((d, d), dtype=complex)
    for a in range(len(gens)):
        for b in range(len(gens)):
            if T[a, b] != 0.0:
                A -= T[a, b] * gens[a] @ gens[b]
    A = (A + A.conj().T) / 2
    return float(np.linalg.eigvalsh(A).min())


def su2_lambda1(phi, integer_spins_only=False):
    T = np.linalg.inv(phi)
    best = math.inf
    floor = 1.0 / np.linalg.eigvalsh(phi).max()  # Casimir * floor bounds each rep below
    two_j = 2 if integer_spins_only else 1
    step = 2 if integer_spins_only else 1
    while True:
        j = two_j / 2.0
        if 4 * j * (j + 1) * floor > best:
            return best
        best = min(best, laplacian_min(su2_generators(two_j), T))
        two_j += step


# ---------------------------------------------------------------- SU(3)

def su3_basis():
    """-1/2 tr orthonormal basis: Cartan pair first, then the three root blocks."""
    E = lambda i, j: np.outer(np.eye(3)[i], np.eye(3)[j]).astype(complex)
    h1 = 1j * (E(0, 0) - E(1, 1))
    h2 = 1j * (E(0, 0) + E(1, 1) - 2 * E(2, 2)) / math.sqrt(3.0)
    blocks = []
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        blocks.append([E(i, j) - E(j, i), 1j * (E(i, j) + E(j, i))])
    for X in [h1, h2] + [x for b in blocks for x in b]:
        assert abs(-0.5 * np.trace(X @ X).real - 1.0) < 1e-12
    return [h1, h2], blocks


def sym_power_rep(X, a):
    """Action of a 3x3 matrix X as a derivation on degree-a polynomials."""
    monos = [m for m in itertools.product(range(a + 1), repeat=3) if sum(m) == a]
    index = {m: k for k, m in enumerate(monos)}
    R = np.zeros((len(monos), len(monos)), dtype=complex)
    # X acts on variables z_k by z_k -> sum_l X_lk z_l (the defining rep on C^3).
    for col, m in enumerate(monos):
        for k in range(3):
            if m[k] == 0:
                continue
            for l in range(3):
                if X[l, k] == 0:
                    continue
                n = list(m)
                n[k] -= 1
                n[l] += 1
                R[index[tuple(n)], col] += m[k] * X[l, k]
    return R


def flag_lambda1(x, max_ab=6):
    cartan, blocks = su3_basis()
    best = math.inf
    for a in range(max_ab + 1):
        for b in range(max_ab + 1):
            if (a - b) % 3 != 0 or a + b == 0:
                continue
            casimir = 4.0 / 3.0 * (a * a + b * b + a * b + 3 * a + 3 * b)
            if casimir / max(x) > best:
                continue
            # Sym^a (x) dual Sym^b contains (a,b), (a-1,b-1), ... down to a trivial
            # summand when a == b; those all occur in L^2 anyway.
            def rep(X):
                A = sym_power_rep(X, a)
                B = sym_power_rep(X, b).conj()
                return np.kron(A, np.eye(B.shape[0])) + np.kron(np.eye(A.shape[0]), B)
            H = [rep(h) for h in cartan]
            # Zero-weight space: common kernel of the Cartan generators (diagonal here).
            diag = np.abs(np.diag(H[0])) + np.abs(np.diag(H[1]))
            zero = np.where(diag < 1e-9)[0]
            op = np.zeros((len(zero), len(zero)), dtype=complex)
            for xi, blk in zip(x, blocks):
                for X in blk:
                    R = rep(X)
                    op -= (R @ R)[np.ix_(zero, zero)] / xi
            op = (op + op.conj().T) / 2
            ev = np.linalg.eigvalsh(op)
            # Discard the trivial summand (eigenvalue 0) when a == b.
            pos = ev[ev > 1e-9]
            if len(pos):
                best = min(best, float(pos.min()))
    # Every label outside the window must be ruled out by its Casimir bound.
    edge = 4.0 / 3.0 * ((max_ab + 1) ** 2 + 3 * (max_ab + 1))
    assert edge / max(x) > best, "enlarge max_ab"
    return best


# ---------------------------------------------------------------- flat tori

def torus_lambda1(G, box=6):
    Ginv = np.linalg.inv(G)
    best = math.inf
    for k in itertools.product(range(-box, box + 1), repeat=G.shape[0]):
        if any(k):
            v = np.array(k, dtype=float)
            best = min(best, float(v @ Ginv @ v))
    return best


def torus2_covering_radius(G):
    """Max over circumcentres of lattice triangles of the distance to the lattice.

    Every vertex of the Voronoi cell at 0 is such a circumcentre, lies within
    `reach` of the origin, and belongs to a triangle inside twice that ball.
    """
    U = np.linalg.cholesky(G).T * 2 * math.pi  # columns are lattice generators in Euclidean coords
    reach = np.linalg.norm(U[:, 0]) + np.linalg.norm(U[:, 1])
    # Integer window large enough to contain the Euclidean ball of radius 3 * reach.
    box = int(math.ceil(3 * reach / (2 * math.pi * math.sqrt(np.linalg.eigvalsh(G).min())))) + 1
    ks = np.array(list(itertools.product(range(-box, box + 1), repeat=2)), dtype=float)
    pts = ks @ U.T
    near = pts[np.linalg.norm(pts, axis=1) <= 2 * reach]
    best = 0.0
    for p, q, r in itertools.combinations(near, 3):
        A = np.array([q - p, r - p])
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        rhs = 0.5 * np.array([(q - p) @ (q - p), (r - p) @ (r - p)])
        c = p + np.linalg.solve(A, rhs)
        if np.linalg.norm(c) > reach:
            continue
        best = max(best, float(np.linalg.norm(pts - c, axis=1).min()))
    return best


# ---------------------------------------------------------------- main

def main():
    out = {}
    su2_cases = {
        "diag_1_2_3": np.diag([1.0, 2.0, 3.0]),
        "diag_0.5_1_4": np.diag([0.5, 1.0, 4.0]),
        "diag_1_1_0.1": np.diag([1.0, 1.0, 0.1]),
        "diag_1_1_10": np.diag([1.0, 1.0, 10.0]),
        "full": np.array([[2.0, 0.3, -0.2], [0.3, 1.0, 0.1], [-0.2, 0.1, 0.7]]),
    }
    out["su2"] = {k: su2_lambda1(v) for k, v in su2_cases.items()}
    out["so3"] = {k: su2_lambda1(v, integer_spins_only=True) for k, v in su2_cases.items()}
    flag_cases = [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0), (0.25, 1.0, 1.0), (1.0, 1.0, 4.0), (0.5, 2.0, 8.0)]
    out["su3_mod_t2"] = {",".join(f"{v:g}" for v in x): flag_lambda1(list(x)) for x in flag_cases}
    tori = {
        "diag_1_4": np.diag([1.0, 4.0]),
        "skew": np.array([[2.0, 0.7], [0.7, 1.0]]),
        "hex": np.array([[1.0, 0.5], [0.5, 1.0]]),
        "thin": np.array([[9.0, 2.0], [2.0, 0.8]]),
    }
    out["torus2"] = {k: {"lambda1": torus_lambda1(G), "diameter": torus2_covering_radius(G)} for k, G in tori.items()}
    G3 = np.array([[1.0, 0.2, 0.0], [0.2, 2.0, 0.3], [0.0, 0.3, 0.5]])
    out["torus3"] = {"lambda1": torus_lambda1(G3, box=4)}
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()

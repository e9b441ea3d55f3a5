"""Oracles and generators shared by the test modules.

Nothing here calls the library's solver: reference matrices are typed in
from their printed form, wirings are summed with explicit loops, and
certificates are checked with bare numpy.
"""

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from boxlab.classify import HierarchyClass as H
from boxlab.classify import enumerate_vertices, tobl_matrices

BITS = (0, 1)
A_PLUS = (1 + 1 / math.sqrt(2)) / 4
A_MINUS = (1 - 1 / math.sqrt(2)) / 4


def printed_ghz(ap=A_PLUS, am=A_MINUS):
    """The 8x8 GHZ matrix as printed, with the global 1/2 applied."""
    rows = [
        [2 * ap, 2 * am, 0, 0, 0, 0, 2 * am, 2 * ap],
        [2 * ap, 2 * am, 0, 0, 0, 0, 2 * am, 2 * ap],
        [ap, am, ap, am, am, ap, am, ap],
        [ap, am, ap, am, am, ap, am, ap],
        [ap, am, am, ap, ap, am, am, ap],
        [ap, am, am, ap, ap, am, am, ap],
        [ap, am, am, ap, am, ap, ap, am],
        [am, ap, ap, am, ap, am, am, ap],
    ]
    return 0.5 * np.array(rows)


def printed_q_3to2(eps, alpha):
    kp, km = (1 + eps) / 4, (1 - eps) / 4
    a = alpha
    r0 = [2 * kp + a * km, (2 - a) * km, a * kp + 2 * (1 - a) * km, (2 - a) * kp + 2 * a * km]
    return 0.5 * np.array([
        r0,
        r0,
        [0.5, 0.5, (a + 1) * kp + (1 - a) * km, (1 - a) * kp + (a + 1) * km],
        [2 * kp, 2 * km, a * kp + (2 - a) * km, (2 - a) * kp + a * km],
    ])


def printed_q_2to3(eps, alpha):
    kp, km = (1 + eps) / 4, (1 - eps) / 4
    a = alpha
    r0 = [2 * kp + (1 - a) * km, (a + 1) * km, (1 - a) * kp + 2 * a * km, (a + 1) * kp + 2 * (1 - a) * km]
    return 0.5 * np.array([
        r0,
        r0,
        [0.5, 0.5, (2 - a) * kp + a * km, a * kp + (2 - a) * km],
        [2 * kp, 2 * km, (1 - a) * kp + (a + 1) * km, (a + 1) * kp + (1 - a) * km],
    ])


def b3_bloch_kron(bloch_vectors):
    """GHZ statistics via full 8x8 operators; bloch_vectors[k][i] is a 3-vector."""
    pauli = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    psi = np.zeros(8, dtype=complex)
    psi[0] = psi[7] = 1 / math.sqrt(2)
    out = np.zeros((8, 8))
    for ins in itertools.product(BITS, repeat=3):
        for outs in itertools.product(BITS, repeat=3):
            op = np.eye(1)
            for k in range(3):
                n = bloch_vectors[k][ins[k]]
                s = 1 - 2 * outs[k]
                op = np.kron(op, (np.eye(2) + s * sum(c * p for c, p in zip(n, pauli))) / 2)
            out[4 * ins[0] + 2 * ins[1] + ins[2], 4 * outs[0] + 2 * outs[1] + outs[2]] = (psi.conj() @ op @ psi).real
    return out


def p3(table, o, i):
    return table[4 * i[0] + 2 * i[1] + i[2], 4 * o[0] + 2 * o[1] + o[2]]


def loop_wire_2to3(table):
    q = np.zeros((4, 4))
    for i1, j, o1, o3 in itertools.product(BITS, repeat=4):
        q[2 * i1 + j, 2 * o1 + o3] = sum(p3(table, (o1, o2, o3), (i1, j, o2)) for o2 in BITS)
    return q


def loop_wire_3to2(table):
    q = np.zeros((4, 4))
    for i1, j, o1, o2 in itertools.product(BITS, repeat=4):
        q[2 * i1 + j, 2 * o1 + o2] = sum(p3(table, (o1, o2, o3), (i1, o3, j)) for o3 in BITS)
    return q


def loop_correlator(q, x, y):
    return sum((-1) ** (o ^ op) * q[2 * x + y, 2 * o + op] for o in BITS for op in BITS)


def loop_chsh_max(q):
    e = [loop_correlator(q, x, y) for x in BITS for y in BITS]
    best = -np.inf
    for s in itertools.product((1, -1), repeat=4):
        if s.count(-1) % 2 == 1:
            best = max(best, sum(a * b for a, b in zip(s, e)))
    return best


def local_det_box2_vectors():
    """The 16 local deterministic bipartite boxes, built from scratch."""
    cols = []
    for f in itertools.product(BITS, repeat=2):
        for g in itertools.product(BITS, repeat=2):
            q = np.zeros((4, 4))
            for x, y in itertools.product(BITS, repeat=2):
                q[2 * x + y, 2 * f[x] + g[y]] = 1
            cols.append(q.ravel())
    return np.column_stack(cols)


# -- certificate checks ----------------------------------------------------


def independent_check(V, t, result, tol):
    """Return (ok, figure): reconstruction error for In, separation margin for Out."""
    V = np.asarray(V, dtype=float)
    t = np.asarray(t, dtype=float)
    if result.is_in:
        w = np.asarray(result.weights, dtype=float)
        err = max(np.max(np.abs(V @ w - t)), abs(np.sum(w) - 1.0), max(0.0, -np.min(w)))
        return err <= tol, err
    y = np.asarray(result.witness, dtype=float)
    margin = y @ t - np.max(y @ V)
    return margin > tol / 2, margin


# -- random boxes ----------------------------------------------------------


def random_bl_mixture(rng):
    """Mixture of 1-6 BL vertices drawn from a randomly chosen vertex pool."""
    pools = [H.FL, H.ATOBL_LEFT, H.ATOBL_RIGHT, "left+right", H.BL]
    pool = pools[rng.integers(len(pools))]
    if pool == "left+right":
        V = np.hstack([enumerate_vertices(H.ATOBL_LEFT).matrix, enumerate_vertices(H.ATOBL_RIGHT).matrix])
    else:
        V = enumerate_vertices(pool).matrix
    k = int(rng.integers(1, 7))
    idx = rng.choice(V.shape[1], size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    return (V[:, idx] @ w).reshape(8, 8), str(pool)


def _pr_one_way_weights(variant):
    """PR box of the given variant split into right and left deterministic responses.

    Right: o2 = c, o3 = c ^ i2 i3 ^ a i2 ^ b i3 ^ g; left swaps the roles.
    Returns index lists into the 64 right / left responses of one party-1 block.
    """
    a, b, g = variant
    right_idx, left_idx = [], []
    for c in BITS:
        resp = tuple(c ^ (i2 & i3) ^ (a & i2) ^ (b & i3) ^ g for i2 in BITS for i3 in BITS)
        # right block order: f over i2 (2 bits) then g over (i2, i3) (4 bits)
        f_idx = 2 * c + c
        g_idx = int("".join(map(str, resp)), 2)
        right_idx.append(16 * f_idx + g_idx)
        left_idx.append(16 * f_idx + g_idx)
    return right_idx, left_idx


def _local_index(f2, f3):
    """Index of the local response (o2 = f2[i2], o3 = f3[i3]) in the right and left blocks."""
    spread2 = tuple(f2[r >> 1] for r in range(4))
    spread3 = tuple(f3[r & 1] for r in range(4))
    r = 16 * int("".join(map(str, f2)), 2) + int("".join(map(str, spread3)), 2)
    l = 16 * int("".join(map(str, f3)), 2) + int("".join(map(str, spread2)), 2)
    return r, l


def shared_lambda_nsbl_weights(rng, k=4):
    """Triple weights where each hidden value carries one no-signaling extremal pair box."""
    w = np.zeros((4, 64, 64))
    lam = rng.dirichlet(np.ones(k))
    for p in lam:
        a = int(rng.integers(4))
        if rng.random() < 0.5:
            variant = tuple(int(x) for x in rng.integers(2, size=3))
            r_idx, l_idx = _pr_one_way_weights(variant)
            for r in r_idx:
                for l in l_idx:
                    w[a, r, l] += p * 0.25
        else:
            f2 = tuple(int(x) for x in rng.integers(2, size=2))
            f3 = tuple(int(x) for x in rng.integers(2, size=2))
            r, l = _local_index(f2, f3)
            w[a, r, l] += p
    return w.ravel()


def extreme_tobl_weights(rng):
    """Triple weights for an extreme point of the TOBL set in a random direction.

    HiGHS maximises a random functional over (mu, nu) with equal party-1
    marginals and equal boxes; the basic solution is re-solved on its support
    and lifted to triples as mu(a, r) nu(a, l) / pi(a).
    """
    R = enumerate_vertices(H.ATOBL_RIGHT).matrix
    L = enumerate_vertices(H.ATOBL_LEFT).matrix
    n = R.shape[1]
    block = np.kron(np.eye(4), np.ones((1, 64)))
    A = np.vstack([
        np.hstack([R, -L]),
        np.hstack([block, -block]),
        np.hstack([np.ones((1, n)), np.zeros((1, n))]),
    ])
    rhs = np.concatenate([np.zeros(64 + 4), [1.0]])
    c = np.concatenate([-(rng.normal(size=64) @ R), np.zeros(n)])
    res = linprog(c, A_eq=A, b_eq=rhs, bounds=(0, None), method="highs-ds")
    assert res.status == 0
    x = res.x
    support = np.flatnonzero(x > 1e-9)
    sol, *_ = np.linalg.lstsq(A[:, support], rhs, rcond=None)
    x = np.zeros(2 * n)
    x[support] = sol
    assert x.min() > -1e-12 and np.abs(A @ x - rhs).max() < 1e-12
    x = np.clip(x, 0, None)
    mu, nu = x[:n].reshape(4, 64), x[n:].reshape(4, 64)
    w = np.zeros((4, 64, 64))
    for a in range(4):
        pi = mu[a].sum()
        if pi > 0:
            w[a] = np.outer(mu[a], nu[a]) / pi
    return w.ravel()


def tobl_box_from_weights(w):
    vr, vl = tobl_matrices()
    box_r, box_l = vr @ w, vl @ w
    assert np.abs(box_r - box_l).max() < 1e-12
    return box_r.reshape(8, 8)

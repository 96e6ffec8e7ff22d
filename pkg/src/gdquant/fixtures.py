"""Reference systems used by the tests, demos and CLI smoke runs."""
from __future__ import annotations

import numpy as np

from .core import validate_system
from .spectral import solve_sr


def homogeneous_system(r=1.0, p=0.5, c=1.0 / 3.0):
    """Two vertices, complete graph, every edge with probability ``p`` and ratio ``c``.

    The measure is self-similar; its dimension is ``log 2 / log 3`` for the
    defaults and every order ``r``.
    """
    P = np.full((2, 2), p)
    C = np.full((2, 2), c)
    return validate_system(P, C, [0.5, 0.5], r)


def example2_system(r=1.0):
    """Four vertices, two complete blocks ``{1,2} -> {3,4}``.

    Ratios inside the first block are 1/4 and the ratios from the first block
    into vertex 3 are 1/8; inside the second block they are ``2**(-1/s)`` with
    ``s = r/(2r+1)``.  Both diagonal blocks of the dimension matrix then
    coincide, both components share the root ``s``, and the first component
    reaches the second.
    """
    s = r / (2 * r + 1)
    P = np.array([[0.25, 0.25, 0.5, 0.0],
                  [0.25, 0.25, 0.5, 0.0],
                  [0.0, 0.0, 0.5, 0.5],
                  [0.0, 0.0, 0.5, 0.5]])
    q = 2.0 ** (-1.0 / s)
    C = np.array([[0.25, 0.25, 0.125, 0.0],
                  [0.25, 0.25, 0.125, 0.0],
                  [0.0, 0.0, q, q],
                  [0.0, 0.0, q, q]])
    return validate_system(P, C, [0.25] * 4, r)


def example2_prose_system(r=1.0):
    """Same as :func:`example2_system` but with ratio 1/8 on every edge leaving
    vertices 1 and 2.  Under this reading the first component has a strictly
    smaller root than the second."""
    sys2 = example2_system(r)
    C = sys2.ratios.copy()
    C[:2, :3] = 0.125
    return validate_system(sys2.transition, C, sys2.initial, r)


def _random_stochastic(rng, n):
    m = rng.uniform(0.6, 1.0, size=(n, n))
    return m / m.sum(axis=1, keepdims=True)


def example1_system(seed=0, r=1.0, second_scale=1.0, tol=1e-13):
    """Block-diagonal system with a positive 2x2 block and a positive 3x3 block.

    Transition blocks are drawn from ``seed``.  The second block's ratios are
    a random pattern times one common factor, tuned by bisection so that both
    components share the same root.  ``second_scale < 1`` then shrinks that
    block's ratios, pushing its root below the first block's.
    """
    rng = np.random.default_rng(seed)
    P = np.zeros((5, 5))
    P[:2, :2] = _random_stochastic(rng, 2)
    P[2:, 2:] = _random_stochastic(rng, 3)
    C = np.zeros((5, 5))
    C[:2, :2] = rng.uniform(0.25, 0.35, size=(2, 2))
    pattern = rng.uniform(0.7, 1.0, size=(3, 3))
    chi = np.full(5, 0.2)

    target = solve_sr(validate_system(P, _with_block(C, pattern, 1.0), chi, r), range(2))

    def root(scale):
        return solve_sr(validate_system(P, _with_block(C, pattern, scale), chi, r), range(2, 5))

    # keep every row sum of the second block at most 0.9
    hi = 0.9 / pattern.sum(axis=1).max()
    lo = 1e-6
    if root(hi) < target:
        raise ValueError("second block cannot reach the first block's dimension; try another seed")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if root(mid) < target:
            lo = mid
        else:
            hi = mid
    scale = 0.5 * (lo + hi) * second_scale
    return validate_system(P, _with_block(C, pattern, scale), chi, r)


def _with_block(C, pattern, scale):
    out = C.copy()
    out[2:, 2:] = pattern * scale
    return out

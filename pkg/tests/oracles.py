"""Brute-force reference computations, kept independent of the package code."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def w(m):
    return np.exp(2j * np.pi / m)


def basis_matrix(m, c):
    u = np.zeros((m, m), dtype=complex)
    u[0, 0] = 1
    for k in range(1, m):
        u[k, k] = w(m) ** c
    return u


def encoding_matrix(m, n):
    u = np.zeros((m, m), dtype=complex)
    for j in range(m):
        u[j, j] = w(m) ** (j * n)
    return u


def psi0(m):
    return np.ones(m, dtype=complex) / np.sqrt(m)


def final_state(m, cs, ns):
    """Dense matrix-vector evolution through all processes in order."""
    v = psi0(m)
    for c, n in zip(cs, ns):
        v = basis_matrix(m, c) @ v
        v = encoding_matrix(m, n) @ v
    return v


def pass_prob(m, cs, ns):
    return abs(np.vdot(psi0(m), final_state(m, cs, ns))) ** 2


def all_tuples(m):
    """Every (c, N) draw with its exact probability."""
    cw = Fraction(1, m**m)
    nw = Fraction(1, m * 2 ** (m - 1))
    for cs in itertools.product(range(m), repeat=m):
        for n1 in range(m):
            for bits in itertools.product((0, 1), repeat=m - 1):
                yield cs, (n1,) + bits, cw * nw


def keep_rate(m, full=False):
    """Exact probability a round is kept with a perfect detector.

    With ``full`` every (c, N) tuple is evolved; otherwise the basis tuples
    are only counted, using that with sum(c) = 0 mod m the basis phases cancel
    (checked separately by full enumeration for small m).
    """
    total = Fraction(0)
    if full:
        for cs, ns, p in all_tuples(m):
            if sum(cs) % m == 0:
                total += p * Fraction(round(pass_prob(m, cs, ns) * 10**9), 10**9)
        return total
    good_c = sum(1 for cs in itertools.product(range(m), repeat=m) if sum(cs) % m == 0)
    nw = Fraction(1, m * 2 ** (m - 1))
    for n1 in range(m):
        for bits in itertools.product((0, 1), repeat=m - 1):
            pp = pass_prob(m, (0,) * m, (n1,) + bits)
            total += nw * Fraction(round(pp * 10**9), 10**9)
    return Fraction(good_c, m**m) * total


def kept_distribution(m):
    """Exact distribution of a kept position tuple (l_1, ..., l_m)."""
    # basis choices only gate keeping (independently of N), so enumerate N alone
    dist: dict[tuple, Fraction] = {}
    for n1 in range(m):
        for bits in itertools.product((0, 1), repeat=m - 1):
            ns = (n1,) + bits
            pp = pass_prob(m, (0,) * m, ns)
            if pp > 0.5:
                dist[ns] = dist.get(ns, Fraction(0)) + 1
    z = sum(dist.values())
    return {k: v / z for k, v in dist.items()}


def twos_complement(delta, bits):
    if delta < 0:
        delta += 1 << bits
    return tuple(int(ch) for ch in format(delta, f"0{bits}b"))


def om_messages(n, m):
    """Count messages by walking the OM call tree explicitly."""
    if n == 0:
        return m - 1
    return (m - 1) + (m - 1) * om_messages(n - 1, m - 1)

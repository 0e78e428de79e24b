"""
Kernels Phi_1 bis Phi_4
Rohe und symmetrisierte Kernel, auf Punkt-Paaren und vektorisiert auf Index-Tupeln
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import permutations
from typing import Any

import numpy as np

from metricsens.errors import ArityError
from metricsens.metricspace.families import TestFamily
from metricsens.metricspace.geometry import SampleGeometry

KERNELS = (1, 2, 3, 4)


@dataclass(frozen=True)
class KernelSet:
    """Kernel-Ordnungen M(1)=M(3)=m+1, M(2)=M(4)=m+2"""

    family: TestFamily

    def order(self, j: int) -> int:
        if j not in KERNELS:
            raise ArityError(f"Kernel index must be 1..4, got {j}")
        return self.family.m + (1 if j in (1, 3) else 2)

    @property
    def orders(self) -> tuple[int, int, int, int]:
        return (self.order(1), self.order(2), self.order(3), self.order(4))


def _check_arity(j: int, family: TestFamily, size: int) -> int:
    order = KernelSet(family).order(j)
    if size != order:
        raise ArityError(f"Phi_{j} for m={family.m} takes {order} pairs, got {size}")
    return order


def kernel_phi(j: int, family: TestFamily, pairs: Sequence[tuple[Any, Any]]) -> float:
    """Phi_j auf M(j) Paaren (z_i, z_i^u); Parameter a aus z_1..z_m"""
    _check_arity(j, family, len(pairs))
    m = family.m
    a = tuple(pairs[r][0] for r in range(m))
    z_k, zu_k = pairs[m]
    t_k = family.evaluate(a, z_k)

    if j == 1:
        return float(family.product(t_k, family.evaluate(a, zu_k)))
    if j == 3:
        return float(family.product(t_k, t_k))
    z_l, zu_l = pairs[m + 1]
    if j == 2:
        return float(family.product(t_k, family.evaluate(a, zu_l)))
    return float(family.product(t_k, family.evaluate(a, z_l)))


def symmetrize(j: int, family: TestFamily, pairs: Sequence[tuple[Any, Any]]) -> float:
    """Mittel von Phi_j über alle M(j)! Anordnungen des Tupels"""
    order = _check_arity(j, family, len(pairs))
    values = [kernel_phi(j, family, perm) for perm in permutations(pairs)]
    return math.fsum(values) / math.factorial(order)


def phi_indexed(j: int, family: TestFamily, geom: SampleGeometry, idx: np.ndarray) -> np.ndarray:
    """Phi_j für D Index-Tupel (D x M(j)) auf einmal"""
    _check_arity(j, family, idx.shape[1])
    m = family.m
    a = tuple(idx[:, r] for r in range(m))
    k = idx[:, m]
    t_k = family.evaluate_indexed(geom, a, k, "z")

    if j == 1:
        return np.asarray(family.product(t_k, family.evaluate_indexed(geom, a, k, "zu")))
    if j == 3:
        return np.asarray(family.product(t_k, t_k))
    l = idx[:, m + 1]  # noqa: E741
    if j == 2:
        return np.asarray(family.product(t_k, family.evaluate_indexed(geom, a, l, "zu")))
    return np.asarray(family.product(t_k, family.evaluate_indexed(geom, a, l, "z")))


def symmetrize_indexed(
    j: int, family: TestFamily, geom: SampleGeometry, idx: np.ndarray
) -> np.ndarray:
    order = _check_arity(j, family, idx.shape[1])
    total = np.zeros(idx.shape[0])
    for perm in permutations(range(order)):
        total += phi_indexed(j, family, geom, idx[:, list(perm)])
    return total / math.factorial(order)

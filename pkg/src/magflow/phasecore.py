"""Core domain types: system parameters, the magnetic field in canonical form,
phase points on T*S^{n-1}, and samplers for (exact) constrained points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.stats

#: absolute tolerance used for the ``constrained`` flag of float states
CONSTRAINT_TOL = 1e-9


class NotSkew(ValueError):
    """Raised when a supposed magnetic matrix is not skew-symmetric."""


class ZeroPosition(ValueError):
    """Raised when projecting a state whose position vector vanishes."""


@dataclass(frozen=True)
class SystemParams:
    """Dimension ``n``, mass ``m`` and charge parameter ``s``."""

    n: int
    m: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m!r}")
        if self.s == 0:
            raise ValueError("s must be nonzero")


@dataclass(frozen=True)
class GaugeOffset:
    """Translation vector Gamma of the gauge potential A^Gamma."""

    Gamma: tuple

    def __post_init__(self):
        object.__setattr__(self, "Gamma", tuple(self.Gamma))


@dataclass(frozen=True, eq=False)
class MagneticField:
    """Skew matrix ``kappa`` together with its canonical block data.

    ``basis`` maps input coordinates to canonical ones, i.e.
    ``basis @ kappa @ basis.T`` equals :meth:`block_matrix`.
    """

    kappa: np.ndarray
    blocks: tuple
    basis: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.kappa.shape[0]

    def block_matrix(self) -> np.ndarray:
        return block_matrix(self.blocks, self.n)

    def to_canonical(self, x: np.ndarray) -> np.ndarray:
        """Map vectors (last axis of length n) into canonical coordinates."""
        return np.asarray(x) @ self.basis.T

    def from_canonical(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.basis

    @classmethod
    def from_blocks(cls, blocks: Sequence[float], n: int | None = None) -> "MagneticField":
        """Field already given in canonical coordinates.

        Blocks are taken in the order given; no sorting is applied, so the
        coordinates of states stay the user's coordinates.
        """
        blocks = tuple(float(b) for b in blocks)
        if n is None:
            n = 2 * len(blocks)
        if len(blocks) != n // 2:
            raise ValueError(f"n={n} needs {n // 2} blocks, got {len(blocks)}")
        if any(b < 0 for b in blocks):
            raise ValueError("block values must be nonnegative")
        kappa = block_matrix(blocks, n)
        return cls(kappa=kappa, blocks=blocks, basis=np.eye(n), metadata={"degenerate_pairs": []})


@dataclass(frozen=True, eq=False)
class PhaseState:
    """A point (gamma, p) of R^{2n}.

    Float states hold float64 arrays; rational states hold object arrays of
    :class:`fractions.Fraction`.
    """

    gamma: np.ndarray
    p: np.ndarray
    constrained: bool = False

    def __post_init__(self):
        g = np.asarray(self.gamma)
        p = np.asarray(self.p)
        if g.dtype != object:
            g = g.astype(float)
            p = p.astype(float)
        if g.shape != p.shape or g.ndim != 1:
            raise ValueError("gamma and p must be 1-d vectors of equal length")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    @property
    def is_rational(self) -> bool:
        return self.gamma.dtype == object

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.p])

    @classmethod
    def from_vector(cls, x, constrained: bool = False) -> "PhaseState":
        x = np.asarray(x)
        n = x.shape[0] // 2
        return cls(x[:n], x[n:], constrained)

    def residuals(self):
        """(phi1 - 1, phi2) evaluated at the state."""
        return (self.gamma @ self.gamma - 1, self.p @ self.gamma)

    def check_constraints(self, tol: float = CONSTRAINT_TOL) -> bool:
        r1, r2 = self.residuals()
        if self.is_rational:
            return r1 == 0 and r2 == 0
        return abs(r1) < tol and abs(r2) < tol


def block_matrix(blocks: Sequence[float], n: int) -> np.ndarray:
    k = np.zeros((n, n))
    for i, b in enumerate(blocks):
        k[2 * i, 2 * i + 1] = b
        k[2 * i + 1, 2 * i] = -b
    return k


def _is_canonical(kappa: np.ndarray, tol: float) -> bool:
    n = kappa.shape[0]
    blocks = [kappa[2 * i, 2 * i + 1] for i in range(n // 2)]
    if any(b < 0 for b in blocks) or any(a < b for a, b in zip(blocks, blocks[1:])):
        return False
    return np.allclose(kappa, block_matrix(blocks, n), rtol=0, atol=tol)


def canonicalize_kappa(kappa) -> MagneticField:
    """Orthogonally reduce a skew matrix to its canonical block form.

    Returns blocks ``kappa_{2i-1,2i} >= 0`` sorted descending and the basis
    realizing them. A matrix already in canonical form keeps the identity
    basis. Nearly repeated block values (gap < 1e-9) are listed in
    ``metadata["degenerate_pairs"]``.
    """
    kappa = np.array(kappa, dtype=float)
    if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
        raise NotSkew("kappa must be a square matrix")
    n = kappa.shape[0]
    scale = max(np.abs(kappa).max(), 1.0)
    if np.abs(kappa + kappa.T).max() > 1e-12 * scale:
        raise NotSkew("kappa is not skew-symmetric")
    kappa = 0.5 * (kappa - kappa.T)

    if _is_canonical(kappa, 1e-15 * scale):
        blocks = tuple(float(kappa[2 * i, 2 * i + 1]) for i in range(n // 2))
        basis = np.eye(n)
    else:
        blocks, basis = _schur_blocks(kappa)

    gaps = [
        (i, j)
        for i in range(len(blocks))
        for j in range(i + 1, len(blocks))
        if 0 < abs(blocks[i] - blocks[j]) < 1e-9
    ]
    return MagneticField(kappa=kappa, blocks=blocks, basis=basis, metadata={"degenerate_pairs": gaps})


def _schur_blocks(kappa: np.ndarray):
    n = kappa.shape[0]
    T, Z = scipy.linalg.schur(kappa, output="real")
    # Z.T @ kappa @ Z = T; collect 2x2 rotation blocks and 1x1 zero blocks
    pairs = []  # (value, col_a, col_b) with e_a^T kappa e_b = value >= 0
    zeros = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 0.0:
            lam = 0.5 * (T[i, i + 1] - T[i + 1, i])
            if lam >= 0:
                pairs.append((lam, i, i + 1))
            else:
                pairs.append((-lam, i + 1, i))
            i += 2
        else:
            zeros.append(i)
            i += 1
    pairs.sort(key=lambda t: -t[0])
    cols = []
    blocks = []
    for lam, a, b in pairs:
        cols += [a, b]
        blocks.append(float(lam))
    while len(zeros) >= 2:
        cols += [zeros.pop(0), zeros.pop(0)]
        blocks.append(0.0)
    cols += zeros
    basis = Z[:, cols].T
    return tuple(blocks), basis


# --- sampling ---------------------------------------------------------------


def rational_point(u: Sequence, v: Sequence) -> PhaseState:
    """Exact point of T*S^{n-1} from stereographic coordinates.

    ``gamma = (2u, |u|^2 - 1) / (|u|^2 + 1)`` and ``p = v - <v, gamma> gamma``.
    """
    u = [Fraction(x) for x in u]
    v = [Fraction(x) for x in v]
    if len(v) != len(u) + 1:
        raise ValueError("v must have one more coordinate than u")
    uu = sum(x * x for x in u)
    den = uu + 1
    gamma = [2 * x / den for x in u] + [(uu - 1) / den]
    vg = sum(a * b for a, b in zip(v, gamma))
    p = [a - vg * b for a, b in zip(v, gamma)]
    return PhaseState(np.array(gamma, dtype=object), np.array(p, dtype=object), constrained=True)


def sample_constrained_point(n: int, mode: str = "float", seed=None, bound: int = 1000) -> PhaseState:
    """Random point of T*S^{n-1}.

    ``mode="rational"`` gives exact Fraction coordinates (numerators and
    denominators of the stereographic data bounded by ``bound``) satisfying
    both constraints exactly. ``mode="float"`` samples gamma uniformly on the
    sphere and p from a standard normal projected onto the tangent space.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    if mode == "rational":
        q = int(rng.integers(1, bound + 1))
        r = int(rng.integers(1, bound + 1))
        u = [Fraction(int(a), q) for a in rng.integers(-bound, bound + 1, size=n - 1)]
        v = [Fraction(int(b), r) for b in rng.integers(-bound, bound + 1, size=n)]
        return rational_point(u, v)
    if mode != "float":
        raise ValueError(f"unknown mode {mode!r}")
    g = rng.standard_normal(n)
    g /= np.linalg.norm(g)
    p = rng.standard_normal(n)
    p -= (p @ g) * g
    return PhaseState(g, p, constrained=True)


def project_to_constraints(state: PhaseState) -> PhaseState:
    """Normalize gamma and remove the normal component of p."""
    g = np.asarray(state.gamma, dtype=float)
    norm = math.sqrt(float(g @ g))
    if norm < 1e-300:
        raise ZeroPosition("cannot project a state with gamma = 0")
    g = g / norm
    p = np.asarray(state.p, dtype=float)
    p = p - (p @ g) * g
    return PhaseState(g, p, constrained=True)


def random_orthogonal(n: int, seed=None) -> np.ndarray:
    return scipy.stats.ortho_group.rvs(n, random_state=np.random.default_rng(seed)) if n > 1 else np.eye(1)


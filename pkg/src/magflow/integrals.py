"""First integrals of the sphere flows as exact polynomials, their numeric
independence ranks, and noncommutative-integrability dimension counts.

Catalog observables live in canonical coordinates (blocks on the
(2i-1, 2i) planes).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .brackets import dirac_bracket, identity_test
from .phasecore import MagneticField, PhaseState, SystemParams, sample_constrained_point
from .poly import Poly, PhaseVars

log = logging.getLogger(__name__)

EQUAL_TOL = 1e-12
NEAR_EQUAL_TOL = 1e-6
RANK_RTOL = 1e-8


class NotApplicable(ValueError):
    """The block pattern does not satisfy the hypothesis of the construction."""


class InconsistentRanks(RuntimeError):
    def __init__(self, msg, stratification):
        super().__init__(msg)
        self.stratification = stratification


class DegeneratePoint(UserWarning):
    pass


def _pair(i: int, j: int) -> str:
    return f"{i}{j}" if max(i, j) < 10 else f"{i},{j}"


def _snap_blocks(blocks, tol=EQUAL_TOL):
    """Make blocks equal within ``tol`` exactly equal (to the first of the group)."""
    out = []
    warnings = []
    for b in blocks:
        match = next((c for c in out if abs(c - b) <= tol), None)
        if match is None:
            for c in out:
                if abs(c - b) < NEAR_EQUAL_TOL * max(1.0, abs(b)):
                    warnings.append(f"blocks {c!r} and {b!r} are nearly but not exactly equal")
            out.append(b)
        else:
            out.append(match)
    return tuple(out), warnings


# --- the individual observables ---------------------------------------------


def hamiltonian(V: PhaseVars, m) -> Poly:
    return sum((p * p for p in V.p), V.zero()) / (2 * Fraction(m))


def phi_block(V: PhaseVars, i: int, kappa, s, gauge=(0, 0)) -> Poly:
    """Gauge Noether integral of block ``i`` (0-based) with offset ``gauge``."""
    a, b = 2 * i, 2 * i + 1
    ga = V.g[a] + Fraction(gauge[0])
    gb = V.g[b] + Fraction(gauge[1])
    k = Fraction(s) * Fraction(kappa) / 2
    return ga * V.p[b] - gb * V.p[a] + (ga * ga + gb * gb) * k


def angular_momentum(V: PhaseVars, i: int, j: int) -> Poly:
    """Phi_ij = g_i p_j - g_j p_i (0-based indices)."""
    return V.g[i] * V.p[j] - V.g[j] * V.p[i]


def psi_pair(V: PhaseVars, i: int, j: int, kappa, s) -> tuple:
    """(Psi^1, Psi^2) for blocks ``i < j`` (0-based) with common value ``kappa``."""
    i1, i2, j1, j2 = 2 * i, 2 * i + 1, 2 * j, 2 * j + 1
    g, p = V.g, V.p
    sk = Fraction(s) * Fraction(kappa)
    psi1 = (g[i2] * p[j1] - g[j1] * p[i2]) - (g[i1] * p[j2] - g[j2] * p[i1]) - (g[i1] * g[j1] + g[i2] * g[j2]) * sk
    psi2 = (g[i1] * p[j1] - g[j1] * p[i1]) + (g[i2] * p[j2] - g[j2] * p[i2]) - (g[i1] * g[j2] - g[i2] * g[j1]) * sk
    return psi1, psi2


def mu_observable(V: PhaseVars, blocks, s, m) -> Poly:
    """Multiplier mu = (s/m) sum kappa (p_{2i-1} g_{2i} - p_{2i} g_{2i-1}) - 2H."""
    sm = Fraction(s) / Fraction(m)
    out = V.zero()
    for i, k in enumerate(blocks):
        if k:
            a, b = 2 * i, 2 * i + 1
            out = out + (V.p[a] * V.g[b] - V.p[b] * V.g[a]) * (sm * Fraction(k))
    return out - hamiltonian(V, m) * 2


def j_observable(V: PhaseVars, blocks, s, m) -> Poly:
    sm2 = (Fraction(s) / Fraction(m)) ** 2
    out = V.zero()
    for i, k in enumerate(blocks):
        if k:
            a, b = 2 * i, 2 * i + 1
            out = out + (V.p[a] * V.p[a] + V.p[b] * V.p[b]) * (sm2 * Fraction(k) ** 2)
    mu = mu_observable(V, blocks, s, m)
    return out - mu * mu


# --- catalog ------------------------------------------------------------------


@dataclass
class IntegralCatalog:
    """Named first integrals for one choice of (n, m, s, blocks)."""

    params: SystemParams
    blocks: tuple
    observables: dict
    warnings: list = dc_field(default_factory=list)
    verdicts: dict = dc_field(default_factory=dict)

    def __getitem__(self, name) -> Poly:
        return self.observables[name]

    def __contains__(self, name) -> bool:
        return name in self.observables

    def __iter__(self):
        return iter(self.observables)

    def __len__(self):
        return len(self.observables)

    def names(self) -> list:
        return list(self.observables)

    def items(self):
        return self.observables.items()

    def select(self, names: Sequence[str]) -> list:
        return [self.observables[k] for k in names]

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def field(self) -> MagneticField:
        return MagneticField.from_blocks(self.blocks, self.n)

    @property
    def zero_indices(self) -> list:
        """0-based coordinate indices carrying no field (zero blocks, odd tail)."""
        idx = [k for i, b in enumerate(self.blocks) if b == 0 for k in (2 * i, 2 * i + 1)]
        if self.n % 2:
            idx.append(self.n - 1)
        return idx

    def equal_pairs(self) -> list:
        nb = len(self.blocks)
        return [(i, j) for i in range(nb) for j in range(i + 1, nb) if self.blocks[i] == self.blocks[j]]

    def verify(self, trials: int | None = None, seed: int = 0) -> dict:
        """Certify {F, H}_d = 0 on T*S^{n-1} for every entry."""
        H = self.observables["H"]
        out = {}
        for name, F in self.observables.items():
            br = dirac_bracket(F, H, self.field, self.params)
            out[name] = identity_test(br, "constrained", trials=trials, seed=seed, label=f"{{{name},H}}_d")
        self.verdicts = out
        return out


def build_catalog(params: SystemParams, field, verify: bool = False, seed: int = 0) -> IntegralCatalog:
    """Every first integral that applies to the block pattern of ``field``.

    ``field`` is a :class:`MagneticField` (its canonical blocks are used) or a
    sequence of block values. Blocks equal within 1e-12 are treated as exactly
    equal; nearly equal ones only produce a warning.
    """
    blocks = field.blocks if isinstance(field, MagneticField) else tuple(float(b) for b in field)
    n, s, m = params.n, params.s, params.m
    if len(blocks) != n // 2:
        raise ValueError(f"n={n} needs {n // 2} blocks")
    blocks, warnings = _snap_blocks(blocks)
    for w in warnings:
        log.warning(w)
    V = PhaseVars(n)
    obs: dict = {}
    obs["H"] = hamiltonian(V, m)
    for i, k in enumerate(blocks):
        obs[f"Phi_{_pair(2 * i + 1, 2 * i + 2)}"] = phi_block(V, i, k, s)
    obs["J"] = j_observable(V, blocks, s, m)
    if n % 2 == 0 and len(set(blocks)) == 1:
        obs["mu"] = mu_observable(V, blocks, s, m)

    cat = IntegralCatalog(params, blocks, obs, warnings)
    for i, j in cat.equal_pairs():
        tag = f"{_pair(2 * i + 1, 2 * i + 2)};{_pair(2 * j + 1, 2 * j + 2)}"
        psi1, psi2 = psi_pair(V, i, j, blocks[i], s)
        obs[f"Psi1_{tag}"] = psi1
        obs[f"Psi2_{tag}"] = psi2
    zi = cat.zero_indices
    for a in range(len(zi)):
        for b in range(a + 1, len(zi)):
            name = f"Phi_{_pair(zi[a] + 1, zi[b] + 1)}"
            if name not in obs:
                obs[name] = angular_momentum(V, zi[a], zi[b])
    if n == 6 and len(set(blocks)) == 1:
        obs["I"] = (
            obs["Phi_12"] ** 2 * 2 + obs["Phi_34"] ** 2 * 2 + obs["Psi1_12;34"] ** 2 + obs["Psi2_12;34"] ** 2
        )
    for kind in ("u_chain", "so_chain"):
        try:
            chain = _chain(cat, V, kind)
        except NotApplicable:
            continue
        for label, poly in chain:
            obs[label] = poly
    if verify:
        cat.verify(seed=seed)
    return cat


def ambient_catalog(params: SystemParams, field, gauge=None) -> dict:
    """First integrals of the flow in R^n: block energies and gauge integrals."""
    blocks = field.blocks if isinstance(field, MagneticField) else tuple(float(b) for b in field)
    n, s, m = params.n, params.s, params.m
    gauge = tuple(gauge) if gauge is not None else (0,) * n
    V = PhaseVars(n)
    obs = {"H": hamiltonian(V, m)}
    for i, k in enumerate(blocks):
        a, b = 2 * i, 2 * i + 1
        tag = _pair(a + 1, b + 1)
        obs[f"H_{tag}"] = (V.p[a] * V.p[a] + V.p[b] * V.p[b]) / (2 * Fraction(m))
        obs[f"PhiG_{tag}"] = phi_block(V, i, k, s, (gauge[a], gauge[b]))
    if n % 2:
        obs[f"p_{n}"] = V.p[n - 1]
    return obs


def pendulum_catalog(s, b=(0, 0, 0)) -> dict:
    """Conserved quantities of the magnetic spherical pendulum (n = 3).

    ``Phi = g x p + s g`` componentwise, ``<b, Phi>``, and the energy
    ``H = |p|^2 / 2 - <b, g>``.
    """
    V = PhaseVars(3)
    g, p = V.g, V.p
    sv = Fraction(s)
    cross = [g[1] * p[2] - g[2] * p[1], g[2] * p[0] - g[0] * p[2], g[0] * p[1] - g[1] * p[0]]
    phi = [c + g[k] * sv for k, c in enumerate(cross)]
    bf = [Fraction(x) for x in b]
    obs = {"H": sum((x * x for x in p), V.zero()) / 2 - sum((g[k] * bf[k] for k in range(3)), V.zero())}
    obs["b.Phi"] = sum((phi[k] * bf[k] for k in range(3)), V.zero())
    for k in range(3):
        obs[f"Phi{k + 1}"] = phi[k]
    return obs


# --- commuting chains ------------------------------------------------------------


def _leading_equal(blocks) -> int:
    if not blocks or blocks[0] == 0:
        return 0
    r = 1
    while r < len(blocks) and blocks[r] == blocks[0]:
        r += 1
    return r


def _chain(cat: IntegralCatalog, V: PhaseVars, kind: str) -> list:
    n, blocks = cat.n, cat.blocks
    if kind == "u_chain":
        r = _leading_equal(blocks)
        rest = blocks[r:]
        if r < 2 or not (n in (2 * r, 2 * r + 1, 2 * r + 2) or all(b == 0 for b in rest)):
            raise NotApplicable(f"u_chain needs kappa_12 = ... = kappa_(2r-1,2r) != 0 with r >= 2; blocks={blocks}")
        out = []
        for k in range(2, r + 1):
            acc = V.zero()
            for i in range(k):
                for j in range(i + 1, k):
                    psi1, psi2 = psi_pair(V, i, j, blocks[0], cat.params.s)
                    acc = acc + psi1 * psi1 + psi2 * psi2
            out.append((f"Iu_{k}", acc))
        return out
    if kind == "so_chain":
        if not blocks or blocks[0] == 0:
            raise NotApplicable("so_chain needs kappa_12 != 0")
        nz = next((i for i, b in enumerate(blocks) if b == 0), None)
        if nz is None or any(b != 0 for b in blocks[nz:]):
            raise NotApplicable(f"so_chain needs a tail of zero blocks; blocks={blocks}")
        z = 2 * nz  # 0-based start of the zero region
        out = []
        for k in range(1, n - z):
            top = z + 1 + k  # 0-based inclusive upper index
            if top >= n:
                break
            acc = V.zero()
            for i in range(z, top + 1):
                for j in range(i + 1, top + 1):
                    f = angular_momentum(V, i, j)
                    acc = acc + f * f
            out.append((f"Iso_{k}", acc))
        return out
    raise ValueError(f"unknown chain kind {kind!r}")


def commuting_chain(catalog: IntegralCatalog, kind: str) -> list:
    """The I_k chain: ``so_chain`` (sums of squared SO momenta on the zero
    tail) or ``u_chain`` (sums of squared Psi pairs over the leading equal
    blocks)."""
    return [p for _, p in _chain(catalog, PhaseVars(catalog.n), kind)]


def liouville_set(catalog: IntegralCatalog) -> dict:
    """H, J, the block integrals up to the first zero block, and every
    applicable I_k chain."""
    out = {"H": catalog["H"], "J": catalog["J"]}
    for i, b in enumerate(catalog.blocks):
        out[f"Phi_{_pair(2 * i + 1, 2 * i + 2)}"] = catalog[f"Phi_{_pair(2 * i + 1, 2 * i + 2)}"]
        if b == 0:
            break
    V = PhaseVars(catalog.n)
    for kind in ("u_chain", "so_chain"):
        try:
            out.update(dict(_chain(catalog, V, kind)))
        except NotApplicable:
            pass
    return out


# --- ranks ----------------------------------------------------------------------


def tangent_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the tangent space of T*S^{n-1} at x."""
    n = x.shape[0] // 2
    g, p = x[:n], x[n:]
    normals = np.vstack([np.concatenate([2 * g, np.zeros(n)]), np.concatenate([p, g])])
    return scipy.linalg.null_space(normals)


def gradient_matrix(observables: Sequence[Poly], x: np.ndarray) -> np.ndarray:
    return np.array([[float(d.eval_float(x)) for d in F.gradient] for F in observables])


def _numeric_rank(M: np.ndarray, rtol: float = RANK_RTOL, ref: float = 0.0):
    """Count singular values above ``rtol * max(sigma_max, ref)``.

    ``ref`` is the expected magnitude of M; it keeps a matrix of pure
    rounding noise from being read as full rank.
    """
    if M.size == 0:
        return 0, np.zeros(0)
    sv = scipy.linalg.svdvals(M)
    top = max(sv[0] if sv.size else 0.0, ref)
    if top == 0:
        return 0, sv
    return int(np.sum(sv > rtol * top)), sv


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=1)
    norms[norms == 0] = 1.0
    return M / norms[:, None]


@dataclass
class RankResult:
    rank: int
    singular_values: np.ndarray
    degenerate: bool


def jacobian_spectrum(observables: Sequence[Poly], point: PhaseState, rtol: float = RANK_RTOL) -> RankResult:
    x = np.asarray(point.as_vector(), dtype=float)
    G = _normalize_rows(gradient_matrix(observables, x) @ tangent_basis(x))
    rank, sv = _numeric_rank(G, rtol)
    return RankResult(rank, sv, degenerate=bool(np.all(np.asarray(point.p, dtype=float) == 0)))


def jacobian_rank(observables: Sequence[Poly], point: PhaseState, rtol: float = RANK_RTOL) -> int:
    """Rank of the differentials restricted to the tangent space of T*S^{n-1}.

    Singular values above ``rtol`` times the largest count toward the rank
    (rows are normalized first, which leaves the rank unchanged).
    """
    return jacobian_spectrum(observables, point, rtol).rank


def dirac_tensor(x: np.ndarray, kappa: np.ndarray, s: float) -> np.ndarray:
    """Matrix P_d with {F,G}_d(x) = dF(x) @ P_d @ dG(x), variables (g, p)."""
    n = x.shape[0] // 2
    g, p = x[:n], x[n:]
    P = magnetic_tensor(kappa, s)
    d1 = np.concatenate([2 * g, np.zeros(n)])
    d2 = np.concatenate([p, g])
    a1, a2 = P @ d1, P @ d2  # columns so that {F, phi_k} = dF @ a_k
    c = d1 @ P @ d2
    return P - (np.outer(a1, a2) - np.outer(a2, a1)) / c


@dataclass
class DimensionCertificate:
    ddim: int
    bracket_rank: int
    dind: int
    phase_dim: int
    sum_ok: bool
    npoints: int = 0
    stratification: dict = dc_field(default_factory=dict)
    jacobian_spectrum: list = dc_field(default_factory=list)
    bracket_spectrum: list = dc_field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "ddim": self.ddim,
            "bracket_rank": self.bracket_rank,
            "dind": self.dind,
            "phase_dim": self.phase_dim,
            "sum": self.ddim + self.dind,
            "sum_ok": self.sum_ok,
            "npoints": self.npoints,
            "stratification": {f"{k[0]},{k[1]}": v for k, v in sorted(self.stratification.items())},
            "jacobian_spectrum": [float(v) for v in self.jacobian_spectrum],
            "bracket_spectrum": [float(v) for v in self.bracket_spectrum],
        }


def random_points(n: int, count: int = 20, seed: int = 0) -> list:
    ss = np.random.SeedSequence(seed)
    return [sample_constrained_point(n, "float", np.random.default_rng(c)) for c in ss.spawn(count)]


def _dimension_check(observables, xs, tensor, tangent, phase_dim, rtol):
    strat: dict = {}
    spectra = []
    for x in xs:
        G = _normalize_rows(gradient_matrix(observables, x))
        T = tangent(x)
        rj, svj = _numeric_rank(G if T is None else G @ T, rtol)
        Pd = tensor(x)
        B = G @ Pd @ G.T
        ref = scipy.linalg.norm(G, 2) ** 2 * scipy.linalg.norm(Pd, 2)
        rb, svb = _numeric_rank(B, rtol, ref)
        strat[(rj, rb)] = strat.get((rj, rb), 0) + 1
        spectra.append((rj, rb, svj, svb))
    ddim = max(s[0] for s in spectra)
    brank = max(s[1] for s in spectra)
    # generic points must sit in the top stratum of each rank
    for label, idx, top in (("jacobian", 0, ddim), ("bracket", 1, brank)):
        hits = sum(1 for s in spectra if s[idx] == top)
        if hits * 2 < len(xs):
            raise InconsistentRanks(f"top {label} rank {top} attained at only {hits}/{len(xs)} points", strat)
    dind = ddim - brank
    return DimensionCertificate(
        ddim=ddim,
        bracket_rank=brank,
        dind=dind,
        phase_dim=phase_dim,
        sum_ok=ddim + dind == phase_dim,
        npoints=len(xs),
        stratification=strat,
        jacobian_spectrum=list(next(s[2] for s in spectra if s[0] == ddim)),
        bracket_spectrum=list(next(s[3] for s in spectra if s[1] == brank)),
    )


def _kappa_of(field) -> np.ndarray:
    return field.block_matrix() if isinstance(field, MagneticField) else np.asarray(field, dtype=float)


def nc_dimension_check(
    observables: Sequence[Poly],
    points: Sequence[PhaseState],
    field,
    params: SystemParams,
    rtol: float = RANK_RTOL,
) -> DimensionCertificate:
    """ddim = generic rank of the differentials on T*S^{n-1}, dind = ddim
    minus the generic rank of the matrix of pairwise Dirac brackets.

    Ranks are maxima over ``points``; each maximum must be attained at a
    majority of the points, otherwise :class:`InconsistentRanks` is raised
    with the (jacobian rank, bracket rank) stratification.
    """
    if len(points) < 20:
        raise ValueError("need at least 20 sample points")
    kappa = _kappa_of(field)
    xs = [np.asarray(pt.as_vector(), dtype=float) for pt in points]
    return _dimension_check(
        observables, xs, lambda x: dirac_tensor(x, kappa, params.s), tangent_basis, 2 * (params.n - 1), rtol
    )


def magnetic_tensor(kappa: np.ndarray, s: float) -> np.ndarray:
    """Constant Poisson tensor of the magnetic bracket on R^{2n}."""
    n = kappa.shape[0]
    P = np.zeros((2 * n, 2 * n))
    P[:n, n:] = np.eye(n)
    P[n:, :n] = -np.eye(n)
    P[n:, n:] = s * kappa
    return P


def ambient_dimension_check(
    observables: Sequence[Poly],
    points: Sequence[np.ndarray],
    field,
    params: SystemParams,
    rtol: float = RANK_RTOL,
) -> DimensionCertificate:
    """Same count for the unconstrained flow in R^n (phase dimension 2n)."""
    if len(points) < 20:
        raise ValueError("need at least 20 sample points")
    P = magnetic_tensor(_kappa_of(field), params.s)
    xs = [np.asarray(x, dtype=float) for x in points]
    return _dimension_check(observables, xs, lambda x: P, lambda x: None, 2 * params.n, rtol)

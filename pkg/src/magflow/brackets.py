"""Magnetic and Dirac brackets on polynomial observables, randomized exact
identity certification, and Lie-algebra structure constants.

All exact work happens in canonical coordinates: when a
:class:`~magflow.phasecore.MagneticField` is passed, its block matrix is the
Poisson structure, with float entries converted to their exact binary
rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .phasecore import MagneticField, PhaseState, SystemParams, sample_constrained_point
from .poly import DimensionMismatch, Poly, PhaseVars, divmod_phi1

DEFAULT_DEGREE_CAP = 12


class NotClosed(ArithmeticError):
    """A bracket does not expand in the span of the given generators."""

    def __init__(self, pair, residual):
        super().__init__(f"bracket of generators {pair} is not in their span")
        self.pair = pair
        self.residual = residual


def _kappa_entries(field, params: SystemParams):
    if isinstance(field, MagneticField):
        kappa = field.block_matrix()
    else:
        kappa = np.asarray(field, dtype=float)
    s = Fraction(params.s)
    n = kappa.shape[0]
    return n, [
        (i, j, s * Fraction(float(kappa[i, j])))
        for i in range(n)
        for j in range(n)
        if kappa[i, j] != 0
    ]


def magnetic_bracket(F: Poly, G: Poly, field, params: SystemParams, degree_cap: int = DEFAULT_DEGREE_CAP) -> Poly:
    """{F,G} = sum_i (dF/dg_i dG/dp_i - dF/dp_i dG/dg_i) + s sum_ij kappa_ij dF/dp_i dG/dp_j."""
    if F.nvars != G.nvars:
        raise DimensionMismatch(f"{F.nvars} vs {G.nvars} variables")
    n, entries = _kappa_entries(field, params)
    if F.nvars != 2 * n:
        raise DimensionMismatch(f"observables have {F.nvars} variables, field needs {2 * n}")
    if max(F.degree, G.degree) > degree_cap:
        raise ValueError(f"input degree exceeds cap {degree_cap}")
    dF, dG = F.gradient, G.gradient
    out = Poly({}, F.nvars)
    for i in range(n):
        if dF[i] and dG[n + i]:
            out = out + dF[i] * dG[n + i]
        if dF[n + i] and dG[i]:
            out = out - dF[n + i] * dG[i]
    for i, j, c in entries:
        if dF[n + i] and dG[n + j]:
            out = out + (dF[n + i] * dG[n + j]) * c
    return out


@dataclass(frozen=True, eq=False)
class RationalObservable:
    """``numerator / (2 phi1)^phi1_power``, defined where phi1 != 0."""

    numerator: Poly
    phi1_power: int = 0

    def normalized(self) -> "RationalObservable":
        num, k = self.numerator, self.phi1_power
        if num.is_zero():
            return RationalObservable(num, 0)
        while k > 0:
            q, r = divmod_phi1(num)
            if not r.is_zero():
                break
            num, k = q / 2, k - 1
        return RationalObservable(num, k)

    @property
    def nvars(self) -> int:
        return self.numerator.nvars

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def __call__(self, x):
        x = list(x)
        num = self.numerator(x)
        if self.phi1_power == 0:
            return num
        n = self.nvars // 2
        phi1 = sum(v * v for v in x[:n])
        return num / (2 * phi1) ** self.phi1_power

    def on_sphere(self, x):
        """Value on phi1 = 1, where the denominator is 2^phi1_power."""
        return self.numerator(list(x)) / 2 ** self.phi1_power

    def __sub__(self, other):
        other = as_rational(other)
        k = max(self.phi1_power, other.phi1_power)
        V = PhaseVars(self.nvars // 2)
        two_phi1 = V.phi1 * 2
        a = self.numerator * two_phi1 ** (k - self.phi1_power)
        b = other.numerator * two_phi1 ** (k - other.phi1_power)
        return RationalObservable(a - b, k).normalized()

    def to_text(self) -> str:
        if self.phi1_power == 0:
            return self.numerator.to_text()
        return f"({self.numerator.to_text()}) / (2*phi1)^{self.phi1_power}"


def as_rational(expr) -> RationalObservable:
    if isinstance(expr, RationalObservable):
        return expr
    if isinstance(expr, Poly):
        return RationalObservable(expr, 0)
    raise TypeError(f"cannot interpret {type(expr).__name__} as an observable")


def dirac_bracket(F: Poly, G: Poly, field, params: SystemParams) -> RationalObservable:
    """Dirac bracket with respect to phi1 = <g,g>, phi2 = <p,g>."""
    if F.nvars != G.nvars:
        raise DimensionMismatch(f"{F.nvars} vs {G.nvars} variables")
    V = PhaseVars(F.nvars // 2)
    mb = lambda a, b: magnetic_bracket(a, b, field, params)  # noqa: E731
    c = mb(V.phi1, V.phi2)  # equals 2 phi1 for every kappa
    num = c * mb(F, G) - (mb(F, V.phi1) * mb(G, V.phi2) - mb(F, V.phi2) * mb(G, V.phi1))
    if c != V.phi1 * 2:
        raise AssertionError("constraint bracket is not 2*phi1")
    return RationalObservable(num, 1).normalized()


# --- identity testing ---------------------------------------------------------


@dataclass
class Verdict:
    holds: bool
    domain: str
    trials: int
    degree: int
    counterexample: PhaseState | None = None
    value: Fraction | None = None
    label: str = ""
    extra: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "holds": self.holds,
            "domain": self.domain,
            "trials": self.trials,
            "degree": self.degree,
        }
        if self.label:
            d["label"] = self.label
        if self.counterexample is not None:
            d["counterexample"] = {
                "gamma": [str(v) for v in self.counterexample.gamma],
                "p": [str(v) for v in self.counterexample.p],
                "value": str(self.value),
            }
        return d


def _ambient_rational_point(n: int, rng, bound: int = 1000) -> PhaseState:
    while True:
        q = int(rng.integers(1, bound + 1))
        g = [Fraction(int(a), q) for a in rng.integers(-bound, bound + 1, size=n)]
        if any(g):
            break
    r = int(rng.integers(1, bound + 1))
    p = [Fraction(int(b), r) for b in rng.integers(-bound, bound + 1, size=n)]
    return PhaseState(np.array(g, dtype=object), np.array(p, dtype=object))


def trial_point(n: int, domain: str, seed, index: int) -> PhaseState:
    """Deterministic point number ``index`` of the stream for ``seed``."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), index]))
    if domain == "constrained":
        return sample_constrained_point(n, "rational", rng)
    if domain == "ambient":
        return _ambient_rational_point(n, rng)
    raise ValueError(f"unknown domain {domain!r}")


def identity_test(expr, domain: str = "constrained", trials: int | None = None, seed: int = 0, label: str = "") -> Verdict:
    """Decide ``expr == 0`` on the domain by exact evaluation at rational points.

    ``constrained`` samples exact points of T*S^{n-1}; ``ambient`` samples
    random rational points with phi1 != 0. Only the numerator is evaluated,
    the denominator being nonzero on both domains.
    """
    r = as_rational(expr)
    num = r.numerator
    deg = max(num.degree, 0)
    if trials is None:
        trials = max(200, 8 * deg)
    if trials < 8 * deg:
        raise ValueError(f"{trials} trials is below 8 x degree = {8 * deg}")
    n = num.nvars // 2
    for i in range(trials):
        pt = trial_point(n, domain, seed, i)
        val = num.eval_exact(list(pt.gamma) + list(pt.p))
        if val != 0:
            return Verdict(False, domain, i + 1, deg, counterexample=pt, value=val, label=label)
    return Verdict(True, domain, trials, deg, label=label)


# --- structure constants -----------------------------------------------------


def _solve_rational(rows, rhs):
    """A solution of rows @ c = rhs over Q, or None if inconsistent."""
    m = len(rows[0])
    A = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(m):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [v * inv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    if any(row[-1] != 0 for row in A[r:]):
        return None
    sol = [Fraction(0)] * m
    for i, c in enumerate(pivots):
        sol[c] = A[i][-1]
    return sol


def structure_constants(
    generators: Sequence[Poly],
    field,
    params: SystemParams,
    names: Sequence[str] | None = None,
    domain: str = "constrained",
    trials: int = 200,
    seed: int = 0,
) -> dict:
    """Expand every {G_i, G_j}_d (i < j) in the span of the generators and 1.

    Returns ``{(name_i, name_j): {name_k: coeff, ..., "1": const}}`` with zero
    coefficients omitted (an empty dict means the pair commutes). Each
    expansion is certified with :func:`identity_test` on ``domain``.
    """
    gens = list(generators)
    if names is None:
        names = [f"G{i}" for i in range(len(gens))]
    if not gens:
        return {}
    nvars = gens[0].nvars
    n = nvars // 2
    V = PhaseVars(n)
    K = len(gens)
    npts = K + 1 + 6
    pts = [trial_point(n, "constrained", seed + 7919, i) for i in range(npts)]
    xs = [list(pt.gamma) + list(pt.p) for pt in pts]
    basis_vals = [[g.eval_exact(x) for g in gens] + [Fraction(1)] for x in xs]

    table = {}
    for i in range(K):
        for j in range(i + 1, K):
            br = dirac_bracket(gens[i], gens[j], field, params)
            key = (names[i], names[j])
            if br.is_zero():
                table[key] = {}
                continue
            rhs = [br.on_sphere(x) for x in xs]
            sol = _solve_rational(basis_vals, rhs)
            if sol is None:
                raise NotClosed(key, br)
            combo = sum((g * c for g, c in zip(gens, sol[:K]) if c), V.zero()) + sol[K]
            residual = br - combo
            verdict = identity_test(residual, domain, trials=max(trials, 8 * max(residual.numerator.degree, 0)), seed=seed)
            if not verdict.holds:
                raise NotClosed(key, residual)
            entry = {nm: c for nm, c in zip(names, sol[:K]) if c}
            if sol[K]:
                entry["1"] = sol[K]
            table[key] = entry
    return table

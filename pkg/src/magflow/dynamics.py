"""Magnetic flows in R^n, on S^{n-1} and the magnetic pendulum on S^2.

Integration runs through the Dormand-Prince kernel chosen in
:mod:`magflow._backend`; the R^n flow also has an exact closed form used as
an oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import _backend
from .integrals import ambient_catalog, build_catalog, pendulum_catalog
from .phasecore import MagneticField, PhaseState, SystemParams, sample_constrained_point

KINDS = {"ambient_rn": 0, "sphere": 1, "pendulum": 2}


class StepFailure(RuntimeError):
    pass


class HypothesisViolated(ValueError):
    """Equal-block hypothesis of the unitary reduction does not hold."""


@dataclass(frozen=True, eq=False)
class FlowSpec:
    kind: str
    params: SystemParams
    field: MagneticField | None = None
    b: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}; use one of {sorted(KINDS)}")
        if self.kind == "pendulum":
            if self.params.n != 3:
                raise ValueError("the pendulum flow needs n = 3")
            object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        elif self.field is None or self.field.n != self.params.n:
            raise ValueError("field dimension does not match n")

    def kappa(self) -> np.ndarray:
        if self.kind == "pendulum":
            return np.zeros((3, 3))
        return self.field.kappa

    def default_integrals(self) -> dict:
        if self.kind == "pendulum":
            return pendulum_catalog(self.params.s, self.b)
        if self.kind == "ambient_rn":
            return ambient_catalog(self.params, self.field)
        return build_catalog(self.params, self.field).observables


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (N, 2n) in the coordinates of the input state
    spec: FlowSpec
    integral_names: list = dc_field(default_factory=list)
    values: np.ndarray | None = None  # (N, k) integral values
    drift: dict = dc_field(default_factory=dict)
    nfev: int = 0

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    def state(self, i: int = -1) -> PhaseState:
        return PhaseState.from_vector(self.states[i], constrained=self.spec.kind != "ambient_rn")

    def constraint_residuals(self) -> np.ndarray:
        n = self.n
        g, p = self.states[:, :n], self.states[:, n:]
        return np.column_stack([np.einsum("ij,ij->i", g, g) - 1, np.einsum("ij,ij->i", g, p)])

    def to_csv(self, path) -> None:
        """Header ``t, gamma_1..gamma_n, p_1..p_n, <integrals>``; shortest
        round-trip float formatting."""
        n = self.n
        header = ["t"] + [f"gamma_{i + 1}" for i in range(n)] + [f"p_{i + 1}" for i in range(n)]
        header += self.integral_names
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            vals = self.values if self.values is not None else np.zeros((len(self.times), 0))
            for t, x, v in zip(self.times, self.states, vals):
                w.writerow([repr(float(t))] + [repr(float(a)) for a in x] + [repr(float(a)) for a in v])


def read_csv(path):
    """Inverse of :meth:`Trajectory.to_csv`: (header, float array)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(a) for a in r] for r in rows[1:]])


# --- vector fields ---------------------------------------------------------------


def sphere_vector_field(state: PhaseState, field, params: SystemParams):
    """(gamma_dot, p_dot) = (p/m, (s/m) kappa p + mu gamma) with
    mu = (s <p, kappa gamma> - <p, p>) / m."""
    kappa = field.kappa if isinstance(field, MagneticField) else np.asarray(field, dtype=float)
    g = np.asarray(state.gamma, dtype=float)
    p = np.asarray(state.p, dtype=float)
    m, s = params.m, params.s
    mu = (s * (p @ (kappa @ g)) - p @ p) / m
    return p / m, (s / m) * (kappa @ p) + mu * g


def ambient_vector_field(state: PhaseState, field, params: SystemParams):
    kappa = field.kappa if isinstance(field, MagneticField) else np.asarray(field, dtype=float)
    p = np.asarray(state.p, dtype=float)
    return p / params.m, (params.s / params.m) * (kappa @ p)


def pendulum_vector_field(state: PhaseState, s: float, b=(0.0, 0.0, 0.0)):
    g = np.asarray(state.gamma, dtype=float)
    p = np.asarray(state.p, dtype=float)
    b = np.asarray(b, dtype=float)
    return p, s * np.cross(g, p) + b - (p @ p + b @ g) * g


# --- closed form in R^n ----------------------------------------------------------


def rn_closed_form_many(initial: PhaseState, field: MagneticField, params: SystemParams, times) -> np.ndarray:
    """Exact solution of the R^n flow at each time; returns (N, 2n).

    Each canonical block evolves as ``w(t) = w0 exp(i omega t)`` with
    ``omega = -s kappa / m`` and ``z(t) = z0 + w0 (exp(i omega t) - 1) / (i m omega)``
    (straight lines when the block vanishes); the odd coordinate moves
    uniformly.
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    n, m, s = params.n, params.m, params.s
    g0 = field.to_canonical(np.asarray(initial.gamma, dtype=float))
    p0 = field.to_canonical(np.asarray(initial.p, dtype=float))
    G = np.empty((t.size, n))
    P = np.empty((t.size, n))
    for i, k in enumerate(field.blocks):
        a, b = 2 * i, 2 * i + 1
        z0 = g0[a] + 1j * g0[b]
        w0 = p0[a] + 1j * p0[b]
        omega = -s * k / m
        if omega == 0:
            z = z0 + w0 * t / m
            w = np.full(t.shape, w0)
        else:
            rot = np.exp(1j * omega * t)
            w = w0 * rot
            z = z0 + w0 * (rot - 1) / (1j * m * omega)
        G[:, a], G[:, b] = z.real, z.imag
        P[:, a], P[:, b] = w.real, w.imag
    if n % 2:
        G[:, -1] = g0[-1] + p0[-1] * t / m
        P[:, -1] = p0[-1]
    return np.hstack([field.from_canonical(G), field.from_canonical(P)])


def rn_closed_form(initial: PhaseState, field: MagneticField, params: SystemParams, t: float) -> PhaseState:
    return PhaseState.from_vector(rn_closed_form_many(initial, field, params, [t])[0])


def larmor_radius(p_block, kappa: float, s: float) -> float:
    return math.hypot(*p_block) / abs(s * kappa)


def larmor_period(kappa: float, params: SystemParams) -> float:
    return 2 * math.pi * params.m / abs(params.s * kappa)


def fit_circle(xy: np.ndarray):
    """Algebraic least-squares circle fit; returns (center, radius)."""
    x, y = xy[:, 0], xy[:, 1]
    A = np.column_stack([2 * x, 2 * y, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(A, x * x + y * y, rcond=None)
    cx, cy, c = sol
    return np.array([cx, cy]), math.sqrt(c + cx * cx + cy * cy)


def projected_circle(traj: Trajectory, block: int = 0):
    """Center, radius and rotation period of the projection of a trajectory
    onto the plane of a canonical block (coordinates 2i-1, 2i)."""
    xy = traj.states[:, 2 * block : 2 * block + 2]
    center, radius = fit_circle(xy)
    ang = np.unwrap(np.arctan2(xy[:, 1] - center[1], xy[:, 0] - center[0]))
    slope = np.polyfit(traj.times, ang, 1)[0]
    return center, radius, 2 * math.pi / abs(slope)


# --- integration -----------------------------------------------------------------


def integrate(
    spec: FlowSpec,
    initial: PhaseState,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    project_every_step: bool | None = None,
    integrals: dict | None = None,
    t0: float = 0.0,
    kernel: str | None = None,
) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) integration from ``t0`` to ``t_end``.

    Constrained flows are projected back onto T*S^{n-1} after every accepted
    step unless ``project_every_step`` is False. ``integrals`` (name ->
    polynomial in canonical coordinates) defaults to the flow's catalog; the
    max deviation of each from its initial value fills ``Trajectory.drift``.
    ``t_end < t0`` integrates backwards.
    """
    kind = spec.kind
    if project_every_step is None:
        project_every_step = kind != "ambient_rn"
    if kind != "ambient_rn" and not initial.check_constraints():
        raise ValueError("initial state must lie on T*S^{n-1}")
    y0 = np.asarray(initial.as_vector(), dtype=float)
    if y0.shape[0] != 2 * spec.params.n:
        raise ValueError("state dimension does not match n")
    run = _backend.get_kernel(kernel)
    ts, ys, status, nfev = run(
        KINDS[kind],
        y0,
        float(t0),
        float(t_end),
        float(rtol),
        float(atol),
        spec.kappa(),
        float(spec.params.s),
        float(spec.params.m),
        spec.b,
        bool(project_every_step),
    )
    if status == 1:
        raise StepFailure(f"step size fell below 1e-14 at t = {ts[-1]!r}")
    if status == 2:
        raise StepFailure(f"maximum number of steps reached at t = {ts[-1]!r}")
    traj = Trajectory(times=ts, states=ys, spec=spec, nfev=nfev)
    if integrals is None:
        integrals = spec.default_integrals()
    evaluate_integrals(traj, integrals)
    return traj


def _canonical_states(traj: Trajectory) -> np.ndarray:
    spec = traj.spec
    if spec.kind == "pendulum":
        return traj.states
    n = traj.n
    f = spec.field
    return np.hstack([f.to_canonical(traj.states[:, :n]), f.to_canonical(traj.states[:, n:])])


def evaluate_integrals(traj: Trajectory, integrals: dict) -> dict:
    X = _canonical_states(traj)
    names = list(integrals)
    vals = np.column_stack([np.broadcast_to(integrals[k].eval_float(X), (X.shape[0],)) for k in names]) if names else None
    traj.integral_names = names
    traj.values = vals
    traj.drift = {k: float(np.max(np.abs(vals[:, i] - vals[0, i]))) for i, k in enumerate(names)}
    return traj.drift


# --- magnetic pendulum ---------------------------------------------------------------


def pendulum_radius_formula(s: float) -> float:
    """Geodesic radius arctan(1/|s|) of unit-speed magnetic geodesics."""
    if s == 0:
        return math.pi / 2
    return math.atan(1 / abs(s))


def pendulum_momentum_drift(traj: Trajectory) -> dict:
    """Max drift of <b, g x p + s g>, and of each component when b = 0."""
    if traj.spec.kind != "pendulum":
        raise ValueError("trajectory is not a pendulum run")
    s = traj.spec.params.s
    b = np.asarray(traj.spec.b)
    g, p = traj.states[:, :3], traj.states[:, 3:]
    phi = np.cross(g, p) + s * g
    out = {"b.Phi": float(np.max(np.abs(phi @ b - phi[0] @ b)))}
    if not b.any():
        for k in range(3):
            out[f"Phi{k + 1}"] = float(np.max(np.abs(phi[:, k] - phi[0, k])))
    return out


def pendulum_circle_radius(s: float, m: float = 1.0, via: str = "formula", t_end: float = 20.0, seed: int = 0, rtol: float = 1e-10, atol: float = 1e-12) -> float:
    """Geodesic radius of the circle traced by a unit-speed magnetic geodesic.

    ``via="simulate"`` integrates the pendulum with b = 0 and measures the
    largest geodesic distance from the circle center, taken as the
    normalized mean of the conserved vector g x p + s g along the run.
    """
    if via == "formula":
        return pendulum_radius_formula(s)
    if via != "simulate":
        raise ValueError(f"unknown method {via!r}")
    traj = simulate_pendulum(s, t_end=t_end, seed=seed, rtol=rtol, atol=atol)
    return circle_radius_from_trajectory(traj)


def unit_speed_state(n: int, seed=0, m: float = 1.0, speed: float = 1.0) -> PhaseState:
    """Seeded point of T*S^{n-1} rescaled so that |p| / m = speed."""
    st = sample_constrained_point(n, "float", seed)
    p = np.asarray(st.p) / np.linalg.norm(st.p) * speed * m
    return PhaseState(st.gamma, p, True)


def simulate_pendulum(s: float, b=(0.0, 0.0, 0.0), t_end: float = 20.0, seed: int = 0, speed: float = 1.0, rtol=1e-10, atol=1e-12) -> Trajectory:
    spec = FlowSpec("pendulum", SystemParams(3, 1.0, s), b=tuple(b))
    return integrate(spec, unit_speed_state(3, seed, speed=speed), t_end, rtol=rtol, atol=atol)


def circle_radius_from_trajectory(traj: Trajectory) -> float:
    s = traj.spec.params.s
    g, p = traj.states[:, :3], traj.states[:, 3:]
    phi = (np.cross(g, p) + s * g).mean(axis=0)
    center = math.copysign(1.0, s) * phi / np.linalg.norm(phi)
    cosines = np.clip(g @ center / np.linalg.norm(g, axis=1), -1.0, 1.0)
    return float(np.max(np.arccos(cosines)))


# --- unitary reduction ---------------------------------------------------------------


def complex_coordinates(x: np.ndarray, r: int):
    """(z, w) in C^r from the first 2r coordinates of gamma and p."""
    n = x.shape[0] // 2
    g, p = x[:n], x[n:]
    z = g[0 : 2 * r : 2] + 1j * g[1 : 2 * r : 2]
    w = p[0 : 2 * r : 2] + 1j * p[1 : 2 * r : 2]
    return z, w


def realify(R: np.ndarray) -> np.ndarray:
    """Real 2r x 2r matrix of a complex r x r matrix acting on (Re, Im) pairs."""
    r = R.shape[0]
    out = np.zeros((2 * r, 2 * r))
    out[0::2, 0::2] = R.real
    out[0::2, 1::2] = -R.imag
    out[1::2, 0::2] = R.imag
    out[1::2, 1::2] = R.real
    return out


def apply_block_transform(x: np.ndarray, R_real: np.ndarray) -> np.ndarray:
    """Apply diag(R, 1, ..., 1) to both gamma and p of a state vector."""
    x = np.array(x, dtype=float)
    n = x.shape[0] // 2
    k = R_real.shape[0]
    x[:k] = R_real @ x[:k]
    x[n : n + k] = R_real @ x[n : n + k]
    return x


def unitary_reduction(initial: PhaseState, r: int, field: MagneticField, params: SystemParams, tol: float = 1e-15):
    """Unitary R in U(r) moving span{z, w} onto the last two complex coordinates.

    Works in canonical coordinates. Returns ``(R_real, reduced_state, R)``
    where ``R_real`` is the 2r x 2r real form and ``reduced_state`` has
    gamma_1..gamma_{2r-4} = p_1..p_{2r-4} = 0.
    """
    blocks = field.blocks
    if not 1 <= r <= params.n // 2:
        raise HypothesisViolated(f"r must be between 1 and {params.n // 2}")
    if blocks[0] == 0 or any(b != blocks[0] for b in blocks[:r]):
        raise HypothesisViolated(f"kappa_12 = ... = kappa_(2r-1,2r) != 0 fails for blocks {blocks} and r={r}")
    x = np.concatenate([field.to_canonical(np.asarray(initial.gamma, float)), field.to_canonical(np.asarray(initial.p, float))])
    z, w = complex_coordinates(x, r)
    if r <= 2 or (np.all(np.abs(z[: r - 2]) <= tol) and np.all(np.abs(w[: r - 2]) <= tol)):
        R = np.eye(r, dtype=complex)
    else:
        vecs = []
        for v in (z, w):
            for e in vecs:
                v = v - np.vdot(e, v) * e
            nv = np.linalg.norm(v)
            if nv > 1e-12 * max(1.0, np.linalg.norm(z), np.linalg.norm(w)):
                vecs.append(v / nv)
        if not vecs:
            R = np.eye(r, dtype=complex)
        else:
            Q, _ = np.linalg.qr(np.column_stack(vecs + [np.eye(r)[:, k] for k in range(r)]).astype(complex))
            Q = Q[:, :r]
            # QR fixes the span of the leading columns up to phases; restore them exactly
            for k, v in enumerate(vecs):
                Q[:, k] = v
            rest = [Q[:, k] for k in range(len(vecs), r)]
            W = np.column_stack(rest + vecs)
            R = W.conj().T
    R_real = realify(R)
    reduced = apply_block_transform(x, R_real)
    return R_real, PhaseState.from_vector(reduced, constrained=True), R


def tail_reduction(initial: PhaseState, start: int, field: MagneticField, tol: float = 1e-15):
    """Orthogonal Q acting on canonical coordinates ``start..n-1`` (a region
    without field) moving the tails of gamma and p into its first two
    coordinates.

    Returns ``(Q, reduced_state)``; the reduced state vanishes on
    coordinates ``start + 2 .. n-1``.
    """
    n = field.n
    k = n - start
    if k < 0 or any(field.block_matrix()[start:, :].ravel()) or any(field.block_matrix()[:, start:].ravel()):
        raise HypothesisViolated(f"coordinates {start + 1}..{n} carry a field")
    x = np.concatenate([field.to_canonical(np.asarray(initial.gamma, float)), field.to_canonical(np.asarray(initial.p, float))])
    g, p = x[start:n], x[n + start :]
    vecs = []
    for v in (g, p):
        for e in vecs:
            v = v - (e @ v) * e
        nv = np.linalg.norm(v)
        if nv > max(tol, 1e-12 * max(1.0, np.linalg.norm(g), np.linalg.norm(p))):
            vecs.append(v / nv)
    if k <= 2 or not vecs:
        Q = np.eye(k)
    else:
        M, _ = np.linalg.qr(np.column_stack(vecs + [np.eye(k)[:, j] for j in range(k)]))
        M = M[:, :k]
        for j, v in enumerate(vecs):
            M[:, j] = v
        Q = M.T
        if np.linalg.det(Q) < 0:  # stay in SO(k)
            Q[-1] = -Q[-1]
    y = x.copy()
    y[start:n] = Q @ g
    y[n + start :] = Q @ p
    return Q, PhaseState.from_vector(y, constrained=True)


def block_rotation(n: int, angles) -> np.ndarray:
    """Rotation by ``angles[i]`` in each canonical (2i-1, 2i) plane."""
    M = np.eye(n)
    for i, th in enumerate(angles):
        c, s = math.cos(th), math.sin(th)
        a, b = 2 * i, 2 * i + 1
        M[a, a], M[a, b], M[b, a], M[b, b] = c, -s, s, c
    return M

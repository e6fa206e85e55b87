"""Certification suites behind ``magflow verify`` and ``magflow scan``.

Every target id names the statement it checks (lemmas ``L1``..``L5``, the
theorems on spheres, the reduction, the flow in R^n and the pendulum).
Each suite returns plain-dict verdicts ready for a JSON report.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .brackets import (
    NotClosed,
    dirac_bracket,
    identity_test,
    magnetic_bracket,
    structure_constants,
)
from .dynamics import (
    FlowSpec,
    HypothesisViolated,
    integrate,
    pendulum_momentum_drift,
    pendulum_radius_formula,
    simulate_pendulum,
    circle_radius_from_trajectory,
    tail_reduction,
    unit_speed_state,
    unitary_reduction,
)
from .integrals import (
    InconsistentRanks,
    NotApplicable,
    _pair,
    ambient_dimension_check,
    angular_momentum,
    build_catalog,
    jacobian_rank,
    liouville_set,
    nc_dimension_check,
    phi_block,
    random_points,
)
from .phasecore import MagneticField, SystemParams
from .poly import PhaseVars

#: drift and invariance bounds used by the numeric suites
DRIFT_BOUND = 1e-8
RADIUS_TOL = 1e-4

LEMMAS = ("L1", "L2", "L3", "L4", "L5", "dirac")
THEOREMS = (
    "ocigledna",
    "stara",
    "glavna",
    "glavna-i",
    "glavna-ii",
    "glavna-iii",
    "glavna-iv",
    "integrabilni-i",
    "integrabilni-ii",
    "integrabilni-iii",
    "integrabilni2",
    "integrabilni3",
)
OTHER = ("u3", "redukcija", "pendulum")
TARGETS = LEMMAS + THEOREMS + OTHER


def theorem_order(blocks) -> tuple:
    """Blocks reordered as the theorems assume: the largest group of equal
    nonzero values first, other nonzero values descending, zeros last."""
    nonzero = [b for b in blocks if b != 0]
    zeros = [b for b in blocks if b == 0]
    if not nonzero:
        return tuple(zeros)
    counts = {}
    for b in nonzero:
        counts[b] = counts.get(b, 0) + 1
    lead = max(counts, key=lambda b: (counts[b], b))
    rest = sorted((b for b in nonzero if b != lead), reverse=True)
    return tuple([lead] * counts[lead] + rest + zeros)


def leading_equal(blocks) -> int:
    if not blocks or blocks[0] == 0:
        return 0
    r = 1
    while r < len(blocks) and blocks[r] == blocks[0]:
        r += 1
    return r


# --- observable families of the theorems --------------------------------------


def _phis(k):
    return [f"Phi_{_pair(2 * i + 1, 2 * i + 2)}" for i in range(k)]


def _psis(r):
    out = []
    for i in range(r):
        for j in range(i + 1, r):
            tag = f"{_pair(2 * i + 1, 2 * i + 2)};{_pair(2 * j + 1, 2 * j + 2)}"
            out += [f"Psi1_{tag}", f"Psi2_{tag}"]
    return out


def _so(n, start):
    """Names of Phi_ij for 0-based start <= i < j < n."""
    return [f"Phi_{_pair(i + 1, j + 1)}" for i in range(start, n) for j in range(i + 1, n)]


def theorem_family(item: str, n: int, blocks) -> tuple:
    """(observable names, expected dind, claim) for a theorem item.

    ``blocks`` must already be in :func:`theorem_order`. Raises
    :class:`NotApplicable` when the hypothesis fails.
    """
    nb = n // 2
    b = tuple(blocks)
    if not b or b[0] == 0:
        raise NotApplicable("kappa_12 must be nonzero")
    r = leading_equal(b)
    tail_zero = lambda k: all(x == 0 for x in b[k:])  # noqa: E731
    if item == "glavna-i":
        if n == 5 and r == 2:
            return ["H", "J"] + _phis(2) + _psis(2), 3, "3-dimensional isotropic tori"
    elif item == "glavna-ii":
        if n == 6 and r == 2:
            return ["H", "J"] + _phis(3) + _psis(2), 4, "4-dimensional isotropic tori"
    elif item == "glavna-iii":
        if n == 6 and r == 3:
            return ["H"] + _phis(3) + _psis(3), 2, "2-dimensional isotropic tori"
    elif item == "glavna-iv":
        if n in (5, 6) and r == 1 and tail_zero(1):
            return ["H", "J", "Phi_12"] + _so(n, 2), 3, "3-dimensional isotropic tori"
    elif item == "integrabilni-i":
        if n >= 5 and r == 1 and tail_zero(1):
            return ["H", "J", "Phi_12"] + _so(n, 2), 3, "3-dimensional isotropic tori"
    elif item == "integrabilni-ii":
        if n >= 7 and r == 2 and tail_zero(2):
            return ["H", "J"] + _phis(2) + _psis(2) + _so(n, 4), 4, "4-dimensional isotropic tori"
    elif item == "integrabilni-iii":
        if n >= 7 and r == 1 and b[1] != 0 and tail_zero(2):
            return ["H", "J"] + _phis(2) + _so(n, 4), 5, "5-dimensional isotropic tori"
    elif item == "integrabilni2":
        names = ["H", "J"] + _phis(nb) + _psis(r)
        if r >= 2 and n == 2 * r:
            return names, 2, "2-dimensional isotropic tori (n = 2r)"
        if r >= 2 and n == 2 * r + 1:
            return names, 3, "3-dimensional isotropic tori (n = 2r + 1)"
        if r >= 2 and n == 2 * r + 2 and b[-1] != b[0]:
            return names, 4, "4-dimensional isotropic tori (n = 2r + 2)"
    elif item == "integrabilni3":
        if r >= 2 and r < nb and tail_zero(r):
            return ["H", "J"] + _phis(r) + _psis(r) + _so(n, 2 * r), 4, "4-dimensional isotropic tori"
    else:
        raise ValueError(f"{item!r} is not a dimension-count theorem item")
    raise NotApplicable(f"hypothesis of {item} fails for n={n}, blocks={b}")


CERT_ITEMS = (
    "glavna-i",
    "glavna-ii",
    "glavna-iii",
    "glavna-iv",
    "integrabilni-ii",
    "integrabilni-iii",
    "integrabilni3",
    "integrabilni2",
    "integrabilni-i",
)


def classify(n: int, blocks) -> list:
    """Theorem items whose hypothesis holds, most specific first."""
    b = theorem_order(blocks)
    out = []
    for item in CERT_ITEMS:
        try:
            theorem_family(item, n, b)
        except NotApplicable:
            continue
        out.append(item)
    return out


# --- helpers -------------------------------------------------------------------


def _test(label, claim, expr, domain, trials, seed, asserted=True):
    v = identity_test(expr, domain, trials=trials, seed=seed, label=label)
    d = v.as_dict()
    d.update(claim=claim, asserted=asserted)
    return d


def _ctx(params: SystemParams, blocks):
    cat = build_catalog(params, blocks)
    return cat, cat.field


def _trials(trials):
    return trials if trials is not None else 200


# --- lemma suites -----------------------------------------------------------------


def suite_L1(params, blocks, seed=0, trials=None):
    cat, f = _ctx(params, blocks)
    H = cat["H"]
    out = []
    phis = _phis(len(blocks))
    for a in phis:
        out.append(_test("L1", f"{{{a},H}}_d = 0", dirac_bracket(cat[a], H, f, params), "constrained", trials, seed))
    for i, a in enumerate(phis):
        for c in phis[i + 1 :]:
            out.append(_test("L1", f"{{{a},{c}}}_d = 0", dirac_bracket(cat[a], cat[c], f, params), "ambient", trials, seed))
    return out


def suite_L2(params, blocks, seed=0, trials=None):
    cat, f = _ctx(params, blocks)
    return [_test("L2", "{J,H}_d = 0", dirac_bracket(cat["J"], cat["H"], f, params), "constrained", trials, seed)]


def suite_L3(params, blocks, seed=0, trials=None):
    cat, f = _ctx(params, blocks)
    out = []
    for a in _phis(len(blocks)):
        br = dirac_bracket(cat["J"], cat[a], f, params)
        out.append(_test("L3", f"{{J,{a}}}_d = 0", br, "constrained", trials, seed))
        # whether the identity also holds off the leaf is recorded, not asserted
        out.append(_test("L3", f"{{J,{a}}}_d = 0 off T*S^(n-1)", br, "ambient", trials, seed, asserted=False))
    return out


def suite_L4(params, blocks, seed=0, trials=None, npoints=20):
    cat, _ = _ctx(params, blocks)
    n, nb = params.n, len(blocks)
    names = ["H", "J"] + _phis(nb)
    pts = random_points(n, npoints, seed)
    ranks = [jacobian_rank(cat.select(names), p) for p in pts]
    all_equal = n % 2 == 0 and len(set(cat.blocks)) == 1
    out = []
    if all_equal:
        expected = len(names) - 1
        claim = f"rank{{dH,dJ,dPhi}} = {expected}: J = 2(s^2/m) kappa^2 H - mu^2 makes J dependent"
        out.append(
            _test("L4", "{mu,H}_d = 0 for all blocks equal", dirac_bracket(cat["mu"], cat["H"], cat.field, params), "constrained", trials, seed)
        )
    elif n >= 5:
        expected = len(names)
        claim = f"H, J, Phi_(2i-1,2i) functionally independent (rank {expected})"
    else:
        raise NotApplicable("independence is stated for n >= 5")
    out.append(
        {
            "label": "L4",
            "claim": claim,
            "holds": max(ranks) == expected and ranks.count(expected) * 2 >= len(ranks),
            "asserted": True,
            "ranks": ranks,
            "expected": expected,
        }
    )
    return out


def _equal_block_relations(cat, i, j):
    F1 = cat[f"Phi_{_pair(2 * i + 1, 2 * i + 2)}"]
    F2 = cat[f"Phi_{_pair(2 * j + 1, 2 * j + 2)}"]
    tag = f"{_pair(2 * i + 1, 2 * i + 2)};{_pair(2 * j + 1, 2 * j + 2)}"
    A, B = cat[f"Psi1_{tag}"], cat[f"Psi2_{tag}"]
    e0, e1, e2, e3 = F1 + F2, A * Fraction(-1, 2), B * Fraction(-1, 2), (F2 - F1) / 2
    return tag, [
        ("{Phi_i,Phi_j}_d = 0", F1, F2, F1 * 0),
        ("{Phi_i,Psi1}_d = -Psi2", F1, A, -B),
        ("{Phi_j,Psi1}_d = Psi2", F2, A, B),
        ("{Phi_i,Psi2}_d = Psi1", F1, B, A),
        ("{Phi_j,Psi2}_d = -Psi1", F2, B, -A),
        ("{Psi1,Psi2}_d = 2 Phi_j - 2 Phi_i", A, B, F2 * 2 - F1 * 2),
        ("{e1,e2}_d = e3", e1, e2, e3),
        ("{e2,e3}_d = e1", e2, e3, e1),
        ("{e3,e1}_d = e2", e3, e1, e2),
        ("{e0,e1}_d = 0", e0, e1, e0 * 0),
        ("{e0,e2}_d = 0", e0, e2, e0 * 0),
        ("{e0,e3}_d = 0", e0, e3, e0 * 0),
    ]


def suite_L5(params, blocks, seed=0, trials=None):
    cat, f = _ctx(params, blocks)
    pairs = cat.equal_pairs()
    if not pairs:
        raise NotApplicable("no two blocks are equal")
    H = cat["H"]
    out = []
    for i, j in pairs:
        tag, rels = _equal_block_relations(cat, i, j)
        for k in ("Psi1_", "Psi2_"):
            out.append(_test("L5", f"{{{k}{tag},H}}_d = 0", dirac_bracket(cat[k + tag], H, f, params), "constrained", trials, seed))
        for claim, X, Y, Z in rels:
            out.append(_test("L5", f"[{tag}] {claim}", dirac_bracket(X, Y, f, params) - Z, "ambient", trials, seed))
    return out


def suite_dirac(params, blocks, seed=0, trials=None):
    """phi1 and phi2 are Casimirs: brackets with catalog entries and with
    every coordinate vanish identically."""
    cat, f = _ctx(params, blocks)
    V = PhaseVars(params.n)
    out = []
    probes = list(cat.items()) + [(f"g{i + 1}", g) for i, g in enumerate(V.g)] + [(f"p{i + 1}", p) for i, p in enumerate(V.p)]
    for cname, C in (("phi1", V.phi1), ("phi2", V.phi2)):
        for name, F in probes:
            out.append(_test("dirac", f"{{{cname},{name}}}_d = 0", dirac_bracket(C, F, f, params), "ambient", trials, seed))
    return out


# --- theorem suites -------------------------------------------------------------------


def _commuting(cat, names, params, seed, trials, exact=True):
    """Pairwise commutation (exact) and rank of a Liouville family."""
    out = {"observables": list(names)}
    f = cat.field
    if exact:
        failures = []
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                v = identity_test(dirac_bracket(cat_get(cat, a), cat_get(cat, b), f, params), "constrained", trials=trials, seed=seed)
                if not v.holds:
                    failures.append(f"{{{a},{b}}}_d")
        out["noncommuting_pairs"] = failures
    cert = nc_dimension_check([cat_get(cat, k) for k in names], random_points(params.n, 20, seed), f, params)
    out["rank"] = cert.ddim
    out["bracket_rank"] = cert.bracket_rank
    out["holds"] = cert.ddim == params.n - 1 and cert.bracket_rank == 0 and not out.get("noncommuting_pairs")
    return out


def cat_get(cat, name):
    if name in cat:
        return cat[name]
    # Phi_ij on indices outside the catalog's zero region
    i, j = (int(x) for x in (name[4:].split(",") if "," in name else (name[4], name[5:])))
    return angular_momentum(PhaseVars(cat.n), i - 1, j - 1)


def certify_item(item, params, blocks, seed=0, trials=None, exact=True):
    """Dimension certificate of one theorem item plus its Liouville family."""
    b = theorem_order(blocks)
    names, dind, claim = theorem_family(item, params.n, b)
    cat = build_catalog(params, b)
    obs = [cat_get(cat, k) for k in names]
    entry = {"label": item, "claim": claim, "asserted": True, "observables": names, "expected_dind": dind}
    try:
        cert = nc_dimension_check(obs, random_points(params.n, 20, seed), cat.field, params)
    except InconsistentRanks as exc:
        entry.update(holds=False, error=str(exc), stratification={f"{k[0]},{k[1]}": v for k, v in exc.stratification.items()})
        return entry
    entry["certificate"] = cert.as_dict()
    entry["blocks"] = list(b)
    lv = _commuting(cat, list(liouville_set(cat)), params, seed, trials, exact)
    entry["liouville"] = lv
    entry["holds"] = cert.dind == dind and cert.sum_ok and lv["holds"]
    return entry


def suite_glavna(params, blocks, seed=0, trials=None):
    """Liouville integrability on T*S^4 and T*S^5 for every kappa."""
    if params.n not in (5, 6):
        raise NotApplicable("the statement concerns n = 5 and n = 6")
    b = theorem_order(blocks)
    if b[0] == 0:
        raise NotApplicable("kappa_12 must be nonzero")
    cat = build_catalog(params, b)
    if params.n == 6 and len(set(b)) == 1:
        names = ["H"] + _phis(3) + ["I"]
    else:
        names = list(liouville_set(cat))
    lv = _commuting(cat, names, params, seed, trials)
    lv.update(label="glavna", claim=f"Liouville integrable: {params.n - 1} independent commuting integrals", asserted=True)
    return [lv]


def suite_stara(params, blocks, seed=0, trials=None):
    if params.n not in (3, 4):
        raise NotApplicable("the statement concerns n = 3 and n = 4")
    b = theorem_order(blocks)
    if b[0] == 0:
        raise NotApplicable("kappa_12 must be nonzero")
    cat = build_catalog(params, b)
    names = ["H"] + _phis(len(b))
    lv = _commuting(cat, names, params, seed, trials)
    lv.update(label="stara", claim=f"completely integrable on S^{params.n - 1}", asserted=True)
    return [lv]


def suite_ocigledna(params, blocks, seed=0, trials=None, gauge_shift=1):
    """The flow in R^n: block energies and gauge integrals (two gauges) are
    first integrals; the isotropic tori have dimension [n/2] (+1 for the
    free odd coordinate)."""
    n, s, m = params.n, params.s, params.m
    if any(x == 0 for x in blocks):
        raise NotApplicable("the torus count assumes every block nonzero")
    field = MagneticField.from_blocks(blocks, n)
    V = PhaseVars(n)
    H = sum((p * p for p in V.p), V.zero()) / (2 * Fraction(m))
    obs = {}
    for i, k in enumerate(blocks):
        a, c = 2 * i, 2 * i + 1
        tag = _pair(a + 1, c + 1)
        obs[f"H_{tag}"] = (V.p[a] * V.p[a] + V.p[c] * V.p[c]) / (2 * Fraction(m))
        obs[f"Phi_{tag}"] = phi_block(V, i, k, s)
        obs[f"PhiG_{tag}"] = phi_block(V, i, k, s, (gauge_shift, gauge_shift))
    if n % 2:
        obs[f"p_{n}"] = V.p[n - 1]
    out = []
    for name, F in obs.items():
        out.append(_test("ocigledna", f"{{{name},H}} = 0 in R^{n}", magnetic_bracket(F, H, field, params), "ambient", trials, seed))
    rng = np.random.default_rng(seed)
    pts = [rng.standard_normal(2 * n) for _ in range(20)]
    cert = ambient_dimension_check(list(obs.values()), pts, field, params)
    expected = len(blocks) + n % 2
    out.append(
        {
            "label": "ocigledna",
            "claim": f"isotropic tori/cylinders of dimension {expected}",
            "asserted": True,
            "holds": cert.dind == expected and cert.sum_ok,
            "certificate": cert.as_dict(),
        }
    )
    return out


# --- other suites -----------------------------------------------------------------


def killing_form(table: dict, names) -> np.ndarray:
    """Killing form of the Lie algebra with bracket ``table``."""
    k = len(names)
    idx = {nm: a for a, nm in enumerate(names)}
    ad = np.zeros((k, k, k))
    for (x, y), entry in table.items():
        for z, c in entry.items():
            if z == "1":
                continue
            ad[idx[x], idx[z], idx[y]] += float(c)
            ad[idx[y], idx[z], idx[x]] -= float(c)
    return np.einsum("aij,bji->ab", ad, ad)


def u_r_algebra(params, blocks, r, seed=0, trials=200):
    """Closure of Phi and Psi of the first r equal blocks into u(r)."""
    cat, f = _ctx(params, blocks)
    names = _phis(r) + _psis(r)
    try:
        table = structure_constants(cat.select(names), f, params, names, seed=seed, trials=trials)
    except NotClosed as exc:
        return {"label": f"u{r}", "claim": f"closure into u({r})", "asserted": True, "holds": False, "error": str(exc)}
    K = killing_form(table, names)
    ev = np.linalg.eigvalsh(K)
    scale = max(1.0, np.max(np.abs(ev)))
    zero = int(np.sum(np.abs(ev) < 1e-9 * scale))
    negative = int(np.sum(ev < -1e-9 * scale))
    central = any("1" in e for e in table.values())
    holds = len(names) == r * r and zero == 1 and negative == r * r - 1 and not central
    return {
        "label": f"u{r}",
        "claim": f"{r * r} generators close into a Lie algebra isomorphic to u({r})",
        "asserted": True,
        "holds": holds,
        "dimension": len(names),
        "killing_signature": {"negative": negative, "zero": zero, "positive": len(names) - negative - zero},
        "structure_constants": {f"{a},{b}": {k: str(v) for k, v in e.items()} for (a, b), e in table.items()},
    }


def suite_u3(params, blocks, seed=0, trials=None):
    b = theorem_order(blocks)
    if leading_equal(b) < 3:
        raise NotApplicable("u3 needs three equal nonzero blocks")
    return [u_r_algebra(params, b, 3, seed, _trials(trials))]


def reduction_run(params, blocks, r, seed=0, t_end=50.0, rtol=1e-10, atol=1e-12, initial=None):
    """Reduce a seeded unit-speed state with U(r) (and SO(n - 2r) on a zero
    tail), integrate, and measure the zeroed coordinates."""
    n = params.n
    field = MagneticField.from_blocks(blocks, n)
    x0 = initial if initial is not None else unit_speed_state(n, seed, params.m)
    R_real, reduced, R = unitary_reduction(x0, r, field, params)
    zeroed = list(range(max(0, 2 * r - 4)))
    Q = None
    if all(b == 0 for b in blocks[r:]) and n - 2 * r > 2:
        Q, reduced = tail_reduction(reduced, 2 * r, field)
        zeroed += list(range(2 * r + 2, n))
    traj = integrate(FlowSpec("sphere", params, field), reduced, t_end, rtol=rtol, atol=atol)
    cols = zeroed + [n + k for k in zeroed]
    drift = float(np.max(np.abs(traj.states[:, cols]))) if cols else 0.0
    return {
        "R": R_real,
        "R_complex": R,
        "Q": Q,
        "initial": x0,
        "reduced": reduced,
        "zeroed": [k + 1 for k in zeroed],
        "invariance_drift": drift,
        "integral_drift": traj.drift,
    }


def suite_redukcija(params, blocks, seed=0, trials=None):
    b = tuple(blocks)
    r = leading_equal(b)
    if r == 0:
        raise HypothesisViolated("kappa_12 must be nonzero")
    out = []
    if r >= 2:
        out.append(u_r_algebra(params, b, r, seed, _trials(trials)))
    run = reduction_run(params, b, r, seed)
    out.append(
        {
            "label": "redukcija",
            "claim": f"coordinates {run['zeroed']} stay zero after the U({r}) reduction",
            "asserted": True,
            "holds": run["invariance_drift"] < DRIFT_BOUND,
            "invariance_drift": run["invariance_drift"],
        }
    )
    return out


def suite_pendulum(params, blocks=None, seed=0, trials=None):
    if params.n != 3:
        raise NotApplicable("the pendulum lives on S^2 (n = 3)")
    s = params.s
    traj = simulate_pendulum(s, t_end=50.0, seed=seed)
    radius = circle_radius_from_trajectory(traj)
    formula = pendulum_radius_formula(s)
    drift0 = pendulum_momentum_drift(traj)
    tb = simulate_pendulum(s, b=(0.0, 0.0, 1.0), t_end=50.0, seed=seed)
    driftb = pendulum_momentum_drift(tb)
    return [
        {
            "label": "pendulum",
            "claim": "unit-speed circles have geodesic radius arctan(1/|s|)",
            "asserted": True,
            "holds": abs(radius - formula) < RADIUS_TOL,
            "radius": radius,
            "formula": formula,
        },
        {
            "label": "pendulum",
            "claim": "g x p + s g conserved for b = 0",
            "asserted": True,
            "holds": max(drift0.values()) < DRIFT_BOUND,
            "drift": drift0,
        },
        {
            "label": "pendulum",
            "claim": "<b, g x p + s g> conserved for b = (0,0,1)",
            "asserted": True,
            "holds": driftb["b.Phi"] < DRIFT_BOUND,
            "drift": {"b.Phi": driftb["b.Phi"]},
        },
    ]


SUITES = {
    "L1": suite_L1,
    "L2": suite_L2,
    "L3": suite_L3,
    "L4": suite_L4,
    "L5": suite_L5,
    "dirac": suite_dirac,
    "ocigledna": suite_ocigledna,
    "stara": suite_stara,
    "glavna": suite_glavna,
    "u3": suite_u3,
    "redukcija": suite_redukcija,
    "pendulum": suite_pendulum,
}


def run_target(target, params, blocks, seed=0, trials=None):
    """Verdict entries of one target; raises NotApplicable or
    HypothesisViolated when the configuration is outside its hypothesis."""
    if target in SUITES:
        return SUITES[target](params, blocks, seed=seed, trials=trials)
    if target in THEOREMS:
        return [certify_item(target, params, blocks, seed, trials)]
    raise ValueError(f"unknown target {target!r}")


def applicable_targets(params, blocks) -> list:
    """Targets whose hypothesis the configuration satisfies."""
    n = params.n
    b = theorem_order(blocks)
    out = ["L1", "L2", "L3", "dirac"]
    if n >= 5:
        out.append("L4")
    if any(b.count(x) > 1 for x in b if x != 0):
        out.append("L5")
    if all(x != 0 for x in blocks):
        out.append("ocigledna")
    if b and b[0] != 0:
        if n in (3, 4):
            out.append("stara")
        if n in (5, 6):
            out.append("glavna")
        out += classify(n, b)
        if leading_equal(b) >= 3:
            out.append("u3")
    if blocks and blocks[0] != 0:
        out.append("redukcija")
    if n == 3:
        out.append("pendulum")
    return out


__all__ = [
    "TARGETS",
    "applicable_targets",
    "certify_item",
    "classify",
    "killing_form",
    "reduction_run",
    "run_target",
    "theorem_family",
    "theorem_order",
    "u_r_algebra",
]

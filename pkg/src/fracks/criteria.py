"""A-priori verdicts on initial data.

Each check returns a :class:`CriterionVerdict` whose ``margin`` is the signed
distance to the threshold. The sign of the margin, including the sign of a
zero, carries the verdict: ``+0.0`` marks a non-strict condition met with
equality and ``-0.0`` a strict condition failed at equality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .grid import (Field, Grid, center_of_mass, integrate, lp_norm, radius_ladder, unit_ball_volume,
                   weighted_moment, morrey_search)

SMALLNESS = "smallness"
MASS_THRESHOLD = "mass_threshold"
CONCENTRATION = "concentration"
RESCALED_MASS = "rescaled_mass"


@dataclass(frozen=True)
class CriterionVerdict:
    name: str
    satisfied: bool
    margin: float
    inputs: dict = field(default_factory=dict)
    constant: float | None = None
    provenance: str = ""

    def __post_init__(self):
        if self.satisfied != (math.copysign(1.0, self.margin) > 0 and not math.isnan(self.margin)):
            raise ValueError("margin sign disagrees with the verdict")

    def as_dict(self) -> dict:
        return {"name": self.name, "satisfied": self.satisfied, "margin": self.margin,
                "constant": self.constant, "provenance": self.provenance, "inputs": dict(self.inputs)}


def _le_margin(lhs: float, rhs: float) -> tuple[bool, float]:
    # non-strict lhs <= rhs
    ok = lhs <= rhs
    m = rhs - lhs
    return ok, (m if m != 0 else (0.0 if ok else -0.0))


def _gt_margin(lhs: float, rhs: float) -> tuple[bool, float]:
    # strict lhs > rhs
    ok = lhs > rhs
    m = lhs - rhs
    return ok, (m if m != 0 else -0.0)


def critical_exponent(d: int, alpha: float, beta: float) -> float:
    s = alpha + beta - 2
    if not 0 < s <= d:
        raise ValueError(f"alpha + beta - 2 = {s} must lie in (0, d]")
    return d / s


def _center(u: Field, center):
    if center is not None:
        return np.asarray(center, dtype=float)
    if not np.any(u.values):
        return np.zeros(u.grid.d)
    return center_of_mass(u)


# ---------------------------------------------------------------------------
# constants

@dataclass(frozen=True)
class CriteriaConstants:
    eps: float
    c: float | None
    M_gamma: float | None
    provenance: dict = field(default_factory=dict)


def complementary_eps(d: int, alpha: float, beta: float, gamma: float, c: float) -> float:
    """Half the critical-norm lower bound forced by the concentration condition.

    If ``w/M <= c M^{gamma/a}`` with ``a = d+2-alpha-beta``, the tension bound
    optimized over the radius gives
    ``|u|_q >= |B_1|^{-(1-1/q)} (g/(a+g)) (a/(a+g))^{a/g} c^{-a/g}`` for the
    critical ``q``; half of it is a smallness level that can never hold
    together with the concentration condition.
    """
    a = d + 2 - alpha - beta
    q = critical_exponent(d, alpha, beta)
    g = gamma
    bound = unit_ball_volume(d) ** (-(1 - 1 / q)) * (g / (a + g)) * (a / (a + g)) ** (a / g) * c ** (-a / g)
    return 0.5 * bound


def default_constants(d: int, alpha: float, beta: float, gamma: float) -> CriteriaConstants:
    from .calibration import lookup

    return lookup(d, alpha, beta, gamma)


# ---------------------------------------------------------------------------
# checks

def check_smallness(u0: Field, d: int, alpha: float, beta: float, eps: float | None = None,
                    gamma: float | None = None) -> CriterionVerdict:
    q = critical_exponent(d, alpha, beta)
    prov = "explicit"
    if eps is None:
        k = default_constants(d, alpha, beta, gamma if gamma is not None else min(1.5, alpha - 0.2))
        eps, prov = k.eps, k.provenance.get("eps", "")
    norm = lp_norm(u0, q)
    scaled = rescale_initial(u0, 2.0, alpha, beta).field
    invariance = abs(lp_norm(scaled, q) - norm) / max(norm, 1e-300)
    ok, margin = _le_margin(norm, eps)
    return CriterionVerdict(SMALLNESS, ok, margin, {"critical_exponent": q, "critical_norm": norm,
                                                    "scale_invariance_residual": invariance}, eps, prov)


def check_mass_threshold(u0, d: int, beta: float) -> CriterionVerdict:
    from .fractional import riesz_constant

    mass = integrate(u0) if isinstance(u0, Field) else float(u0)
    if mass < 0:
        raise ValueError(f"mass must be nonnegative, got {mass}")
    s = riesz_constant(d, beta)
    threshold = 2 * d / s
    ok, margin = _gt_margin(mass, threshold)
    return CriterionVerdict(MASS_THRESHOLD, ok, margin, {"M": mass, "threshold": threshold, "riesz": s},
                            threshold, "closed form" if (d, beta) == (2, 2) else "calibrated Riesz constant")


def check_concentration(u0: Field, d: int, alpha: float, beta: float, gamma: float, c: float | None = None,
                        center=None) -> CriterionVerdict:
    a = d + 2 - alpha - beta
    if not a > 0:
        raise ValueError(f"need alpha + beta < d + 2, got alpha + beta = {alpha + beta}")
    if not 1 < gamma < alpha:
        raise ValueError(f"need 1 < gamma < alpha, got gamma={gamma}, alpha={alpha}")
    prov = "explicit"
    if c is None:
        k = default_constants(d, alpha, beta, gamma)
        c, prov = k.c, k.provenance.get("c", "")
    mass = integrate(u0)
    if not mass > 0:
        raise ValueError("concentration condition needs positive mass")
    ctr = _center(u0, center)
    w = weighted_moment(u0, gamma, ctr)
    lhs = w / mass
    rhs = c * mass ** (gamma / a)
    ok, margin = _le_margin(lhs, rhs)
    return CriterionVerdict(CONCENTRATION, ok, margin, {"M": mass, "w_gamma": w, "lhs": lhs, "rhs": rhs,
                                                        "mass_power": gamma / a, "center": list(ctr)}, c, prov)


@dataclass(frozen=True)
class TensionBound:
    lower_bound: float
    actual_norm: float
    radius: float


def _tension_terms(u: Field, gamma: float, center):
    ctr = _center(u, center)
    M = integrate(u)
    w = weighted_moment(u, gamma, ctr)
    return ctr, M, w


def moment_lp_tension(u: Field, p: float, gamma: float, center=None, radii=None) -> TensionBound:
    """Lower bound on ``|u|_p`` from mass and ``gamma``-moment.

    For every radius, ``int_{B_R} u >= M - R^{-gamma} w_gamma`` and Hoelder on
    the ball give ``|u|_p >= |B_R|^{-(1-1/p)} (M - R^{-gamma} w_gamma)``. The
    ball measure used is the larger of the Euclidean and the lattice volume,
    which keeps the bound valid for the discrete norm.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    norm = lp_norm(u, p)
    if not np.any(u.values):
        return TensionBound(0.0, norm, math.nan)
    if np.any(u.values < 0):
        raise ValueError("tension bound needs a nonnegative field")
    grid = u.grid
    ctr, M, w = _tension_terms(u, gamma, center)
    r = grid.distance(ctr)
    if radii is None:
        radii = np.geomspace(grid.h, 2 * math.sqrt(grid.d) * grid.half_width, 200)
    best, where = 0.0, math.nan
    for R in radii:
        count = int(np.count_nonzero(r <= R))
        vol = max(unit_ball_volume(grid.d) * R ** grid.d, count * grid.cell_volume)
        val = vol ** (-(1 - 1 / p)) * (M - R ** (-gamma) * w)
        if val > best:
            best, where = val, float(R)
    return TensionBound(best, norm, where)


def morrey_tension(u: Field, p: float, gamma: float, per_octave: int = 8) -> TensionBound:
    """Same argument against the Morrey norm, on the Morrey search's balls.

    The center is the node nearest to the center of mass and the radii are
    the search ladder, so each candidate is one of the balls the search
    itself evaluates.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    grid = u.grid
    search = morrey_search(u, p, per_octave=per_octave)
    if not np.any(u.values):
        return TensionBound(0.0, search.value, math.nan)
    ctr = _center(u, None)
    idx = np.clip(np.round((ctr + grid.half_width) / grid.h).astype(int), 0, grid.n - 1)
    node = grid.axis[idx]
    M = integrate(u)
    w = weighted_moment(u, gamma, node)
    power = grid.d * (1 / p - 1)
    best, where = 0.0, math.nan
    from .grid import ball_stencil, effective_radius

    for R in radius_ladder(grid, per_octave):
        reff = effective_radius(grid, ball_stencil(grid, R))
        val = reff ** power * (M - R ** (-gamma) * w)
        if val > best:
            best, where = val, float(R)
    return TensionBound(best, search.value, where)


# ---------------------------------------------------------------------------
# scaling

@dataclass(frozen=True)
class Rescaled:
    field: Field
    lam: float
    mass_factor: float
    moment_factor: float

    @property
    def grid(self) -> Grid:
        return self.field.grid


def _check_transform(u0: Field, out: Field, lam: float, power: float, gamma: float = 1.5):
    d = u0.grid.d
    m0, m1 = integrate(u0), integrate(out)
    mf = lam ** (power - d)
    if abs(m1 - mf * m0) > 1e-10 * max(abs(mf * m0), 1e-300):
        raise ArithmeticError("mass did not transform as expected")
    w0 = weighted_moment(u0, gamma)
    w1 = weighted_moment(out, gamma)
    wf = lam ** (power - d - gamma)
    if abs(w1 - wf * w0) > 1e-10 * max(abs(wf * w0), 1e-300):
        raise ArithmeticError("moment did not transform as expected")
    return mf, wf


def _resample(f: Field, target: Grid) -> Field:
    from scipy import interpolate

    src = f.grid
    if target.d != src.d:
        raise ValueError("target grid has a different dimension")
    if target.h > src.h * (1 + 1e-12):
        # coarser target: spectral content beyond its resolvable band must be negligible
        from .fractional import symbol_table
        from .grid import rfft

        spec = np.abs(rfft(f.values)) ** 2
        k = symbol_table(src).modulus
        high = spec[k > (2 / 3) * math.pi / target.h].sum()
        if high > 1e-12 * spec.sum():
            raise ValueError("resolution guard: rescaled features fall below the target grid scale")
    outside = np.abs(f.values)[np.any(np.abs(np.stack(np.broadcast_arrays(*src.coords))) > target.half_width,
                                      axis=0)].sum()
    if outside > 1e-10 * np.abs(f.values).sum():
        raise ValueError("rescaled field does not fit in the target box")
    interp = interpolate.RegularGridInterpolator([src.axis] * src.d, f.values, method="cubic",
                                                 bounds_error=False, fill_value=0.0)
    pts = target.points()
    return Field(target, interp(pts).reshape(target.shape))


def rescale_initial(u0: Field, lam: float, alpha: float, beta: float, target: Grid | None = None) -> Rescaled:
    """``lam^{alpha+beta-2} u0(lam x)`` on the box of half-width ``L/lam``.

    Node ``j`` of the new grid sits at ``x_j / lam``, so the transformation is
    exact on the nodes. With ``target`` the result is interpolated onto that
    grid instead.
    """
    if not lam > 0:
        raise ValueError(f"scale factor must be positive, got {lam}")
    power = alpha + beta - 2
    out = Field(u0.grid.scaled(lam), lam ** power * u0.values)
    mf, wf = _check_transform(u0, out, lam, power)
    if target is not None:
        out = _resample(out, target)
    return Rescaled(out, lam, mf, wf)


def dilate(u0: Field, lam: float, target: Grid | None = None) -> Rescaled:
    """Mass-preserving dilation ``lam^d u0(lam x)`` (exact node mapping)."""
    if not lam > 0:
        raise ValueError(f"scale factor must be positive, got {lam}")
    d = u0.grid.d
    out = Field(u0.grid.scaled(lam), lam ** d * u0.values)
    mf, wf = _check_transform(u0, out, lam, float(d))
    if target is not None:
        out = _resample(out, target)
    return Rescaled(out, lam, mf, wf)


def transported_moment_bound(C4: float, M0: float, M: float, d: int, alpha: float, beta: float,
                             gamma: float) -> float:
    """Moment level ``C4 M0^{-1+g/(a+b-2-d)} M^{1+g/(d+2-a-b)}`` reached by rescaling to mass ``M0``."""
    a = d + 2 - alpha - beta
    return C4 * M0 ** (-1 - gamma / a) * M ** (1 + gamma / a)


@lru_cache(maxsize=8)
def _proof(d, alpha, beta, gamma):
    from .virial import proof_constants

    return proof_constants(d, alpha, beta, gamma)


def check_rescaled_mass(u0: Field, gamma: float, M_gamma: float | None = None, center=None) -> CriterionVerdict:
    """Large-mass verdict for ``d=2, alpha=beta=2`` and a sub-quadratic moment.

    Besides the mass comparison the verdict records the dilation factor the
    moment argument needs: mass is invariant in this regime and the moment
    scales by ``lam^{-gamma}``, so ``lam = (w_gamma / C4(M))^{1/gamma}``.
    """
    if u0.grid.d != 2:
        raise ValueError("this criterion is stated for d = 2, alpha = beta = 2")
    if not 1 < gamma < 2:
        raise ValueError(f"gamma must lie in (1, 2), got {gamma}")
    prov = "explicit"
    if M_gamma is None:
        k = default_constants(2, 2.0, 2.0, gamma)
        M_gamma, prov = k.M_gamma, k.provenance.get("M_gamma", "")
    mass = integrate(u0)
    ctr = _center(u0, center)
    w = weighted_moment(u0, gamma, ctr) if mass > 0 else 0.0
    pc = _proof(2, 2.0, 2.0, float(gamma))
    c4 = pc.C4(mass) if mass > 0 else 0.0
    lam = (w / c4) ** (1 / gamma) if c4 > 0 and w > 0 else math.nan
    ok, margin = _gt_margin(mass, M_gamma)
    return CriterionVerdict(RESCALED_MASS, ok, margin, {"M": mass, "w_gamma": w, "proof_mass_threshold":
                                                    pc.mass_threshold, "C4": c4, "lambda": lam},
                            M_gamma, prov)


# ---------------------------------------------------------------------------
# report

@dataclass
class BlowupReport:
    verdicts: list[CriterionVerdict]
    observed: str
    consistent: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {"observed": self.observed, "consistent": self.consistent, "note": self.note,
                "verdicts": [v.as_dict() for v in self.verdicts]}


def applicable_verdicts(u0: Field, d: int, alpha: float, beta: float, gamma: float,
                        constants: CriteriaConstants | None = None) -> list[CriterionVerdict]:
    out = []
    k = constants
    if k is None:
        try:
            k = default_constants(d, alpha, beta, gamma)
        except KeyError:
            k = None

    def labelled(v: CriterionVerdict, which: str) -> CriterionVerdict:
        if k is None or which not in k.provenance:
            return v
        return replace(v, provenance=k.provenance[which])

    if 0 < alpha + beta - 2 <= d:
        eps = k.eps if k is not None else None
        out.append(labelled(check_smallness(u0, d, alpha, beta, eps, gamma), "eps"))
    if alpha == 2 and beta == d and d >= 2:
        out.append(check_mass_threshold(u0, d, beta))
    if alpha + beta < d + 2 and 1 < gamma < alpha and integrate(u0) > 0:
        c = k.c if k is not None else None
        out.append(labelled(check_concentration(u0, d, alpha, beta, gamma, c), "c"))
    if (d, alpha, beta) == (2, 2.0, 2.0) and 1 < gamma < 2 and k is not None and k.M_gamma is not None:
        out.append(labelled(check_rescaled_mass(u0, gamma, k.M_gamma), "M_gamma"))
    return out


def build_report(u0: Field, params, state, constants: CriteriaConstants | None = None) -> BlowupReport:
    verdicts = applicable_verdicts(u0, params.d, params.alpha, params.beta, params.gamma, constants)
    observed = state.status
    predicts = [v.name for v in verdicts if v.satisfied and v.name in (MASS_THRESHOLD, CONCENTRATION, RESCALED_MASS)]
    consistent = not (predicts and observed == "completed")
    note = ""
    if not consistent:
        note = "blow-up predicted by " + ", ".join(predicts) + " but the run completed"
    elif observed == "blowup_detected" and not predicts:
        note = "blow-up detected without an a-priori criterion; the criteria are sufficient, not necessary"
    return BlowupReport(verdicts, observed, consistent, note)

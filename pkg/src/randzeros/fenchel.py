"""Convex-conjugate machinery linking coefficient decay to zero measures.

A decay profile u (piecewise linear, domain starting at t = 0) is turned
into its conjugate

    I(s) = sup_{t >= 0} (s t - u(t)),

whose left derivative s |-> I'(s) is the radial mass function of the
deterministic limit measure: mu(D_r) = I'(log r).  For piecewise-linear
u both objects are computed exactly from the lower convex hull of the
grid: I is again piecewise linear with breakpoints at the hull's edge
slopes, and I' is a staircase whose jump at slope sigma equals the
t-length of the edge with that slope.  A long hull edge therefore is an
atom of the limit measure on the circle of radius e^sigma; short edges
coming from a fine discretization of a smooth profile are smoothed into
a continuous radial mass by midpoint interpolation.

The inverse direction (build a coefficient profile whose zeros follow a
prescribed measure) integrates the radial mass to recover I and
conjugates once more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import AtomRadiusError, IntegrabilityError, ValidationError
from .piecewise import TAIL_INFINITE, PiecewiseFn

HULL_TOL = 1e-12
ATOM_MASS_FLOOR = 1e-6


def _hull(x, v):
    idx = _kernels.lower_hull_indices(np.ascontiguousarray(x, dtype=float),
                                      np.ascontiguousarray(v, dtype=float),
                                      HULL_TOL)
    return x[idx], v[idx], idx


def _conjugate_values(hx, hv, q):
    """Exact sup_x (q x - v(x)) over hull vertices, for sorted q."""
    vals, arg = _kernels.conjugate_scan(np.ascontiguousarray(hx),
                                        np.ascontiguousarray(hv),
                                        np.ascontiguousarray(q, dtype=float))
    return vals, arg


def convex_hull(u: PiecewiseFn) -> PiecewiseFn:
    """Greatest convex minorant of u, sampled back onto u's grid."""
    hx, hv, _ = _hull(u.x, u.v)
    vals = np.interp(u.x, hx, hv)
    return PiecewiseFn(u.x, vals, u.tail)


def fenchel_transform(u: PiecewiseFn, s_grid=None) -> PiecewiseFn:
    """Conjugate I(s) = sup_{t in dom u} (s t - u(t)).

    The sup over a piecewise-linear u is attained at a grid node (or
    stays on the tail), so values are exact.  With ``s_grid=None`` the
    grid is chosen to contain every slope breakpoint of the hull, which
    makes the returned piecewise-linear object exactly equal to I.

    A linear u-tail of slope sigma makes I infinite past sigma (the tail
    tag of the result); an infinite u-tail gives I a linear tail whose
    slope is the last grid abscissa.
    """
    hx, hv, _ = _hull(u.x, u.v)
    bp = np.diff(hv) / np.diff(hx) if hx.size > 1 else np.zeros(0)
    s_top = u.tail_slope  # I(s) = +inf strictly beyond this

    if s_grid is None:
        lo = (bp[0] if bp.size else 0.0) - 1.0
        hi = s_top if math.isfinite(s_top) else (bp[-1] if bp.size else 0.0) + 1.0
        if hi <= lo:
            lo = hi - 2.0
        grid = np.union1d(np.linspace(lo, hi, 1025), bp)
    else:
        grid = np.unique(np.asarray(s_grid, dtype=float))
        if grid.size == 0 or not np.all(np.isfinite(grid)):
            raise ValidationError("s_grid must be a nonempty finite array")
    if math.isfinite(s_top):
        grid = np.union1d(grid[grid <= s_top], [s_top])
    if grid.size < 1:
        raise ValidationError("requested s-grid lies entirely in the infinite "
                              f"region s > {s_top}")
    vals, _ = _conjugate_values(hx, hv, grid)
    if math.isfinite(s_top):
        return PiecewiseFn(grid, vals, TAIL_INFINITE)
    return PiecewiseFn(grid, vals, float(hx[-1]))


def left_derivative(fn: PiecewiseFn) -> PiecewiseFn:
    """Left derivative of a convex piecewise-linear function, on its grid.

    Node i carries the slope of the segment ending there (the first node
    copies the first segment), which matches left-continuity of I'.
    Jump locations are reported by :func:`derivative_jumps`.
    """
    if fn.x.size < 2:
        raise ValidationError("need at least two nodes to differentiate")
    slopes = np.diff(fn.v) / np.diff(fn.x)
    scale = max(1.0, float(np.max(np.abs(slopes))))
    worst = float(np.min(np.diff(slopes))) if slopes.size > 1 else 0.0
    if worst < -1e-10 * scale:
        raise ValidationError(f"input is not convex within tolerance "
                              f"(worst slope decrease {worst:.3e})")
    d = np.concatenate(([slopes[0]], slopes))
    tail = TAIL_INFINITE if fn.tail == TAIL_INFINITE else 0.0
    return PiecewiseFn(fn.x, d, tail)


def derivative_jumps(fn: PiecewiseFn, rel_median=10.0, mass_floor=ATOM_MASS_FLOOR):
    """Detect jump points of the left derivative of a gridded convex fn.

    A slope increment at an interior node counts as a jump when it
    exceeds ``mass_floor``, ``rel_median`` times the median increment,
    and five times the smaller neighbouring increment (a genuine jump is
    a spike; smooth curvature grows gradually).  Returns [(x, size)].
    """
    if fn.x.size < 3:
        return []
    slopes = np.diff(fn.v) / np.diff(fn.x)
    inc = np.diff(slopes)  # increment at node i+1, i = 0..m-3
    med = float(np.median(inc))
    jumps = []
    for i in range(1, inc.size - 1):
        nb = min(inc[i - 1], inc[i + 1])
        if inc[i] >= mass_floor and inc[i] > rel_median * med and inc[i] > 5.0 * nb:
            jumps.append((float(fn.x[i + 1]), float(inc[i])))
    return jumps


# ---------------------------------------------------------------------
# limit measures


@dataclass(frozen=True)
class LimitMeasure:
    """Rotation-invariant limit measure of normalized zeros.

    ``radial_mass`` is the continuous part of s |-> mu(D_{e^s}) (open
    disk); circle atoms are carried separately in ``atoms`` as
    (radius, mass) pairs, so queries add them explicitly and stay exact
    at the jumps.  ``R0`` is the radius of the domain of definition:
    mu(D_r) is infinite for r > R0.
    """

    radial_mass: PiecewiseFn
    atoms: tuple
    R0: float
    _aradii: np.ndarray = field(init=False, repr=False, compare=False)
    _amass: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple(sorted((float(r), float(m)) for r, m in self.atoms))
        if any(r <= 0 or m < 0 or not math.isfinite(r) or not math.isfinite(m)
               for r, m in atoms):
            raise ValidationError("atoms must be (radius > 0, mass >= 0) pairs")
        if any(r > self.R0 * (1 + 1e-9) for r, _ in atoms):
            raise ValidationError("atom at radius > R0: mass escapes the "
                                  "domain of definition")
        c = self.radial_mass
        if np.any(c.v < -1e-12) or (c.v.size > 1 and np.any(np.diff(c.v) < -1e-12)):
            raise ValidationError("radial mass must be nonnegative and nondecreasing")
        if math.isfinite(self.R0) and c.x.size and c.x[-1] > math.log(self.R0) + 1e-12:
            raise ValidationError("radial mass grid extends beyond log R0")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "_aradii", np.array([r for r, _ in atoms]))
        object.__setattr__(self, "_amass", np.array([m for _, m in atoms]))

    def radial_mass_at(self, r, closed=False):
        """mu(D_r) for the open disk; ``closed=True`` includes |z| = r.

        Vectorized over r; returns +inf for r > R0 and 0 at r = 0.
        """
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r).astype(float)
        if np.any(r < 0):
            raise ValidationError("radius must be nonnegative")
        out = np.zeros_like(r)
        pos = r > 0
        with np.errstate(divide="ignore"):
            s = np.log(r[pos])
        cont = np.maximum(self.radial_mass(s), 0.0)
        side = "right" if closed else "left"
        if self._aradii.size:
            idx = np.searchsorted(self._aradii, r[pos], side=side)
            cum = np.concatenate(([0.0], np.cumsum(self._amass)))
            cont = cont + cum[idx]
        out[pos] = cont
        out[r > self.R0] = math.inf
        return float(out[0]) if scalar else out

    @property
    def total_visible_mass(self) -> float:
        """Mass accounted for by the grid plus atoms (the grid's view)."""
        return float(max(self.radial_mass.v_end, 0.0) + self._amass.sum())

    def density_at(self, r):
        """Radial density of the absolutely continuous part at |z| = r.

        density(z) = d/ds [mu(D_{e^s})] / (2 pi |z|^2) at s = log r.
        Raises AtomRadiusError when r carries an atom.
        """
        r = float(r)
        if r <= 0 or not math.isfinite(r):
            raise ValidationError("density needs a finite positive radius")
        if r > self.R0:
            raise ValidationError(f"radius {r} exceeds R0 = {self.R0}")
        for rad, _ in self.atoms:
            if abs(r - rad) <= 1e-9 * (1.0 + rad):
                raise AtomRadiusError(f"circle |z| = {rad} carries an atom; "
                                      "the density is not defined there")
        s = math.log(r)
        c = self.radial_mass
        if s <= c.x[0] or c.x.size < 2:
            slope = 0.0
        elif s >= c.x[-1]:
            slope = c.tail_slope if c.tail != TAIL_INFINITE else 0.0
        else:
            k = int(np.searchsorted(c.x, s, side="right")) - 1
            slope = (c.v[k + 1] - c.v[k]) / (c.x[k + 1] - c.x[k])
        return max(slope, 0.0) / (2.0 * math.pi * r * r)

    # -- serialization --------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "radial_mass": self.radial_mass.to_json_dict(),
            "atoms": [[r, m] for r, m in self.atoms],
            "R0": "inf" if math.isinf(self.R0) else float(self.R0),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "LimitMeasure":
        try:
            rm = PiecewiseFn.from_json_dict(d["radial_mass"])
            atoms = tuple((float(r), float(m)) for r, m in d.get("atoms", []))
            r0 = d.get("R0", "inf")
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"bad measure JSON: {e}") from None
        r0 = math.inf if r0 == "inf" else float(r0)
        return cls(rm, atoms, r0)


def limit_measure(u: PiecewiseFn, atom_floor=ATOM_MASS_FLOOR) -> LimitMeasure:
    """Limit zero measure dual to the decay profile u.

    The hull of u is conjugated exactly.  Hull edges that bridge at
    least one interior grid node are genuine linear pieces (or bridged
    concave bumps) and become circle atoms; single-cell edges are the
    discretization of a smooth profile and are smoothed into the
    continuous radial mass by midpoint interpolation.  Linear pieces in
    a hand-written profile need an interior node to be recognized.
    """
    if abs(float(u.x[0])) > 0.0:
        raise ValidationError("decay profiles must start at t = 0")
    if u.x.size < 2:
        raise ValidationError("decay profile needs at least two grid nodes")
    tau, ups, idx = _hull(u.x, u.v)
    sig = np.diff(ups) / np.diff(tau)
    mass = np.diff(tau)
    bridged = np.diff(idx) > 1

    atoms = []
    atom_cum = np.zeros(tau.size)
    for j in range(sig.size):
        if bridged[j] and mass[j] >= atom_floor:
            atoms.append((float(np.exp(sig[j])), float(mass[j])))
            atom_cum[j + 1:] += mass[j]
    t_cont = tau - atom_cum

    # pin vertex j's continuous mass at the midpoint of its slope
    # interval; outer vertices sit at the outer slope endpoints, so the
    # interpolant is exactly 0 below the first breakpoint
    if sig.size == 0:
        cont = PiecewiseFn(np.array([0.0]), np.array([t_cont[0]]), 0.0)
    else:
        xs = np.concatenate(([sig[0]], 0.5 * (sig[:-1] + sig[1:]), [sig[-1]]))
        ys = np.concatenate(([t_cont[0]], t_cont[1:-1], t_cont[-1:]))
        keep = np.concatenate(([True], np.diff(xs) > 0))
        if not keep.all():
            # coarse grid with a repeated breakpoint: widen to a steep ramp
            eps = 1e-9 * (1.0 + np.abs(xs))
            xs = xs + np.cumsum(~keep) * eps
        cont = PiecewiseFn(xs, ys, 0.0)

    with np.errstate(over="ignore"):
        r0 = float(np.exp(u.tail_slope)) if math.isfinite(u.tail_slope) else math.inf
    return LimitMeasure(cont, tuple(atoms), r0)


def limit_density(u: PiecewiseFn, z_mod: float) -> float:
    """Limit density of normalized zeros at |z| = z_mod for profile u."""
    return limit_measure(u).density_at(z_mod)


# ---------------------------------------------------------------------
# inverse construction


def construct_ensemble(mu: LimitMeasure, n: int):
    """Coefficient schedule whose normalized zeros follow mu.

    Integrates the radial mass to I(s) = int_{-inf}^s mu(D_{e^r}) dr,
    conjugates to a decay profile u, and wraps it as a custom ensemble
    with f_{k,n} = exp(-n u(k/n)).  The additive normalization of u is
    whatever the construction yields (u(0) = -inf I, which is 0 up to
    the truncated lower tail); rescaling all coefficients by c^n shifts
    u by a constant and does not move any zero.

    Mass reaching r = 0 too slowly (log-log slope of the radial mass
    below 1e-3 per unit log-radius on the lowest decade) fails the
    integrability requirement and raises IntegrabilityError.
    """
    from .ensembles import EnsembleSpec  # deferred: ensembles is a leaf module

    if mu.total_visible_mass <= 0:
        raise ValidationError("measure carries no mass; nothing to construct")
    if any(r >= mu.R0 * (1 - 1e-12) for r, _ in mu.atoms):
        raise ValidationError("mass on or beyond the boundary |z| = R0 cannot "
                              "be realized by a coefficient schedule")
    c = mu.radial_mass
    s0 = float(c.x[0])
    log_r0 = math.log(mu.R0) if math.isfinite(mu.R0) else math.inf

    c_bottom = max(float(c(s0)), 0.0)
    if c_bottom > 1e-300:
        # power-law fit over the lowest decade of radius
        s_b = min(s0 + math.log(10.0), float(c.x[-1]))
        cb = max(float(c(s_b)), c_bottom)
        gamma = (math.log(cb) - math.log(c_bottom)) / (s_b - s0) if s_b > s0 else 0.0
        if gamma <= 1e-3:
            raise IntegrabilityError(
                "radial mass near r = 0 decays too slowly to integrate "
                f"(fitted exponent {gamma:.3e})")
        base = c_bottom / gamma
    else:
        gamma = None
        base = 0.0

    nodes = set(float(s) for s in c.x)
    nodes.update(math.log(r) for r, _ in mu.atoms)
    if math.isfinite(log_r0):
        nodes.add(log_r0)
    else:
        nodes.add(float(c.x[-1]) + 1.0)
    nodes = np.array(sorted(s for s in nodes if s >= s0 - 1e-300))
    nodes = nodes[nodes <= log_r0 + 1e-300] if math.isfinite(log_r0) else nodes

    # exact integral of the piecewise-linear continuous part ...
    cv = np.maximum(c(nodes), 0.0)
    seg = np.diff(nodes) * 0.5 * (cv[1:] + cv[:-1])
    ivals = base + np.concatenate(([0.0], np.cumsum(seg)))
    # ... plus one ramp per atom
    for r, m in mu.atoms:
        ivals = ivals + m * np.maximum(nodes - math.log(r), 0.0)

    # analytic continuation below the grid so the conjugate sees the flat bottom
    pre = np.array([s0 - 3.0, s0 - 1.0])
    if gamma is not None:
        pre_v = base * np.exp(gamma * (pre - s0))
    else:
        pre_v = np.zeros(2)
    for r, m in mu.atoms:
        pre_v = pre_v + m * np.maximum(pre - math.log(r), 0.0)
    s_all = np.concatenate((pre, nodes))
    i_all = np.concatenate((pre_v, ivals))

    mass_end = float(np.maximum(c(s_all[-1]), 0.0) + sum(m for _, m in mu.atoms))
    i_fn = PiecewiseFn(s_all, i_all,
                       TAIL_INFINITE if math.isfinite(log_r0) else mass_end)

    hx, hv, _ = _hull(i_fn.x, i_fn.v)
    bp = np.diff(hv) / np.diff(hx)
    t_top = i_fn.tail_slope if math.isfinite(i_fn.tail_slope) else \
        float(bp[-1] if bp.size else 0.0) + 1.0
    t_grid = np.union1d(np.linspace(0.0, t_top, 1025), bp[(bp >= 0) & (bp <= t_top)])
    t_grid = t_grid[(t_grid >= 0) & (t_grid <= i_fn.tail_slope)]
    u_vals, _ = _conjugate_values(hx, hv, t_grid)
    if math.isfinite(i_fn.tail_slope):
        u_fn = PiecewiseFn(t_grid, u_vals, TAIL_INFINITE)
    else:
        u_fn = PiecewiseFn(t_grid, u_vals, log_r0)

    if n < 1:
        raise ValidationError("n must be a positive integer")
    return EnsembleSpec.custom(u_fn)

"""Annealed Monte Carlo estimators and their analytic companions.

Annealed sampling means one fresh environment per trajectory (product of the
environment law and the walk law).  Replica r of a run with root seed s uses
environment streams keyed (s, "env", ..., r) and walk streams keyed by the
replica block of r, so ensembles are reproducible and independent of worker
count; aborted (range-capped) replicas are excluded and counted, never
silently dropped.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as _hurwitz_zeta
from scipy.stats import kstest

from .closed_forms import (VelocityResult, sigma2_iid_omega, sigma2_rcm,
                           sigma2_rcm_at_zero, velocity_coinflip,
                           velocity_iid_omega, velocity_rcm_continuous,
                           velocity_rcm_discrete)
from .environments import (CoinFlip, IIDConductance, IIDOmega, PeriodicEnv,
                           Renewal, _tau1_cdf_table)
from .exact import velocity_periodic
from .rng import derive_seed, generator
from .walks import EnsembleResult, ensemble_continuous, ensemble_discrete


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo statistic with its sampling uncertainty."""

    mean: float
    std_error: float
    count: int
    ci95: tuple[float, float]
    excluded: int = 0

    @staticmethod
    def from_samples(x: np.ndarray, excluded: int = 0) -> "Estimate":
        x = np.asarray(x, dtype=float)
        if x.size < 2:
            raise ValueError("need at least 2 samples")
        mean = float(x.mean())
        se = float(x.std(ddof=1) / math.sqrt(x.size))
        return Estimate(mean, se, int(x.size), (mean - 1.96 * se, mean + 1.96 * se),
                        excluded)


@dataclass(frozen=True)
class ScalingFit:
    """Ordinary least squares on (log n, log value)."""

    slope: float
    intercept: float
    slope_std_error: float
    points: tuple[tuple[float, float], ...]

    @staticmethod
    def from_points(ns, values) -> "ScalingFit":
        ns = np.asarray(ns, dtype=float)
        values = np.asarray(values, dtype=float)
        if ns.size < 3:
            raise ValueError("need at least 3 points for a slope fit")
        if (ns <= 0).any() or (values <= 0).any():
            raise ValueError("log-log fit needs positive points")
        x = np.log(ns)
        y = np.log(values)
        xc = x - x.mean()
        slope = float(np.dot(xc, y) / np.dot(xc, xc))
        intercept = float(y.mean() - slope * x.mean())
        resid = y - (intercept + slope * x)
        var = float(np.dot(resid, resid) / (x.size - 2) / np.dot(xc, xc))
        return ScalingFit(slope, intercept, math.sqrt(var),
                          tuple(zip(ns, values)))


# ---------------------------------------------------------------------------
# analytic dispatch
# ---------------------------------------------------------------------------

def velocity_of_model(model, lam: float) -> VelocityResult:
    """Closed-form velocity for models that have one."""
    if isinstance(model, IIDOmega):
        return velocity_iid_omega(lam, model.rho.moment(1), model.rho.moment(-1))
    if isinstance(model, IIDConductance):
        if model.time_flavor == "discrete":
            return velocity_rcm_discrete(lam, model.c.moment(1), model.c.moment(-1))
        return velocity_rcm_continuous(lam, model.c.moment(-1))
    if isinstance(model, CoinFlip):
        a, b = model.a_plus.moment(1), model.a_plus.moment(-1)
        am, bm = model.a_minus.moment(1), model.a_minus.moment(-1)
        if abs(am - a) > 1e-9 * a or abs(bm - b) > 1e-9 * b:
            raise ValueError("coin-flip closed form assumes the two rate "
                             "sequences share E[a] and E[1/a]")
        return velocity_coinflip(lam, a, b)
    if isinstance(model, PeriodicEnv):
        return velocity_periodic(model, lam)
    raise ValueError(f"no closed-form velocity for {type(model).__name__}; "
                     "use velocity_jump_probe for the renewal environment")


def sigma2_of_model(model, lam: float) -> float | None:
    """Closed-form diffusion coefficient where the package has one."""
    if isinstance(model, IIDConductance) and model.time_flavor == "discrete":
        a, b = model.c.moment(1), model.c.moment(-1)
        if lam == 0:
            return sigma2_rcm_at_zero(a, b)
        return sigma2_rcm(lam, a, b, model.c.moment(2), model.c.moment(-2)).sigma2
    if isinstance(model, IIDOmega):
        m1, m2 = model.rho.moment(1), model.rho.moment(2)
        try:
            return sigma2_iid_omega(lam, m1, m2).sigma2
        except ValueError:
            return None
    return None


# ---------------------------------------------------------------------------
# ensemble helpers
# ---------------------------------------------------------------------------

def _window_hint(model, lam: float, drift_time: float,
                 steps: float) -> tuple[int, int]:
    try:
        v = velocity_of_model(model, lam).v
    except ValueError:
        v = 0.0
    center = v * drift_time
    spread = 8.0 * math.sqrt(max(steps, 1.0)) + 256.0
    return (int(min(0.0, center) - spread), int(max(0.0, center) + spread))


def _run_ensemble(model, lam, replicas, seed, *, n=None, horizon=None,
                  mirrored=False, workers=1, target_level=None,
                  jump_budget=10**8, range_cap=None) -> EnsembleResult:
    if (n is None) == (horizon is None):
        raise ValueError("give exactly one of n (discrete) or horizon (continuous)")
    base_lam = -lam if mirrored else lam
    if target_level is not None:
        hint = (-256, target_level + 256)
    elif n is not None:
        hint = _window_hint(model, base_lam, n, n)
    else:
        hint = _window_hint(model, base_lam, horizon,
                            horizon * _rate_scale(model, lam))

    cap = {} if range_cap is None else {"range_cap": range_cap}

    def run(offset, count):
        if n is not None:
            return ensemble_discrete(model, lam, n, count, seed,
                                     mirrored=mirrored, window_hint=hint,
                                     replica_offset=offset, **cap)
        return ensemble_continuous(model, lam, horizon, count, seed,
                                   mirrored=mirrored, window_hint=hint,
                                   target_level=target_level,
                                   jump_budget=jump_budget,
                                   replica_offset=offset, **cap)

    if workers <= 1:
        return run(0, replicas)
    bounds = np.linspace(0, replicas, workers + 1).astype(int)
    ranges = [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_ensemble_worker,
                              [(model, lam, replicas, seed, n, horizon, mirrored,
                                target_level, jump_budget, hint, cap, off, cnt)
                               for off, cnt in ranges]))
    finals = np.concatenate([p.final_positions for p in parts])
    aborted = np.concatenate([p.aborted for p in parts])
    values = (np.concatenate([p.values for p in parts])
              if parts[0].values is not None else None)
    return EnsembleResult(finals, aborted, replicas, parts[0].elapsed, values)


def _ensemble_worker(args):
    (model, lam, replicas, seed, n, horizon, mirrored, target_level,
     jump_budget, hint, cap, offset, count) = args
    if n is not None:
        return ensemble_discrete(model, lam, n, count, seed, mirrored=mirrored,
                                 window_hint=hint, replica_offset=offset, **cap)
    return ensemble_continuous(model, lam, horizon, count, seed,
                               mirrored=mirrored, window_hint=hint,
                               target_level=target_level,
                               jump_budget=jump_budget, replica_offset=offset,
                               **cap)


def _rate_scale(model, lam: float) -> float:
    # crude per-unit-time jump-rate bound used only to size windows
    if isinstance(model, IIDConductance):
        hi = model.c.support_bounds()[1]
        return 2.0 * hi * math.cosh(lam)
    if isinstance(model, CoinFlip):
        hi = max(model.a_plus.support_bounds()[1], model.a_minus.support_bounds()[1])
        return 2.0 * hi * math.cosh(lam)
    if isinstance(model, Renewal):
        return (model.a + 2.0) * math.cosh(lam)
    if isinstance(model, PeriodicEnv) and model.rates:
        return 2.0 * max(max(p) for p in model.rates) * math.cosh(lam)
    return 2.0 * math.cosh(lam)


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

def annealed_velocity(model, lam: float, *, n: int | None = None,
                      horizon: float | None = None, replicas: int, seed: int,
                      mirrored: bool = False, workers: int = 1,
                      range_cap: int | None = None) -> Estimate:
    """Mean of X_n/n (or Y_t/t) over fresh environments, with standard error."""
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    res = _run_ensemble(model, lam, replicas, seed, n=n, horizon=horizon,
                        mirrored=mirrored, workers=workers, range_cap=range_cap)
    ok = ~res.aborted
    if ok.sum() < 2:
        raise ValueError(f"{int(res.aborted.sum())} of {replicas} replicas hit "
                         "the range cap; nothing left to estimate")
    scale = float(n if n is not None else horizon)
    return Estimate.from_samples(res.final_positions[ok] / scale,
                                 excluded=int(res.aborted.sum()))


@dataclass(frozen=True)
class DiffusionResult:
    """Sample variance of the recentered rescaled displacement, with a
    Kolmogorov-Smirnov distance to the standard Gaussian."""

    variance: Estimate
    ks_distance: float
    v_used: float
    sigma2_ref: float | None


def annealed_diffusion(model, lam: float, n: int, replicas: int, seed: int, *,
                       v: float | None = None, workers: int = 1) -> DiffusionResult:
    """Variance of Z = (X_n - v n)/sqrt(n) over fresh environments.

    v defaults to the model's closed-form velocity.  The KS diagnostic
    standardizes Z by the closed-form diffusivity when available (otherwise
    by the sample standard deviation).
    """
    if v is None:
        v = velocity_of_model(model, lam).v
    res = _run_ensemble(model, lam, replicas, seed, n=n, workers=workers)
    ok = ~res.aborted
    z = (res.final_positions[ok] - v * n) / math.sqrt(n)
    m = z.size
    s2 = float(z.var(ddof=1))
    m4 = float(np.mean((z - z.mean()) ** 4))
    se = math.sqrt(max(m4 - (m - 3) / (m - 1) * s2 * s2, 0.0) / m)
    var_est = Estimate(s2, se, m, (s2 - 1.96 * se, s2 + 1.96 * se),
                       excluded=int(res.aborted.sum()))
    sigma2_ref = sigma2_of_model(model, lam)
    scale = math.sqrt(sigma2_ref) if sigma2_ref else float(z.std(ddof=1))
    ks = float(kstest(z / scale, "norm").statistic)
    return DiffusionResult(var_est, ks, float(v), sigma2_ref)


@dataclass(frozen=True)
class EinsteinRow:
    """One field strength of the Einstein-relation slope table."""

    h: float
    analytic_slope: float
    bias_term: float
    mc_slope: float | None
    mc_slope_se: float | None
    mc_corrected: float | None
    noise_dominated: bool


@dataclass(frozen=True)
class EinsteinTable:
    limit: float                 # sigma2(0) = dv/dlam at 0
    rows: tuple[EinsteinRow, ...]


def einstein_slope(model: IIDConductance, h_grid, n: int, replicas: int,
                   seed: int, *, mc: bool = True,
                   workers: int = 1) -> EinsteinTable:
    """One-sided difference quotients v(h)/h against their limit sigma2(0).

    Discrete flavor: limit 1/(E[c] E[1/c]) with known O(h) bias
    (ab-1)/(ab)^2 h from the velocity expansion, reported and subtracted in
    mc_corrected.  Continuous flavor: limit 2/E[1/c], bias term 0 (the
    quotient is even in h, error O(h^2)).  Rows with replicas too small for
    the signal are flagged noise_dominated.
    """
    if not isinstance(model, IIDConductance):
        raise ValueError("the Einstein check is for conductance models")
    a, b = model.c.moment(1), model.c.moment(-1)
    discrete = model.time_flavor == "discrete"
    limit = 1.0 / (a * b) if discrete else 2.0 / b
    rows = []
    for i, h in enumerate(h_grid):
        vres = velocity_of_model(model, h)
        bias = (a * b - 1.0) / (a * b) ** 2 * h if discrete else 0.0
        mc_slope = mc_se = corrected = None
        noisy = False
        if mc:
            est = annealed_velocity(
                model, h, replicas=replicas, seed=derive_seed(seed, "einstein", i),
                workers=workers, **({"n": n} if discrete else {"horizon": float(n)}))
            mc_slope = est.mean / h
            mc_se = est.std_error / h
            corrected = mc_slope - bias
            noisy = vres.v < 3.0 * est.std_error
        rows.append(EinsteinRow(float(h), vres.v / h, bias, mc_slope, mc_se,
                                corrected, noisy))
    return EinsteinTable(limit, tuple(rows))


# ---------------------------------------------------------------------------
# renewal environment estimators
# ---------------------------------------------------------------------------

def tau1_tail(gamma: float, n: int) -> float:
    """Exact P(tau_1 > n) = zeta(gamma, n+1)/zeta(gamma)."""
    return float(_hurwitz_zeta(gamma, n + 1) / _hurwitz_zeta(gamma, 1.0))


def _renewal_counts(gamma: float, seed: int, replicas: int, grid: np.ndarray,
                    chunk: int = 2048):
    """Counts of renewal points in [0, n] per replica, for each grid n.

    Yields (counts_chunk,) arrays of shape (m, len(grid)).  Environments are
    fresh per replica; the stationary anchor (straddling gap, first point)
    uses the exact heavy-tailed marginals.
    """
    n_max = int(grid.max())
    table = _tau1_cdf_table(gamma)
    rng = generator(seed, "renewal-ensemble")
    mu = float(_hurwitz_zeta(gamma, 1.0))
    sig2 = 2.0 * float(_hurwitz_zeta(gamma - 1.0, 1.0)) - mu - mu * mu
    cols = int(n_max / mu + 10.0 * math.sqrt(max(n_max, 1) * max(sig2, 0.1) / mu**3) + 64)
    done = 0
    while done < replicas:
        m = min(chunk, replicas - done)
        u1 = rng.random(m)
        tau1 = np.searchsorted(table, u1, side="left") + 1
        if (tau1 > len(table)).any():  # beyond-table mass is ~1e-13; clamp
            tau1 = np.minimum(tau1, len(table))
        straddle = np.floor(tau1 * (1.0 - rng.random(m)) ** (-1.0 / gamma))
        at_zero = (straddle == tau1)
        gaps = np.floor((1.0 - rng.random((m, cols))) ** (-1.0 / gamma))
        pts = tau1[:, None] + np.concatenate(
            [np.zeros((m, 1)), np.cumsum(gaps, axis=1)], axis=1)
        counts = np.empty((m, grid.size), dtype=np.int64)
        for r in range(m):
            row = pts[r]
            base = np.searchsorted(row, grid + 0.5)
            if row[-1] <= n_max:  # astronomically rare: extend this row
                extra = row[-1]
                more = []
                while extra <= n_max:
                    g = float(np.floor((1.0 - rng.random()) ** (-1.0 / gamma)))
                    extra += g
                    more.append(extra)
                base += np.searchsorted(np.asarray(more), grid + 0.5)
            counts[r] = base + int(at_zero[r])
        done += m
        yield counts


@dataclass(frozen=True)
class RenewalScaling:
    """Monte Carlo product moments E[Z_0...Z_n] with their scaling fit and
    the exact lower-bound curve P(tau_1 > n)/2.

    The moment is dominated by the rare event that no renewal point falls in
    [0, n] (probability ~ n^(1-gamma)), so grid points the replica budget
    cannot resolve come back as zero estimates; the fit is None unless every
    n > 0 on the grid got a positive estimate, and fit_resolved tells which
    prefix of the grid was resolvable.
    """

    grid: tuple[int, ...]
    estimates: tuple[Estimate, ...]
    fit: ScalingFit | None
    lower_bounds: tuple[float, ...]
    fit_resolved: tuple[int, ...]


def renewal_product_moment(gamma: float, n_grid, replicas: int,
                           seed: int) -> RenewalScaling:
    """Estimate E[Z_0...Z_n] = E[2^-#(renewal points in [0,n])] on a grid of n
    over fresh stationary renewal environments, fit the log-log slope, and
    attach the exact pointwise lower bound."""
    if not gamma > 2:
        raise ValueError("gamma must exceed 2")
    grid = np.asarray(sorted(int(v) for v in n_grid), dtype=np.int64)
    sums = np.zeros(grid.size)
    sq = np.zeros(grid.size)
    total = 0
    for counts in _renewal_counts(gamma, seed, replicas, grid):
        z = 0.5 ** counts
        sums += z.sum(axis=0)
        sq += (z * z).sum(axis=0)
        total += counts.shape[0]
    means = sums / total
    ses = np.sqrt(np.maximum(sq / total - means**2, 0.0) / (total - 1))
    estimates = tuple(
        Estimate(float(mu), float(se), total,
                 (float(mu - 1.96 * se), float(mu + 1.96 * se)))
        for mu, se in zip(means, ses))
    pos = (grid > 0) & (means > 0)
    fit = None
    if (grid > 0).sum() == pos.sum() and pos.sum() >= 3:
        fit = ScalingFit.from_points(grid[pos], means[pos])
    bounds = tuple(tau1_tail(gamma, int(nn)) / 2.0 for nn in grid)
    return RenewalScaling(tuple(int(v) for v in grid), estimates, fit, bounds,
                          tuple(int(v) for v in grid[pos]))


@dataclass(frozen=True)
class ProbeRow:
    """Classification of the annealed crossing series at one field value."""

    lam: float
    growth_factor: float         # a e^{-2 lam}
    classification: str          # converging | diverging | inconclusive
    v_estimate: Estimate | None
    term_slope: float | None
    term_slope_se: float | None


def velocity_jump_probe(a: float, gamma: float, lam_grid, replicas: int,
                        seed: int, i_max: int = 512) -> list[ProbeRow]:
    """Classify E[crossing series](lam) near the jump threshold
    lam_plus = log(a)/2 and estimate v where it converges.

    Away from the threshold the geometric factor a e^{-2 lam} settles the
    classification exactly (the exact lower bound P(tau_1 > i)/2 forces
    divergence for factors > 1; products are <= 1 so factors < 1 give
    summability).  At the threshold the Monte Carlo power-law slope of
    E[Z_0...Z_i] decides, fit over the term range the replica budget actually
    resolves (accumulated weight >= 20): slope < -1 within 3 fit standard
    errors converges, > -1 diverges, anything else is reported inconclusive.
    Truncating the series at i_max biases the v estimate up by at most
    O(1/i_max); callers probing near the threshold should keep replicas high
    enough that the fit range spans at least a decade.
    """
    if not (a > 0 and gamma > 2):
        raise ValueError("need a > 0 and gamma > 2")
    lam_grid = [float(v) for v in lam_grid]
    full = np.arange(0, i_max + 1, dtype=np.int64)
    factors = np.array([a * math.exp(-2.0 * lam) for lam in lam_grid])
    summable = factors <= 1.0
    # per-replica weighted partial sums, so the v error bars carry the full
    # cross-term correlation of the shared product estimates
    wmat = factors[summable, None] ** (full[None, :] + 1.0)
    sums = np.zeros(full.size)
    sq = np.zeros(full.size)
    t_sum = np.zeros(wmat.shape[0])
    t_sq = np.zeros(wmat.shape[0])
    total = 0
    for counts in _renewal_counts(gamma, seed, replicas, full):
        z = 0.5 ** counts
        sums += z.sum(axis=0)
        sq += (z * z).sum(axis=0)
        t = z @ wmat.T
        t_sum += t.sum(axis=0)
        t_sq += (t * t).sum(axis=0)
        total += counts.shape[0]
    means = sums / total
    resolved = np.flatnonzero(sums >= 20.0)
    hi_fit = int(resolved.max()) if resolved.size else 0
    igrid = np.unique(np.geomspace(16, max(hi_fit, 17), 24).astype(np.int64))
    igrid = igrid[igrid <= hi_fit]
    rows: list[ProbeRow] = []
    k = 0
    for lam, g in zip(lam_grid, factors):
        slope = slope_se = None
        if abs(g - 1.0) <= 1e-12:
            if igrid.size >= 3 and means[igrid].min() > 0:
                fit = ScalingFit.from_points(igrid, means[igrid])
                slope, slope_se = fit.slope, fit.slope_std_error
            if slope is not None and slope + 3.0 * slope_se < -1.0:
                cls = "converging"
            elif slope is not None and slope - 3.0 * slope_se > -1.0:
                cls = "diverging"
            else:
                cls = "inconclusive"
        elif g > 1.0:
            cls = "diverging"
        else:
            cls = "converging"
        v_est = None
        if g <= 1.0:
            partial = t_sum[k] / total
            partial_se = math.sqrt(max(t_sq[k] / total - partial**2, 0.0)
                                   / (total - 1))
            k += 1
            if cls == "converging":
                denom = 1.0 + 2.0 * float(partial)
                v = 1.0 / denom
                se_v = 2.0 * float(partial_se) / (denom * denom)
                v_est = Estimate(v, se_v, total,
                                 (v - 1.96 * se_v, v + 1.96 * se_v))
        rows.append(ProbeRow(float(lam), float(g), cls, v_est, slope, slope_se))
    return rows


# ---------------------------------------------------------------------------
# first-passage ensemble (Lemma-B.1-style identities)
# ---------------------------------------------------------------------------

def annealed_tau1(model, lam: float, replicas: int, seed: int, *,
                  jump_budget: int = 10**6) -> Estimate:
    """Mean first-passage time to site 1 for continuous-time walks over fresh
    environments; matches the annealed crossing-series mean in the ballistic
    regime."""
    res = _run_ensemble(model, lam, replicas, seed, horizon=math.inf,
                        target_level=1, jump_budget=jump_budget)
    ok = ~res.aborted & np.isfinite(res.values)
    return Estimate.from_samples(res.values[ok],
                                 excluded=int(replicas - ok.sum()))

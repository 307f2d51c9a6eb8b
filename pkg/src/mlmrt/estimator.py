"""Fitting the working model to long-format trial data.

The outcome is regressed on a polynomial intercept basis plus, for each
active level, a probability-centered assignment indicator times the level's
effect basis. Coefficients come from availability-weighted least squares;
uncertainty from two sandwich covariance estimators, the plug-in form and a
leverage-corrected small-sample form. Test statistics and p-values cover the
chi-square reference (using the design-based information matrix) and three
T-squared references (using the small-sample covariance estimate).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from . import distributions as dist
from . import engine as power_mod
from .design import DesignSpec
from .errors import LevelMismatch, RankDeficient, SchemaError, SingularLeverage
from .trend import EffectTrend, basis_matrix, day_of_point, intercept_matrix

CSV_HEADER = ["participant", "day", "occasion", "available", "level", "outcome"]

_RANK_TOL = 1e-10


@dataclass(frozen=True)
class TrialDataset:
    """Long-format records for one trial, tied to the design they came from.

    Each record is one (participant, day, occasion) decision point. Records
    with available = 0 are kept but never enter the estimating equations;
    decision points with no record at all are treated the same way.
    """

    design: DesignSpec
    participants: tuple  # original labels, one per participant code
    participant: np.ndarray  # int codes into participants
    day: np.ndarray
    occasion: np.ndarray
    available: np.ndarray
    level: np.ndarray
    outcome: np.ndarray

    def __post_init__(self):
        n = len(self.participant)
        for name, dtype in (
            ("participant", np.int64),
            ("day", np.int64),
            ("occasion", np.int64),
            ("available", np.int64),
            ("level", np.int64),
            ("outcome", np.float64),
        ):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=dtype))
            if arr.shape != (n,):
                raise ValueError(f"{name}: expected {n} entries, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "participants", tuple(self.participants))
        if self.day.size:
            if self.day.min() < 1 or self.day.max() > self.design.days:
                raise ValueError("day outside the design's study period")
            if self.occasion.min() < 1 or self.occasion.max() > self.design.occasions_per_day:
                raise ValueError("occasion outside the design's decision points")
            if self.level.min() < 0 or self.level.max() > self.design.n_levels:
                raise ValueError("level id outside 0..M")
            if not np.isin(self.available, (0, 1)).all():
                raise ValueError("available must be 0 or 1")
        key = (self.participant * self.design.days + (self.day - 1)) * self.design.occasions_per_day + (
            self.occasion - 1
        )
        if np.unique(key).size != key.size:
            raise ValueError("duplicate record for a (participant, day, occasion)")

    @property
    def n_participants(self) -> int:
        return len(self.participants)

    def point_index(self) -> np.ndarray:
        """Row index of each record in the design's decision-point grid."""
        return (self.day - 1) * self.design.occasions_per_day + (self.occasion - 1)


@dataclass(frozen=True)
class LevelEffect:
    """Per-level effect summary in outcome units with standard errors."""

    level: int
    initial: float
    average: float
    se_initial: float
    se_average: float


@dataclass(frozen=True)
class FitResult:
    theta: np.ndarray
    alpha_hat: np.ndarray
    beta_hat: np.ndarray
    q: int
    p: int
    mp: int
    n: int
    sigma_bar: float
    cov_theta_plugin: np.ndarray  # asymptotic scale; var(theta_hat) ~ this / N
    cov_beta_small: np.ndarray  # leverage-corrected, asymptotic scale
    statistic: float  # N * beta' cov_beta_small^-1 * beta
    q_matrix: np.ndarray  # standardized design information matrix
    residual_df: int
    level_effects: tuple[LevelEffect, ...]
    standardized_initial: tuple[float, ...]
    standardized_average: tuple[float, ...]

    def column_names(self) -> list[str]:
        return _column_names(self.q, self.p, self.mp // self.p)


@dataclass(frozen=True)
class TestResult:
    variant: str
    statistic: float
    f_value: float | None
    df1: int
    df2: int | None
    p_value: float
    alpha: float
    reject: bool


def _column_names(q: int, p: int, m_levels: int) -> list[str]:
    names = [f"intercept s^{j}" for j in range(q)]
    for m in range(1, m_levels + 1):
        names.extend(f"level {m} basis {j}" for j in range(p))
    return names


def build_design_matrix(
    dataset: TrialDataset,
    trend: EffectTrend,
    q: int,
    mask_unavailable: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-participant model matrices and outcomes on the full point grid.

    Returns (x, y, avail) with shapes (N, D*T, q + M*p), (N, D*T) and
    (N, D*T). Rows without a record count as unavailable. When
    mask_unavailable is true (the estimator's view), rows with avail = 0
    are zeroed.
    """
    design = dataset.design
    m_levels = design.n_levels
    if trend.n_levels != m_levels:
        raise ValueError(f"trend has {trend.n_levels} levels but design has {m_levels}")
    p = trend.p
    n_pts = design.n_time_points
    n_sub = dataset.n_participants
    cols = q + m_levels * p

    pt = dataset.point_index()
    probs = design.level_probs  # (DT, M)
    lv = dataset.level
    assigned = lv > 0
    if assigned.any():
        pm = probs[pt[assigned], lv[assigned] - 1]
        if (pm <= 0).any():
            bad = np.nonzero(assigned)[0][pm <= 0][0]
            raise LevelMismatch(
                f"participant {dataset.participants[dataset.participant[bad]]} assigned "
                f"level {lv[bad]} on day {dataset.day[bad]} occasion {dataset.occasion[bad]}, "
                "before that level's addition day"
            )

    b = intercept_matrix(q, design.days, design.occasions_per_day)  # (DT, q)
    zs = [basis_matrix(trend, m + 1, design.days, design.occasions_per_day) for m in range(m_levels)]

    x = np.zeros((n_sub, n_pts, cols))
    y = np.zeros((n_sub, n_pts))
    avail = np.zeros((n_sub, n_pts))
    sub = dataset.participant
    avail[sub, pt] = dataset.available
    y[sub, pt] = np.where(np.isfinite(dataset.outcome), dataset.outcome, 0.0)

    x[:, :, :q] = b[None, :, :]
    ind = np.zeros((n_sub, n_pts, m_levels))
    rec_assigned = dataset.level > 0
    ind[sub[rec_assigned], pt[rec_assigned], dataset.level[rec_assigned] - 1] = 1.0
    # Records exist only where drawn; unrecorded points keep indicator 0 but
    # are masked out below anyway.
    for m in range(m_levels):
        centered = ind[:, :, m] - probs[None, :, m]
        x[:, :, q + m * p : q + (m + 1) * p] = centered[:, :, None] * zs[m][None, :, :]
    if mask_unavailable:
        x *= avail[:, :, None]
        y *= avail
    return x, y, avail


def fit(dataset: TrialDataset, trend: EffectTrend, q: int | None = None) -> FitResult:
    """Availability-weighted least squares with sandwich covariances.

    The small-sample covariance corrects each participant's residuals by the
    inverse of (I - H_i), with H_i the participant's leverage block; the
    correction is applied through a rank-p + q update rather than a dense
    D x D inverse.
    """
    q = trend.p if q is None else q
    x, y, avail = build_design_matrix(dataset, trend, q)
    n_sub, _, cols = x.shape
    m_levels = dataset.design.n_levels
    p = trend.p
    mp = m_levels * p

    xtx = np.einsum("ntp,ntr->npr", x, x)  # per-participant X_i' X_i
    s = xtx.sum(axis=0)
    _, r, piv = sla.qr(s, pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int((diag > _RANK_TOL * diag[0]).sum()) if diag.size and diag[0] > 0 else 0
    if rank < cols:
        names = _column_names(q, p, m_levels)
        bad = [names[j] for j in piv[rank:]]
        raise RankDeficient(
            f"design matrix does not identify {len(bad)} column(s): {', '.join(bad)}",
            columns=bad,
        )

    xty = np.einsum("ntp,nt->p", x, y)
    s_inv = np.linalg.inv(s)
    theta = s_inv @ xty
    resid = (y - np.einsum("ntp,p->nt", x, theta)) * avail

    n_obs = avail.sum()
    sigma_bar = float(np.sqrt((resid**2).sum() / n_obs))
    # An interpolated fit (residuals at rounding level) has no usable
    # residual covariance; flag it instead of dividing noise by noise.
    y_scale = float((y**2).sum() / n_obs)
    interpolated = sigma_bar**2 <= 1e-24 * max(y_scale, 1e-300)

    u_plain = np.einsum("ntp,nt->np", x, resid)  # X_i' e_i
    # Plug-in sandwich on the asymptotic scale: A^-1 (sum U U' / N) A^-1.
    a_inv = n_sub * s_inv
    w_plain = np.einsum("np,nr->pr", u_plain, u_plain) / n_sub
    cov_theta = a_inv @ w_plain @ a_inv

    # Leverage-corrected scores: X_i'(I - H_i)^-1 e_i, via the Woodbury
    # identity so only (q + Mp)-dimensional solves are needed, batched over
    # participants.
    try:
        sol = np.linalg.solve(s[None, :, :] - xtx, u_plain[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        for i in range(n_sub):
            try:
                np.linalg.solve(s - xtx[i], u_plain[i])
            except np.linalg.LinAlgError:
                raise SingularLeverage(
                    f"leverage correction is singular for participant {dataset.participants[i]}",
                    participant=dataset.participants[i],
                ) from None
        raise
    u_corr = u_plain + np.einsum("npr,nr->np", xtx, sol)
    q_hat_inv = a_inv[q:, q:]
    w_small = np.einsum("np,nr->pr", u_corr[:, q:], u_corr[:, q:]) / n_sub
    cov_beta_small = q_hat_inv @ w_small @ q_hat_inv

    beta = theta[q:]
    # A perfectly interpolated fit has a zero covariance estimate; keep the
    # fit usable and let the T-squared tests refuse it instead.
    if interpolated:
        stat = float("nan")
    else:
        try:
            stat = float(n_sub * beta @ np.linalg.solve(cov_beta_small, beta))
        except np.linalg.LinAlgError:
            stat = float("nan")

    q_info = power_mod.build_Q(dataset.design, trend)

    effects = []
    std_init = []
    std_avg = []
    days = dataset.design.days
    t_per_day = dataset.design.occasions_per_day
    day_idx = day_of_point(days, t_per_day)
    for m in range(m_levels):
        z = basis_matrix(trend, m + 1, days, t_per_day)
        a_day = dataset.design.addition_days[m]
        anchor = z[(day_idx == a_day).argmax()]
        active_mean = z[day_idx >= a_day].mean(axis=0)
        bm = beta[m * p : (m + 1) * p]
        cov_m = cov_beta_small[m * p : (m + 1) * p, m * p : (m + 1) * p] / n_sub
        init_v = float(anchor @ bm)
        avg_v = float(active_mean @ bm)
        effects.append(
            LevelEffect(
                level=m + 1,
                initial=init_v,
                average=avg_v,
                se_initial=float(np.sqrt(anchor @ cov_m @ anchor)),
                se_average=float(np.sqrt(active_mean @ cov_m @ active_mean)),
            )
        )
        std_init.append(init_v / sigma_bar if sigma_bar > 0 else float("nan"))
        std_avg.append(avg_v / sigma_bar if sigma_bar > 0 else float("nan"))

    return FitResult(
        theta=theta,
        alpha_hat=theta[:q],
        beta_hat=beta,
        q=q,
        p=p,
        mp=mp,
        n=n_sub,
        sigma_bar=sigma_bar,
        cov_theta_plugin=cov_theta,
        cov_beta_small=cov_beta_small,
        statistic=stat,
        q_matrix=q_info.matrix,
        residual_df=int(n_obs) - cols,
        level_effects=tuple(effects),
        standardized_initial=tuple(std_init),
        standardized_average=tuple(std_avg),
    )


def test(fit_result: FitResult, variant: str, alpha: float = 0.05) -> TestResult:
    """Test of no proximal effect for any level, under the chosen reference.

    The chi-square variant plugs the design-based information matrix into
    the statistic (its reference holds for large N); the T-squared variants
    use the small-sample covariance estimate.
    """
    mp = fit_result.mp
    n = fit_result.n
    if variant == dist.VARIANT_CHI:
        if fit_result.sigma_bar <= 0:
            raise SingularLeverage(
                "no residual variation; the standardized statistic is undefined"
            )
        delta_hat = fit_result.beta_hat / fit_result.sigma_bar
        stat = float(n * delta_hat @ fit_result.q_matrix @ delta_hat)
        p_value = 1.0 - dist.chisq_cdf(stat, mp)
        return TestResult(
            variant=variant,
            statistic=stat,
            f_value=None,
            df1=mp,
            df2=None,
            p_value=p_value,
            alpha=alpha,
            reject=p_value < alpha,
        )
    if not np.isfinite(fit_result.statistic):
        raise SingularLeverage(
            "small-sample covariance is singular; more participants than effect "
            "coefficients are required"
        )
    f_value, df1, df2 = dist.hotelling_to_f(fit_result.statistic, mp, n, fit_result.q, variant)
    p_value = 1.0 - dist.f_cdf(f_value, df1, df2)
    return TestResult(
        variant=variant,
        statistic=fit_result.statistic,
        f_value=f_value,
        df1=df1,
        df2=df2,
        p_value=p_value,
        alpha=alpha,
        reject=p_value < alpha,
    )


def read_dataset_csv(path, design: DesignSpec) -> TrialDataset:
    """Load a long-format CSV with header participant,day,occasion,available,level,outcome."""
    participants: dict[str, int] = {}
    rows: list[tuple[int, int, int, int, int, float]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file, expected header " + ",".join(CSV_HEADER), line=1) from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise SchemaError(
                f"bad header {','.join(header)!r}, expected {','.join(CSV_HEADER)}", line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(CSV_HEADER):
                raise SchemaError(f"expected {len(CSV_HEADER)} fields, got {len(row)}", line=lineno)
            label = row[0].strip()
            code = participants.setdefault(label, len(participants))
            try:
                day = int(row[1])
                occ = int(row[2])
                avail = int(row[3])
                level = int(row[4])
            except ValueError as exc:
                raise SchemaError(str(exc), line=lineno) from None
            out_field = row[5].strip()
            if out_field == "" and avail == 0:
                outcome = np.nan
            else:
                try:
                    outcome = float(out_field)
                except ValueError:
                    raise SchemaError(f"bad outcome {row[5]!r}", line=lineno) from None
            rows.append((code, day, occ, avail, level, outcome))
    if not rows:
        raise SchemaError("no data rows", line=2)
    arr = np.array(rows, dtype=float)
    try:
        return TrialDataset(
            design=design,
            participants=tuple(participants),
            participant=arr[:, 0].astype(int),
            day=arr[:, 1].astype(int),
            occasion=arr[:, 2].astype(int),
            available=arr[:, 3].astype(int),
            level=arr[:, 4].astype(int),
            outcome=arr[:, 5],
        )
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def write_dataset_csv(path, dataset: TrialDataset) -> None:
    """Write a dataset in the same long format read_dataset_csv accepts."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for i in range(len(dataset.participant)):
            out = dataset.outcome[i]
            writer.writerow(
                [
                    dataset.participants[dataset.participant[i]],
                    dataset.day[i],
                    dataset.occasion[i],
                    dataset.available[i],
                    dataset.level[i],
                    "" if not np.isfinite(out) else repr(float(out)),
                ]
            )


def fit_report(fit_result: FitResult, tests: list[TestResult]) -> dict:
    """JSON-ready summary of a fit and its tests."""
    return {
        "n_participants": fit_result.n,
        "q": fit_result.q,
        "p": fit_result.p,
        "coefficients": {
            name: val
            for name, val in zip(fit_result.column_names(), fit_result.theta.tolist())
        },
        "standard_errors": {
            name: float(np.sqrt(fit_result.cov_theta_plugin[j, j] / fit_result.n))
            for j, name in enumerate(fit_result.column_names())
        },
        "sigma_bar": fit_result.sigma_bar,
        "statistic": fit_result.statistic,
        "level_effects": [
            {
                "level": e.level,
                "initial": e.initial,
                "average": e.average,
                "se_initial": e.se_initial,
                "se_average": e.se_average,
                "standardized_initial": fit_result.standardized_initial[e.level - 1],
                "standardized_average": fit_result.standardized_average[e.level - 1],
            }
            for e in fit_result.level_effects
        ],
        "tests": [
            {
                "variant": t.variant,
                "statistic": t.statistic,
                "f_value": t.f_value,
                "df1": t.df1,
                "df2": t.df2,
                "p_value": t.p_value,
                "alpha": t.alpha,
                "reject": t.reject,
            }
            for t in tests
        ],
    }

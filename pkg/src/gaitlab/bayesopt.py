"""Gaussian-process optimization of feedback gains across a sim/real plant pair.

A single GP models both simulated and real evaluations through a composite
kernel: a rational-quadratic term over the gain vector plus a second
rational-quadratic error term that is only active between two real-world
evaluations.  Query points are proposed by an information-gain acquisition
(Monte-Carlo estimate of the mutual information between an observation and
the location of the real-plant minimizer over a seeded candidate grid) with
the selection biased toward simulation queries to spare the real budget.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cpg import CpgParams
from .errors import (
    BudgetExhaustedError,
    InvalidInputError,
    NumericalConditioningError,
)
from .feedback import FeedbackGains, FilterParams
from .plant import (
    Disturbance,
    PlantParams,
    RunTrace,
    run_sequence,
    standard_test_sequence,
)

SIM = "sim"
REAL = "real"


@dataclass
class AugmentedPoint:
    """A gain vector tagged with where it was (or will be) evaluated."""

    x: np.ndarray
    delta: str

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.delta not in (SIM, REAL):
            raise InvalidInputError(f"delta must be '{SIM}' or '{REAL}'")


@dataclass
class RqKernelParams:
    variance: float = 1.0
    length_scale: float = 0.3
    shape: float = 2.0

    def __post_init__(self):
        if self.variance <= 0 or self.length_scale <= 0 or self.shape <= 0:
            raise InvalidInputError("RQ kernel parameters must be positive")


@dataclass
class CompositeKernel:
    """k(a_i, a_j) = k_sim(x_i, x_j) + [both real] * k_eps(x_i, x_j)."""

    k_sim: RqKernelParams = field(default_factory=RqKernelParams)
    k_eps: RqKernelParams = field(default_factory=lambda: RqKernelParams(variance=0.25))


@dataclass
class EvalRecord:
    point: AugmentedPoint
    cost: tuple[float, float]  # (J_alpha, J_beta)

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.cost):
            raise InvalidInputError("costs must be finite")


@dataclass
class OptBudget:
    max_real: int = 15
    max_total: int = 40
    sim_average_n: int = 4
    sim_bias_weight: float = 1.15

    def __post_init__(self):
        if self.max_real > self.max_total:
            raise InvalidInputError("max_real cannot exceed max_total")
        if self.sim_average_n < 1:
            raise InvalidInputError("sim_average_n must be >= 1")
        if self.sim_bias_weight < 1:
            raise InvalidInputError("sim_bias_weight must be >= 1")


def rq_kernel(x1, x2, p: RqKernelParams) -> float:
    """Rational-quadratic covariance between two gain vectors."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape:
        raise InvalidInputError(f"dimension mismatch: {x1.shape} vs {x2.shape}")
    r2 = float(np.sum((x1 - x2) ** 2))
    return p.variance * (1.0 + r2 / (2.0 * p.shape * p.length_scale**2)) ** (-p.shape)


def _rq_matrix(xa: np.ndarray, xb: np.ndarray, p: RqKernelParams) -> np.ndarray:
    r2 = np.sum((xa[:, None, :] - xb[None, :, :]) ** 2, axis=2)
    return p.variance * (1.0 + r2 / (2.0 * p.shape * p.length_scale**2)) ** (-p.shape)


def composite_kernel(a1: AugmentedPoint, a2: AugmentedPoint, k: CompositeKernel) -> float:
    """Composite covariance; the error term gates on both points being real."""
    val = rq_kernel(a1.x, a2.x, k.k_sim)
    if a1.delta == REAL and a2.delta == REAL:
        val += rq_kernel(a1.x, a2.x, k.k_eps)
    return val


def composite_gram(
    xa: np.ndarray,
    real_a: np.ndarray,
    xb: np.ndarray,
    real_b: np.ndarray,
    k: CompositeKernel,
) -> np.ndarray:
    """Vectorized composite kernel matrix between two augmented point sets."""
    gram = _rq_matrix(xa, xb, k.k_sim)
    gate = np.outer(real_a.astype(float), real_b.astype(float))
    if gate.any():
        gram = gram + gate * _rq_matrix(xa, xb, k.k_eps)
    return gram


_JITTER_LADDER = (1e-4, 1e-3, 1e-2)


def _chol_with_escalation(gram: np.ndarray, noise: float) -> np.ndarray:
    """Cholesky of gram + diag, escalating the diagonal x10 up to 1e-2."""
    diags = [noise] + [j for j in _JITTER_LADDER if j > noise]
    for d in diags:
        try:
            return np.linalg.cholesky(gram + d * np.eye(gram.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise NumericalConditioningError(
        f"kernel matrix not positive definite even with diagonal {_JITTER_LADDER[-1]}"
    )


class _GpFit:
    """Cholesky factorization of the training covariance plus predict helpers."""

    def __init__(self, x, real, y, kernel: CompositeKernel, noise: float):
        self.x = x
        self.real = real
        self.kernel = kernel
        self.chol = _chol_with_escalation(composite_gram(x, real, x, real, kernel), noise)
        self.alpha = np.linalg.solve(
            self.chol.T, np.linalg.solve(self.chol, np.asarray(y, dtype=float))
        )

    def predict(self, xq, real_q, full_cov=False):
        cross = composite_gram(xq, real_q, self.x, self.real, self.kernel)
        mean = cross @ self.alpha
        v = np.linalg.solve(self.chol, cross.T)
        prior = composite_gram(xq, real_q, xq, real_q, self.kernel)
        if full_cov:
            cov = prior - v.T @ v
            return mean, cov
        var = np.maximum(np.diag(prior) - np.sum(v * v, axis=0), 0.0)
        return mean, var


def _records_arrays(records, plane):
    x = np.array([r.point.x for r in records], dtype=float)
    real = np.array([r.point.delta == REAL for r in records])
    idx = 0 if plane == "alpha" else 1
    y = np.array([r.cost[idx] for r in records], dtype=float)
    return x, real, y


def gp_posterior(
    records: list[EvalRecord],
    kernel: CompositeKernel,
    noise: float,
    query: AugmentedPoint,
    plane: str = "alpha",
) -> tuple[float, float]:
    """Posterior mean and variance of the cost at one augmented query point."""
    if not records:
        raise InvalidInputError("need at least one record")
    if noise < 0:
        raise InvalidInputError("noise variance must be >= 0")
    x, real, y = _records_arrays(records, plane)
    fit = _GpFit(x, real, y, kernel, noise)
    mean, var = fit.predict(query.x[None, :], np.array([query.delta == REAL]))
    return float(mean[0]), float(var[0])


def evaluate_cost(
    trace: RunTrace,
    regularization: float,
    x,
    fall_penalty: float = 50.0,
) -> tuple[float, float]:
    """Per-plane cost: integrated |e_P| plus the gain regularizer.

    A fallen trace contributes its partial integral plus the fall penalty.
    """
    if regularization < 0:
        raise InvalidInputError("regularization must be >= 0")
    x = np.asarray(x, dtype=float)
    nu = regularization * float(np.dot(x, x))
    j_alpha = float(np.trapezoid(np.abs(trace.e_p_alpha), dx=trace.dt)) + nu
    j_beta = float(np.trapezoid(np.abs(trace.e_p_beta), dx=trace.dt)) + nu
    if trace.fall:
        j_alpha += fall_penalty
        j_beta += fall_penalty
    return j_alpha, j_beta


def default_disturbance_schedule() -> list[Disturbance]:
    """Fixed pushes injected into every cost-evaluation run.

    They keep the gain landscape meaningful: without them the deadbanded
    deviations barely leave zero and the regularizer would dominate.
    """
    return [
        Disturbance(5.0, 8.0, "back"),
        Disturbance(9.0, 8.0, "front"),
        Disturbance(14.0, 7.0, "left"),
    ]


@dataclass
class GainProblem:
    """The gain-tuning task: which gains to tune, on which plant pair."""

    sim_plant: PlantParams
    real_plant: PlantParams
    base_gains: FeedbackGains = field(default_factory=FeedbackGains)
    cpg: CpgParams = field(default_factory=CpgParams)
    filter_params: FilterParams = field(default_factory=FilterParams)
    param_names: tuple[str, ...] = ("arm_angle_y.kp", "arm_angle_y.kd")
    bounds: np.ndarray = field(default_factory=lambda: np.array([[0.0, 6.0], [0.0, 4.0]]))
    sequence: list = field(default_factory=standard_test_sequence)
    disturbances: list = field(default_factory=default_disturbance_schedule)
    regularization: float = 0.02
    fall_penalty: float = 50.0
    plane: str = "alpha"

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.shape != (len(self.param_names), 2):
            raise InvalidInputError("bounds must be (n_params, 2)")
        if np.any(self.bounds[:, 1] <= self.bounds[:, 0]):
            raise InvalidInputError("each bound must satisfy lo < hi")
        if self.plane not in ("alpha", "beta"):
            raise InvalidInputError("plane must be 'alpha' or 'beta'")

    def default_x(self) -> np.ndarray:
        out = []
        for name in self.param_names:
            obj = self.base_gains
            for part in name.split("."):
                obj = getattr(obj, part)
            out.append(float(obj))
        return np.clip(np.array(out), self.bounds[:, 0], self.bounds[:, 1])

    def gains_with(self, x) -> FeedbackGains:
        gains = copy.deepcopy(self.base_gains)
        for name, value in zip(self.param_names, np.asarray(x, dtype=float)):
            obj = gains
            parts = name.split(".")
            for part in parts[:-1]:
                obj = getattr(obj, part)
            setattr(obj, parts[-1], float(value))
        return gains

    def _run(self, x, plant: PlantParams, run_seed: int) -> RunTrace:
        return run_sequence(
            self.gains_with(x),
            self.cpg,
            self.sequence,
            replace(plant, seed=int(run_seed)),
            disturbances=self.disturbances,
            filter_params=self.filter_params,
        )

    def evaluate(self, x, delta: str, run_seed: int) -> tuple[float, float]:
        plant = self.real_plant if delta == REAL else self.sim_plant
        trace = self._run(x, plant, run_seed)
        return evaluate_cost(trace, self.regularization, x, self.fall_penalty)

    def cost_index(self) -> int:
        return 0 if self.plane == "alpha" else 1


def _derived_seed(seed: int, iteration: int, k: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(iteration), int(k)]).generate_state(1)[0])


def _eval_sim_averaged(problem: GainProblem, x, n: int, seed: int, iteration: int):
    costs = np.array(
        [problem.evaluate(x, SIM, _derived_seed(seed, iteration, k)) for k in range(n)]
    )
    return tuple(costs.mean(axis=0))


def _mutual_information(samples: np.ndarray, argmin_idx: np.ndarray, noise: float) -> np.ndarray:
    """MI between each column's observable and the minimizer index.

    ``samples`` is (n_samples, n_columns); observation noise enters both the
    marginal and the per-group conditional Gaussian entropies.
    """
    var_marg = samples.var(axis=0) + noise
    h_marg = 0.5 * np.log(var_marg)
    h_cond = np.zeros(samples.shape[1])
    n = samples.shape[0]
    for g in np.unique(argmin_idx):
        mask = argmin_idx == g
        w = mask.sum() / n
        var_g = samples[mask].var(axis=0) + noise
        h_cond += w * 0.5 * np.log(var_g)
    return h_marg - h_cond


def select_next(
    records: list[EvalRecord],
    kernel: CompositeKernel,
    bounds: np.ndarray,
    budget: OptBudget,
    seed: int = 0,
    noise: float = 1e-4,
    plane: str = "alpha",
    n_candidates: int = 128,
    n_samples: int = 192,
) -> AugmentedPoint:
    """Propose the next augmented query point.

    Draws a seeded uniform candidate grid, samples the joint GP posterior of
    the real-plant cost at all candidates (both as sim and as real queries),
    and scores each potential observation by the estimated information gain
    about the minimizer.  A real query is chosen only while real budget
    remains and its best score exceeds sim_bias_weight times the best sim
    score.
    """
    if not records:
        raise InvalidInputError("need at least one record to select from")
    if len(records) >= budget.max_total:
        raise BudgetExhaustedError(f"total budget {budget.max_total} exhausted")
    real_used = sum(1 for r in records if r.point.delta == REAL)

    bounds = np.asarray(bounds, dtype=float)
    d = bounds.shape[0]
    lo, span = bounds[:, 0], bounds[:, 1] - bounds[:, 0]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), len(records)]))
    cand = rng.random((n_candidates, d))  # unit box; kernel scales refer to it

    x_tr, real_tr, y_tr = _records_arrays(records, plane)
    x_tr = (x_tr - lo) / span

    # keep the incumbents in the candidate set so real queries can exploit
    idx = 0 if plane == "alpha" else 1
    incumbents = []
    for want_real in (True, False):
        pool = [r for r in records if (r.point.delta == REAL) == want_real]
        if pool:
            best = min(pool, key=lambda r: r.cost[idx])
            incumbents.append((best.point.x - lo) / span)
    if incumbents:
        cand = np.vstack([cand, incumbents])
    n_candidates = cand.shape[0]
    y_mean = y_tr.mean()
    y_std = y_tr.std()
    if y_std < 1e-12:
        y_std = 1.0
    fit = _GpFit(x_tr, real_tr, (y_tr - y_mean) / y_std, kernel, noise)

    # joint posterior over every candidate observed as real and as sim
    xq = np.vstack([cand, cand])
    real_q = np.concatenate([np.ones(n_candidates, bool), np.zeros(n_candidates, bool)])
    mean, cov = fit.predict(xq, real_q, full_cov=True)
    chol = _chol_with_escalation(cov, 1e-10)
    z = mean[None, :] + rng.standard_normal((n_samples, 2 * n_candidates)) @ chol.T

    argmin_idx = np.argmin(z[:, :n_candidates], axis=1)
    mi = _mutual_information(z, argmin_idx, noise)
    acq_real = mi[:n_candidates]
    acq_sim = mi[n_candidates:]

    best_real = int(np.argmax(acq_real))
    best_sim = int(np.argmax(acq_sim))
    use_real = (
        real_used < budget.max_real
        and math.isfinite(budget.sim_bias_weight)
        and acq_real[best_real] > budget.sim_bias_weight * acq_sim[best_sim]
    )
    if use_real:
        return AugmentedPoint(lo + cand[best_real] * span, REAL)
    return AugmentedPoint(lo + cand[best_sim] * span, SIM)


@dataclass
class OptResult:
    best_x: np.ndarray
    best_cost: float
    best_delta: str
    history: list[EvalRecord]

    @property
    def real_count(self) -> int:
        return sum(1 for r in self.history if r.point.delta == REAL)

    @property
    def sim_count(self) -> int:
        return sum(1 for r in self.history if r.point.delta == SIM)


def _best_record(records: list[EvalRecord], cost_idx: int) -> EvalRecord:
    real = [r for r in records if r.point.delta == REAL]
    pool = real if real else records
    return min(pool, key=lambda r: r.cost[cost_idx])


def optimize(
    problem: GainProblem,
    budget: OptBudget | None = None,
    seed: int = 0,
    kernel: CompositeKernel | None = None,
    noise: float = 1e-4,
) -> OptResult:
    """Run the budgeted sim/real optimization loop.

    The default gain vector is evaluated first (in simulation, then on the
    real plant if real budget exists), after which points proposed by
    select_next are evaluated until the total budget is spent.  Sim queries
    average sim_average_n seeded runs.  The result is the best
    real-evaluated point when any real evaluation exists, else the best sim.
    """
    budget = budget or OptBudget()
    kernel = kernel or CompositeKernel()
    cost_idx = problem.cost_index()
    records: list[EvalRecord] = []

    x0 = problem.default_x()
    records.append(
        EvalRecord(
            AugmentedPoint(x0, SIM),
            _eval_sim_averaged(problem, x0, budget.sim_average_n, seed, 0),
        )
    )
    if budget.max_real > 0 and len(records) < budget.max_total:
        records.append(
            EvalRecord(
                AugmentedPoint(x0, REAL),
                problem.evaluate(x0, REAL, _derived_seed(seed, 1, 0)),
            )
        )

    while len(records) < budget.max_total:
        iteration = len(records)
        point = select_next(
            records, kernel, problem.bounds, budget, seed=seed, noise=noise,
            plane=problem.plane,
        )
        if point.delta == REAL:
            cost = problem.evaluate(point.x, REAL, _derived_seed(seed, iteration, 0))
        else:
            cost = _eval_sim_averaged(
                problem, point.x, budget.sim_average_n, seed, iteration
            )
        records.append(EvalRecord(point, cost))

    best = _best_record(records, cost_idx)
    return OptResult(best.point.x.copy(), best.cost[cost_idx], best.point.delta, records)


def random_search(problem: GainProblem, budget: OptBudget | None = None, seed: int = 0) -> OptResult:
    """Baseline with the same real budget: uniform draws evaluated on the real plant."""
    budget = budget or OptBudget()
    cost_idx = problem.cost_index()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 424242]))
    records: list[EvalRecord] = []
    n = max(budget.max_real, 1)
    lo, hi = problem.bounds[:, 0], problem.bounds[:, 1]
    for iteration in range(n):
        x = lo + rng.random(problem.bounds.shape[0]) * (hi - lo)
        cost = problem.evaluate(x, REAL, _derived_seed(seed, iteration, 0))
        records.append(EvalRecord(AugmentedPoint(x, REAL), cost))
    best = _best_record(records, cost_idx)
    return OptResult(best.point.x.copy(), best.cost[cost_idx], best.point.delta, records)


def history_to_csv(result: OptResult, param_names, path) -> None:
    """Write the evaluation history in the documented CSV schema."""
    header = "iter,delta," + ",".join(param_names) + ",J_alpha,J_beta"
    lines = [header]
    for i, rec in enumerate(result.history):
        xs = ",".join("%.12g" % v for v in rec.point.x)
        lines.append(
            "%d,%s,%s,%.12g,%.12g" % (i, rec.point.delta, xs, rec.cost[0], rec.cost[1])
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

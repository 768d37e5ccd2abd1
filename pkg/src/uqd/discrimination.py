"""Single- and multi-query discrimination between exact-weight hypotheses.

Monte Carlo runs are split into fixed-size blocks of trials. Block ``b`` draws
from ``numpy.random.default_rng([seed, b])``, so results depend only on the
seed and trial count, never on how many worker processes handle the blocks.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .boolean_functions import BiasHypothesis, sample_uniform, sample_uniform_batch
from .ensemble import helstrom_success
from .statevector import address_state, address_state_batch, hadamard_transform, walsh_hadamard

BLOCK_SIZE = 4096
CHERNOFF_DELTA = 1e-9
CHERNOFF_XTOL = 1e-10
LOG_TIE_MARGIN = 1e-12


class DegenerateHypothesesWarning(UserWarning):
    """The two hypotheses have equal mu^2 and cannot be told apart."""


class Outcome(enum.Enum):
    PLUS = "plus"
    PERP = "perp"


@dataclass(frozen=True)
class CountStatistic:
    t: int
    k: int

    def __post_init__(self):
        if not 0 <= self.k <= self.t:
            raise ValueError(f"need 0 <= k <= t, got k={self.k}, t={self.t}")


@dataclass(frozen=True)
class ChernoffResult:
    s_star: float
    xi: float
    boundary_case: bool


@dataclass(frozen=True)
class DiscriminationReport:
    theoretical_success: float
    empirical_success: float
    trials: int
    confidence_half_width: float
    seed: int

    @property
    def within_ci(self) -> bool:
        return abs(self.empirical_success - self.theoretical_success) <= self.confidence_half_width


@dataclass(frozen=True)
class MultiQueryReport(DiscriminationReport):
    t: int = 1
    k_star: int | None = None
    exact_error: float = 0.5
    chernoff_bound: float = 0.5
    xi: float = 0.0
    degenerate: bool = False

    @property
    def empirical_error(self) -> float:
        return 1.0 - self.empirical_success

    @property
    def bound_holds(self) -> bool:
        # exact and bound coincide for boundary pairs, so allow rounding
        return self.exact_error <= self.chernoff_bound * (1 + 1e-12) + 1e-300


def _check_pair(h0: BiasHypothesis, h1: BiasHypothesis) -> None:
    if h0.N != h1.N:
        raise ValueError(f"hypotheses must share N, got {h0.N} and {h1.N}")


def three_sigma(p: float, trials: int) -> float:
    """3-sigma half-width of a binomial proportion with success probability p."""
    return 3.0 * math.sqrt(max(p * (1.0 - p), 0.0) / trials)


# --- sampling -----------------------------------------------------------------


def _sample_outcomes(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling of basis outcomes; ``probs`` is (B, N), ``u`` is (B, T)."""
    cum = np.cumsum(probs, axis=-1)
    cum /= cum[..., -1:]
    idx = (u[..., :, None] >= cum[..., None, :]).sum(axis=-1)
    return np.minimum(idx, probs.shape[-1] - 1)


def single_query_trial(true_h: BiasHypothesis, rng: np.random.Generator) -> Outcome:
    """One query plus Hadamard-basis measurement against a freshly sampled memory."""
    f = sample_uniform(true_h.N, true_h.m, rng)
    amps = hadamard_transform(address_state(f)).amplitudes
    probs = np.abs(amps) ** 2
    outcome = _sample_outcomes(probs[None, :], np.array([[rng.random()]]))[0, 0]
    return Outcome.PLUS if outcome == 0 else Outcome.PERP


def _plus_counts(tables: np.ndarray, t: int, rng: np.random.Generator, chunk: int = 256) -> np.ndarray:
    """Number of 0^n outcomes in t fresh measurements of each row's address state."""
    amps = walsh_hadamard(address_state_batch(tables))
    probs = amps * amps
    counts = np.zeros(tables.shape[0], dtype=np.int64)
    for start in range(0, t, chunk):
        width = min(chunk, t - start)
        u = rng.random((tables.shape[0], width))
        counts += (_sample_outcomes(probs, u) == 0).sum(axis=1)
    return counts


def _block_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _run_blocks(fn: Callable, tasks: Sequence[tuple], workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng([seed, block])


def _counts_block(task) -> np.ndarray:
    N, m, t, seed, block, size = task
    rng = _block_rng(seed, block)
    tables = sample_uniform_batch(N, m, size, rng)
    return np.bincount(_plus_counts(tables, t, rng), minlength=t + 1)


def multi_query_counts(h: BiasHypothesis, t: int, trials: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """Histogram of the '+' count k over trials; each trial fixes one f for all t queries."""
    if t < 1:
        raise ValueError(f"query count must be >= 1, got {t}")
    tasks = [(h.N, h.m, t, seed, b, size) for b, size in enumerate(_block_sizes(trials))]
    return np.sum(_run_blocks(_counts_block, tasks, workers), axis=0)


# --- decisions ----------------------------------------------------------------


def decide_single_copy(outcome: Outcome, h0: BiasHypothesis, h1: BiasHypothesis) -> int:
    """Helstrom decision: '+' goes to the larger-mu^2 hypothesis, 'perp' to the other.

    Equal mu^2 triggers a :class:`DegenerateHypothesesWarning` and returns 0.
    """
    _check_pair(h0, h1)
    if h0.mu_sq_exact == h1.mu_sq_exact:
        warnings.warn("hypotheses have equal mu^2; deciding 0 at chance level", DegenerateHypothesesWarning, stacklevel=2)
        return 0
    larger = 0 if h0.mu_sq_exact > h1.mu_sq_exact else 1
    return larger if outcome is Outcome.PLUS else 1 - larger


@dataclass(frozen=True)
class LRTRule:
    """Threshold rule on the '+' count: pick ``larger`` iff k >= k_star."""

    t: int
    larger: int
    k_star: int | None
    degenerate: bool = False

    def decide(self, k):
        if self.degenerate:
            return np.zeros_like(k) if isinstance(k, np.ndarray) else 0
        big = np.asarray(k) >= self.k_star
        out = np.where(big, self.larger, 1 - self.larger)
        return out if isinstance(k, np.ndarray) else int(out)


def _loglik(p: float, k: int, t: int) -> float:
    out = 0.0
    for base, e in ((p, k), (1.0 - p, t - k)):
        if e == 0:
            continue
        if base <= 0.0:
            return -math.inf
        out += e * math.log(base)
    return out


def _ratio_at_least_one(a, b, k: int, t: int) -> bool:
    """Is Bin(t, a)(k) >= Bin(t, b)(k)?  Exact for Fractions, log-domain for floats."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a**k * (1 - a) ** (t - k) >= b**k * (1 - b) ** (t - k)
    la, lb = _loglik(a, k, t), _loglik(b, k, t)
    if la == -math.inf:
        return lb == -math.inf
    if lb == -math.inf:
        return True
    return la - lb >= -LOG_TIE_MARGIN * max(1.0, abs(la), abs(lb))


def threshold_rule(mu_sq0, mu_sq1, t: int) -> LRTRule:
    """Equal-prior likelihood-ratio test between Bin(t, mu_sq0) and Bin(t, mu_sq1).

    Pass :class:`fractions.Fraction` values for exact comparisons; floats use a
    log-domain comparison with a relative tie margin.
    """
    if t < 0:
        raise ValueError(f"query count must be >= 0, got {t}")
    if mu_sq0 == mu_sq1:
        return LRTRule(t=t, larger=0, k_star=None, degenerate=True)
    larger = 0 if mu_sq0 > mu_sq1 else 1
    a, b = (mu_sq0, mu_sq1) if larger == 0 else (mu_sq1, mu_sq0)
    # ratio is nondecreasing in k and >= 1 at k = t
    lo, hi = 0, t
    while lo < hi:
        mid = (lo + hi) // 2
        if _ratio_at_least_one(a, b, mid, t):
            hi = mid
        else:
            lo = mid + 1
    return LRTRule(t=t, larger=larger, k_star=lo)


def lrt_threshold(h0: BiasHypothesis, h1: BiasHypothesis, t: int) -> LRTRule:
    """Exact threshold rule for the '+' count after t queries.

    Ties (likelihood ratio exactly 1) go to the larger-mu^2 hypothesis. Equal
    mu^2 gives a degenerate "always decide 0" rule and a warning.
    """
    _check_pair(h0, h1)
    rule = threshold_rule(h0.mu_sq_exact, h1.mu_sq_exact, t)
    if rule.degenerate:
        warnings.warn("hypotheses have equal mu^2; the test is chance level", DegenerateHypothesesWarning, stacklevel=2)
    return rule


def bayes_error_for_rule(rule: LRTRule, mu_sq0: float, mu_sq1: float) -> float:
    """Equal-prior error of ``rule`` when k ~ Bin(t, mu_sq_i) under hypothesis i."""
    if rule.degenerate:
        return 0.5
    t = rule.t
    ks = np.arange(t + 1)
    decisions = rule.decide(ks)
    pmf0 = stats.binom.pmf(ks, t, float(mu_sq0))
    pmf1 = stats.binom.pmf(ks, t, float(mu_sq1))
    wrong0 = math.fsum(pmf0[decisions == 1])
    wrong1 = math.fsum(pmf1[decisions == 0])
    return 0.5 * (wrong0 + wrong1)


def exact_bayes_error(h0: BiasHypothesis, h1: BiasHypothesis, t: int) -> float:
    """Exact equal-prior error of the count LRT after t queries."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateHypothesesWarning)
        rule = lrt_threshold(h0, h1, t)
    return bayes_error_for_rule(rule, h0.mu_sq, h1.mu_sq)


def bayes_error_mu(mu_sq0: float, mu_sq1: float, t: int) -> float:
    """:func:`exact_bayes_error` for arbitrary (float) mu^2 values."""
    return bayes_error_for_rule(threshold_rule(mu_sq0, mu_sq1, t), mu_sq0, mu_sq1)


# --- Chernoff information -----------------------------------------------------


def _chernoff_terms(a: float, b: float) -> list[tuple[float, float]]:
    return [(a, b), (1.0 - a, 1.0 - b)]


def _objective(s: float, terms) -> float:
    return sum(c**s * d ** (1.0 - s) for c, d in terms if c > 0 and d > 0)


def _neg_log(value: float) -> float:
    return math.inf if value <= 0.0 else max(-math.log(value), 0.0)


def chernoff_information(mu_sq0: float, mu_sq1: float) -> ChernoffResult:
    """Chernoff information (nats) between Bernoulli(mu_sq0) and Bernoulli(mu_sq1).

    Minimizes ``mu_sq0**s * mu_sq1**(1-s) + (1-mu_sq0)**s * (1-mu_sq1)**(1-s)``
    over s. When a parameter is 0 or 1 the objective on the open interval
    reduces to a single exponential in s (or vanishes), so the infimum is one
    of the endpoint limits and is returned in closed form with
    ``boundary_case=True``. Perfectly separable pairs give ``xi = inf``.

    Raises:
        ValueError: if a parameter lies outside [0, 1].
    """
    a, b = float(mu_sq0), float(mu_sq1)
    for v in (a, b):
        if not 0.0 <= v <= 1.0 or math.isnan(v):
            raise ValueError(f"mu^2 values must lie in [0, 1], got {mu_sq0}, {mu_sq1}")
    boundary = a in (0.0, 1.0) or b in (0.0, 1.0)
    if a == b:
        return ChernoffResult(s_star=0.5, xi=0.0, boundary_case=boundary)
    terms = _chernoff_terms(a, b)
    if boundary:
        # limits of the objective as s -> 0+ and s -> 1-
        at_zero = sum(d for c, d in terms if c > 0)
        at_one = sum(c for c, d in terms if d > 0)
        if at_zero <= at_one:
            return ChernoffResult(s_star=0.0, xi=_neg_log(at_zero), boundary_case=True)
        return ChernoffResult(s_star=1.0, xi=_neg_log(at_one), boundary_case=True)
    res = optimize.minimize_scalar(
        _objective,
        bounds=(CHERNOFF_DELTA, 1.0 - CHERNOFF_DELTA),
        args=(terms,),
        method="bounded",
        options={"xatol": CHERNOFF_XTOL},
    )
    return ChernoffResult(s_star=float(res.x), xi=_neg_log(float(res.fun)), boundary_case=False)


def chernoff_bound(t: int, xi: float) -> float:
    """Upper bound (1/2) exp(-t xi) on the count-LRT error."""
    if t < 0 or xi < 0:
        raise ValueError(f"need t >= 0 and xi >= 0, got t={t}, xi={xi}")
    if t == 0:
        return 0.5
    if math.isinf(xi):
        return 0.0
    return 0.5 * math.exp(-t * xi)


def queries_needed(epsilon: float, delta: float) -> int:
    """Smallest t with (1/2)(1 - 4 eps^2)**t <= delta, for p0 = 1/2 vs p1 = 1/2 + eps.

    Raises:
        ValueError: unless 0 < epsilon <= 1/2 and 0 < delta < 1/2.
    """
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    mu_sq1 = 4.0 * epsilon * epsilon
    if mu_sq1 >= 1.0:
        return 1
    rate = -math.log1p(-mu_sq1)
    t = max(1, math.ceil(math.log(1.0 / (2.0 * delta)) / rate))

    def ok(n: int) -> bool:
        return 0.5 * math.exp(-n * rate) <= delta

    while not ok(t):
        t += 1
    while t > 1 and ok(t - 1):
        t -= 1
    return t


# --- experiments --------------------------------------------------------------


def _experiment_block(task) -> int:
    """Correct decisions in one block of trials."""
    N, m0, m1, t, rule, seed, block, size = task
    rng = _block_rng(seed, block)
    truth = rng.integers(0, 2, size=size)
    correct = 0
    for idx, m in ((0, m0), (1, m1)):
        count = int(np.count_nonzero(truth == idx))
        if count == 0:
            continue
        tables = sample_uniform_batch(N, m, count, rng)
        k = _plus_counts(tables, t, rng)
        correct += int(np.count_nonzero(rule.decide(k) == idx))
    return correct


def _single_copy_rule(h0: BiasHypothesis, h1: BiasHypothesis) -> LRTRule:
    # one '+' outcome is k = 1; the Helstrom rule is the k >= 1 threshold
    if h0.mu_sq_exact == h1.mu_sq_exact:
        return LRTRule(t=1, larger=0, k_star=None, degenerate=True)
    larger = 0 if h0.mu_sq_exact > h1.mu_sq_exact else 1
    return LRTRule(t=1, larger=larger, k_star=1)


def _run_experiment(h0, h1, t, rule, trials, seed, workers) -> tuple[int, int]:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    tasks = [
        (h0.N, h0.m, h1.m, t, rule, seed, b, size)
        for b, size in enumerate(_block_sizes(trials))
    ]
    return sum(_run_blocks(_experiment_block, tasks, workers)), trials


def run_single_copy_experiment(
    h0: BiasHypothesis, h1: BiasHypothesis, trials: int, seed: int = 0, workers: int = 1
) -> DiscriminationReport:
    """Monte Carlo estimate of the single-query Helstrom success probability.

    Each trial picks the true hypothesis with probability 1/2, samples f from
    its class, measures the address state once in the Hadamard basis and
    decides with :func:`decide_single_copy`.
    """
    _check_pair(h0, h1)
    correct, trials = _run_experiment(h0, h1, 1, _single_copy_rule(h0, h1), trials, seed, workers)
    theory = helstrom_success(h0, h1)
    return DiscriminationReport(
        theoretical_success=theory,
        empirical_success=correct / trials,
        trials=trials,
        confidence_half_width=three_sigma(theory, trials),
        seed=seed,
    )


def run_multi_query_experiment(
    h0: BiasHypothesis, h1: BiasHypothesis, t: int, trials: int, seed: int = 0, workers: int = 1
) -> MultiQueryReport:
    """Monte Carlo run of the separable t-query strategy with the count LRT."""
    _check_pair(h0, h1)
    if t < 1:
        raise ValueError(f"query count must be >= 1, got {t}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateHypothesesWarning)
        rule = lrt_threshold(h0, h1, t)
    correct, trials = _run_experiment(h0, h1, t, rule, trials, seed, workers)
    exact = bayes_error_for_rule(rule, h0.mu_sq, h1.mu_sq)
    xi = chernoff_information(h0.mu_sq, h1.mu_sq).xi
    return MultiQueryReport(
        theoretical_success=1.0 - exact,
        empirical_success=correct / trials,
        trials=trials,
        confidence_half_width=three_sigma(exact, trials),
        seed=seed,
        t=t,
        k_star=rule.k_star,
        exact_error=exact,
        chernoff_bound=chernoff_bound(t, xi),
        xi=xi,
        degenerate=rule.degenerate,
    )


"""
This module implements the Monte Carlo oracle: path simulation of the level
Y(t) and background state M(t), and estimators for hitting probabilities,
ascending ladder heights, the jump-free duality identity and the stationary
fluid queue tail.

Replication r of a run with seed s draws from its own Philox stream keyed
by s ^ r, so replications are independent of execution order and may run in
a process pool. Batches are merged with the commutative `Tally` monoid.

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.

"""

import logging
import math
import typing
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats

from . import errors
from . import mixture
from . import model as mdl
from . import spectral

TRUNCATION_EPSILON = 1e-6
CONFIDENCE = 0.99
MAX_EVENTS = 10 ** 6
BATCH_SIZE = 5000

NEVER = -1
CAPPED = -2

log = logging.getLogger(__name__)


class PathEvent(typing.NamedTuple):
    time: float
    state_before: int
    state_after: int
    jump: float
    level: float


class Estimate(typing.NamedTuple):
    point: float
    stderr: float
    count: int
    confidence: float
    low: float
    high: float

    def z_score(self, value):
        if self.stderr == 0:
            return 0.0 if value == self.point else math.copysign(math.inf, self.point - value)
        return (self.point - value) / self.stderr


class Tally(object):
    """count, sum and sum of squares; merging two tallies is addition"""

    def __init__(self, count=0, total=0.0, total_sq=0.0):
        super(Tally, self).__init__()
        self.count = count
        self.total = total
        self.total_sq = total_sq

    def add(self, value):
        self.count += 1
        self.total += value
        self.total_sq += value * value

    def __add__(self, other):
        return Tally(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self):
        return self.total / self.count if self.count else math.nan

    @property
    def stderr(self):
        if self.count < 2:
            return math.nan
        variance = max(self.total_sq - self.count * self.mean ** 2, 0.0) / (self.count - 1)
        return math.sqrt(variance / self.count)

    def estimate(self, confidence=CONFIDENCE, binary=False):
        """
        Estimate with a Clopper-Pearson interval when the tallied values
        are indicators, normal interval otherwise
        """
        mean, stderr = self.mean, self.stderr
        if binary:
            ci = stats.binomtest(int(round(self.total)), self.count).proportion_ci(
                confidence_level=confidence, method='exact')
            low, high = ci.low, ci.high
        else:
            half = stats.norm.ppf(0.5 + confidence / 2.0) * stderr
            low, high = mean - half, mean + half
        return Estimate(point=mean, stderr=stderr, count=self.count, confidence=confidence, low=low, high=high)


class HittingEstimate(typing.NamedTuple):
    targets: list
    never: Estimate
    capped: Estimate
    cutoff: float
    truncation_bias: float


class LadderEstimate(typing.NamedTuple):
    state: int
    heights: dict
    mass: list
    defect: Estimate
    capped: Estimate
    count: int

    def cdf(self, j, x):
        """empirical P(M(tau_0+) = j, Y(tau_0+) <= x)"""
        return float(np.searchsorted(self.heights[j], x, side='right')) / self.count


class DualityReport(typing.NamedTuple):
    pairs: list
    hit_probability: Estimate
    expected_ratio: float
    z_ratio: float


class FluidEstimate(typing.NamedTuple):
    level: float
    per_state: list
    busy: Estimate
    horizon: float
    horizon_envelope: float


class Dynamics(object):
    """
    Embedded jump chain of a model: leave state i at rate c(i), choose one of
    2n moves (C to j, D to j) with probabilities proportional to the rates
    """

    def __init__(self, model):
        super(Dynamics, self).__init__()
        self.model = model
        self.n = model.n
        self.v = np.asarray(model.v)
        self.c = np.asarray(model.c)
        rates = np.hstack([model.C_off, model.D])
        self.cumulative = np.cumsum(rates, axis=1) / self.c[:, None]
        self.cumulative[:, -1] = 1.0

    def holding(self, rng, state):
        return rng.exponential(1.0 / self.c[state])

    def move(self, rng, state):
        """returns (next state, jump size)"""
        idx = int(np.searchsorted(self.cumulative[state], rng.random(), side='right'))
        idx = min(idx, 2 * self.n - 1)
        if idx < self.n:
            return idx, 0.0
        target = idx - self.n
        return target, mixture.sample(self.model.F[(state, target)], rng)


def replication_rng(seed, replication):
    return np.random.Generator(np.random.Philox(key=(int(seed) ^ int(replication))))


def _run_batches(worker, args, nreps, seed, workers=1):
    """runs replications 0..nreps-1 in batches, inline or in a process pool; results keep batch order"""
    bounds = [(start, min(start + BATCH_SIZE, nreps)) for start in range(0, nreps, BATCH_SIZE)]
    if workers is None or workers <= 1 or len(bounds) == 1:
        return [worker(*args, seed, lo, hi) for lo, hi in bounds]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(worker, *args, seed, lo, hi) for lo, hi in bounds]
        return [f.result() for f in futures]


def _check_state(model, state):
    if not 0 <= state < model.n:
        raise errors.BadRunConfig('state {0} is not one of the {1} model states'.format(state, model.n))
    return state


def _start_state(rng, weights):
    return int(rng.choice(len(weights), p=weights))


########################################################################################
# paths

def simulate_path(model, rng, horizon, start_state=None):
    """events of (M(t), Y(t)) on [0, horizon] started from level 0"""
    if not horizon > 0:
        raise errors.BadRunConfig('horizon must be positive, got {0!r}'.format(horizon))
    dyn = Dynamics(model)
    state = _start_state(rng, mdl.stationary_dist(model)) if start_state is None else _check_state(model, start_state)
    time, level = 0.0, 0.0
    events = []
    while True:
        hold = dyn.holding(rng, state)
        if time + hold > horizon:
            return events
        time += hold
        level += dyn.v[state] * hold
        target, jump = dyn.move(rng, state)
        level += jump
        events.append(PathEvent(time=time, state_before=state, state_after=target, jump=jump, level=level))
        state = target


def estimate_occupancy(model, horizon, seed):
    """time fractions per state and mean holding times from one long path"""
    rng = replication_rng(seed, 0)
    dyn = Dynamics(model)
    state = _start_state(rng, mdl.stationary_dist(model))
    occupancy = np.zeros(model.n)
    holding = [Tally() for _ in range(model.n)]
    time = 0.0
    while time < horizon:
        hold = dyn.holding(rng, state)
        holding[state].add(hold)
        occupancy[state] += min(hold, horizon - time)
        time += hold
        state, _ = dyn.move(rng, state)
    return occupancy / horizon, [t.estimate() for t in holding]


def _first_passage_up(dyn, rng, state, x, floor):
    """
    (state at tau_x+, level there), (NEVER, level) once the level drops below
    floor or (CAPPED, level) after MAX_EVENTS transitions
    """
    level = 0.0
    if dyn.v[state] > 0 and x <= 0:
        return state, 0.0
    for _ in range(MAX_EVENTS):
        speed = dyn.v[state]
        hold = dyn.holding(rng, state)
        if speed > 0 and level + speed * hold >= x:
            return state, x
        level += speed * hold
        if level < floor:
            return NEVER, level
        state, jump = dyn.move(rng, state)
        level += jump
        if level >= x:
            return state, level
    return CAPPED, level


def _first_passage_down(dyn, rng, state, ceiling):
    """
    state at the first time the jump-free level returns to <= 0, NEVER above
    ceiling, CAPPED after MAX_EVENTS transitions
    """
    level = 0.0
    for _ in range(MAX_EVENTS):
        speed = dyn.v[state]
        hold = dyn.holding(rng, state)
        if speed < 0 and level + speed * hold <= 0:
            return state
        level += speed * hold
        if level > ceiling:
            return NEVER
        state, _ = dyn.move(rng, state)
    return CAPPED


def _hitting_batch(model, x, start, floor, seed, lo, hi):
    """counts per target state, then the 'capped' and 'never' slots"""
    dyn = Dynamics(model)
    counts = np.zeros(model.n + 2, dtype=np.int64)
    weights = None if isinstance(start, int) else np.asarray(start)
    for r in range(lo, hi):
        rng = replication_rng(seed, r)
        state = start if weights is None else _start_state(rng, weights)
        target, _ = _first_passage_up(dyn, rng, state, x, floor)
        counts[target] += 1
    return counts


def _ladder_batch(model, start, floor, seed, lo, hi):
    dyn = Dynamics(model)
    samples = []
    for r in range(lo, hi):
        rng = replication_rng(seed, r)
        samples.append(_first_passage_up(dyn, rng, start, 0.0, floor))
    return samples


def _descent_batch(model, start, ceiling, seed, lo, hi):
    dyn = Dynamics(model)
    counts = np.zeros(model.n + 2, dtype=np.int64)
    for r in range(lo, hi):
        counts[_first_passage_down(dyn, replication_rng(seed, r), start, ceiling)] += 1
    return counts


def _fluid_batch(model, horizon, seed, lo, hi):
    """per replication (final state, final buffer content) of the reflected process started empty"""
    dyn = Dynamics(model)
    pi = mdl.stationary_dist(model)
    results = []
    for r in range(lo, hi):
        rng = replication_rng(seed, r)
        state = _start_state(rng, pi)
        time, content = 0.0, 0.0
        while True:
            hold = dyn.holding(rng, state)
            step = min(hold, horizon - time)
            content = max(content + dyn.v[state] * step, 0.0)
            time += hold
            if time >= horizon:
                break
            state, jump = dyn.move(rng, state)
            content += jump
        results.append((state, content))
    return results


########################################################################################
# estimators

def _counts_to_estimates(counts, confidence):
    total = int(counts.sum())
    return [Tally(total, float(k), float(k)).estimate(confidence, binary=True) for k in counts]


def lundberg_floor(model, x, epsilon=TRUNCATION_EPSILON):
    """level below which hitting x has probability at most epsilon"""
    alpha = spectral.decay_rate(model)
    return x - math.log(1.0 / epsilon) / alpha


def estimate_hitting(model, x, i, nreps, seed=0, workers=1, epsilon=TRUNCATION_EPSILON, confidence=CONFIDENCE):
    """
    P(M(tau_x+) = j | M(0) = i) for every j plus the mass of never hitting.
    `i` is a state index or a vector of initial probabilities.
    """
    if isinstance(i, int):
        _check_state(model, i)
    floor = lundberg_floor(model, x, epsilon)
    batches = _run_batches(_hitting_batch, (model, x, i if isinstance(i, int) else list(i), floor),
                           nreps, seed, workers)
    counts = np.sum(batches, axis=0)
    estimates = _counts_to_estimates(counts, confidence)
    if counts[CAPPED]:
        log.warning('%d of %d paths reached %d events before hitting %g', counts[CAPPED], nreps, MAX_EVENTS, x)
    log.debug('hitting x=%g from %s: %d replications, floor %.4g', x, i, nreps, floor)
    return HittingEstimate(targets=estimates[:-2], never=estimates[NEVER], capped=estimates[CAPPED],
                           cutoff=floor, truncation_bias=epsilon)


def estimate_ladder(model, i, nreps, seed=0, workers=1, epsilon=TRUNCATION_EPSILON, confidence=CONFIDENCE):
    """joint law of (M(tau_0+), Y(tau_0+)) from level 0 in state i of S-"""
    if i not in model.partition.minus:
        raise errors.NotMinusState('state {0} does not have negative drift'.format(i))
    floor = lundberg_floor(model, 0.0, epsilon)
    batches = _run_batches(_ladder_batch, (model, i, floor), nreps, seed, workers)
    samples = [s for batch in batches for s in batch]
    heights = {j: np.sort([y for target, y in samples if target == j]) for j in range(model.n)}
    counts = np.array([len(heights[j]) for j in range(model.n)] + [sum(1 for t, _ in samples if t == CAPPED),
                                                                   sum(1 for t, _ in samples if t == NEVER)])
    estimates = _counts_to_estimates(counts, confidence)
    return LadderEstimate(state=i, heights=heights, mass=estimates[:-2], defect=estimates[NEVER],
                          capped=estimates[CAPPED], count=nreps)


def dkw_band(count, confidence=CONFIDENCE):
    """half width of the Dvoretzky-Kiefer-Wolfowitz band for an empirical CDF"""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * count))


def _flipped(model):
    return mdl.MapModel(-model.v, model.C, model.D, model.F, name=model.name)


def check_duality_nojump(model, nreps, seed=0, workers=1, confidence=CONFIDENCE):
    """
    compares -v(i) P(M(0)=i, M(tau_0+)=k) with v(k) P(M~(0)=k, M~(tau~_0-)=i)
    over i in S-, k in S+ for a stationary start, and P(tau_0+ < inf) under
    the |v| pi weighted start with a+/a-
    """
    if model.has_jumps:
        raise errors.HasJumps('the duality check needs a model without jumps')
    pi = mdl.stationary_dist(model)
    drift = mdl.mean_drift(model)
    minus, plus = model.partition
    if not minus:
        raise errors.EmptyMinus('no state has negative drift')
    floor = lundberg_floor(model, 0.0) if drift < 0 else -math.inf
    ceiling = -lundberg_floor(_flipped(model), 0.0) if drift > 0 else math.inf
    dual = mdl.dual_model(model)
    pairs = []
    upward = {}
    for offset, i in enumerate(minus):
        batches = _run_batches(_hitting_batch, (model, 0.0, i, floor), nreps, seed + 2 * offset, workers)
        upward[i] = _counts_to_estimates(np.sum(batches, axis=0), confidence)
    for offset, k in enumerate(plus):
        batches = _run_batches(_descent_batch, (dual, k, ceiling), nreps, seed + 2 * offset + 1, workers)
        downward = _counts_to_estimates(np.sum(batches, axis=0), confidence)
        for i in minus:
            left_scale = -model.v[i] * pi[i]
            right_scale = model.v[k] * pi[k]
            left = upward[i][k]
            right = downward[i]
            spread = math.hypot(left_scale * left.stderr, right_scale * right.stderr)
            difference = left_scale * left.point - right_scale * right.point
            pairs.append({'i': i, 'k': k, 'left': left_scale * left.point, 'right': right_scale * right.point,
                          'z': difference / spread if spread > 0 else 0.0})
    weights = np.abs(model.v[list(minus)]) * pi[list(minus)]
    start = np.zeros(model.n)
    start[list(minus)] = weights / weights.sum()
    batches = _run_batches(_hitting_batch, (model, 0.0, start.tolist(), floor), nreps, seed + 2 * model.n, workers)
    counts = np.sum(batches, axis=0)
    hits = float(counts[:model.n].sum())
    hit = Tally(int(counts.sum()), hits, hits).estimate(confidence, binary=True)
    a_plus = float(np.sum(model.v[list(plus)] * pi[list(plus)]))
    a_minus = float(weights.sum())
    expected = min(a_plus / a_minus, 1.0)
    return DualityReport(pairs=pairs, hit_probability=hit, expected_ratio=expected, z_ratio=hit.z_score(expected))


def estimate_fluid_tail(model, x, horizon, nreps, seed=0, workers=1, confidence=CONFIDENCE):
    """P(V > x, M = i) for the buffer content V(horizon) of the queue started empty with M(0) ~ pi"""
    drift = mdl.mean_drift(model)
    if drift >= 0:
        raise errors.DriftNonNegative('mean drift {0!r} is not negative'.format(drift))
    alpha = spectral.decay_rate(model)
    batches = _run_batches(_fluid_batch, (model, horizon), nreps, seed, workers)
    samples = [s for batch in batches for s in batch]
    per_state = []
    for i in range(model.n):
        hits = float(sum(1 for state, content in samples if state == i and content > x))
        per_state.append(Tally(len(samples), hits, hits).estimate(confidence, binary=True))
    busy_count = float(sum(1 for _, content in samples if content > 0))
    busy = Tally(len(samples), busy_count, busy_count).estimate(confidence, binary=True)
    envelope = math.exp(-alpha * abs(drift) * horizon)
    return FluidEstimate(level=x, per_state=per_state, busy=busy, horizon=horizon, horizon_envelope=envelope)

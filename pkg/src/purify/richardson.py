"""
Richardson purification: the naive periodic product and the stabilized
shift controller.

Both drive the same iteration ``phi <- normalize((H - eps_j) phi)`` with ``eps_j``
taken from the known distinct eigenvalues other than the target. The naive
scheme cycles through them in a fixed order. The stabilized scheme keeps one
weight per distinct eigenvalue as a stand-in for the unknown size of that
eigencomponent, always eliminates the component with the largest weight, and
updates the weights the way the amplitudes themselves would evolve.

The weights play the role of the coefficient magnitudes of a *normalized*
vector: before each update they are rescaled so the largest is at most 1,
which makes the reset value ``delta_bar / Delta`` of an eliminated weight a
residual relative to the dominant component. Without that rescaling every
factor ``|eps_i - eps_j| / Delta`` is at least 1, the weights grow by several
decades per step, and the reset value becomes so small that eliminated
components regrow unnoticed. Weights are stored as natural logarithms since
rarely chosen ones still drift far outside double range.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BadTarget, NotConverged, ZeroVector
from .linalg import EPS, apply_shifted, canonical_sign, normalize, residual_sigma_bar
from .rng import XorShift64Star

_NAIVE_SEED_SALT = 0x5DEECE66D


@dataclass
class RunConfig:
    delta_bar: float = 1e-10
    sigma_bar_target: float = 1e-10
    max_iterations: Optional[int] = None  # None: 50 per distinct eigenvalue
    refresh_threshold: float = 1e-5
    refresh_period: int = 0  # 0 disables refreshing
    rng_seed: int = 0
    max_restarts: int = 3

    def __post_init__(self):
        if not self.delta_bar > 0:
            raise ValueError("delta_bar must be positive")
        if not self.sigma_bar_target >= EPS:
            raise ValueError("sigma_bar_target must be at least machine epsilon")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not self.refresh_threshold > 0:
            raise ValueError("refresh_threshold must be positive")
        if self.refresh_period < 0:
            raise ValueError("refresh_period must be nonnegative")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be nonnegative")

    def iteration_budget(self, n_distinct):
        return self.max_iterations if self.max_iterations is not None else 50 * n_distinct


@dataclass
class ControllerState:
    """Mutable shift-controller state owned by a single run.

    ``log_weights[k]`` is ``-inf`` for the target index so it can never be
    selected.
    """

    log_weights: np.ndarray
    target_index: int
    delta_bar: float
    delta_spacing: float
    shift_history: list = field(default_factory=list)
    counts: Optional[np.ndarray] = None
    iteration: int = 0

    def __post_init__(self):
        self.log_weights = np.array(self.log_weights, dtype=float)
        self.log_weights[self.target_index] = -np.inf
        if self.counts is None:
            self.counts = np.zeros(len(self.log_weights), dtype=np.int64)
        if not self.delta_bar < self.delta_spacing:
            raise ValueError(
                f"delta_bar ({self.delta_bar:g}) must be below the smallest "
                f"level spacing ({self.delta_spacing:g})")

    @classmethod
    def from_weights(cls, weights, target_index, delta_bar, delta_spacing):
        w = np.array(weights, dtype=float)
        w[target_index] = 1.0
        return cls(np.log(w), target_index, delta_bar, delta_spacing)

    @property
    def active(self):
        mask = np.ones(len(self.log_weights), dtype=bool)
        mask[self.target_index] = False
        return mask

    @property
    def weights(self):
        """Linear weights, ``nan`` in the target slot. May overflow to inf."""
        with np.errstate(over="ignore"):
            w = np.exp(self.log_weights)
        w[self.target_index] = np.nan
        return w


@dataclass
class IterationTrace:
    """One row per iteration: step index, chosen shift, residual, error."""

    n: list = field(default_factory=list)
    j: list = field(default_factory=list)
    sigma_bar: list = field(default_factory=list)
    sigma: list = field(default_factory=list)

    def append(self, n, j, sigma_bar, sigma=None):
        self.n.append(n)
        self.j.append(j)
        self.sigma_bar.append(sigma_bar)
        self.sigma.append(sigma)

    def __len__(self):
        return len(self.n)

    def rows(self):
        return zip(self.n, self.j, self.sigma_bar, self.sigma)


@dataclass
class RunResult:
    final_vector: np.ndarray
    iterations_used: int
    converged: bool
    trace: IterationTrace
    shift_history: list
    counts: np.ndarray
    target_index: int
    final_sigma_bar: float
    best_vector: np.ndarray
    best_sigma_bar: float
    restarts: int = 0

    def raise_for_status(self):
        if not self.converged:
            raise NotConverged(
                f"sigma_bar {self.best_sigma_bar:.3e} after {self.iterations_used} iterations",
                result=self)
        return self


def random_unit_vector(rng, dim):
    """Entries i.i.d. uniform(-1, 1), normalized."""
    return normalize(rng.uniform(-1.0, 1.0, dim))


def _check_target(spectrum, k):
    if not 0 <= k < spectrum.n_distinct:
        raise BadTarget(f"target {k} outside 0..{spectrum.n_distinct - 1}")


def init_controller(spectrum, k, config, dim=None, rng=None):
    """Draw the random initial vector and initial weights in (0, 1).

    The vector's ``dim`` entries are drawn first, then one weight per
    non-target distinct eigenvalue in index order.
    """
    _check_target(spectrum, k)
    if rng is None:
        rng = XorShift64Star(config.rng_seed)
    dim = len(spectrum.eigenvalues) if dim is None else dim
    v = random_unit_vector(rng, dim)
    log_w = np.zeros(spectrum.n_distinct)
    for i in range(spectrum.n_distinct):
        if i != k:
            log_w[i] = np.log(rng.open_unit())
    state = ControllerState(log_w, k, config.delta_bar, spectrum.delta)
    return v, state


def select_shift(state):
    # np.argmax returns the first maximum: ties go to the smallest index
    return int(np.argmax(state.log_weights))


def update_weights(state, j, spectrum):
    """Apply the weight update for having eliminated ``j``, in place.

    ``a_j <- delta_bar / Delta`` and ``a_i <- a_i |eps_i - eps_j| / Delta`` for
    the other non-target weights, after first scaling the weights down so
    the largest is at most 1.
    """
    if j == state.target_index:
        raise BadTarget("the target eigenvalue can never be used as a shift")
    active = state.active
    top = state.log_weights[active].max()
    if top > 0.0:
        state.log_weights[active] -= top
    gaps = np.abs(spectrum.distinct - spectrum.distinct[j])
    with np.errstate(divide="ignore"):
        growth = np.log(gaps) - np.log(state.delta_spacing)
    state.log_weights[active] += growth[active]
    state.log_weights[j] = np.log(state.delta_bar) - np.log(state.delta_spacing)
    state.counts[j] += 1
    state.shift_history.append(j)
    state.iteration += 1
    return state


def refresh_weights(state):
    """Replace every weight by its reciprocal, rescaled so the largest is 1."""
    active = state.active
    lw = -state.log_weights[active]
    state.log_weights[active] = lw - lw.max()
    return state


def step(H, spectrum, state, v):
    """Select a shift, apply it to ``v`` and update the controller.

    Returns ``(v_new, state, j)``. The state is modified in place and is left
    untouched if the product underflows (:class:`ZeroVector`).
    """
    j = select_shift(state)
    v_new = apply_shifted(H, spectrum.distinct[j], v)
    update_weights(state, j, spectrum)
    return v_new, state, j


def _reference_sigma(reference):
    if reference is None:
        return lambda v: None
    from .diagnostics import sigma_error, sigma_subspace

    ref = np.asarray(reference, dtype=float)
    if ref.ndim == 1:
        return lambda v: sigma_error(v, ref)
    return lambda v: sigma_subspace(v, ref)


class _Run:
    """Shared loop bookkeeping for the stabilized and naive drivers."""

    def __init__(self, H, spectrum, k, config, reference, v, rng):
        self.H = H
        self.spectrum = spectrum
        self.k = k
        self.config = config
        self.eps_k = spectrum.distinct[k]
        self.sigma = _reference_sigma(reference)
        self.rng = rng
        self.v = v
        self.trace = IterationTrace()
        self.restarts = 0
        self.sigma_bar = residual_sigma_bar(H, self.eps_k, v)
        self.best = (self.sigma_bar, v)

    @property
    def converged(self):
        return self.sigma_bar <= self.config.sigma_bar_target

    def restart(self):
        if self.restarts >= self.config.max_restarts:
            raise ZeroVector(f"iterate annihilated {self.restarts + 1} times")
        self.restarts += 1
        self.v = random_unit_vector(self.rng, self.H.dim)

    def record(self, n, j, v):
        self.v = v
        self.sigma_bar = residual_sigma_bar(self.H, self.eps_k, v)
        self.trace.append(n, j, self.sigma_bar, self.sigma(v))
        if self.sigma_bar < self.best[0]:
            self.best = (self.sigma_bar, v)

    def result(self, history, counts):
        best_sb, best_v = self.best
        return RunResult(
            final_vector=canonical_sign(self.v),
            iterations_used=len(self.trace),
            converged=self.converged,
            trace=self.trace,
            shift_history=list(history),
            counts=np.array(counts, dtype=np.int64),
            target_index=self.k,
            final_sigma_bar=self.sigma_bar,
            best_vector=canonical_sign(best_v),
            best_sigma_bar=best_sb,
            restarts=self.restarts,
        )


def run_stabilized(H, spectrum, k, config=None, reference=None, v0=None):
    """Compute the eigenvector of distinct eigenvalue ``k`` with shift control.

    Parameters
    ----------
    H : HermitianOperator
    spectrum : Spectrum
        Must contain the eigenvalues of ``H``; ``k`` indexes ``spectrum.distinct``.
    config : RunConfig, optional
    reference : array_like, optional
        A reference eigenvector (1-D), or an orthonormal basis of the target
        eigenspace as columns (2-D), used only to fill the trace's sigma
        column.
    v0 : array_like, optional
        Starting vector; by default one is drawn from the seeded generator.

    Returns
    -------
    RunResult
        ``converged`` is False when the budget ran out; call
        :meth:`RunResult.raise_for_status` to turn that into an exception.
    """
    config = config or RunConfig()
    rng = XorShift64Star(config.rng_seed)
    v, state = init_controller(spectrum, k, config, dim=H.dim, rng=rng)
    if v0 is not None:
        v = normalize(v0)
    run = _Run(H, spectrum, k, config, reference, v, rng)
    budget = config.iteration_budget(spectrum.n_distinct)
    next_refresh = None
    while not run.converged and state.iteration < budget:
        n = state.iteration
        try:
            v, state, j = step(H, spectrum, state, run.v)
        except ZeroVector:
            run.restart()
            continue
        run.record(n, j, v)
        if config.refresh_period > 0:
            if next_refresh is None:
                if run.sigma_bar < config.refresh_threshold:
                    refresh_weights(state)
                    next_refresh = state.iteration + config.refresh_period
            elif state.iteration >= next_refresh:
                refresh_weights(state)
                next_refresh += config.refresh_period
    return run.result(state.shift_history, state.counts)


def naive_permutation(spectrum, k, seed):
    """Random fixed ordering of the non-target distinct indices."""
    rng = XorShift64Star(seed + _NAIVE_SEED_SALT)
    return rng.permutation([i for i in range(spectrum.n_distinct) if i != k])


def run_sequence(H, spectrum, k, shifts, config=None, reference=None, v0=None):
    """Apply a fixed sequence of distinct-eigenvalue indices.

    Stops early once the residual target is met. ``shifts`` is any iterable
    (possibly infinite); the iteration budget still applies.
    """
    config = config or RunConfig()
    _check_target(spectrum, k)
    rng = XorShift64Star(config.rng_seed)
    v = random_unit_vector(rng, H.dim) if v0 is None else normalize(v0)
    run = _Run(H, spectrum, k, config, reference, v, rng)
    budget = config.iteration_budget(spectrum.n_distinct)
    history = []
    counts = np.zeros(spectrum.n_distinct, dtype=np.int64)
    shifts = iter(shifts)
    while not run.converged and len(history) < budget:
        try:
            j = next(shifts)
        except StopIteration:
            break
        if j == k:
            raise BadTarget("the target eigenvalue can never be used as a shift")
        try:
            v = apply_shifted(H, spectrum.distinct[j], run.v)
        except ZeroVector:
            run.restart()
            continue
        run.record(len(history), j, v)
        history.append(j)
        counts[j] += 1
    return run.result(history, counts)


def run_naive(H, spectrum, k, permutation=None, config=None, reference=None):
    """Periodic baseline: shift ``n`` is ``permutation[n mod len(permutation)]``.

    The initial vector is drawn exactly as in :func:`run_stabilized` with the
    same seed, so the two runs start from the same point.
    """
    config = config or RunConfig()
    if permutation is None:
        permutation = naive_permutation(spectrum, k, config.rng_seed)
    permutation = [int(p) for p in permutation]
    if sorted(permutation) != [i for i in range(spectrum.n_distinct) if i != k]:
        raise ValueError("permutation must order every non-target distinct index exactly once")

    def cycle():
        while True:
            yield from permutation

    return run_sequence(H, spectrum, k, cycle(), config, reference)

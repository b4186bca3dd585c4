"""Random-walk Metropolis-Hastings with parallel tempering.

A ladder of chains explores the target raised to inverse temperatures
beta_i = base^p_i with integer exponents p ending at 0; the p = 0 chain
samples the true posterior and is the only one whose draws are kept.
Sampling runs in two phases, a short adaptation phase with a wider
proposal followed by the production phase, after which the cold chain
is trimmed by burn-in and thinning. Adjacent chains attempt state
exchanges every few sweeps so the cold chain can escape local modes.

Every chain owns an independent seeded random stream (plus one stream
for the exchanges), so results are bit-reproducible regardless of how
chain updates are scheduled.
"""

import sys
from dataclasses import dataclass

import numpy as np


@dataclass
class McmcSchedule:
    """Two-phase run lengths, proposal variances, and retention policy."""

    phase1_steps: int = 10_000
    phase1_var: float = 1e-4
    phase2_steps: int = 500_000
    phase2_var: float = 2.5e-5
    burn_in_fraction: float = 0.5
    thin: int = 100
    swap_interval: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.phase1_steps < 0 or self.phase2_steps <= 0:
            raise ValueError("step counts must be positive")
        if self.phase1_var <= 0 or self.phase2_var <= 0:
            raise ValueError("proposal variances must be positive")
        if not (0.0 <= self.burn_in_fraction < 1.0):
            raise ValueError("burn_in_fraction must lie in [0, 1)")
        if self.thin < 1 or self.swap_interval < 1:
            raise ValueError("thin and swap_interval must be >= 1")

    @property
    def retained_count(self) -> int:
        kept = self.phase2_steps - int(self.phase2_steps * self.burn_in_fraction)
        return (kept + self.thin - 1) // self.thin


@dataclass
class ChainLadder:
    """Tempered chains: states, cached log posteriors, and RNG streams.

    exponents must be strictly increasing and end at 0, so the last
    chain is the cold one.
    """

    exponents: tuple
    base: float
    bounds: np.ndarray  # (dim, 2) box used for uniform initialization
    states: list
    log_posts: list
    rngs: list
    swap_rng: np.random.Generator

    def __post_init__(self):
        ex = tuple(int(p) for p in self.exponents)
        if ex[-1] != 0 or any(a >= b for a, b in zip(ex, ex[1:])):
            raise ValueError("exponents must be strictly increasing and end at 0")
        object.__setattr__(self, "exponents", ex)

    @property
    def n_chains(self) -> int:
        return len(self.exponents)

    @property
    def betas(self) -> np.ndarray:
        return self.base ** np.asarray(self.exponents, dtype=float)

    @classmethod
    def create(cls, bounds, seed: int, exponents=(-4, -3, -2, -1, 0),
               base: float = 5.0) -> "ChainLadder":
        """Ladder with uniform initial states drawn from the box."""
        bounds = np.asarray(bounds, dtype=float)
        streams = np.random.SeedSequence(seed).spawn(len(exponents) + 1)
        rngs = [np.random.default_rng(s) for s in streams[:-1]]
        swap_rng = np.random.default_rng(streams[-1])
        states = [rng.uniform(bounds[:, 0], bounds[:, 1]) for rng in rngs]
        return cls(tuple(exponents), float(base), bounds, states,
                   [-np.inf] * len(exponents), rngs, swap_rng)


@dataclass(frozen=True)
class SampleSet:
    """Retained cold-chain draws plus run diagnostics."""

    samples: np.ndarray  # (m, dim)
    acceptance_rates: dict  # {"phase1": (n_chains,), "phase2": (n_chains,)}
    swap_rates: np.ndarray  # (n_chains - 1,) per adjacent pair


def propose(x: np.ndarray, var: float, rng: np.random.Generator) -> np.ndarray:
    """Symmetric Gaussian random-walk proposal with diagonal variance var."""
    if var <= 0.0:
        raise ValueError("proposal variance must be positive")
    return x + np.sqrt(var) * rng.standard_normal(len(x))


def mh_step(chain_index: int, ladder: ChainLadder, target, var: float,
            rng: np.random.Generator, canon=None) -> bool:
    """One Metropolis update of chain i against its tempered target.

    Proposes, canonicalizes, and accepts with probability
    min(1, exp(beta_i * (l(x') - l(x)))) where l is the untempered log
    posterior. Cached values are updated on acceptance.
    """
    x = ladder.states[chain_index]
    xp = propose(x, var, rng)
    if canon is not None:
        xp = canon(xp)
    lp = target(xp)
    beta = ladder.base ** ladder.exponents[chain_index]
    # log(u) <= 0 < beta * delta handles the sure-accept case; nan (both
    # -inf) and -inf deltas compare False and reject.
    delta = lp - ladder.log_posts[chain_index]
    accept = bool(delta > 0 or np.log(rng.random()) < beta * delta)
    if accept:
        ladder.states[chain_index] = xp
        ladder.log_posts[chain_index] = lp
    return accept


def swap_step(ladder: ChainLadder, rng: np.random.Generator):
    """One sweep of adjacent replica exchanges, scanned cold to hot.

    Pair (i, i+1) swaps with probability
    min(1, exp((beta_i - beta_{i+1}) * (l_{i+1} - l_i))); cached log
    posteriors move with the states. Returns acceptance flags indexed
    by pair i.
    """
    n = ladder.n_chains
    if n < 2:
        return []
    betas = ladder.betas
    swapped = [False] * (n - 1)
    for i in range(n - 2, -1, -1):
        dlog = (betas[i] - betas[i + 1]) * (ladder.log_posts[i + 1] - ladder.log_posts[i])
        if dlog > 0 or np.log(rng.random()) < dlog:
            ladder.states[i], ladder.states[i + 1] = ladder.states[i + 1], ladder.states[i]
            ladder.log_posts[i], ladder.log_posts[i + 1] = (
                ladder.log_posts[i + 1], ladder.log_posts[i])
            swapped[i] = True
    return swapped


_PROGRESS_EVERY = 10_000
_INIT_RETRIES = 1000


def _initialize(ladder: ChainLadder, target, canon, initial) -> None:
    """Place every chain at a canonical, finite-posterior starting state."""
    lo, hi = ladder.bounds[:, 0], ladder.bounds[:, 1]
    for i in range(ladder.n_chains):
        x = ladder.states[i]
        if i == ladder.n_chains - 1 and initial is not None:
            x = np.asarray(initial, dtype=float)
            if np.any(x < lo) or np.any(x > hi):
                x = ladder.rngs[i].uniform(lo, hi)
        for _ in range(_INIT_RETRIES):
            if canon is not None:
                x = canon(x)
            lp = target(x)
            if np.isfinite(lp):
                break
            x = ladder.rngs[i].uniform(lo, hi)
        else:
            raise RuntimeError("could not find a finite-posterior initial state")
        ladder.states[i] = x
        ladder.log_posts[i] = lp


def run(ladder: ChainLadder, target, schedule: McmcSchedule,
        initial=None, canon=None, progress=sys.stderr) -> SampleSet:
    """Run both phases and return the trimmed cold-chain sample set.

    The cold chain starts from `initial` when given (falling back to a
    uniform draw if it lies outside the box). Phase 1 is adaptation and
    is discarded entirely; burn-in and thinning apply to phase 2 only.
    """
    _initialize(ladder, target, canon, initial)
    n = ladder.n_chains
    accepted = np.zeros((2, n), dtype=int)
    swap_acc = np.zeros(max(n - 1, 1), dtype=int)
    swap_tries = 0
    cold_states = []
    total_sweeps = 0

    phases = ((schedule.phase1_steps, schedule.phase1_var),
              (schedule.phase2_steps, schedule.phase2_var))
    for phase, (steps, var) in enumerate(phases):
        for sweep in range(steps):
            for i in range(n):
                if mh_step(i, ladder, target, var, ladder.rngs[i], canon):
                    accepted[phase, i] += 1
            if (sweep + 1) % schedule.swap_interval == 0 and n > 1:
                flags = swap_step(ladder, ladder.swap_rng)
                swap_acc += np.asarray(flags, dtype=int)
                swap_tries += 1
            if phase == 1:
                cold_states.append(ladder.states[-1].copy())
            total_sweeps += 1
            if progress is not None and total_sweeps % _PROGRESS_EVERY == 0:
                acc = accepted[phase] / max(sweep + 1, 1)
                swr = swap_acc / max(swap_tries, 1)
                print(f"[mcmc] sweep {total_sweeps} phase {phase + 1} "
                      f"acc={np.array2string(acc, precision=3)} "
                      f"swap={np.array2string(swr, precision=3)}", file=progress)

    burn = int(schedule.phase2_steps * schedule.burn_in_fraction)
    retained = np.asarray(cold_states[burn::schedule.thin])
    if retained.size == 0:
        raise ValueError("schedule retained zero samples")
    rates = {
        "phase1": accepted[0] / max(schedule.phase1_steps, 1),
        "phase2": accepted[1] / schedule.phase2_steps,
    }
    swap_rates = swap_acc / max(swap_tries, 1) if n > 1 else np.zeros(0)
    return SampleSet(retained, rates, swap_rates)

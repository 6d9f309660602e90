"""
Seeded Monte Carlo estimators for the quantized receiver.

Trials are split into fixed-size blocks; block i always draws from substream i
of the configured seed, so estimates do not depend on the worker count.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, List, Tuple, TypeVar

import numpy as np
from tqdm import tqdm

from montecarlo.config import McConfig, McEstimate, Prop1Rae
from montecarlo.sampling import block_returns, complex_gaussian, draw_trials, filter_outputs
from numerics.rng import make_generator
from qsinr.filters import FilterLike, as_vector
from qsinr.statistics import prop1_moments
from radar.scene import RadarScene
from radar.waveform import Waveform, one_bit_quantize
from utils.exceptions import DomainError

logger = logging.getLogger(__name__)

T = TypeVar("T")

_MAX_REDRAW_ROUNDS = 100


class Hypothesis(str, Enum):
    H0 = "h0"
    H1 = "h1"


def run_blocks(task: Callable[[np.random.Generator, int], T], mc: McConfig, desc: str = "trials") -> List[T]:
    """Run ``task(rng, size)`` per block and return the results in block order."""
    sizes = mc.block_sizes()

    def run(index: int) -> T:
        return task(make_generator(mc.seed, stream=index), sizes[index])

    progress = dict(total=len(sizes), desc=desc, disable=not mc.progress, leave=False)
    if mc.workers == 1:
        return list(tqdm(map(run, range(len(sizes))), **progress))

    results = []
    with ThreadPoolExecutor(max_workers=mc.workers) as executor:
        futures = [executor.submit(run, index) for index in range(len(sizes))]
        for index, future in enumerate(tqdm(futures, **progress)):
            try:
                results.append(future.result())
            except Exception:
                logger.exception(f"Monte Carlo block {index} failed")
                raise
    return results


def _outputs(w, waveform, scene, mc, rng, size) -> Tuple[np.ndarray, np.ndarray]:
    draws = draw_trials(
        scene, rng, size, draw_angles=mc.draw_interference_angles, draw_target=mc.draw_target
    )
    noise = complex_gaussian(rng, (size, scene.snapshot_dim), scene.noise_power)
    h1, h0 = block_returns(scene, waveform, draws)
    return filter_outputs(w, h1, noise), filter_outputs(w, h0, noise)


def _paired_block(w, waveform, scene, mc, rng, size):
    z1, z0 = _outputs(w, waveform, scene, mc, rng, size)
    redrawn = 0
    rejected = np.flatnonzero(z0 == 0)
    for _ in range(_MAX_REDRAW_ROUNDS):
        if rejected.size == 0:
            return np.abs(z1) ** 2, np.abs(z0) ** 2, redrawn
        redrawn += rejected.size
        z1[rejected], z0[rejected] = _outputs(w, waveform, scene, mc, rng, rejected.size)
        rejected = rejected[z0[rejected] == 0]
    raise DomainError("filter output without target stays zero after repeated redraws")


def _single_block(w, waveform, scene, mc, hypothesis: Hypothesis, rng, size) -> np.ndarray:
    z1, z0 = _outputs(w, waveform, scene, mc, rng, size)
    return z1 if hypothesis is Hypothesis.H1 else z0


def output_samples(
    w: FilterLike, waveform: Waveform, scene: RadarScene, mc: McConfig, hypothesis: Hypothesis = Hypothesis.H0
) -> np.ndarray:
    """Samples of z = w^H Q(h + v) under the given hypothesis, one per trial."""
    w = as_vector(w)
    hypothesis = Hypothesis(hypothesis)
    blocks = run_blocks(lambda rng, size: _single_block(w, waveform, scene, mc, hypothesis, rng, size), mc, f"z|{hypothesis.value}")
    return np.concatenate(blocks)


def qsinr_mc(w: FilterLike, waveform: Waveform, scene: RadarScene, mc: McConfig) -> McEstimate:
    """
    E|w^H Q(h1 + v)|^2 / E|w^H Q(h0 + v)|^2 - 1, both expectations taken over
    the same noise and interference draws.

    The standard error follows from the delta method for a ratio of means.
    Trials whose target-free output is exactly zero are redrawn.
    """
    w = as_vector(w)
    blocks = run_blocks(lambda rng, size: _paired_block(w, waveform, scene, mc, rng, size), mc, "qsinr")
    numerator = np.concatenate([block[0] for block in blocks])
    denominator = np.concatenate([block[1] for block in blocks])
    redrawn = sum(block[2] for block in blocks)
    if redrawn:
        logger.warning(f"Redrew {redrawn} of {mc.trials} trials with a zero target-free output")

    ratio = numerator.mean() / denominator.mean()
    spread = numerator - ratio * denominator
    stderr = math.sqrt(spread.var(ddof=1) / mc.trials) / denominator.mean() if mc.trials > 1 else math.inf
    return McEstimate(estimate=float(ratio - 1.0), stderr=float(stderr), trials=mc.trials, redrawn=redrawn)


def _threshold_fraction(samples: np.ndarray, threshold) -> McEstimate:
    thresholds = np.asarray(threshold, dtype=float)
    if np.any(thresholds < 0) or not np.all(np.isfinite(thresholds)):
        raise DomainError(f"thresholds must be finite and nonnegative, got {threshold}")
    hits = np.abs(samples)[:, None] > thresholds.reshape(1, -1)
    fraction = hits.mean(axis=0)
    stderr = np.sqrt(fraction * (1.0 - fraction) / samples.size)
    if thresholds.ndim == 0:
        return McEstimate(estimate=float(fraction[0]), stderr=float(stderr[0]), trials=samples.size)
    return McEstimate(estimate=fraction, stderr=stderr, trials=samples.size)


def empirical_pf(w: FilterLike, waveform: Waveform, scene: RadarScene, threshold, mc: McConfig) -> McEstimate:
    """Fraction of target-free trials with |z| > threshold; accepts an array of thresholds."""
    return _threshold_fraction(output_samples(w, waveform, scene, mc, Hypothesis.H0), threshold)


def empirical_pd(w: FilterLike, waveform: Waveform, scene: RadarScene, threshold, mc: McConfig) -> McEstimate:
    return _threshold_fraction(output_samples(w, waveform, scene, mc, Hypothesis.H1), threshold)


def output_power_mc(
    w: FilterLike, waveform: Waveform, scene: RadarScene, mc: McConfig, hypothesis: Hypothesis = Hypothesis.H0
) -> McEstimate:
    """E|z|^2; under H0 and low per-sample SNR this approaches sigma_in^2."""
    power = np.abs(output_samples(w, waveform, scene, mc, hypothesis)) ** 2
    return McEstimate(estimate=float(power.mean()), stderr=float(power.std(ddof=1) / math.sqrt(power.size)), trials=power.size)


def prop1_rae(h: complex, sigma_sq: float, mc: McConfig) -> Prop1Rae:
    """Simulate y = Q(h + v) and compare its moments with the first-order approximants."""
    h = complex(h)
    moments = prop1_moments(h, sigma_sq)
    y = np.concatenate(run_blocks(lambda rng, size: one_bit_quantize(h + complex_gaussian(rng, size, sigma_sq)), mc, "prop1"))

    mc_mean = complex(y.mean())
    deviation = np.abs(y - mc_mean) ** 2
    mc_var = float(deviation.sum() / max(y.size - 1, 1))
    mean_stderr = math.sqrt(mc_var / y.size)
    var_stderr = float(deviation.std(ddof=1) / math.sqrt(y.size)) if y.size > 1 else math.inf

    mean_error = abs(moments.mean - mc_mean)
    absolute = h == 0 or abs(mc_mean) <= 3 * mean_stderr
    if absolute:
        rae_mean, margin_mean = mean_error, 3 * mean_stderr
    else:
        rae_mean, margin_mean = mean_error / abs(mc_mean), 3 * mean_stderr / abs(mc_mean)

    if moments.exact_mean == 0:
        exact_rae_mean = abs(moments.mean - moments.exact_mean)
    else:
        exact_rae_mean = abs(moments.mean - moments.exact_mean) / abs(moments.exact_mean)

    return Prop1Rae(
        rae_mean=float(rae_mean),
        rae_var=abs(moments.variance - mc_var) / mc_var,
        margin_mean=float(margin_mean),
        margin_var=3 * var_stderr / mc_var,
        exact_rae_mean=float(exact_rae_mean),
        exact_rae_var=abs(moments.variance - moments.exact_variance) / moments.exact_variance,
        mc_mean=mc_mean,
        mc_var=mc_var,
        absolute_mean=bool(absolute),
    )

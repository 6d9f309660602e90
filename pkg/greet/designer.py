import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from greet.admm import admm_solve
from greet.config import AdmmState, Diagnostics, GreetConfig, random_admm_state
from greet.mvdr import mvdr_filter
from numerics.rng import make_generator
from qsinr.filters import Filter
from qsinr.ratio import qsinr
from radar.scene import RadarScene
from radar.waveform import Waveform
from utils.units import to_db

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GreetResult:
    filter: Filter
    waveform: Waveform
    qsinr: float
    diagnostics: Diagnostics

    @property
    def qsinr_db(self) -> float:
        return to_db(self.qsinr)


def greet(scene: RadarScene, config: Optional[GreetConfig] = None, *, initial_waveform: Optional[Waveform] = None) -> GreetResult:
    """
    Alternate the MVDR filter and the ADMM waveform step.

    ``diagnostics.qsinr_trace[i]`` is the QSINR after the filter update of
    outer iteration i; the last entry belongs to the final filter refresh.
    The splitting variables t and r carry over between outer iterations,
    the duals restart from zero.

    With ``keep_best`` (the default) the highest-QSINR pair visited is
    returned, which may be an earlier iterate than the last one; set it to
    False to get the final iterate.

    ``config.restarts`` runs the whole alternation from that many random
    starts and returns the best one. Start 0 draws from ``config.seed`` (and
    uses ``initial_waveform`` if given), start i from stream i of that seed.
    """
    config = GreetConfig() if config is None else config
    best: Optional[GreetResult] = None
    for start in range(config.restarts):
        rng = make_generator(config.seed, stream=start or None)
        result = _alternate(scene, config, rng, initial_waveform if start == 0 else None)
        if config.restarts > 1:
            logger.info(f"GREET start {start}: QSINR {result.qsinr_db:.3f} dB")
        if best is None or result.qsinr > best.qsinr:
            best = result
    return best


def _alternate(
    scene: RadarScene, config: GreetConfig, rng: np.random.Generator, initial_waveform: Optional[Waveform]
) -> GreetResult:
    if initial_waveform is None:
        initial_waveform = Waveform.random_one_bit(scene.n_tx, scene.code_length, rng)

    waveform = initial_waveform
    state = random_admm_state(2 * scene.waveform_dim, rng)
    diagnostics = Diagnostics()
    best: Optional[GreetResult] = None

    for outer in range(config.max_altopt_iters):
        w = mvdr_filter(waveform, scene)
        value = qsinr(w, waveform, scene)
        diagnostics.qsinr_trace.append(value)
        logger.info(f"GREET outer {outer}: QSINR {to_db(value):.3f} dB")
        if best is None or value > best.qsinr:
            best = GreetResult(filter=w, waveform=waveform, qsinr=value, diagnostics=diagnostics)

        init = AdmmState.start(waveform.realified, state.t, state.r)
        result = admm_solve(w, scene, init, config, diagnostics=diagnostics, outer=outer)
        waveform, state = result.waveform, result.state

    w = mvdr_filter(waveform, scene)
    value = qsinr(w, waveform, scene)
    diagnostics.qsinr_trace.append(value)
    final = GreetResult(filter=w, waveform=waveform, qsinr=value, diagnostics=diagnostics)
    if not config.keep_best or value >= best.qsinr:
        return final

    logger.info(f"GREET returned the best visited pair ({to_db(best.qsinr):.3f} dB) over the last ({to_db(value):.3f} dB)")
    return best


def matched_filter_qsinr(scene: RadarScene, waveform: Waveform) -> float:
    """QSINR of a waveform paired with its matched filter w = A(theta0) s."""
    return qsinr(Filter.matched(scene, waveform), waveform, scene)


def one_bit_qsinr_bound(scene: RadarScene) -> float:
    """Interference-free ceiling 2 |alpha0|^2 / (pi sigma^2) for unit-norm steering vectors."""
    return 2.0 * scene.target.power / (math.pi * scene.noise_power)

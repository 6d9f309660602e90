"""
Experiment runners behind the management commands.

Each runner loads the scene named by an ExperimentSpec, evaluates one family
of tables and returns them as pandas frames; writing is left to the command.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Tuple, TypeVar

import numpy as np
import pandas as pd
from django.conf import settings
from tqdm import tqdm

from experiments.artifacts import write_filter, write_waveform
from experiments.spec import ExperimentKind, ExperimentSpec
from greet.designer import greet
from greet.mvdr import mvdr_filter
from montecarlo.harness import Hypothesis, empirical_pd, empirical_pf, output_power_mc, prop1_rae, qsinr_mc
from qsinr.detection import pf, roc_curve, threshold_for_pf
from qsinr.filters import Filter, target_response
from qsinr.ratio import infinite_bit_sinr, qsinr
from qsinr.statistics import detection_report, sigma_in_sq
from radar.geometry import ArrayGeometry
from radar.scene import RadarScene, TargetModel
from radar.scene_file import save_scene, scene_parameters
from radar.waveform import lis_margin_db, matched_phase_onebit_waveform, matched_phase_waveform
from utils.exceptions import ExperimentError
from utils.units import from_db, to_db

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DESK_PF = 1e-6
DESIGNS = ("matched", "mvdr", "greet")


@dataclass
class RunResult:
    tables: Dict[str, pd.DataFrame]
    parameters: Dict[str, Any]
    artifacts: List[Path] = field(default_factory=list)


def map_cells(fn: Callable[[T], R], cells: Iterable[T], workers: int, desc: str) -> List[R]:
    """Apply ``fn`` to every grid cell; results keep the order of ``cells``."""
    cells = list(cells)
    progress = dict(total=len(cells), desc=desc, disable=not settings.MC_DEFAULTS["progress"], leave=False)
    if workers <= 1:
        return [fn(cell) for cell in tqdm(cells, **progress)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(tqdm(executor.map(fn, cells), **progress))


def _workers(spec: ExperimentSpec) -> int:
    return spec.workers or settings.MC_DEFAULTS["workers"]


def _parameters(spec: ExperimentSpec, scene: RadarScene, **extra) -> Dict[str, Any]:
    return {"experiment": spec.kind.value, **scene_parameters(scene), **extra}


def _design(spec: ExperimentSpec, scene: RadarScene, how: str):
    """(filter, waveform) pair for a design name."""
    if how not in DESIGNS:
        raise ExperimentError(f"unknown design {how!r}, expected one of {', '.join(DESIGNS)}")
    if how == "greet":
        result = greet(scene, spec.greet_config())
        return result.filter, result.waveform
    waveform = matched_phase_onebit_waveform(scene.geometry, scene.target.angle, scene.code_length)
    if how == "mvdr":
        return mvdr_filter(waveform, scene), waveform
    return Filter.matched(scene, waveform), waveform


def run_noise_only_loss(spec: ExperimentSpec) -> RunResult:
    """Converter combinations C1 (ideal) to C4 (one-bit DAC and ADC) over a grid of N_r L."""
    scene = spec.scene()
    if scene.num_interferences:
        raise ExperimentError("noise-only loss needs a scene without interference")
    mc = spec.mc_config(trials=2000)

    rows = []
    for nrl in spec.grid_values("nrl", [40, 100, 500, 1000, 2000], int):
        code_length = max(1, round(nrl / scene.n_rx))
        cell = scene.with_code_length(code_length)
        ideal = matched_phase_waveform(cell.geometry, cell.target.angle, code_length)
        onebit = matched_phase_onebit_waveform(cell.geometry, cell.target.angle, code_length)
        w_ideal, w_onebit = Filter.matched(cell, ideal), Filter.matched(cell, onebit)
        c3_mc = qsinr_mc(w_ideal, ideal, cell, mc)
        c4_mc = qsinr_mc(w_onebit, onebit, cell, mc)
        returns = math.sqrt(cell.target.power) * target_response(cell, ideal)
        rows.append(
            {
                "nrl": cell.snapshot_dim,
                "code_length": code_length,
                "c1_db": to_db(infinite_bit_sinr(w_ideal, ideal, cell)),
                "c2_db": to_db(infinite_bit_sinr(w_onebit, onebit, cell)),
                "c3_db": to_db(qsinr(w_ideal, ideal, cell)),
                "c4_db": to_db(qsinr(w_onebit, onebit, cell)),
                "c3_mc_db": to_db(c3_mc.estimate),
                "c4_mc_db": to_db(c4_mc.estimate),
                "c3_mc_stderr": c3_mc.stderr,
                "c4_mc_stderr": c4_mc.stderr,
                "per_sample_snr_db": to_db(cell.target.power / (cell.snapshot_dim * cell.noise_power)),
                "lis_margin_db": lis_margin_db(returns, cell.noise_power),
            }
        )
        logger.info(f"noise-only loss N_rL={cell.snapshot_dim}: C4 {rows[-1]['c4_db']:.2f} dB, MC {rows[-1]['c4_mc_db']:.2f} dB")

    return RunResult(tables={"noise_loss": pd.DataFrame(rows)}, parameters=_parameters(spec, scene, trials=mc.trials))


def run_detection_curves(spec: ExperimentSpec) -> RunResult:
    """P_f versus threshold, P_d versus target power and ROC tables, analytic with Monte Carlo where feasible."""
    scene = spec.scene()
    mc = spec.mc_config(trials=20_000)
    how = spec.grid_values("design", ["mvdr" if scene.num_interferences else "matched"], str)[0]
    w, waveform = _design(spec, scene, how)
    power_in = sigma_in_sq(w, waveform, scene)
    floor = 10.0 / mc.trials

    thresholds = np.linspace(0.0, threshold_for_pf(DESK_PF, power_in), 25)
    pf_analytic = np.array([pf(t, power_in) for t in thresholds])
    feasible = pf_analytic >= floor
    pf_mc = np.full(thresholds.size, np.nan)
    pf_stderr = np.full(thresholds.size, np.nan)
    if not feasible.all():
        logger.warning(f"P_f below 10/trials = {floor:.1e} at {int((~feasible).sum())} thresholds; analytic values only there")
    if feasible.any():
        estimate = empirical_pf(w, waveform, scene, thresholds[feasible], mc)
        pf_mc[feasible], pf_stderr[feasible] = estimate.estimate, estimate.stderr
    pf_table = pd.DataFrame(
        {"threshold": thresholds, "pf": pf_analytic, "pf_mc": pf_mc, "pf_mc_stderr": pf_stderr, "sigma_in_sq": power_in}
    )

    pd_rows = []
    for target_pf in spec.grid_values("pf", [1e-2, 1e-4, DESK_PF]):
        simulate = target_pf >= floor
        if not simulate:
            logger.warning(f"P_f={target_pf:g} is below 10/trials; reporting analytic P_d only")
        for power_db in spec.grid_values("power_db", list(np.arange(-10.0, 21.0, 2.0))):
            cell = scene.with_target(scene.target.with_power(from_db(power_db)))
            report = detection_report(w, waveform, cell, target_pf)
            row = {"pf": target_pf, "power_db": power_db, "qsinr_db": to_db(report.qsinr), "pd": report.pd}
            if simulate:
                estimate = empirical_pd(w, waveform, cell, report.threshold, mc)
                row.update(pd_mc=estimate.estimate, pd_mc_stderr=estimate.stderr)
            else:
                row.update(pd_mc=np.nan, pd_mc_stderr=np.nan)
            pd_rows.append(row)

    roc_rows = []
    pf_grid = np.logspace(-6, 0, 25)
    for power_db in spec.grid_values("roc_power_db", [0.0, 5.0, 10.0]):
        cell = scene.with_target(scene.target.with_power(from_db(power_db)))
        value = qsinr(w, waveform, cell)
        for p_false, p_detect in roc_curve(value, cell.target.kind, pf_grid):
            roc_rows.append({"power_db": power_db, "qsinr_db": to_db(value), "pf": p_false, "pd": p_detect})

    tables = {"detect_pf": pf_table, "detect_pd": pd.DataFrame(pd_rows), "detect_roc": pd.DataFrame(roc_rows)}
    return RunResult(tables=tables, parameters=_parameters(spec, scene, design=how, trials=mc.trials))


def run_codesign(spec: ExperimentSpec) -> RunResult:
    """GREET over an (interference power, angle uncertainty) grid, with the designs saved to disk."""
    scene = spec.scene()
    if not scene.num_interferences:
        raise ExperimentError("co-design needs a scene with at least one interferer")
    config = spec.greet_config()
    out = spec.prepare_output()
    first = scene.interferences[0]
    cells = [
        (power_db, delta)
        for power_db in spec.grid_values("power_db", [to_db(first.power)])
        for delta in spec.grid_values("delta", [first.uncertainty])
    ]

    def design(cell: Tuple[float, float]):
        power_db, delta = cell
        variant = scene.replace_interference(power=from_db(power_db), delta=delta)
        return variant, greet(variant, config)

    results = map_cells(design, cells, _workers(spec), "codesign")

    rows, traces, diagnostics, artifacts = [], [], [], [save_scene(scene, out / "codesign_scene.yaml")]
    for (power_db, delta), (variant, result) in zip(cells, results):
        stem = f"codesign_p{power_db:g}_d{delta:g}"
        artifacts.append(write_waveform(result.waveform, out / f"{stem}.wave"))
        artifacts.append(write_filter(result.filter, out / f"{stem}_filter.csv"))
        report = detection_report(result.filter, result.waveform, variant, DESK_PF)
        trail = result.diagnostics
        rows.append(
            {
                "interference_power_db": power_db,
                "delta": delta,
                "qsinr_db": result.qsinr_db,
                "initial_qsinr_db": to_db(trail.qsinr_trace[0]),
                "pd": report.pd,
                "pd_pf": DESK_PF,
                "admm_iterations": trail.admm_iterations,
                "residual_d": trail.residual_d[-1],
                "residual_c1": trail.residual_c1[-1],
                "residual_c2": trail.residual_c2[-1],
                "one_bit": result.waveform.one_bit,
                "waveform_file": f"{stem}.wave",
            }
        )
        frame = trail.qsinr_frame()
        frame.insert(0, "delta", delta)
        frame.insert(0, "interference_power_db", power_db)
        traces.append(frame)
        frame = trail.admm_frame()
        frame.insert(0, "delta", delta)
        frame.insert(0, "interference_power_db", power_db)
        diagnostics.append(frame)
        logger.info(f"codesign power {power_db:g} dB, delta {delta:g}: QSINR {result.qsinr_db:.2f} dB")

    tables = {
        "codesign": pd.DataFrame(rows),
        "codesign_trace": pd.concat(traces, ignore_index=True),
        "codesign_diagnostics": pd.concat(diagnostics, ignore_index=True),
    }
    parameters = _parameters(spec, scene, rho1=config.rho1, rho2=config.rho2, max_admm_iters=config.max_admm_iters)
    return RunResult(tables=tables, parameters=parameters, artifacts=artifacts)


def run_mc_validate(spec: ExperimentSpec) -> RunResult:
    """Moment approximation errors, sigma_in^2, the P_f curve and the high-SNR QSINR ceiling against simulation."""
    scene = spec.scene()
    mc = spec.mc_config(trials=100_000)
    sigma_sq = scene.noise_power

    prop1_mc = spec.mc_config(trials=1_000_000, block_size=50_000)
    prop1_rows = []
    for snr_db in spec.grid_values("snr_db", [-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0]):
        part = math.sqrt(from_db(snr_db) * sigma_sq / 2)
        rae = prop1_rae(complex(part, part), sigma_sq, prop1_mc)
        prop1_rows.append(
            {
                "snr_db": snr_db,
                "rae_mean": rae.rae_mean,
                "rae_var": rae.rae_var,
                "margin_mean": rae.margin_mean,
                "margin_var": rae.margin_var,
                "exact_rae_mean": rae.exact_rae_mean,
                "exact_rae_var": rae.exact_rae_var,
                "trials": prop1_mc.trials,
            }
        )

    waveform = matched_phase_onebit_waveform(scene.geometry, scene.target.angle, scene.code_length)
    w = mvdr_filter(waveform, scene) if scene.num_interferences else Filter.matched(scene, waveform)
    power_in = sigma_in_sq(w, waveform, scene)
    measured = output_power_mc(w, waveform, scene, mc, Hypothesis.H0)
    sigma_table = pd.DataFrame(
        [
            {
                "sigma_in_sq": power_in,
                "sigma_in_sq_mc": measured.estimate,
                "stderr": measured.stderr,
                "z_score": (measured.estimate - power_in) / measured.stderr,
                "trials": mc.trials,
            }
        ]
    )

    pf_targets = np.geomspace(max(1e-2, 30.0 / mc.trials), 0.9, 20)
    thresholds = np.array([threshold_for_pf(p, power_in) for p in pf_targets])
    estimate = empirical_pf(w, waveform, scene, thresholds, mc)
    binomial = np.sqrt(pf_targets * (1 - pf_targets) / mc.trials)
    pf_table = pd.DataFrame(
        {
            "threshold": thresholds,
            "pf": pf_targets,
            "pf_mc": estimate.estimate,
            "pf_mc_stderr": estimate.stderr,
            "z_score": (estimate.estimate - pf_targets) / binomial,
        }
    )

    ceiling_mc = spec.mc_config(trials=10_000)
    ceiling_rows = []
    for nrl in spec.grid_values("asymptote_nrl", [64, 256], int):
        code_length = max(1, round(nrl / scene.n_rx))
        for snr_db in spec.grid_values("asymptote_snr_db", [-20.0, -10.0, 0.0, 10.0, 20.0]):
            cell = RadarScene(
                geometry=scene.geometry,
                target=TargetModel.nft(0.0, math.sqrt(from_db(snr_db) * scene.n_rx * code_length * sigma_sq)),
                noise_power=sigma_sq,
                code_length=code_length,
            )
            onebit = matched_phase_onebit_waveform(cell.geometry, 0.0, code_length)
            matched = Filter.matched(cell, onebit)
            value = qsinr_mc(matched, onebit, cell, ceiling_mc)
            ceiling_rows.append(
                {
                    "nrl": cell.snapshot_dim,
                    "per_sample_snr_db": snr_db,
                    "target_power_db": to_db(cell.target.power),
                    "qsinr_mc_db": to_db(value.estimate),
                    "qsinr_mc_stderr": value.stderr,
                    "qsinr_db": to_db(qsinr(matched, onebit, cell)),
                    "infinite_bit_db": to_db(infinite_bit_sinr(matched, onebit, cell)),
                    "ceiling_db": to_db(cell.snapshot_dim - 1),
                }
            )

    tables = {
        "validate_prop1": pd.DataFrame(prop1_rows),
        "validate_sigma_in": sigma_table,
        "validate_pf": pf_table,
        "validate_asymptote": pd.DataFrame(ceiling_rows),
    }
    return RunResult(tables=tables, parameters=_parameters(spec, scene, trials=mc.trials))


def parse_array(text: str) -> Tuple[int, int]:
    """``"4x8"`` to (N_t, N_r)."""
    n_tx, sep, n_rx = text.lower().partition("x")
    if not sep:
        raise ValueError(f"array {text!r} is not of the form <N_t>x<N_r>")
    return int(n_tx), int(n_rx)


def run_uncertainty_sweep(spec: ExperimentSpec) -> RunResult:
    """GREET QSINR over angle uncertainties for several array sizes."""
    scene = spec.scene()
    if not scene.num_interferences:
        raise ExperimentError("the uncertainty sweep needs a scene with at least one interferer")
    config = spec.greet_config()
    cells = [
        (array, delta, power_db)
        for array in spec.grid_values("arrays", ["4x8", "8x16"], parse_array)
        for power_db in spec.grid_values("power_db", [30.0])
        for delta in spec.grid_values("deltas", [0.0, 0.1, 0.2])
    ]

    def design(cell):
        (n_tx, n_rx), delta, power_db = cell
        geometry = ArrayGeometry.uniform_linear(n_tx, n_rx, wavelength=scene.geometry.wavelength)
        variant = scene.with_geometry(geometry).replace_interference(power=from_db(power_db), delta=delta)
        result = greet(variant, config)
        logger.info(f"sweep {n_tx}x{n_rx}, delta {delta:g}: QSINR {result.qsinr_db:.2f} dB")
        return {
            "n_tx": n_tx,
            "n_rx": n_rx,
            "delta": delta,
            "interference_power_db": power_db,
            "qsinr_db": result.qsinr_db,
            "initial_qsinr_db": to_db(result.diagnostics.qsinr_trace[0]),
        }

    rows = map_cells(design, cells, _workers(spec), "sweep")
    return RunResult(tables={"sweep": pd.DataFrame(rows)}, parameters=_parameters(spec, scene, rho1=config.rho1, rho2=config.rho2))


RUNNERS: Dict[ExperimentKind, Callable[[ExperimentSpec], RunResult]] = {
    ExperimentKind.NOISE_ONLY_LOSS: run_noise_only_loss,
    ExperimentKind.DETECTION_CURVES: run_detection_curves,
    ExperimentKind.CODESIGN: run_codesign,
    ExperimentKind.MC_VALIDATE: run_mc_validate,
    ExperimentKind.UNCERTAINTY_SWEEP: run_uncertainty_sweep,
}


def run_experiment(spec: ExperimentSpec) -> RunResult:
    logger.info(f"Running {spec.kind.value} on {spec.scene_path} (seed {spec.seed})")
    return RUNNERS[spec.kind](spec)

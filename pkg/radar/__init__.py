from radar.geometry import (
    ArrayGeometry,
    adjoint_response,
    channel_matrix,
    response,
    rx_steering,
    steering_from_normalized,
    tx_steering,
)
from radar.scene import InterferenceSource, RadarScene, TargetKind, TargetModel, noise_free_returns
from radar.scene_file import load_scene, save_scene, scene_from_dict, scene_parameters, scene_to_dict
from radar.waveform import (
    Waveform,
    lis_margin_db,
    matched_phase_onebit_waveform,
    matched_phase_waveform,
    one_bit_quantize,
    residual_phases,
    transmit_beampattern,
)

__all__ = [
    "ArrayGeometry",
    "adjoint_response",
    "InterferenceSource",
    "RadarScene",
    "TargetKind",
    "TargetModel",
    "Waveform",
    "channel_matrix",
    "lis_margin_db",
    "load_scene",
    "save_scene",
    "scene_to_dict",
    "matched_phase_onebit_waveform",
    "matched_phase_waveform",
    "noise_free_returns",
    "one_bit_quantize",
    "residual_phases",
    "response",
    "rx_steering",
    "scene_from_dict",
    "scene_parameters",
    "steering_from_normalized",
    "transmit_beampattern",
    "tx_steering",
]

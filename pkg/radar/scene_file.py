"""
YAML scene files.

A scene document looks like::

    version: 1
    geometry: {n_tx: 8, n_rx: 5}          # half-wavelength ULA, wavelength 1
    target: {angle_deg: 22, kind: nft, power_db: 20}
    interferences:
      - {angle_deg: -48, delta: 0.1, power_db: 30}
    noise_power_db: 0
    code_length: 16

See scenes/README.md for every key.
"""
import cmath
import copy
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, ValidationError, field_validator, model_validator

from radar.geometry import ArrayGeometry
from radar.scene import InterferenceSource, RadarScene, TargetKind, TargetModel
from utils.constants import SCENE_SCHEMA_VERSION
from utils.exceptions import InvalidSceneError
from utils.units import from_db, to_db

logger = logging.getLogger(__name__)


def _power(linear: Optional[float], db: Optional[float], what: str, default: Optional[float] = None) -> float:
    if linear is not None and db is not None:
        raise InvalidSceneError(f"{what}: give either power or power_db, not both")
    if db is not None:
        return from_db(db)
    if linear is not None:
        return linear
    if default is None:
        raise InvalidSceneError(f"{what}: power or power_db is required")
    return default


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GeometryDocument(_Document):
    n_tx: Optional[PositiveInt] = None
    n_rx: Optional[PositiveInt] = None
    tx_positions: Optional[List[float]] = None
    rx_positions: Optional[List[float]] = None
    spacing: Optional[PositiveFloat] = None
    wavelength: PositiveFloat = 1.0

    @model_validator(mode="after")
    def _counts_or_positions(self):
        if self.tx_positions is None and self.n_tx is None:
            raise ValueError("geometry needs n_tx or tx_positions")
        if self.rx_positions is None and self.n_rx is None:
            raise ValueError("geometry needs n_rx or rx_positions")
        return self

    def build(self) -> ArrayGeometry:
        spacing = self.wavelength / 2 if self.spacing is None else self.spacing
        tx = self.tx_positions if self.tx_positions is not None else [k * spacing for k in range(self.n_tx)]
        rx = self.rx_positions if self.rx_positions is not None else [k * spacing for k in range(self.n_rx)]
        return ArrayGeometry(tx_positions=tx, rx_positions=rx, wavelength=self.wavelength)


class TargetDocument(_Document):
    angle_deg: float = Field(ge=-90, le=90)
    kind: TargetKind = TargetKind.NFT
    power: Optional[NonNegativeFloat] = None
    power_db: Optional[float] = None
    phase_deg: float = 0.0

    def build(self) -> TargetModel:
        power = _power(self.power, self.power_db, "target")
        angle = math.radians(self.angle_deg)
        if self.kind is TargetKind.RFT:
            return TargetModel.rft(angle, power)
        return TargetModel.nft(angle, cmath.rect(math.sqrt(power), math.radians(self.phase_deg)))


class InterferenceDocument(_Document):
    angle_deg: Optional[float] = Field(default=None, ge=-90, le=90)
    normalized_angle: Optional[float] = Field(default=None, ge=-1, le=1)
    delta: float = Field(default=0.0, ge=0)
    power: Optional[PositiveFloat] = None
    power_db: Optional[float] = None

    @model_validator(mode="after")
    def _one_angle(self):
        if (self.angle_deg is None) == (self.normalized_angle is None):
            raise ValueError("interference needs exactly one of angle_deg or normalized_angle")
        return self

    def build(self) -> InterferenceSource:
        varpi = self.normalized_angle if self.normalized_angle is not None else math.sin(math.radians(self.angle_deg))
        return InterferenceSource(
            mean_normalized_angle=varpi,
            uncertainty=self.delta,
            power=_power(self.power, self.power_db, "interference"),
        )


class SceneDocument(_Document):
    version: int
    name: Optional[str] = None
    geometry: GeometryDocument
    target: TargetDocument
    interferences: List[InterferenceDocument] = Field(default_factory=list)
    noise_power: Optional[PositiveFloat] = None
    noise_power_db: Optional[float] = None
    code_length: PositiveInt

    @field_validator("version")
    @classmethod
    def _known_version(cls, value: int) -> int:
        if value != SCENE_SCHEMA_VERSION:
            raise ValueError(f"unsupported scene schema version {value}, expected {SCENE_SCHEMA_VERSION}")
        return value

    def build(self) -> RadarScene:
        return RadarScene(
            geometry=self.geometry.build(),
            target=self.target.build(),
            interferences=tuple(source.build() for source in self.interferences),
            noise_power=_power(self.noise_power, self.noise_power_db, "noise", default=1.0),
            code_length=self.code_length,
        )


def apply_overrides(document: Dict[str, Any], overrides: Optional[Mapping[str, str]]) -> Dict[str, Any]:
    """
    Apply dotted-path overrides such as ``target.angle_deg=0`` or
    ``interferences.1.delta=0.2``. Values are parsed as YAML scalars.
    """
    document = copy.deepcopy(document)
    for path, raw in (overrides or {}).items():
        value = yaml.safe_load(raw) if isinstance(raw, str) else raw
        keys = path.split(".")
        node: Any = document
        try:
            for key in keys[:-1]:
                node = node[int(key)] if isinstance(node, list) else node.setdefault(key, {})
            last = keys[-1]
            if isinstance(node, list):
                node[int(last)] = value
            else:
                node[last] = value
        except (IndexError, ValueError, TypeError, AttributeError) as exc:
            raise InvalidSceneError(f"cannot apply override {path}={raw!r}: {exc}") from exc
        logger.debug(f"Scene override {path}={value!r}")
    return document


def scene_from_dict(document: Mapping[str, Any], overrides: Optional[Mapping[str, str]] = None) -> RadarScene:
    document = apply_overrides(dict(document), overrides)
    try:
        return SceneDocument.model_validate(document).build()
    except ValidationError as exc:
        raise InvalidSceneError(str(exc)) from exc


def load_scene(path: Union[str, Path], overrides: Optional[Mapping[str, str]] = None) -> RadarScene:
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidSceneError(f"cannot read scene file {path}: {exc}") from exc
    if not isinstance(document, dict):
        raise InvalidSceneError(f"scene file {path} does not contain a mapping")
    scene = scene_from_dict(document, overrides)
    logger.info(f"Loaded scene {path.name}: N_t={scene.n_tx}, N_r={scene.n_rx}, L={scene.code_length}, K={scene.num_interferences}")
    return scene


def scene_parameters(scene: RadarScene) -> Dict[str, Any]:
    """Flat, CSV-friendly description of a scene; powers in dB."""
    params: Dict[str, Any] = {
        "n_tx": scene.n_tx,
        "n_rx": scene.n_rx,
        "code_length": scene.code_length,
        "wavelength": scene.geometry.wavelength,
        "target_angle_deg": math.degrees(scene.target.angle),
        "target_kind": scene.target.kind.value,
        "target_power_db": to_db(scene.target.power),
        "noise_power_db": to_db(scene.noise_power),
        "num_interferences": scene.num_interferences,
    }
    for k, source in enumerate(scene.interferences, start=1):
        params[f"interference{k}_varpi"] = source.mean_normalized_angle
        params[f"interference{k}_delta"] = source.uncertainty
        params[f"interference{k}_power_db"] = to_db(source.power)
    return params


def scene_to_dict(scene: RadarScene) -> Dict[str, Any]:
    """Scene document that ``scene_from_dict`` turns back into the same scene."""
    target = scene.target
    if target.kind is TargetKind.RFT:
        target_doc = {"angle_deg": math.degrees(target.angle), "kind": "rft", "power": target.variance}
    else:
        target_doc = {
            "angle_deg": math.degrees(target.angle),
            "kind": "nft",
            "power": abs(target.amplitude) ** 2,
            "phase_deg": math.degrees(cmath.phase(target.amplitude)),
        }
    return {
        "version": SCENE_SCHEMA_VERSION,
        "geometry": {
            "tx_positions": scene.geometry.tx_positions.tolist(),
            "rx_positions": scene.geometry.rx_positions.tolist(),
            "wavelength": scene.geometry.wavelength,
        },
        "target": target_doc,
        "interferences": [
            {"normalized_angle": source.mean_normalized_angle, "delta": source.uncertainty, "power": source.power}
            for source in scene.interferences
        ],
        "noise_power": scene.noise_power,
        "code_length": scene.code_length,
    }


def save_scene(scene: RadarScene, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(scene_to_dict(scene), sort_keys=False))
    return path

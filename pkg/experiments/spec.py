from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, ValidationError

from greet.config import GreetConfig
from montecarlo.config import McConfig
from radar.scene import RadarScene
from radar.scene_file import load_scene
from utils.exceptions import ExperimentError

T = TypeVar("T")


class ExperimentKind(str, Enum):
    NOISE_ONLY_LOSS = "noise-only-loss"
    DETECTION_CURVES = "detection-curves"
    CODESIGN = "codesign"
    MC_VALIDATE = "mc-validate"
    UNCERTAINTY_SWEEP = "uncertainty-sweep"


def parse_grid(text: Optional[str]) -> Dict[str, List[str]]:
    """
    Parse ``"power_db=20,30;delta=0,0.1"`` into ``{"power_db": ["20", "30"], "delta": ["0", "0.1"]}``.
    """
    grid: Dict[str, List[str]] = {}
    if not text:
        return grid
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, values = part.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ExperimentError(f"grid entry {part!r} is not of the form key=v1,v2")
        items = [value.strip() for value in values.split(",") if value.strip()]
        if not items:
            raise ExperimentError(f"grid entry {key!r} has no values")
        grid[key] = items
    return grid


def parse_overrides(items: Optional[Iterable[str]]) -> Dict[str, str]:
    """``["target.angle_deg=0", ...]`` to a dict of dotted paths."""
    overrides: Dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ExperimentError(f"override {item!r} is not of the form key.path=value")
        overrides[key.strip()] = value.strip()
    return overrides


class ExperimentSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ExperimentKind
    scene_path: Path
    overrides: Dict[str, str] = Field(default_factory=dict)
    output_dir: Path
    seed: NonNegativeInt = 0
    trials: Optional[PositiveInt] = None
    workers: Optional[PositiveInt] = None
    grid: Dict[str, List[str]] = Field(default_factory=dict)
    greet: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_options(cls, kind: ExperimentKind, options: Dict[str, Any]) -> "ExperimentSpec":
        """Build a spec from management-command options."""
        greet = {
            field: options.get(option)
            for option, field in (
                ("rho1", "rho1"),
                ("rho2", "rho2"),
                ("admm_iters", "max_admm_iters"),
                ("alt_iters", "max_altopt_iters"),
                ("restarts", "restarts"),
            )
            if options.get(option) is not None
        }
        try:
            return cls(
                kind=kind,
                scene_path=options["scene"],
                overrides=parse_overrides(options.get("set")),
                output_dir=options.get("out") or settings.EXPERIMENT_OUTPUT_DIR,
                seed=options.get("seed") or 0,
                trials=options.get("trials"),
                workers=options.get("workers"),
                grid=parse_grid(options.get("grid")),
                greet=greet,
            )
        except ValidationError as exc:
            raise ExperimentError(f"invalid experiment options: {exc.errors()[0]['msg']}") from exc

    def scene(self) -> RadarScene:
        """Load the scene; bare names also resolve against the bundled scene directory."""
        path = self.scene_path
        if not path.exists() and (settings.SCENE_DIR / path).exists():
            path = settings.SCENE_DIR / path
        return load_scene(path, self.overrides)

    def mc_config(self, trials: Optional[int] = None, **changes) -> McConfig:
        """
        Monte Carlo config for a runner. Trial count precedence: --trials, then
        ONEBIT_TRIALS, then the runner default ``trials``, then McConfig.
        """
        values = {"seed": self.seed, **settings.MC_DEFAULTS}
        values["trials"] = self.trials or settings.MC_DEFAULTS["trials"] or trials
        if values["trials"] is None:
            del values["trials"]
        if self.workers is not None:
            values["workers"] = self.workers
        values.update(changes)
        return McConfig(**values)

    def greet_config(self, **changes) -> GreetConfig:
        values = {"seed": self.seed, **settings.GREET_DEFAULTS, **self.greet, **changes}
        try:
            return GreetConfig(**values)
        except ValidationError as exc:
            raise ExperimentError(f"invalid GREET options: {exc.errors()[0]['msg']}") from exc

    def grid_values(self, key: str, default: List[T], cast: Callable[[str], T] = float) -> List[T]:
        if key not in self.grid:
            return list(default)
        try:
            return [cast(value) for value in self.grid[key]]
        except ValueError as exc:
            raise ExperimentError(f"grid values for {key!r} are invalid: {exc}") from exc

    def prepare_output(self) -> Path:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ExperimentError(f"cannot create output directory {self.output_dir}: {exc}") from exc
        return self.output_dir

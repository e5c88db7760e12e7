"""
Run configuration: one JSON document parsed into frozen dataclasses.

Angles are given in degrees and frequencies in Hz in the document; the
dataclasses expose radians and rad/s through properties.
"""

from __future__ import annotations

import json
import math
import typing
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar, Union

from measure.NoiseModel import NOISE_CHANNELS, NoiseModel
from spin.evolution import PULSE_MODELS, PulseProgram
from spin.Hamiltonian import TWO_PI, LossModel

T = TypeVar("T")

DEFAULT_THETAS_DEG = (-2.5, -1.5, -0.5, 0.0, 0.5, 1.5, 2.5, 3.5)


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 1)."""


def _check_value(value: Any, hint: Any, where: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _check_value(value, inner[0], where)
    if origin in (tuple, Tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list, got {type(value).__name__}")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_check_value(v, args[0], f"{where}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(f"{where}: expected {len(args)} entries, got {len(value)}")
        return tuple(_check_value(v, a, f"{where}[{i}]") for i, (v, a) in enumerate(zip(value, args)))
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{where}: unsupported field type {hint}")


def _section(cls: Type[T], data: Any, name: str) -> T:
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{name}: unknown keys {unknown}")
    kwargs = {key: _check_value(value, hints[key], f"{name}.{key}") for key, value in data.items()}
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(f"{name}: {e}") from e


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class ExperimentConfig:
    n_atoms: int = 430
    lambda_: float = 1.5
    omega_hz: float = 20.0
    delta_hz: float = 0.0
    evolution_times_ms: Tuple[float, ...] = (25.0,)
    alphas_deg: Tuple[float, ...] = (58.0,)
    thetas_deg: Tuple[float, ...] = DEFAULT_THETAS_DEG

    def __post_init__(self):
        _require(self.n_atoms >= 1, f"n_atoms must be >= 1, got {self.n_atoms}")
        _require(self.lambda_ >= 0, f"lambda_ must be >= 0, got {self.lambda_}")
        _require(self.omega_hz > 0, f"omega_hz must be > 0, got {self.omega_hz}")
        _require(len(self.evolution_times_ms) > 0, "evolution_times_ms is empty")
        _require(all(t >= 0 for t in self.evolution_times_ms), "evolution times must be >= 0")
        _require(len(self.alphas_deg) > 0, "alphas_deg is empty")
        _require(len(self.thetas_deg) > 0, "thetas_deg is empty")
        for name in ("evolution_times_ms", "alphas_deg", "thetas_deg"):
            values = getattr(self, name)
            _require(len(set(values)) == len(values), f"{name} has duplicate entries")

    @property
    def omega(self) -> float:
        return TWO_PI * self.omega_hz

    @property
    def evolution_times(self) -> Tuple[float, ...]:
        return tuple(t * 1e-3 for t in self.evolution_times_ms)

    @property
    def alphas(self) -> Tuple[float, ...]:
        return tuple(math.radians(a) for a in self.alphas_deg)

    @property
    def thetas(self) -> Tuple[float, ...]:
        return tuple(math.radians(t) for t in self.thetas_deg)


@dataclass(frozen=True)
class LossConfig:
    """Atom loss; tau_ms = None disables it"""

    tau_ms: Optional[float] = None
    delta_n_hz: float = 0.0

    def __post_init__(self):
        _require(self.tau_ms is None or self.tau_ms > 0, f"tau_ms must be > 0, got {self.tau_ms}")

    def loss_model(self, experiment: ExperimentConfig) -> LossModel:
        n = experiment.n_atoms
        return LossModel(
            n0=n,
            tau=math.inf if self.tau_ms is None else self.tau_ms * 1e-3,
            chi0=experiment.lambda_ * experiment.omega / n,
            delta0=experiment.delta_hz,
            delta_n=self.delta_n_hz,
        )


@dataclass(frozen=True)
class PulseConfig:
    model: str = "with-nonlinearity"
    preparation_rabi_hz: float = 320.0
    echo_rabi_hz: float = 320.0
    tomography_rabi_hz: float = 320.0
    rotation_rabi_hz: float = 160.0
    phase_offset_deg: float = 3.0
    spin_echo: bool = True

    def __post_init__(self):
        _require(self.model in PULSE_MODELS, f"model must be one of {PULSE_MODELS}, got {self.model!r}")
        for name in ("preparation_rabi_hz", "echo_rabi_hz", "tomography_rabi_hz", "rotation_rabi_hz"):
            _require(getattr(self, name) > 0, f"{name} must be > 0, got {getattr(self, name)}")

    def program(self) -> PulseProgram:
        return PulseProgram(
            preparation_rabi=TWO_PI * self.preparation_rabi_hz,
            echo_rabi=TWO_PI * self.echo_rabi_hz,
            tomography_rabi=TWO_PI * self.tomography_rabi_hz,
            rotation_rabi=TWO_PI * self.rotation_rabi_hz,
            phase_offset=math.radians(self.phase_offset_deg),
            model=self.model,
            spin_echo=self.spin_echo,
        )


@dataclass(frozen=True)
class NoiseConfig:
    """Gaussian atom-number noise; `apply` selects the channel convolved before sampling"""

    sigma_det: float = 6.0
    sigma_loss: float = 10.0
    apply: str = "det"

    def __post_init__(self):
        _require(self.apply in NOISE_CHANNELS, f"apply must be one of {NOISE_CHANNELS}, got {self.apply!r}")

    def model(self) -> NoiseModel:
        return NoiseModel(sigma_det=self.sigma_det, sigma_loss=self.sigma_loss)


@dataclass(frozen=True)
class SamplingConfig:
    m_reference: int = 2000
    m_rotated: int = 500
    seed: int = 0
    write_exact: bool = False

    def __post_init__(self):
        _require(self.m_reference >= 1, f"m_reference must be >= 1, got {self.m_reference}")
        _require(self.m_rotated >= 1, f"m_rotated must be >= 1, got {self.m_rotated}")
        _require(self.seed >= 0, f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class AnalysisConfig:
    """bin_width = None selects 4/N"""

    bin_width: Optional[float] = None
    jackknife_block_sizes: Optional[Tuple[int, ...]] = None
    jackknife_max_block: int = 20
    fit_degree: int = 3
    bayes: bool = True
    bayes_holdout: int = 1000
    bayes_m_values: Tuple[int, ...] = (1, 2, 5, 10, 20, 50, 100, 200)
    tomography: bool = True
    mle_max_iterations: int = 5000
    mle_tol: float = 1e-10  # bound on lambda_max(R) - 1
    husimi_grid: int = 255

    def __post_init__(self):
        _require(self.bin_width is None or self.bin_width > 0, f"bin_width must be > 0, got {self.bin_width}")
        _require(self.fit_degree in (2, 3, 4), f"fit_degree must be 2, 3 or 4, got {self.fit_degree}")
        _require(self.jackknife_max_block >= 1, "jackknife_max_block must be >= 1")
        _require(self.bayes_holdout >= 1, "bayes_holdout must be >= 1")
        _require(all(m >= 1 for m in self.bayes_m_values), "bayes_m_values must be >= 1")
        _require(self.mle_max_iterations >= 1, "mle_max_iterations must be >= 1")
        _require(self.husimi_grid >= 2, "husimi_grid must be >= 2")

    def analysis_width(self, n_atoms: int) -> float:
        return 4.0 / n_atoms if self.bin_width is None else self.bin_width


@dataclass(frozen=True)
class PhaseSpaceConfig:
    """Starting points are [z, phi_deg] pairs"""

    lambda_: Optional[float] = None
    delta_over_omega: float = 0.0
    trajectories: Tuple[Tuple[float, float], ...] = ()
    t_max_ms: float = 200.0
    dt_ms: float = 0.1
    n_phi: int = 721

    def __post_init__(self):
        _require(self.lambda_ is None or self.lambda_ > 0, f"lambda_ must be > 0, got {self.lambda_}")
        _require(self.t_max_ms > 0 and self.dt_ms > 0, "t_max_ms and dt_ms must be > 0")
        _require(self.n_phi >= 4, f"n_phi must be >= 4, got {self.n_phi}")
        for z, _ in self.trajectories:
            _require(abs(z) <= 1.0, f"trajectory start z={z} outside [-1, 1]")


@dataclass(frozen=True)
class RunConfig:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    pulses: PulseConfig = field(default_factory=PulseConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    phasespace: PhaseSpaceConfig = field(default_factory=PhaseSpaceConfig)
    output_dir: str = "out"

    _SECTIONS = {
        "experiment": ExperimentConfig,
        "loss": LossConfig,
        "pulses": PulseConfig,
        "noise": NoiseConfig,
        "sampling": SamplingConfig,
        "analysis": AnalysisConfig,
        "phasespace": PhaseSpaceConfig,
    }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """
        Validate a parsed document

        Keys named ``lambda`` are accepted for the ``lambda_`` fields.

        Raises
        ------
        ConfigError
            On unknown keys, wrong types or out-of-range values
        """
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration must be a JSON object, got {type(data).__name__}")
        unknown = sorted(set(data) - set(cls._SECTIONS) - {"output_dir"})
        if unknown:
            raise ConfigError(f"Unknown top-level keys {unknown}")
        kwargs: Dict[str, Any] = {}
        for name, section_cls in cls._SECTIONS.items():
            section = data.get(name)
            if isinstance(section, dict) and "lambda" in section:
                section = {("lambda_" if k == "lambda" else k): v for k, v in section.items()}
            kwargs[name] = _section(section_cls, section, name)
        if "output_dir" in data:
            kwargs["output_dir"] = _check_value(data["output_dir"], str, "output_dir")
        return cls(**kwargs)

    def with_seed(self, seed: int) -> "RunConfig":
        try:
            return replace(self, sampling=replace(self.sampling, seed=seed))
        except ValueError as e:
            raise ConfigError(f"sampling: {e}") from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a UTF-8 JSON configuration file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}") from e
    return RunConfig.from_dict(data)

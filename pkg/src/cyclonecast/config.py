"""Run configuration with a strict schema: unknown keys are rejected so a
typo'd hyperparameter can never silently fall back to a default."""

import dataclasses
import json
from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass
class DatasetsConfig:
    atlantic: str | None = None
    pacific: str | None = None

    def paths(self):
        return [p for p in (self.atlantic, self.pacific) if p]


@dataclass
class WindowsConfig:
    regression: int = 5
    classification: int = 4


@dataclass
class SplitSection:
    test_fraction: float = 0.20
    mode: str = "sample"  # or "storm"


@dataclass
class SmoteSection:
    enabled: bool = True
    k_neighbors: int = 5
    target_count: int | None = None


@dataclass
class GbrSection:
    n_stages: int = 300
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 1


@dataclass
class RfSection:
    n_trees: int = 200
    max_features: str | int = "sqrt"
    max_depth: int | None = None
    min_samples_leaf: int = 1
    bootstrap: bool = True
    subset_mode: str = "per_split"


@dataclass
class SvmSection:
    C: float = 1.0
    kernel: str = "rbf"
    gamma: str | float = "scale"
    tol: float = 1e-3
    max_iter: int = 200000


@dataclass
class MlpSection:
    hidden_layers: tuple = (64, 32)
    learning_rate: float = 0.01
    batch_size: int = 32
    epochs: int = 300
    l2: float = 1e-4


@dataclass
class ModelsSection:
    gbr: GbrSection = field(default_factory=GbrSection)
    rf: RfSection = field(default_factory=RfSection)
    svm: SvmSection = field(default_factory=SvmSection)
    mlp: MlpSection = field(default_factory=MlpSection)


@dataclass
class RunConfig:
    datasets: DatasetsConfig = field(default_factory=DatasetsConfig)
    seed: int = 0
    holdout_storm: str | None = "AL122005"
    windows: WindowsConfig = field(default_factory=WindowsConfig)
    split: SplitSection = field(default_factory=SplitSection)
    smote: SmoteSection = field(default_factory=SmoteSection)
    models: ModelsSection = field(default_factory=ModelsSection)
    threads: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_NESTED = {
    DatasetsConfig, WindowsConfig, SplitSection, SmoteSection,
    GbrSection, RfSection, SvmSection, MlpSection, ModelsSection, RunConfig,
}


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(
            f"{path or 'config'}: unknown key(s) {', '.join(map(repr, unknown))}; "
            f"allowed: {', '.join(sorted(fields))}"
        )
    kwargs = {}
    for name, value in data.items():
        f = fields[name]
        default_obj = f.default_factory() if f.default_factory is not dataclasses.MISSING else None
        if default_obj is not None and type(default_obj) in _NESTED:
            kwargs[name] = _build(type(default_obj), value, f"{path}{name}." if path else f"{name}.")
        elif name == "hidden_layers":
            if not isinstance(value, (list, tuple)) or not all(
                isinstance(v, int) and v > 0 for v in value
            ):
                raise ConfigError(f"{path}{name}: expected a list of positive ints")
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> RunConfig:
    return _build(RunConfig, data, "")


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)


def save_config(config: RunConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)

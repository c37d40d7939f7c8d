"""Schema of an experiment configuration file (a JSON document)."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.exceptions import ConfigValidationError

logger = logging.getLogger(__name__)


class DatasetConfig(BaseModel):
    """Where the image/label pairs live and how labels are encoded."""

    model_config = ConfigDict(extra="forbid")

    images_dir: Path
    labels_dir: Path
    num_classes: int = Field(ge=1)
    ignore_index: int = 255
    limit: Optional[int] = Field(default=None, ge=1)


class ModelRegistryEntry(BaseModel):
    """One model: an adapter kind plus inline parameters or a weights file.

    * ``toy-linear``: ``params = {"weights": [[...]], "biases": [...]}`` or a
      ``.npz`` weights file with the same keys
    * ``toy-conv``: ``params = {"architecture", "hidden", "depth", "seed"}``
      and optionally a state-dict ``weights`` file
    * ``external``: a TorchScript ``weights`` file
    """

    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    adapter: Literal["toy-linear", "toy-conv", "external"]
    params: Optional[Dict[str, Any]] = None
    weights: Optional[Path] = None
    num_classes: Optional[int] = Field(default=None, ge=1)
    in_channels: int = Field(default=3, ge=1)
    input_size: Optional[Tuple[int, int]] = None
    mean: Optional[List[float]] = None
    std: Optional[List[float]] = None


class AttackEntry(BaseModel):
    """A registered attack with its configuration.

    ``label`` keys the attack in results; it defaults to ``name`` and lets two
    configurations of one attack coexist in a matrix.
    """

    model_config = ConfigDict(extra="forbid")

    name: str
    label: Optional[str] = None
    config: AttackConfig = Field(default_factory=AttackConfig)

    @property
    def key(self) -> str:
        return self.label or self.name


class ExperimentConfig(BaseModel):
    """A source × attack × target transfer experiment."""

    model_config = ConfigDict(extra="forbid")

    dataset: DatasetConfig
    models: List[ModelRegistryEntry] = Field(min_length=1)
    attacks: List[AttackEntry] = Field(min_length=1)
    sources: List[str] = Field(min_length=1)
    targets: List[str] = Field(min_length=1)
    seed: int = 0
    output_dir: Path = Path("results")
    workers: int = Field(default=1, ge=1)
    quantize_adversarial: bool = False
    save_adversarial: bool = False

    def model_entry(self, model_id: str) -> ModelRegistryEntry:
        for entry in self.models:
            if entry.id == model_id:
                return entry
        raise KeyError(model_id)

    def snapshot(self) -> Dict[str, Any]:
        """JSON-compatible copy of the configuration."""
        return json.loads(self.model_dump_json())


def _format_error(error: Dict[str, Any]) -> str:
    location = ".".join(str(part) for part in error["loc"]) or "<root>"
    return f"{location}: {error['msg']}"


def _resolve(base: Path, path: Optional[Path]) -> Optional[Path]:
    if path is None or path.is_absolute():
        return path
    return base / path


def parse_experiment_config(data: Union[str, Dict[str, Any]], base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Parse and validate an experiment configuration.

    Relative paths are resolved against ``base_dir`` when given.

    Raises:
        ConfigValidationError: Listing every violated field
    """
    from segtransfer.utils.validation import validate_experiment_config

    try:
        if isinstance(data, str):
            config = ExperimentConfig.model_validate_json(data)
        else:
            config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError([_format_error(error) for error in e.errors()]) from e

    if base_dir is not None:
        config.dataset.images_dir = _resolve(base_dir, config.dataset.images_dir)
        config.dataset.labels_dir = _resolve(base_dir, config.dataset.labels_dir)
        config.output_dir = _resolve(base_dir, config.output_dir)
        for entry in config.models:
            entry.weights = _resolve(base_dir, entry.weights)

    validation = validate_experiment_config(config)
    if not validation["is_valid"]:
        raise ConfigValidationError(validation["issues"])
    return config


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read an experiment configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError([f"config: cannot read {path}: {e}"]) from e
    config = parse_experiment_config(text, base_dir=path.parent)
    logger.info(
        f"Loaded experiment config {path}: {len(config.sources)} sources, "
        f"{len(config.attacks)} attacks, {len(config.targets)} targets"
    )
    return config

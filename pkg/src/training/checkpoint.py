"""Checkpoint directories: ``manifest.json`` plus one DOTB file per array."""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..architectures.composite import ReconstructionModel, build_model
from ..autodiff.optim import Adam
from ..errors import DataIOError, ShapeMismatchError
from ..io.binary import read_array, write_array
from ..io.manifest import read_manifest, write_manifest
from ..schemas.manifest import CheckpointManifest, Normalization
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(eq=False)
class Checkpoint:
    """A restored model with the training state stored next to it"""

    model: ReconstructionModel
    manifest: CheckpointManifest
    optimizer_state: Optional[Dict[str, Any]] = None
    moments: Optional[Dict[str, np.ndarray]] = None

    @property
    def epoch(self) -> int:
        return self.manifest.epoch

    @property
    def phase(self) -> str:
        return self.manifest.phase

    def restore_optimizer(self, optimizer: Adam, names: List[str]) -> None:
        """Load stored Adam moments into an optimizer over the parameters ``names``"""
        if self.optimizer_state is None or self.moments is None:
            raise DataIOError("Checkpoint holds no optimizer state", phase=self.phase)
        stored = self.optimizer_state.get("parameters", [])
        if stored != names:
            raise ShapeMismatchError("Optimizer parameters differ from the checkpoint", stored=len(stored), given=len(names))
        optimizer.load_state(self.optimizer_state["hyperparameters"], self.moments)

    def restore_rng(self) -> Optional[np.random.Generator]:
        if self.manifest.rng_state is None:
            return None
        rng = np.random.Generator(np.random.PCG64())
        rng.bit_generator.state = self.manifest.rng_state
        return rng


def _file_name(name: str) -> str:
    return "params/" + name.replace("/", "_") + ".dotb"


def save_checkpoint(
    directory: Union[str, Path],
    model: ReconstructionModel,
    *,
    phase: str,
    epoch: int,
    loss_variant: str = "mse",
    noise_level: float = 0.0,
    normalization: Optional[Normalization] = None,
    optimizer: Optional[Adam] = None,
    optimizer_names: Optional[List[str]] = None,
    rng: Optional[np.random.Generator] = None,
    mask: Optional[np.ndarray] = None,
    config: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Persist every network parameter and, optionally, the optimizer and RNG state.

    Returns:
        Path: the checkpoint directory
    """
    directory = Path(directory)
    parameters = {}
    for name, tensor in model.named_parameters():
        file_name = _file_name(name)
        write_array(directory / file_name, tensor.data)
        parameters[name] = file_name

    optimizer_record: Dict[str, Any] = {}
    if optimizer is not None:
        moments = {}
        for key, array in optimizer.moments().items():
            file_name = f"optimizer/{key}.dotb"
            write_array(directory / file_name, array)
            moments[key] = file_name
        optimizer_record = {
            "hyperparameters": optimizer.hyperparameters(),
            "parameters": list(optimizer_names or []),
            "moments": moments,
        }

    mask_name = None
    if mask is not None:
        mask_name = "mask.dotb"
        write_array(directory / mask_name, np.asarray(mask, dtype=np.float64))

    manifest = CheckpointManifest(
        architecture=model.architecture,
        loss_variant=loss_variant,
        noise_level=noise_level,
        epoch=epoch,
        phase=phase,
        networks=[spec.record() for spec in model.networks.values()],
        parameters=parameters,
        optimizer=optimizer_record,
        rng_state=rng.bit_generator.state if rng is not None else None,
        normalization=normalization,
        image_shape=list(model.image_shape),
        mask=mask_name,
        config=config or {},
    )
    write_manifest(directory, manifest)
    logger.info("Checkpoint written", extra={"path": str(directory), "phase": phase, "epoch": epoch})
    return directory


def load_checkpoint(directory: Union[str, Path]) -> Checkpoint:
    """
    Rebuild the model of a checkpoint directory and load its weights.

    Raises:
        DataIOError: missing directory, manifest or parameter files
        ShapeMismatchError: stored arrays disagree with the rebuilt networks
    """
    directory = Path(directory)
    manifest = read_manifest(directory, CheckpointManifest)
    records = {record.name: record for record in manifest.networks}
    if "data_encoder" not in records:
        raise DataIOError("Checkpoint has no data encoder", path=str(directory))

    first = read_array(directory / manifest.parameters["data_encoder.0.weight"])
    model = build_model(
        manifest.architecture,
        image_shape=tuple(manifest.image_shape),
        n_measurements=records["data_encoder"].input_shape[0],
        latent_size=records["data_encoder"].output_shape[0],
        dtype=first.dtype,
        denoiser="denoiser" in records,
    )
    load_parameters(model, {name: read_array(directory / path) for name, path in manifest.parameters.items()})

    moments = None
    state = manifest.optimizer or None
    if state:
        moments = {key: read_array(directory / path) for key, path in state.get("moments", {}).items()}
    return Checkpoint(model=model, manifest=manifest, optimizer_state=state, moments=moments)


def load_parameters(model: ReconstructionModel, arrays: Dict[str, np.ndarray], strict: bool = True) -> None:
    """
    Copy arrays into the model parameters of the same name.

    With ``strict`` every model parameter must be supplied.
    """
    named = model.parameter_dict()
    if strict:
        missing = sorted(set(named) - set(arrays))
        if missing:
            raise ShapeMismatchError("Parameters missing from the stored weights", missing=", ".join(missing[:5]))
    for name, array in arrays.items():
        if name not in named:
            continue
        target = named[name]
        if array.shape != target.shape:
            raise ShapeMismatchError("Stored weight has the wrong shape", name=name, stored=array.shape, expected=target.shape)
        target.data = np.array(array, dtype=target.dtype)

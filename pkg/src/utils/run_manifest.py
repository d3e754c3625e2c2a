"""Run manifests: inputs with content hashes, arguments and produced artifacts."""
import hashlib
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field

from src.errors import SchemaError
from src.utils.documents import read_json, validate_document, write_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def file_sha256(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


class InputFile(BaseModel):
    path: str
    sha256: str


class RunManifest(BaseModel):
    """Everything needed to repeat a run."""

    command: str
    argv: List[str] = Field(default_factory=list)
    inputs: Dict[str, InputFile] = Field(default_factory=dict)
    arguments: Dict[str, Union[str, int, float, bool, None]] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)

    def add_input(self, role: str, path: Union[str, Path]) -> None:
        path = Path(path).absolute()
        self.inputs[role] = InputFile(path=str(path), sha256=file_sha256(path))

    def add_output(self, path: Union[str, Path], run_dir: Optional[Path] = None) -> None:
        path = Path(path)
        if run_dir is not None:
            try:
                path = path.relative_to(run_dir)
            except ValueError:
                pass
        self.outputs.append(str(path))

    def verify_hashes(self) -> List[str]:
        """Input roles whose file is missing or changed since the run."""
        changed = []
        for role, entry in self.inputs.items():
            path = Path(entry.path)
            if not path.exists() or file_sha256(path) != entry.sha256:
                changed.append(role)
        if changed:
            logger.warning(f"Inputs changed since the recorded run: {changed}")
        return changed

    def write(self, run_dir: Union[str, Path]) -> Path:
        return write_json(Path(run_dir) / MANIFEST_NAME, self.model_dump(mode="json"))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunManifest":
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_NAME
        return validate_document(read_json(path), cls, str(path))


class Stopwatch:
    """Named wall-clock timings recorded into a manifest."""

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest

    def __call__(self, name: str):
        return _Timing(self.manifest, name)


class _Timing:
    def __init__(self, manifest: RunManifest, name: str):
        self.manifest = manifest
        self.name = name
        self.started = 0.0

    def __enter__(self):
        self.started = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.manifest.timings[self.name] = round(time.monotonic() - self.started, 6)
        return False


def new_run_directory(base: Union[str, Path], command: str) -> Path:
    """Create a fresh run directory named after the command and the current time."""
    base = Path(base)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    candidate = base / f"{command}-{stamp}"
    suffix = 1
    while candidate.exists():
        suffix += 1
        candidate = base / f"{command}-{stamp}-{suffix}"
    candidate.mkdir(parents=True)
    return candidate


def require_manifest(path: Union[str, Path]) -> RunManifest:
    try:
        return RunManifest.load(path)
    except SchemaError:
        logger.error(f"Cannot read run manifest {path}", exc_info=True)
        raise

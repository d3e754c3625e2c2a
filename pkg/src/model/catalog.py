"""Operator's catalog of offered network functions."""
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from src.errors import ModelValidationError
from src.model.numbers import Rational
from src.utils.documents import read_json, validate_document

logger = logging.getLogger(__name__)


class Role(str, Enum):
    """Kind of resource a function instance consumes on its node."""

    DATACENTER = "datacenter"
    SWITCH = "switch"


class FunctionEntry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    id: str = Field(min_length=1)
    p_d: Rational
    p_s: Rational
    n_inst: int
    n_req: int


class CatalogDocument(BaseModel):
    """On-disk catalog schema: ``functions: [{id, p_d, p_s, n_inst, n_req}]``."""

    model_config = ConfigDict(extra="forbid")

    functions: List[FunctionEntry]


@dataclass(frozen=True)
class FunctionSpec:
    """Resource demand and sharing limits of one offered function."""

    id: str
    dc_demand: Fraction
    switch_demand: Fraction
    max_instances: int
    max_requests: int

    @property
    def roles(self) -> Tuple[Role, ...]:
        """Roles the function may take; data-center first."""
        roles = []
        if self.dc_demand > 0:
            roles.append(Role.DATACENTER)
        if self.switch_demand > 0:
            roles.append(Role.SWITCH)
        return tuple(roles)

    @property
    def datacenter_only(self) -> bool:
        return self.switch_demand == 0 and self.dc_demand != 0

    @property
    def switch_only(self) -> bool:
        return self.dc_demand == 0 and self.switch_demand != 0

    @property
    def shareable(self) -> bool:
        """An instance may serve more than one request."""
        return self.max_requests > 1

    def demand(self, role: Role) -> Fraction:
        return self.dc_demand if role is Role.DATACENTER else self.switch_demand


@dataclass(frozen=True)
class FunctionCatalog:
    """The set F of available functions with their demands and limits."""

    functions: Mapping[str, FunctionSpec]

    def __post_init__(self):
        self.validate()

    def __contains__(self, function_id: str) -> bool:
        return function_id in self.functions

    def __getitem__(self, function_id: str) -> FunctionSpec:
        return self.functions[function_id]

    def __len__(self) -> int:
        return len(self.functions)

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(self.functions)

    def validate(self) -> None:
        for spec in self.functions.values():
            if spec.dc_demand < 0 or spec.switch_demand < 0:
                raise ModelValidationError(f"function {spec.id} has a negative demand")
            if spec.dc_demand == 0 and spec.switch_demand == 0:
                raise ModelValidationError(
                    f"function {spec.id} is not placeable: p_d and p_s are both zero"
                )
            if spec.max_instances < 1:
                raise ModelValidationError(f"function {spec.id}: n_inst must be positive")
            if spec.max_requests < 1:
                raise ModelValidationError(f"function {spec.id}: n_req must be positive")


def catalog_from_dict(data: dict, source: str = "catalog") -> FunctionCatalog:
    """Validate decoded JSON and build the catalog."""
    document = validate_document(data, CatalogDocument, source)
    functions: Dict[str, FunctionSpec] = {}
    for entry in document.functions:
        if entry.id in functions:
            raise ModelValidationError(f"duplicate function id {entry.id}")
        functions[entry.id] = FunctionSpec(
            id=entry.id,
            dc_demand=entry.p_d,
            switch_demand=entry.p_s,
            max_instances=entry.n_inst,
            max_requests=entry.n_req,
        )
    return FunctionCatalog(functions=functions)


def load_catalog(path: Union[str, Path]) -> FunctionCatalog:
    """Load and validate a catalog file.

    Args:
        path: JSON file with a ``functions`` list

    Returns:
        Validated FunctionCatalog
    """
    catalog = catalog_from_dict(read_json(path), source=str(path))
    logger.info(f"Loaded catalog {path}: {len(catalog)} functions")
    return catalog

"""Tenant deployment requests."""
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.errors import CrossReferenceError, ModelValidationError
from src.model.catalog import FunctionCatalog
from src.model.network import SubstrateNetwork
from src.model.numbers import Rational
from src.utils.documents import read_json, validate_document

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


class UseEntry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    id: str = Field(min_length=1)
    function: str
    ratios: List[Rational] = Field(default_factory=lambda: [Fraction(1)])


class EndpointEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    loc: str


class LatencyEntry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    src: str
    dst: str
    bound: Rational


class RequestEntry(BaseModel):
    """One request object of the requests file."""

    model_config = ConfigDict(arbitrary_types_allowed=True, extra="forbid")

    id: str = Field(min_length=1)
    uses: List[UseEntry]
    chain: str
    endpoints: List[EndpointEntry]
    pairs: List[Tuple[str, str]]
    d_in: Rational
    l_req: List[LatencyEntry] = Field(default_factory=list)

    @field_validator("pairs", mode="before")
    @classmethod
    def accept_pair_objects(cls, v):
        """Pairs may be written as ``[src, dst]`` or ``{"src": .., "dst": ..}``."""
        if isinstance(v, list):
            return [
                (item["src"], item["dst"]) if isinstance(item, dict) else item
                for item in v
            ]
        return v


@dataclass(frozen=True)
class FunctionUse:
    """A request u for an instance of function t(u) with branch ratios r(u)."""

    id: str
    function: str
    ratios: Tuple[Fraction, ...]

    @property
    def total_ratio(self) -> Fraction:
        """Outgoing to incoming data rate over all branches."""
        return sum(self.ratios, Fraction(0))

    @property
    def splitting(self) -> bool:
        return len(self.ratios) > 1


@dataclass(frozen=True)
class DeploymentRequest:
    """A tenant's deployment request: uses, chain, endpoints, rates and latency bounds."""

    id: str
    uses: Mapping[str, FunctionUse]
    chain: str
    endpoints: Mapping[str, str]
    pairs: Tuple[Pair, ...]
    initial_rate: Fraction
    max_latency: Mapping[Pair, Fraction]

    def __post_init__(self):
        self.validate()

    @property
    def symbols(self) -> FrozenSet[str]:
        """U and A, the terms the chain may mention."""
        return frozenset(self.uses) | frozenset(self.endpoints)

    def is_endpoint(self, symbol: str) -> bool:
        return symbol in self.endpoints

    def use(self, symbol: str) -> Optional[FunctionUse]:
        return self.uses.get(symbol)

    def validate(self) -> None:
        overlap = set(self.uses) & set(self.endpoints)
        if overlap:
            raise ModelValidationError(
                f"request {self.id}: ids used both as function use and endpoint: {sorted(overlap)}"
            )
        for use in self.uses.values():
            if not use.ratios:
                raise ModelValidationError(f"request {self.id}: use {use.id} has no ratios")
            if any(r <= 0 for r in use.ratios):
                raise ModelValidationError(
                    f"request {self.id}: use {use.id} has a nonpositive ratio"
                )
        if self.initial_rate <= 0:
            raise ModelValidationError(f"request {self.id}: d_in must be positive")
        for src, dst in self.pairs:
            for endpoint in (src, dst):
                if endpoint not in self.endpoints:
                    raise ModelValidationError(
                        f"request {self.id}: pair ({src}, {dst}) names unknown endpoint {endpoint}"
                    )
        pairs = set(self.pairs)
        for pair, bound in self.max_latency.items():
            if pair not in pairs:
                raise ModelValidationError(
                    f"request {self.id}: latency bound for ({pair[0]}, {pair[1]}) is not an endpoint pair"
                )
            if bound <= 0:
                raise ModelValidationError(
                    f"request {self.id}: latency bound for ({pair[0]}, {pair[1]}) must be positive"
                )

    def cross_validate(self, catalog: FunctionCatalog, net: SubstrateNetwork) -> None:
        """Check that functions exist in the catalog and endpoints sit on network nodes."""
        for use in self.uses.values():
            if use.function not in catalog:
                raise CrossReferenceError(
                    f"request {self.id}: use {use.id} requests unknown function {use.function}"
                )
        for endpoint, location in self.endpoints.items():
            if location not in net.capacities:
                raise CrossReferenceError(
                    f"request {self.id}: endpoint {endpoint} located at unknown node {location}"
                )


def request_from_entry(entry: RequestEntry) -> DeploymentRequest:
    uses: Dict[str, FunctionUse] = {}
    for use in entry.uses:
        if use.id in uses:
            raise ModelValidationError(f"request {entry.id}: duplicate use id {use.id}")
        uses[use.id] = FunctionUse(id=use.id, function=use.function, ratios=tuple(use.ratios))

    endpoints: Dict[str, str] = {}
    for endpoint in entry.endpoints:
        if endpoint.id in endpoints:
            raise ModelValidationError(f"request {entry.id}: duplicate endpoint id {endpoint.id}")
        endpoints[endpoint.id] = endpoint.loc

    max_latency: Dict[Pair, Fraction] = {}
    for bound in entry.l_req:
        key = (bound.src, bound.dst)
        if key in max_latency:
            raise ModelValidationError(
                f"request {entry.id}: duplicate latency bound for ({bound.src}, {bound.dst})"
            )
        max_latency[key] = bound.bound

    return DeploymentRequest(
        id=entry.id,
        uses=uses,
        chain=entry.chain,
        endpoints=endpoints,
        pairs=tuple(tuple(pair) for pair in entry.pairs),
        initial_rate=entry.d_in,
        max_latency=max_latency,
    )


def requests_from_list(
    data: list,
    catalog: FunctionCatalog,
    net: SubstrateNetwork,
    source: str = "requests",
) -> List[DeploymentRequest]:
    """Validate decoded JSON and build cross-validated requests."""
    entries = validate_document(data, List[RequestEntry], source)
    requests: List[DeploymentRequest] = []
    seen = set()
    for entry in entries:
        if entry.id in seen:
            raise ModelValidationError(f"duplicate request id {entry.id}")
        seen.add(entry.id)
        request = request_from_entry(entry)
        request.cross_validate(catalog, net)
        requests.append(request)
    return requests


def load_requests(
    path: Union[str, Path],
    catalog: FunctionCatalog,
    net: SubstrateNetwork,
) -> List[DeploymentRequest]:
    """Load a requests file and cross-validate it against catalog and network.

    Args:
        path: JSON array of request objects
        catalog: Loaded function catalog
        net: Loaded substrate network

    Returns:
        Requests in file order
    """
    requests = requests_from_list(read_json(path), catalog, net, source=str(path))
    logger.info(f"Loaded {len(requests)} deployment requests from {path}")
    return requests

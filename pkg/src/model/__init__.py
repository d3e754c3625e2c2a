"""Substrate network, function catalog and deployment request inputs."""
from src.model.catalog import FunctionCatalog, FunctionSpec, load_catalog, catalog_from_dict
from src.model.network import (
    Link,
    NodeCapacity,
    SubstrateNetwork,
    load_network,
    network_from_dict,
    save_network,
)
from src.model.requests import DeploymentRequest, load_requests, requests_from_list

__all__ = [
    "DeploymentRequest",
    "FunctionCatalog",
    "FunctionSpec",
    "Link",
    "NodeCapacity",
    "SubstrateNetwork",
    "catalog_from_dict",
    "load_catalog",
    "load_network",
    "load_requests",
    "network_from_dict",
    "requests_from_list",
    "save_network",
]

"""Run configuration: JSON files with material/generation/homogenizer/
network/training/paths sections.

Generation keys mirror the dataset-generation parameter names (N, gamma,
n1_set, eps_max_range, p_uniaxial_strain, p_uniaxial_fibers, vf_range,
sample_count, master_seed); material keys mirror the constituent parameter
table (E_M, nu_M, sigma_y, H, H_inf, m, E_F, nu_F, aspect_ratio).
"""
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .homogenization import HomogenizerOptions
from .materials import FiberParams, MatrixParams
from .pathgen import GenerationConfig
from .surrogate import TrainConfig


@dataclass(frozen=True)
class NetworkConfig:
    hidden: tuple = (64, 64)
    dropout: float = 0.1
    seed: int = 1

    def __post_init__(self):
        if not self.hidden or min(self.hidden) < 1:
            raise ValueError("need at least one positive hidden width")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


@dataclass(frozen=True)
class RunConfig:
    matrix: MatrixParams = field(default_factory=MatrixParams)
    fiber: FiberParams = field(default_factory=FiberParams)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    homogenizer: HomogenizerOptions = field(default_factory=HomogenizerOptions)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    paths: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)

    def path(self, key, default):
        return Path(self.paths.get(key, default))


_MATERIAL_KEYS = {
    "E_M": "e_mod", "nu_M": "nu", "sigma_y": "sigma_y", "H": "h_lin",
    "H_inf": "h_inf", "m": "m_exp",
}
_FIBER_KEYS = {"E_F": "e_mod", "nu_F": "nu", "aspect_ratio": "aspect_ratio"}
_GENERATION_KEYS = {
    "N": "n_steps", "n1_set": "n1_set", "gamma": "gamma_range",
    "eps_max_range": "eps_max_range", "p_uniaxial_strain": "p_uniaxial_strain",
    "p_uniaxial_fibers": "p_uniaxial_fibers", "vf_range": "vf_range",
    "sample_count": "sample_count", "master_seed": "master_seed",
}


def _map_section(section, mapping, label):
    out = {}
    for key, value in section.items():
        if key not in mapping:
            raise ValueError(f"unknown key {key!r} in [{label}]")
        field_name = mapping[key]
        if isinstance(value, list):
            value = tuple(value)
        out[field_name] = value
    return out


def _plain_section(section, cls, label):
    valid = cls.__dataclass_fields__
    out = {}
    for key, value in section.items():
        if key not in valid:
            raise ValueError(f"unknown key {key!r} in [{label}]")
        out[key] = tuple(value) if isinstance(value, list) else value
    return out


def config_from_dict(data):
    """Build a RunConfig from a parsed JSON document."""
    known = {"material", "generation", "homogenizer", "network", "training",
             "paths", "simulate"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    material = data.get("material", {})
    matrix_kwargs = _map_section(
        {k: v for k, v in material.items() if k in _MATERIAL_KEYS},
        _MATERIAL_KEYS, "material")
    fiber_kwargs = _map_section(
        {k: v for k, v in material.items() if k in _FIBER_KEYS},
        _FIBER_KEYS, "material")
    leftover = set(material) - set(_MATERIAL_KEYS) - set(_FIBER_KEYS)
    if leftover:
        raise ValueError(f"unknown keys in [material]: {sorted(leftover)}")
    return RunConfig(
        matrix=MatrixParams(**matrix_kwargs),
        fiber=FiberParams(**fiber_kwargs),
        generation=GenerationConfig(**_map_section(
            data.get("generation", {}), _GENERATION_KEYS, "generation")),
        homogenizer=HomogenizerOptions(**_plain_section(
            data.get("homogenizer", {}), HomogenizerOptions, "homogenizer")),
        network=NetworkConfig(**_plain_section(
            data.get("network", {}), NetworkConfig, "network")),
        training=TrainConfig(**_plain_section(
            data.get("training", {}), TrainConfig, "training")),
        paths=dict(data.get("paths", {})),
        simulate=dict(data.get("simulate", {})),
    )


def load_config(path):
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def config_snapshot(config):
    """JSON-serializable snapshot of a RunConfig (for manifests)."""
    snap = asdict(config)
    for section in snap.values():
        if isinstance(section, dict):
            for key, value in section.items():
                if isinstance(value, tuple):
                    section[key] = list(value)
    return snap

"""Random strain-path generation and dataset input assembly.

Paths are drift-plus-noise random walks on the unit sphere in 6-dimensional
strain space: n1 drift directions repeated n2 times each, N = n1*n2 noise
vectors scaled by gamma, element-wise sum, cumulative sum from the origin,
and a final rescaling so the largest-magnitude strain component equals
eps_max.  All series are plain strain components (11, 22, 33, 23, 13, 12)
over a pseudo-time axis 0..1.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .orientation import sample_orientation_tensor, to_components

#: Admissible drift-direction counts at paper scale (every element divides N).
DEFAULT_N1_SET = (1, 2, 5, 10, 20, 25, 50, 100, 200)


@dataclass(frozen=True)
class PathGenParams:
    """Parameters of one strain-path draw."""
    n_steps: int                 # N; series has N+1 rows
    n1: int                      # number of drift directions
    gamma: float                 # noise amplitude in [0, 1]
    eps_max: float               # final max |component|
    p_uniaxial: float = 0.0      # probability of masking to one component

    def __post_init__(self):
        if self.n_steps % self.n1 != 0:
            raise ValueError("n1 must divide the number of steps")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.eps_max <= 0.0:
            raise ValueError("eps_max must be positive")
        if not 0.0 <= self.p_uniaxial <= 1.0:
            raise ValueError("p_uniaxial must be a probability")

    @property
    def n2(self):
        return self.n_steps // self.n1


@dataclass(frozen=True)
class GenerationConfig:
    """Dataset generation parameters (desk-scale defaults)."""
    n_steps: int = 200
    n1_set: tuple = DEFAULT_N1_SET
    gamma_range: tuple = (0.0, 1.0)
    eps_max_range: tuple = (0.01, 0.05)
    p_uniaxial_strain: float = 0.1
    p_uniaxial_fibers: float = 0.1
    vf_range: tuple = (0.10, 0.15)
    sample_count: int = 2000
    master_seed: int = 2024

    def __post_init__(self):
        for n1 in self.n1_set:
            if self.n_steps % n1 != 0:
                raise ValueError(f"n1={n1} does not divide N={self.n_steps}")


@dataclass
class SampleRecord:
    """One dataset record; ``stress`` is filled by the mean-field oracle."""
    seed: int
    strain: np.ndarray                     # (N+1, 6) plain components
    orientation: np.ndarray                # (a11, a22, a33, a12, a13, a23)
    vf: float
    stress: Optional[np.ndarray] = None    # (N+1, 6) plain components
    status: int = 0                        # 0 ok, 1 simulation failed

    @property
    def n_rows(self):
        return self.strain.shape[0]


def sample_unit_vector(rng, dim=6):
    """Uniform direction on the unit sphere (normalized Gaussian)."""
    while True:
        v = rng.standard_normal(dim)
        n = np.linalg.norm(v)
        if n > 0.0:
            return v / n


def generate_path(params, rng):
    """Draw one strain path.

    Draw order: n1 drift directions, N noise directions, uniaxial-mask
    Bernoulli, masked component index (uniaxial branch only).
    """
    drifts = np.array([sample_unit_vector(rng) for _ in range(params.n1)])
    drifts = np.repeat(drifts, params.n2, axis=0)
    noise = np.array([sample_unit_vector(rng) for _ in range(params.n_steps)])
    steps = drifts + params.gamma * noise
    path = np.vstack([np.zeros(6), np.cumsum(steps, axis=0)])
    if params.p_uniaxial > 0.0 and rng.random() < params.p_uniaxial:
        keep = int(rng.integers(6))
        mask = np.ones(6, dtype=bool)
        mask[keep] = False
        path[:, mask] = 0.0
    amax = np.abs(path).max()
    if amax == 0.0:
        raise RuntimeError("degenerate zero strain path")
    return path * (params.eps_max / amax)


def record_rng(master_seed, index):
    """Derive the per-record seed and RNG stream for a dataset index."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    seed = int(ss.generate_state(1, np.uint64)[0])
    return seed, np.random.default_rng(seed)


def assemble_inputs(config, rng, seed=0):
    """Draw one record's inputs (stress left unfilled).

    Draw order: gamma, n1, eps_max, strain path (see :func:`generate_path`),
    orientation tensor, fiber volume fraction.
    """
    gamma = rng.uniform(*config.gamma_range)
    n1 = int(rng.choice(np.asarray(config.n1_set)))
    eps_max = rng.uniform(*config.eps_max_range)
    params = PathGenParams(n_steps=config.n_steps, n1=n1, gamma=gamma,
                           eps_max=eps_max, p_uniaxial=config.p_uniaxial_strain)
    strain = generate_path(params, rng)
    a = sample_orientation_tensor(rng, p_uniaxial=config.p_uniaxial_fibers)
    vf = rng.uniform(*config.vf_range)
    return SampleRecord(seed=seed, strain=strain, orientation=to_components(a),
                        vf=float(vf))


def assemble_record(config, index):
    """Deterministically assemble record ``index`` from the master seed."""
    seed, rng = record_rng(config.master_seed, index)
    return assemble_inputs(config, rng, seed=seed)

"""Markov-chain jump samplers for simulating Lévy processes.

Local and adaptive Metropolis/Hastings and stochastic-step-function samplers
for unnormalised jump densities, jump-diffusion approximations of
infinite-activity processes, and exact reference densities to check them.
"""

from ._backend import BACKEND
from .analysis import Histogram, linf_error, tail_mass
from .jumpdiff import (JumpDiffusionConfig, JumpDiffusionProcess, approximate_infinite_activity,
                       merton_config, simulate_terminal, simulate_terminal_batch)
from .measures import (CGMYLevyDensity, CGMYSpec, GaussianDensity, NIGLevyDensity, NIGSpec,
                       TwoModeDensity)
from .rng import RandomStream
from .samplers import AIMH, AISF, LocalMH, LocalSF, SamplerKind, correlation

__version__ = "0.1.0"

__all__ = [
    "AIMH", "AISF", "BACKEND", "CGMYLevyDensity", "CGMYSpec", "GaussianDensity", "Histogram",
    "JumpDiffusionConfig", "JumpDiffusionProcess", "LocalMH", "LocalSF", "NIGLevyDensity", "NIGSpec",
    "RandomStream", "SamplerKind", "TwoModeDensity", "approximate_infinite_activity", "correlation",
    "linf_error", "merton_config", "simulate_terminal", "simulate_terminal_batch", "tail_mass",
]

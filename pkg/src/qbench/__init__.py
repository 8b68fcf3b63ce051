"""Structured application benchmarks for gate-based quantum devices, run on a local simulator."""
from .analysis import NoiseFit, ScoreWithError, fit_noise, mean_score
from .backends import ExactBackend, NoisyBackend, SampleBackend, make_backend
from .circuit import Circuit, Gate, depth, gate_count
from .sim import CountsHistogram, NoiseModel, StateVector, simulate
from .topology import Topology, best_path

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CountsHistogram", "ExactBackend", "Gate", "NoiseFit", "NoiseModel",
    "NoisyBackend", "SampleBackend", "ScoreWithError", "StateVector", "Topology",
    "best_path", "depth", "fit_noise", "gate_count", "make_backend", "mean_score", "simulate",
]

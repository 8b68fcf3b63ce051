"""Backends that turn circuits into histograms.

Every benchmark submits ``Job`` records through ``Backend.run_many``; the
per-circuit seed is derived from the job key and the run's root seed, so
results do not depend on scheduling order.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .circuit import Circuit
from .errors import ConfigError
from .sim import (CountsHistogram, NoiseModel, derive_seed, exact_counts, sample,
                  sample_noisy, simulate)


@dataclass
class Job:
    key: str
    circuit: Circuit
    shots: int


def thread_count() -> int:
    raw = os.environ.get("QBENCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"QBENCH_THREADS={raw!r} is not an integer") from exc


def _measured(c: Circuit) -> list:
    return list(c.measured) if c.measured else list(range(c.n_qubits))


class Backend:
    kind = "abstract"

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    def run_one(self, job: Job) -> CountsHistogram:
        raise NotImplementedError

    def run_many(self, jobs) -> dict:
        jobs = list(jobs)
        workers = thread_count()
        if workers == 1 or len(jobs) < 2:
            return {j.key: self.run_one(j) for j in jobs}
        with ThreadPoolExecutor(workers) as pool:
            hists = list(pool.map(self.run_one, jobs))
        return {j.key: h for j, h in zip(jobs, hists)}

    def describe(self) -> dict:
        return {"kind": self.kind}

    @property
    def is_exact(self) -> bool:
        return False


class ExactBackend(Backend):
    """Born-rule expectations scaled to the nominal shot count."""

    kind = "exact"

    def run_one(self, job):
        c = job.circuit
        return exact_counts(simulate(c), job.shots, c.postselect, _measured(c))

    @property
    def is_exact(self):
        return True


class SampleBackend(Backend):
    kind = "sample"

    def run_one(self, job):
        c = job.circuit
        return sample(simulate(c), job.shots, c.postselect,
                      derive_seed(self.seed, job.key), _measured(c))


class NoisyBackend(Backend):
    kind = "noisy"

    def __init__(self, noise: NoiseModel, seed: int = 0, noise_path=None):
        super().__init__(seed)
        self.noise = noise
        self.noise_path = noise_path

    def run_one(self, job):
        c = job.circuit
        return sample_noisy(c, self.noise, job.shots, derive_seed(self.seed, job.key),
                            _measured(c), c.postselect)

    def describe(self):
        d = {"kind": self.kind, "noise": self.noise.to_json()}
        if self.noise_path:
            d["noise_file"] = str(self.noise_path)
        return d


def make_backend(spec: str, seed: int = 0, timeout: float = 600.0) -> Backend:
    """Parse ``exact``, ``sample``, ``noisy:<file>`` or ``mock-remote[:<dir>]``."""
    spec = spec.strip()
    if spec == "exact":
        return ExactBackend(seed)
    if spec in ("sample", "ideal"):
        return SampleBackend(seed)
    if spec.startswith("noisy:"):
        path = spec.split(":", 1)[1]
        try:
            return NoisyBackend(NoiseModel.load(path), seed, path)
        except OSError as exc:
            raise ConfigError(f"cannot read noise file {path}: {exc}") from exc
    if spec == "mock-remote" or spec.startswith("mock-remote:"):
        from .remote import MockRemoteBackend
        queue = spec.split(":", 1)[1] if ":" in spec else None
        return MockRemoteBackend(seed, queue, timeout=timeout)
    raise ConfigError(f"unknown backend {spec!r}")

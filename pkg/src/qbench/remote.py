"""File-queue stand-in for a remote execution service.

Layout of a queue directory::

    jobs/<key>.json      submitted by the client
    results/<key>.json   histogram written by the worker
    results/<key>.err    reason a job was rejected

The worker is a separate process (``python -m qbench.remote <queue>``)
that drains ``jobs/`` once and exits. It samples with the same per-key
seeds as :class:`~qbench.backends.SampleBackend`, so both give identical
histograms for the same root seed.
"""
from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
from pathlib import Path

from .backends import Backend, _measured
from .circuit import circuit_from_json, circuit_to_json
from .errors import MalformedJob, Timeout
from .sim import CountsHistogram, derive_seed, sample, simulate


def _write_json(path: Path, obj) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(obj, sort_keys=True))
    os.replace(tmp, path)


def _check_key(key: str) -> str:
    if not key or "/" in key or key.startswith("."):
        raise MalformedJob(f"illegal job key {key!r}")
    return key


def process_job(path: Path) -> dict:
    """Run one job file; raises MalformedJob on any decoding problem."""
    try:
        rec = json.loads(Path(path).read_text())
        key = str(rec["key"])
        shots = int(rec["shots"])
        seed = int(rec["seed"])
        circuit = circuit_from_json(rec["circuit"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise MalformedJob(f"{Path(path).name}: {exc}") from exc
    if shots < 1:
        raise MalformedJob(f"{key}: shots must be positive")
    hist = sample(simulate(circuit), shots, circuit.postselect,
                  derive_seed(seed, key), _measured(circuit))
    return hist.to_json()


def drain(queue) -> int:
    """Worker loop body: answer every pending job. Returns the number handled."""
    queue = Path(queue)
    results = queue / "results"
    results.mkdir(parents=True, exist_ok=True)
    handled = 0
    for job in sorted((queue / "jobs").glob("*.json")):
        key = job.stem
        if (results / f"{key}.json").exists():
            continue
        try:
            _write_json(results / f"{key}.json", process_job(job))
        except (MalformedJob, ValueError) as exc:
            tmp = results / f"{key}.err.tmp"
            tmp.write_text(str(exc))
            os.replace(tmp, results / f"{key}.err")
        handled += 1
    return handled


class MockRemoteBackend(Backend):
    kind = "mock-remote"

    def __init__(self, seed: int = 0, queue=None, timeout: float = 600.0):
        super().__init__(seed)
        self.queue = Path(queue) if queue else Path(tempfile.mkdtemp(prefix="qbench-queue-"))
        self.timeout = float(timeout)
        for sub in ("jobs", "results"):
            (self.queue / sub).mkdir(parents=True, exist_ok=True)

    def describe(self):
        return {"kind": self.kind, "endpoint": str(self.queue)}

    def submit(self, jobs) -> list:
        keys = []
        for job in jobs:
            key = _check_key(job.key)
            _write_json(self.queue / "jobs" / f"{key}.json",
                        {"key": key, "shots": int(job.shots), "seed": self.seed,
                         "circuit": circuit_to_json(job.circuit)})
            keys.append(key)
        return keys

    def process(self) -> None:
        """Start a worker process and wait for it to drain the queue."""
        cmd = [sys.executable, "-m", "qbench.remote", str(self.queue)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=self.timeout)
        except subprocess.TimeoutExpired as exc:
            raise Timeout(f"worker did not finish within {self.timeout} s") from exc
        if proc.returncode != 0:
            raise Timeout(f"worker exited with status {proc.returncode}: {proc.stderr.strip()[-400:]}")

    def collect(self, keys) -> dict:
        out = {}
        results = self.queue / "results"
        for key in keys:
            err = results / f"{key}.err"
            if err.exists():
                raise MalformedJob(err.read_text())
            path = results / f"{key}.json"
            if not path.exists():
                raise Timeout(f"no result for job {key}")
            out[key] = CountsHistogram.from_json(json.loads(path.read_text()))
        return out

    def run_one(self, job):
        return self.run_many([job])[job.key]

    def run_many(self, jobs) -> dict:
        jobs = list(jobs)
        if not jobs:
            return {}
        keys = self.submit(jobs)
        # Stale answers from an earlier submission under the same key must not leak through.
        for key in keys:
            for suffix in (".json", ".err"):
                (self.queue / "results" / f"{key}{suffix}").unlink(missing_ok=True)
        self.process()
        return self.collect(keys)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m qbench.remote QUEUE_DIR", file=sys.stderr)
        return 2
    drain(argv[0])
    return 0


if __name__ == "__main__":
    sys.exit(main())

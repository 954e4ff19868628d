"""
Sweep configuration for the verify and bench commands (JSON documents).
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

from parallel_harness import WorkloadSpec
from preaccumulation import Strategy

DEFAULT_SWEEP_CONFIG_PATH = Path(__file__).resolve().parent.parent.parent / "config" / "sweep_config.json"

BENCH_COLUMNS = [
    'strategy', 'T', 'L', 'n', 'm', 's', 'padding',
    'record_time_ns', 'preacc_time_ns', 'eval_time_ns',
    'live_slots', 'peak_slots', 'modeled_bytes', 'allocation_events',
    'map_ops', 'adjoint_accesses', 'lock_acquisitions',
]


def _default_workload() -> WorkloadSpec:
    return WorkloadSpec(workers=4, chain_length=20, n_inputs=3, m_outputs=2, shared_inputs=1, seed=7)


@dataclass
class SweepConfig:
    """Workload template plus the strategies and worker counts to sweep."""
    workload: WorkloadSpec = field(default_factory=_default_workload)
    strategies: List[str] = field(default_factory=lambda: [strategy.value for strategy in Strategy])
    T_values: List[int] = field(default_factory=lambda: [1, 2, 4, 8])
    repetitions: int = 5
    output_path: str = "results/bench.csv"

    def __post_init__(self):
        if isinstance(self.workload, dict):
            self.workload = WorkloadSpec.from_dict(self.workload)
        if not self.strategies:
            raise ValueError("strategies must not be empty")
        if not self.T_values:
            raise ValueError("T_values must not be empty")
        for name in self.strategies:
            try:
                Strategy(name)
            except ValueError:
                raise ValueError(f"Unknown strategy: {name}") from None
        for workers in self.T_values:
            if int(workers) < 1:
                raise ValueError(f"T values must be at least 1, got {workers}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be at least 1, got {self.repetitions}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'workload': self.workload.to_dict(),
            'strategies': list(self.strategies),
            'T_values': list(self.T_values),
            'repetitions': self.repetitions,
            'output_path': self.output_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepConfig':
        try:
            return cls(**data)
        except TypeError as e:
            raise ValueError(f"Invalid SweepConfig document: {e}") from e

    @classmethod
    def from_json(cls, json_str: str) -> 'SweepConfig':
        return cls.from_dict(json.loads(json_str))


def load_sweep_config(path=None) -> SweepConfig:
    """Load a sweep configuration; without a path the bundled default file is used if present."""
    if path is None:
        if not DEFAULT_SWEEP_CONFIG_PATH.exists():
            return SweepConfig()
        path = DEFAULT_SWEEP_CONFIG_PATH
    with open(path, 'r') as file:
        return SweepConfig.from_json(file.read())

"""Workload generation, simultaneous preaccumulation runs and race simulation."""

from parallel_harness.workload import (
    GENERATED_OPS, RegionTemplate, TemplateOp, ValueBound, Workload, WorkerPlan, WorkloadSpec, default_op_mix,
    generate_template, generate_workload,
)
from parallel_harness.runner import (
    HarnessResult, TimingSummary, WorkerOutcome, evaluate_gradients, measure, run_simultaneous,
    serial_reference,
)
from parallel_harness.race import (
    LOCAL_STORES, SHARED_STORE, RaceScenario, RaceTrace, enumerate_interleavings, minimal_scenario,
    run_schedule, simulate_race,
)
from parallel_harness.programs import (
    EmbeddedProgram, central_difference, gradients_close, random_program, template_gradient,
    template_value,
)

__all__ = [
    "GENERATED_OPS", "RegionTemplate", "TemplateOp", "ValueBound", "Workload", "WorkerPlan", "WorkloadSpec",
    "default_op_mix", "generate_template", "generate_workload",
    "HarnessResult", "TimingSummary", "WorkerOutcome", "evaluate_gradients", "measure",
    "run_simultaneous", "serial_reference",
    "LOCAL_STORES", "SHARED_STORE", "RaceScenario", "RaceTrace", "enumerate_interleavings",
    "minimal_scenario", "run_schedule", "simulate_race",
    "EmbeddedProgram", "central_difference", "gradients_close", "random_program",
    "template_gradient", "template_value",
]

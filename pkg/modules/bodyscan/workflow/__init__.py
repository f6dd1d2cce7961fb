from .sweep import run_sweep
from .config import (
    DEFAULTS,
    dump_config,
    load_config,
    parse_config,
    CONFIG_VERSION,
)
from .runner import (
    plan_scan,
    write_run,
    PlannedScan,
    random_start,
    run_workflow,
    WorkflowResult,
    expected_report,
    run_monte_carlo,
    analyze_scenario,
    explorative_camera,
)
from .scenario import Seeds, build_scenario, ScenarioConfig, StitchSettings

__all__ = (
    'Seeds',
    'DEFAULTS',
    'plan_scan',
    'run_sweep',
    'write_run',
    'PlannedScan',
    'dump_config',
    'load_config',
    'parse_config',
    'random_start',
    'run_workflow',
    'CONFIG_VERSION',
    'ScenarioConfig',
    'StitchSettings',
    'WorkflowResult',
    'build_scenario',
    'expected_report',
    'run_monte_carlo',
    'analyze_scenario',
    'explorative_camera',
)

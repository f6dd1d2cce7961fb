from .curve import (
    evaluate_scan,
    coverage_curve,
    CoverageReport,
    EXTERNAL_REFERENCE,
    GROUND_TRUTH_SAMPLES,
)
from .report import (
    report_table,
    REPORT_COLUMNS,
    read_report_csv,
    write_report_csv,
    plot_coverage_svg,
    format_report_text,
)
from .coverage import coverage, covered_mask, COVERAGE_VOXEL, mean_surface_distance

__all__ = (
    'coverage',
    'covered_mask',
    'report_table',
    'evaluate_scan',
    'COVERAGE_VOXEL',
    'CoverageReport',
    'REPORT_COLUMNS',
    'coverage_curve',
    'read_report_csv',
    'write_report_csv',
    'plot_coverage_svg',
    'EXTERNAL_REFERENCE',
    'format_report_text',
    'GROUND_TRUTH_SAMPLES',
    'mean_surface_distance',
)

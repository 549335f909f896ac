"""Scenarios, studies, exports and the command-line interface."""
from .scenarios import CASES, SCENARIOS, Scenario, get_scenario, initial_mesh
from .studies import (AfemStudy, Comparison, ConvergenceTable, TableRow, fit_slope,
                      fraction_near_points, fraction_touching_fractures, run_afem_study,
                      run_estimator_comparison, run_uniform_study, smallest_decile,
                      touches_fracture_interior)
from .export import export_csv, export_records, export_table, export_vtk

__all__ = ["CASES", "SCENARIOS", "Scenario", "get_scenario", "initial_mesh", "AfemStudy",
           "Comparison", "ConvergenceTable", "TableRow", "fit_slope", "fraction_near_points",
           "fraction_touching_fractures", "run_afem_study", "run_estimator_comparison",
           "run_uniform_study", "smallest_decile", "touches_fracture_interior", "export_csv",
           "export_records", "export_table", "export_vtk"]

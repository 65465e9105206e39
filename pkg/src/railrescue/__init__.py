"""Exact planning of hot standby EMU rescue stations and their coverage areas."""
from ._accel import USE_NUMBA, backend_name
from .builder import (BinaryProgram, Constraint, CoverageInstance, LocationInstance, ProblemConstants,
                      UncoverableStationError, build_cmhse, build_lchse, fleet_constants, scalarize,
                      to_binary_program)
from .dot import render_dot
from .lpformat import export_lp, read_lp
from .merge import (MergedInstance, build_merged_instance, exclusion_max, exclusion_set,
                    route_stations)
from .network import (Diagnostic, DisconnectedNetworkError, Edge, Network, NetworkFormatError,
                      Parameters, ShortestPathMatrix, Station, all_pairs_shortest, dump_network,
                      load_network, load_network_file, neighbors, validate)
from .solver import (AssignmentPlan, SolveReport, Violation, evaluate_plan, solve_bruteforce,
                     solve_exact, verify_plan)

__version__ = "0.1.0"

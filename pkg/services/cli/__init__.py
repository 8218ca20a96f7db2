from .cli_service import EXIT_DOMAIN_ERROR, EXIT_OK, EXIT_USAGE, build_parser, main, parse_grid
from .reference_tables import VARY_K, VARY_RHO, compute_row, compute_table, qualitative_checks, rates_for
from .verification import check_model, default_sweep, flipped_root_finder, ordering_suite, run_verification

__all__ = [
    "EXIT_DOMAIN_ERROR",
    "EXIT_OK",
    "EXIT_USAGE",
    "VARY_K",
    "VARY_RHO",
    "build_parser",
    "check_model",
    "compute_row",
    "compute_table",
    "default_sweep",
    "flipped_root_finder",
    "main",
    "ordering_suite",
    "parse_grid",
    "qualitative_checks",
    "rates_for",
    "run_verification",
]

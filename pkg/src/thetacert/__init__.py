"""Gaussian-mass comparison toolkit.

Exact lattice shells, nullwerte identities, Poisson summation certificates,
and the scalar certificate linear program, with a JSON command line.
"""

__version__ = "0.1.0"

from .audits import (
    AuditError,
    CollapseReport,
    GradedPair,
    GradedReport,
    PrescribedShellFunction,
    SaturationReport,
    SequenceReport,
    chain_audit,
    e8_collapse_audit,
    graded_audit,
    report_from_json,
    report_to_json,
    sequence_audit,
)
from .certificates import (
    GaussianCombo,
    NoncertReport,
    PoissonReport,
    combo_from_json,
    combo_to_json,
    fourier,
    gaussian_noncert_report,
    poisson_check,
    single_gaussian,
)
from .lattices import (
    BudgetExceededError,
    Lattice,
    LatticeError,
    RotatedLattice,
    RotationMatrix,
    ShellSeries,
    determinant,
    direct_sum,
    dn,
    e8,
    enumerate_shells,
    enumerate_vectors,
    four_squares,
    is_integral,
    is_unimodular,
    lattice_from_json,
    lattice_from_rows,
    lattice_to_json,
    make_named,
    random_rotation,
    shell_series,
    shells_from_json,
    shells_to_json,
    stability_certificate,
    zn,
)
from .lp import (
    LPProblem,
    LPSolution,
    build_lp,
    certificate_of,
    default_dictionary,
    problem_from_json,
    problem_to_json,
    solution_from_json,
    solution_to_json,
    solve_lp,
    verify_solution,
)
from .simplex import SimplexResult, solve_inequalities
from .theta import (
    InsufficientShellsError,
    QSeries,
    ThetaValue,
    eisenstein_e4,
    eisenstein_qseries,
    functional_equation_residual,
    gaussian_mass,
    identity_suite,
    jacobi_theta,
    mass_gap,
    nullwert_qseries,
    required_depth,
    secrecy_function,
    shell_tail_bound,
    theta_from_shells,
)

__all__ = [
    "AuditError",
    "BudgetExceededError",
    "CollapseReport",
    "GaussianCombo",
    "GradedPair",
    "GradedReport",
    "InsufficientShellsError",
    "LPProblem",
    "LPSolution",
    "Lattice",
    "LatticeError",
    "NoncertReport",
    "PoissonReport",
    "PrescribedShellFunction",
    "QSeries",
    "RotatedLattice",
    "RotationMatrix",
    "SaturationReport",
    "SequenceReport",
    "ShellSeries",
    "SimplexResult",
    "ThetaValue",
    "__version__",
    "build_lp",
    "certificate_of",
    "chain_audit",
    "combo_from_json",
    "combo_to_json",
    "default_dictionary",
    "determinant",
    "direct_sum",
    "dn",
    "e8",
    "e8_collapse_audit",
    "eisenstein_e4",
    "eisenstein_qseries",
    "enumerate_shells",
    "enumerate_vectors",
    "four_squares",
    "fourier",
    "functional_equation_residual",
    "gaussian_mass",
    "gaussian_noncert_report",
    "graded_audit",
    "identity_suite",
    "is_integral",
    "is_unimodular",
    "jacobi_theta",
    "lattice_from_json",
    "lattice_from_rows",
    "lattice_to_json",
    "make_named",
    "mass_gap",
    "nullwert_qseries",
    "poisson_check",
    "problem_from_json",
    "problem_to_json",
    "random_rotation",
    "report_from_json",
    "report_to_json",
    "required_depth",
    "secrecy_function",
    "sequence_audit",
    "shell_series",
    "shell_tail_bound",
    "shells_from_json",
    "shells_to_json",
    "single_gaussian",
    "solution_from_json",
    "solution_to_json",
    "solve_inequalities",
    "solve_lp",
    "stability_certificate",
    "theta_from_shells",
    "verify_solution",
    "zn",
]

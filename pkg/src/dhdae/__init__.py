"""Analysis and simulation of dissipative Hamiltonian differential-algebraic systems.

The package covers block systems E xdot = A Q x with a dynamic and an
algebraic part: pencil regularity analysis, Schur-complement and
subspace reductions to ordinary differential equations, staggered-grid
discretization of one-dimensional transport-dissipation operators with
boundary dissipativity tests, saddle-point structure analysis, and a
structure-preserving implicit midpoint integrator, plus a model zoo and
the `dhdae` command line front end.
"""

from .pencil import (
    BlockDhdae,
    DhdaeError,
    ExtendedDhdae,
    NumericalError,
    RawPencil,
    RegularityReport,
    ShapeError,
    StructureError,
    UsageError,
    check_coercive,
    check_dissipative,
    common_kernel,
    epsilon_shift_test,
    extend_x3,
    hamiltonian,
    is_regular_sampled,
    jr_split,
    jr_stacked_bound,
    kernel_tests,
    no_common_kernel_singular_pencil,
    stacked_bound,
    strip_x3,
)

from .reduction import (
    ReducedSystem,
    SubspaceReducedSystem,
    feedback_reduce,
    impedance_construct,
    output_nulling_generator,
    recover_x2,
    schur_reduce,
    subspace_reduce,
)

__all__ = [
    "ReducedSystem",
    "SubspaceReducedSystem",
    "feedback_reduce",
    "impedance_construct",
    "output_nulling_generator",
    "recover_x2",
    "schur_reduce",
    "subspace_reduce",
    "BlockDhdae",
    "DhdaeError",
    "ExtendedDhdae",
    "NumericalError",
    "RawPencil",
    "RegularityReport",
    "ShapeError",
    "StructureError",
    "UsageError",
    "check_coercive",
    "check_dissipative",
    "common_kernel",
    "epsilon_shift_test",
    "extend_x3",
    "hamiltonian",
    "is_regular_sampled",
    "jr_split",
    "jr_stacked_bound",
    "kernel_tests",
    "no_common_kernel_singular_pencil",
    "stacked_bound",
    "strip_x3",
]

__version__ = "0.1.0"

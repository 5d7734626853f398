"""Block dissipative Hamiltonian DAE systems and matrix-pencil regularity analysis.

A system is E xdot = A Q x with E = diag(E1, 0) and Q = diag(Q1, Q2):
the first block of size n1 carries the dynamics (E1^H Q1 is Hermitian positive
definite), the second block of size n2 is purely algebraic, and A is
dissipative (A + A^H negative semidefinite).  The energy of a state is
H(x) = <E x, Q x>, which depends on the first block only.

The module also carries a raw pencil container for matrices that do not fit
the block pattern, so degenerate pencils can be analyzed with the same tools.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ._linalg import (
    DEFAULT_S_SAMPLES,
    TOL_INV,
    TOL_PSD,
    TOL_SYM,
    as_matrix,
    as_vector,
    cond_number,
    herm_part,
    is_hermitian,
    is_invertible,
    max_herm_eig,
    min_herm_eig,
    nullspace,
    sigma_extents,
    spectral_norm,
)


class DhdaeError(ValueError):
    """Base class for all structured errors raised by this package."""


class ShapeError(DhdaeError):
    """A matrix or vector has inconsistent dimensions."""


class StructureError(DhdaeError):
    """Structural assumptions (dissipativity, coercivity, invertibility) fail."""


class UsageError(DhdaeError):
    """An operation was called with unusable arguments."""


class NumericalError(DhdaeError):
    """A computation lost too much accuracy to be trusted."""


def check_dissipative(m, tol: float = TOL_PSD) -> bool:
    """True iff m + m^H is negative semidefinite within tol (relative)."""
    m = as_matrix(m, "m")
    if m.shape[0] != m.shape[1]:
        raise ShapeError("dissipativity is only defined for square matrices")
    scale = spectral_norm(m)
    if scale == 0.0:
        return True
    return max_herm_eig(m) <= tol * scale


def check_coercive(e1, q1, tol: float = TOL_PSD) -> bool:
    """True iff E1^H Q1 is Hermitian within tol and positive definite.

    Both checks are relative to the spectral norm of E1^H Q1.
    """
    e1 = as_matrix(e1, "E1")
    q1 = as_matrix(q1, "Q1")
    if e1.shape != q1.shape or e1.shape[0] != e1.shape[1]:
        raise ShapeError("E1 and Q1 must be square with matching shapes")
    k = e1.conj().T @ q1
    scale = spectral_norm(k)
    if scale == 0.0:
        return False
    if not is_hermitian(k, tol):
        return False
    return min_herm_eig(k) > tol * scale


@dataclasses.dataclass(frozen=True, eq=False)
class BlockDhdae:
    """Finite-dimensional dissipative Hamiltonian DAE in block form.

    Attributes:
        n1: size of the dynamic block (at least 1).
        n2: size of the algebraic block (0 is allowed).
        E1: n1 x n1, invertible.
        Q1: n1 x n1, invertible, with E1^H Q1 Hermitian positive definite.
        Q2: n2 x n2, invertible.
        A:  (n1+n2) x (n1+n2), dissipative.
    """

    n1: int
    n2: int
    E1: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    A: np.ndarray

    def __post_init__(self) -> None:
        if self.n1 < 1:
            raise StructureError(
                "n1 must be at least 1: the system needs a nonempty dynamic block"
            )
        if self.n2 < 0:
            raise ShapeError("n2 must be nonnegative")
        e1 = as_matrix(self.E1, "E1")
        q1 = as_matrix(self.Q1, "Q1")
        q2 = as_matrix(self.Q2, "Q2")
        a = as_matrix(self.A, "A")
        n = self.n1 + self.n2
        if e1.shape != (self.n1, self.n1):
            raise ShapeError(f"E1 must be {self.n1} x {self.n1}, got {e1.shape}")
        if q1.shape != (self.n1, self.n1):
            raise ShapeError(f"Q1 must be {self.n1} x {self.n1}, got {q1.shape}")
        if q2.shape != (self.n2, self.n2):
            raise ShapeError(f"Q2 must be {self.n2} x {self.n2}, got {q2.shape}")
        if a.shape != (n, n):
            raise ShapeError(f"A must be {n} x {n}, got {a.shape}")
        if not is_invertible(e1):
            raise StructureError("E1 is numerically singular")
        if not is_invertible(q1):
            raise StructureError("Q1 is numerically singular")
        if self.n2 > 0 and not is_invertible(q2):
            raise StructureError("Q2 is numerically singular")
        if not check_coercive(e1, q1):
            raise StructureError(
                "E1^H Q1 must be Hermitian positive definite (coercivity of the energy)"
            )
        if not check_dissipative(a):
            raise StructureError("A is not dissipative: A + A^H has a positive eigenvalue")
        object.__setattr__(self, "E1", e1)
        object.__setattr__(self, "Q1", q1)
        object.__setattr__(self, "Q2", q2)
        object.__setattr__(self, "A", a)

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def E(self) -> np.ndarray:
        """Full E = diag(E1, 0)."""
        e = np.zeros((self.n, self.n), dtype=np.complex128)
        e[: self.n1, : self.n1] = self.E1
        return e

    @property
    def Q(self) -> np.ndarray:
        """Full Q = diag(Q1, Q2)."""
        q = np.zeros((self.n, self.n), dtype=np.complex128)
        q[: self.n1, : self.n1] = self.Q1
        q[self.n1 :, self.n1 :] = self.Q2
        return q

    @property
    def A11(self) -> np.ndarray:
        return self.A[: self.n1, : self.n1]

    @property
    def A12(self) -> np.ndarray:
        return self.A[: self.n1, self.n1 :]

    @property
    def A21(self) -> np.ndarray:
        return self.A[self.n1 :, : self.n1]

    @property
    def A22(self) -> np.ndarray:
        return self.A[self.n1 :, self.n1 :]


@dataclasses.dataclass(frozen=True, eq=False)
class RawPencil:
    """Raw matrix pencil s E - M with no block structure assumed.

    Used for degenerate fixtures whose coefficient matrices violate the block
    pattern (for instance a pencil that is singular for every s even though
    E and M have no common kernel).
    """

    E: np.ndarray
    M: np.ndarray

    def __post_init__(self) -> None:
        e = as_matrix(self.E, "E")
        m = as_matrix(self.M, "M")
        if e.shape != m.shape or e.shape[0] != e.shape[1]:
            raise ShapeError("E and M must be square with matching shapes")
        object.__setattr__(self, "E", e)
        object.__setattr__(self, "M", m)

    @property
    def n(self) -> int:
        return self.E.shape[0]


def no_common_kernel_singular_pencil() -> RawPencil:
    """2 x 2 pencil that is singular for every s, yet ker E ∩ ker M = {0}.

    E has a degenerate second row and M is built from a rotation composed with
    a rank-one coefficient matrix, which aligns the pencil's columns for all s.
    """
    e = np.array([[1.0, 2.0], [0.0, 0.0]])
    m = np.array([[-3.0, -4.0], [0.0, 0.0]])
    return RawPencil(E=e, M=m)


@dataclasses.dataclass(frozen=True, eq=False)
class RegularityReport:
    """Result of the sampled regularity analysis of a pencil.

    sampled_points holds (s, condition number of s E - A Q) pairs; the
    condition number is infinity at a numerically singular point.  The
    injectivity / surjectivity fields are None for raw pencils, where no
    algebraic block is identified.
    """

    regular: bool
    sampled_points: tuple
    stacked_sigma_min: float
    injective_x2: bool | None
    surjective_x2: bool | None
    common_kernel_dim: int


def _pencil_matrices(sys) -> tuple[np.ndarray, np.ndarray]:
    """(E, M) with the pencil being s E - M."""
    if isinstance(sys, BlockDhdae):
        return sys.E, sys.A @ sys.Q
    if isinstance(sys, RawPencil):
        return sys.E, sys.M
    raise UsageError(f"cannot analyze object of type {type(sys).__name__}")


def kernel_tests(sys: BlockDhdae, tol: float = TOL_INV) -> tuple[bool, bool]:
    """(injective_x2, surjective_x2) for the algebraic directions.

    injective_x2: the last n2 columns of A are linearly independent, so A is
    injective on {0} + X2.  surjective_x2: the last n2 columns of A^H are
    linearly independent, equivalently the algebraic rows of A span X2.
    Both are vacuously true when n2 = 0.
    """
    if sys.n2 == 0:
        return True, True
    cols = sys.A[:, sys.n1 :]
    smin, smax = sigma_extents(cols)
    injective = smax > 0.0 and smin / smax > tol
    rows = sys.A[sys.n1 :, :]
    smin, smax = sigma_extents(rows)
    surjective = smax > 0.0 and smin / smax > tol
    return injective, surjective


def common_kernel(mats, tol: float = TOL_INV) -> np.ndarray:
    """Orthonormal basis (columns) of the intersection of the kernels."""
    mats = [as_matrix(m, f"mats[{i}]") for i, m in enumerate(mats)]
    if not mats:
        raise UsageError("common_kernel needs at least one matrix")
    ncols = mats[0].shape[1]
    for m in mats:
        if m.shape[1] != ncols:
            raise ShapeError("all matrices must have the same number of columns")
    return nullspace(np.vstack(mats), tol)


def stacked_bound(sys) -> float:
    """sigma_min of the column stack [E; A Q]; positive iff the pencil is regular."""
    e, m = _pencil_matrices(sys)
    smin, _ = sigma_extents(np.vstack([e, m]))
    return smin


def is_regular_sampled(sys, s_list=DEFAULT_S_SAMPLES) -> RegularityReport:
    """Probe regularity of s E - A Q at the given sample points.

    For a conforming block system, invertibility at a single point already
    settles regularity at every point; the report still records each sample's
    condition number for diagnostics, along with the stacked singular-value
    bound and the kernel tests of the algebraic block.
    """
    s_list = tuple(s_list)
    if len(s_list) == 0:
        raise UsageError("at least one sample point s is required")
    e, m = _pencil_matrices(sys)
    points = []
    regular = True
    for s in s_list:
        p = complex(s) * e - m
        cond = cond_number(p)
        points.append((complex(s), cond))
        if not np.isfinite(cond):
            regular = False
    smin, _ = sigma_extents(np.vstack([e, m]))
    if isinstance(sys, BlockDhdae):
        injective, surjective = kernel_tests(sys)
    else:
        injective, surjective = None, None
    kernel = common_kernel([e, m])
    return RegularityReport(
        regular=regular,
        sampled_points=tuple(points),
        stacked_sigma_min=smin,
        injective_x2=injective,
        surjective_x2=surjective,
        common_kernel_dim=kernel.shape[1],
    )


def hamiltonian(sys, x) -> float:
    """Energy H(x) = <E x, Q x> of a state (no 1/2 factor).

    Accepts block systems and extended systems; by the block structure the
    value reduces to <E1 x1, Q1 x1> and is real for conforming systems.
    """
    if isinstance(sys, ExtendedDhdae):
        e, q = sys.E_ext, sys.Q_ext
        n = e.shape[0]
    elif isinstance(sys, BlockDhdae):
        e, q = sys.E, sys.Q
        n = sys.n
    else:
        raise UsageError(f"no energy defined for objects of type {type(sys).__name__}")
    xv = as_vector(x, "x")
    if xv.shape[0] != n:
        raise ShapeError(f"state must have length {n}, got {xv.shape[0]}")
    return float(np.real(np.vdot(q @ xv, e @ xv)))


def jr_split(a, tol: float = TOL_PSD) -> tuple[np.ndarray, np.ndarray]:
    """Split a dissipative matrix as A = J - R, J skew-Hermitian, R PSD.

    J is the skew-Hermitian part and R = -(A + A^H)/2.  Raises if A is not
    dissipative, since then no such split exists.
    """
    a = as_matrix(a, "A")
    if a.shape[0] != a.shape[1]:
        raise ShapeError("jr_split needs a square matrix")
    if not check_dissipative(a, tol):
        raise StructureError("cannot split: matrix is not dissipative")
    h = herm_part(a)
    j = a - h
    r = -h
    return j, r


def jr_stacked_bound(sys: BlockDhdae) -> float:
    """sigma_min of the stack [E Q^{-1}; J; R]; positive iff regular.

    Variant of the stacked regularity bound written in the split coordinates:
    E Q^{-1} = diag(E1 Q1^{-1}, 0) and A = J - R.
    """
    if not isinstance(sys, BlockDhdae):
        raise UsageError("jr_stacked_bound needs a block system")
    j, r = jr_split(sys.A)
    eq = np.zeros((sys.n, sys.n), dtype=np.complex128)
    eq[: sys.n1, : sys.n1] = sys.E1 @ np.linalg.inv(sys.Q1)
    smin, _ = sigma_extents(np.vstack([eq, j, r]))
    return smin


def epsilon_shift_test(sys: BlockDhdae, eps: float) -> bool:
    """True iff A + eps * diag(0, I) is still dissipative.

    A positive shift on the algebraic diagonal that preserves dissipativity
    is a sufficient certificate for regularity of the pencil (the shifted
    algebraic block becomes strictly accretive in the algebraic directions).
    The converse does not hold: a False answer proves nothing.
    """
    if eps <= 0.0:
        raise UsageError("eps must be positive")
    shift = np.zeros((sys.n, sys.n), dtype=np.complex128)
    shift[sys.n1 :, sys.n1 :] = eps * np.eye(sys.n2)
    return check_dissipative(sys.A + shift)


@dataclasses.dataclass(frozen=True, eq=False)
class ExtendedDhdae:
    """System extended by a third, energy-invisible block.

    The extension appends n3 states with E3 invertible on the new block and a
    zero Q-block, so the energy is unchanged for every state.  A3ext is the
    new third block row [C | A33] of the extended operator; the third block
    column above A33 is completed skew-adjointly (-C^H), which keeps the
    extended operator dissipative exactly when Herm(A33) is NSD.
    """

    base: BlockDhdae
    n3: int
    E3: np.ndarray
    A3ext: np.ndarray

    def __post_init__(self) -> None:
        if self.n3 < 1:
            raise ShapeError("n3 must be at least 1 for a nontrivial extension")
        e3 = as_matrix(self.E3, "E3")
        a3 = as_matrix(self.A3ext, "A3ext")
        nb = self.base.n
        if e3.shape != (self.n3, self.n3):
            raise ShapeError(f"E3 must be {self.n3} x {self.n3}, got {e3.shape}")
        if a3.shape != (self.n3, nb + self.n3):
            raise ShapeError(
                f"A3ext must be {self.n3} x {nb + self.n3}, got {a3.shape}"
            )
        if not is_invertible(e3):
            raise StructureError("E3 must be invertible")
        a33 = a3[:, nb:]
        if not check_dissipative(a33):
            raise StructureError(
                "extension is not dissipative: the trailing block of A3ext has a "
                "positive Hermitian eigenvalue"
            )
        object.__setattr__(self, "E3", e3)
        object.__setattr__(self, "A3ext", a3)

    @property
    def n(self) -> int:
        return self.base.n + self.n3

    @property
    def A_ext(self) -> np.ndarray:
        nb = self.base.n
        c = self.A3ext[:, :nb]
        a = np.zeros((self.n, self.n), dtype=np.complex128)
        a[:nb, :nb] = self.base.A
        a[:nb, nb:] = -c.conj().T
        a[nb:, :] = self.A3ext
        return a

    @property
    def E_ext(self) -> np.ndarray:
        e = np.zeros((self.n, self.n), dtype=np.complex128)
        e[: self.base.n1, : self.base.n1] = self.base.E1
        e[self.base.n :, self.base.n :] = self.E3
        return e

    @property
    def Q_ext(self) -> np.ndarray:
        q = np.zeros((self.n, self.n), dtype=np.complex128)
        q[: self.base.n, : self.base.n] = self.base.Q
        return q

    def pencil(self) -> RawPencil:
        """The extended pencil s E_ext - A_ext Q_ext as a raw pencil."""
        return RawPencil(E=self.E_ext, M=self.A_ext @ self.Q_ext)


def extend_x3(sys: BlockDhdae, e3, a3ext) -> ExtendedDhdae:
    """Append an energy-invisible block with coefficient row a3ext.

    e3 must be invertible and the trailing n3 x n3 block of a3ext must be
    dissipative; any such extension preserves the energy of every state and
    leaves pencil regularity unchanged.
    """
    e3 = as_matrix(e3, "E3")
    return ExtendedDhdae(base=sys, n3=e3.shape[0], E3=e3, A3ext=as_matrix(a3ext, "A3ext"))


def strip_x3(ext: ExtendedDhdae) -> BlockDhdae:
    """Recover the base system; exact round trip of extend_x3."""
    if not isinstance(ext, ExtendedDhdae):
        raise UsageError("strip_x3 expects an extended system")
    return ext.base

"""Exact structural reductions of block DAE systems to ordinary differential equations.

Two routes are provided.  The Schur route eliminates the algebraic variables
through an invertible algebraic block: x2 becomes an explicit linear function
of x1 and the dynamics close on the full dynamic space.  The subspace route
handles a vanishing algebraic block by restricting the dynamics to the
constraint kernel, with the algebraic variables acting as Lagrange
multipliers.  Both produce generators that are dissipative in the energy
metric E1^H Q1; no approximation is involved.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg

from ._linalg import (
    TOL_INV,
    TOL_PSD,
    as_matrix,
    as_vector,
    herm_part,
    intersection_dim,
    is_hermitian,
    is_invertible,
    max_herm_eig,
    metric_orthonormalize,
    min_herm_eig,
    nullspace,
    orth_columns,
    spectral_norm,
)
from .pencil import (
    BlockDhdae,
    NumericalError,
    ShapeError,
    StructureError,
    UsageError,
    check_dissipative,
    is_regular_sampled,
)


def _metric_dissipative(metric: np.ndarray, gen: np.ndarray, tol: float) -> bool:
    """Hermitian part of metric @ gen is NSD, relative to its scale."""
    w = metric @ gen
    scale = spectral_norm(w)
    if scale == 0.0:
        return True
    return max_herm_eig(w) <= tol * scale


@dataclasses.dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Closed dynamics x1dot = Ared x1 obtained by eliminating x2.

    x2_map recovers the algebraic variables (x2 = x2_map @ x1) and
    inner_metric = E1^H Q1 is the energy inner product, in which Ared is
    dissipative.
    """

    n1: int
    Ared: np.ndarray
    x2_map: np.ndarray
    inner_metric: np.ndarray

    def __post_init__(self) -> None:
        ared = as_matrix(self.Ared, "Ared")
        x2m = as_matrix(self.x2_map, "x2_map")
        metric = as_matrix(self.inner_metric, "inner_metric")
        if ared.shape != (self.n1, self.n1):
            raise ShapeError(f"Ared must be {self.n1} x {self.n1}, got {ared.shape}")
        if x2m.shape[1] != self.n1:
            raise ShapeError(f"x2_map must have {self.n1} columns, got {x2m.shape}")
        if metric.shape != (self.n1, self.n1):
            raise ShapeError("inner_metric must match the dynamic block")
        scale = spectral_norm(metric)
        if scale == 0.0 or not is_hermitian(metric) or min_herm_eig(metric) <= TOL_PSD * scale:
            raise StructureError("inner_metric must be Hermitian positive definite")
        if not _metric_dissipative(metric, ared, TOL_PSD):
            raise StructureError(
                "reduced generator is not dissipative in the energy metric"
            )
        object.__setattr__(self, "Ared", ared)
        object.__setattr__(self, "x2_map", x2m)
        object.__setattr__(self, "inner_metric", metric)

    @property
    def n2(self) -> int:
        return self.x2_map.shape[0]


@dataclasses.dataclass(frozen=True, eq=False)
class SubspaceReducedSystem:
    """Dynamics restricted to the constraint kernel, in orthonormal coordinates.

    basis_V holds m columns spanning the invariant subspace, orthonormal in
    the energy metric; Ared_coords is the generator expressed in those
    coordinates (so plain Euclidean dissipativity applies); multiplier_map
    gives the Lagrange multiplier x2 attached to each basis direction.
    inner_metric is carried along so the invariants are self-contained.
    """

    basis_V: np.ndarray
    Ared_coords: np.ndarray
    multiplier_map: np.ndarray
    inner_metric: np.ndarray

    def __post_init__(self) -> None:
        v = as_matrix(self.basis_V, "basis_V")
        a = as_matrix(self.Ared_coords, "Ared_coords")
        mu = as_matrix(self.multiplier_map, "multiplier_map")
        metric = as_matrix(self.inner_metric, "inner_metric")
        m = v.shape[1]
        if a.shape != (m, m):
            raise ShapeError(f"Ared_coords must be {m} x {m}, got {a.shape}")
        if mu.shape[1] != m:
            raise ShapeError(f"multiplier_map must have {m} columns, got {mu.shape}")
        if metric.shape != (v.shape[0], v.shape[0]):
            raise ShapeError("inner_metric must match the dynamic block")
        gram = v.conj().T @ metric @ v
        if m > 0 and spectral_norm(gram - np.eye(m)) > 1e-12 * max(1.0, spectral_norm(gram)):
            raise StructureError("basis_V is not orthonormal in the energy metric")
        if not check_dissipative(a) and m > 0:
            raise StructureError("Ared_coords is not dissipative")
        object.__setattr__(self, "basis_V", v)
        object.__setattr__(self, "Ared_coords", a)
        object.__setattr__(self, "multiplier_map", mu)
        object.__setattr__(self, "inner_metric", metric)

    @property
    def m(self) -> int:
        return self.basis_V.shape[1]


def schur_reduce(sys: BlockDhdae) -> ReducedSystem:
    """Eliminate x2 through the algebraic block: Ared = E1^{-1}(A11 - A12 A22^{-1} A21) Q1.

    Requires A22 invertible; otherwise the constraint rows do not determine
    x2 from x1 and the subspace route must be used instead.
    """
    if not isinstance(sys, BlockDhdae):
        raise UsageError("schur_reduce expects a block system")
    metric = sys.E1.conj().T @ sys.Q1
    if sys.n2 == 0:
        ared = np.linalg.solve(sys.E1, sys.A11) @ sys.Q1
        return ReducedSystem(
            n1=sys.n1,
            Ared=ared,
            x2_map=np.zeros((0, sys.n1), dtype=np.complex128),
            inner_metric=metric,
        )
    if not is_invertible(sys.A22):
        raise StructureError(
            "closure relation does not determine x₂: A22 is singular; "
            "use subspace_reduce"
        )
    a22_inv_a21 = np.linalg.solve(sys.A22, sys.A21)
    schur = sys.A11 - sys.A12 @ a22_inv_a21
    ared = np.linalg.solve(sys.E1, schur) @ sys.Q1
    x2_map = -np.linalg.solve(sys.Q2, a22_inv_a21 @ sys.Q1)
    residual = sys.A21 @ sys.Q1 + sys.A22 @ sys.Q2 @ x2_map
    scale = max(spectral_norm(sys.A @ sys.Q), 1.0)
    if spectral_norm(residual) > 1e-12 * scale:
        raise NumericalError(
            "algebraic constraint residual too large after elimination"
        )
    return ReducedSystem(n1=sys.n1, Ared=ared, x2_map=x2_map, inner_metric=metric)


def recover_x2(red: ReducedSystem, x1) -> np.ndarray:
    """Algebraic variables consistent with a dynamic state: x2 = x2_map @ x1."""
    x1 = as_vector(x1, "x1")
    if x1.shape[0] != red.n1:
        raise ShapeError(f"x1 must have length {red.n1}, got {x1.shape[0]}")
    return red.x2_map @ x1


def subspace_reduce(sys: BlockDhdae) -> SubspaceReducedSystem:
    """Restrict the dynamics to the constraint kernel, multipliers included.

    Supported algebraic blocks: A22 invertible (the constraint subspace is all
    of X1 and the result agrees with schur_reduce) and A22 numerically zero
    (the subspace is ker(A21 Q1); a well-definedness condition guarantees the
    projected dynamics are single valued).  A singular but nonzero A22 has no
    finite-dimensional recipe and is rejected.
    """
    if not isinstance(sys, BlockDhdae):
        raise UsageError("subspace_reduce expects a block system")
    if not is_regular_sampled(sys).regular:
        raise StructureError("subspace reduction requires a regular pencil")
    metric = sys.E1.conj().T @ sys.Q1
    scale_a = max(spectral_norm(sys.A), 1.0)
    a22_norm = spectral_norm(sys.A22)

    invertible_a22 = sys.n2 == 0 or is_invertible(sys.A22)
    zero_a22 = sys.n2 > 0 and a22_norm <= 1e-12 * scale_a

    if not invertible_a22 and not zero_a22:
        raise StructureError(
            "A22 is singular but nonzero; the constraint subspace mixes x₁ "
            "and x₂ and no finite-dimensional reduction recipe applies"
        )

    if invertible_a22:
        kernel = np.eye(sys.n1, dtype=np.complex128)
    else:
        kernel = nullspace(sys.A21 @ sys.Q1)
        # well-definedness: no nonzero kernel direction y1 with E1 y1 in the
        # range of A12 Q2 (such a y1 would make the projected image ambiguous)
        if kernel.shape[1] > 0 and sys.n2 > 0:
            reachable = orth_columns(
                np.linalg.solve(sys.E1, sys.A12 @ sys.Q2)
            )
            if intersection_dim(kernel, reachable) > 0:
                raise StructureError(
                    "well-definedness condition fails: the constraint kernel "
                    "meets the multiplier range"
                )

    m = kernel.shape[1]
    if m == 0:
        return SubspaceReducedSystem(
            basis_V=np.zeros((sys.n1, 0), dtype=np.complex128),
            Ared_coords=np.zeros((0, 0), dtype=np.complex128),
            multiplier_map=np.zeros((sys.n2, 0), dtype=np.complex128),
            inner_metric=metric,
        )

    v = metric_orthonormalize(kernel, metric)
    drive = np.linalg.solve(sys.E1, sys.A11 @ sys.Q1 @ v)

    if invertible_a22:
        if sys.n2 == 0:
            mu = np.zeros((0, m), dtype=np.complex128)
            w = drive
        else:
            mu = -np.linalg.solve(sys.Q2, np.linalg.solve(sys.A22, sys.A21 @ sys.Q1 @ v))
            w = drive + np.linalg.solve(sys.E1, sys.A12 @ sys.Q2 @ mu)
    else:
        # choose multipliers so the image stays in span(V), in the energy metric
        proj = v @ (v.conj().T @ metric)
        gain = np.linalg.solve(sys.E1, sys.A12 @ sys.Q2)
        t = gain - proj @ gain
        rhs = -(drive - proj @ drive)
        mu, *_ = np.linalg.lstsq(t, rhs, rcond=None)
        w = drive + gain @ mu
        residual = w - proj @ w
        if spectral_norm(residual) > 1e-10 * max(spectral_norm(w), 1.0):
            raise StructureError(
                "reduced action leaves the subspace: no multiplier closes the dynamics"
            )

    ared_coords = v.conj().T @ metric @ w
    return SubspaceReducedSystem(
        basis_V=v, Ared_coords=ared_coords, multiplier_map=mu, inner_metric=metric
    )


def output_nulling_generator(a0, b0) -> np.ndarray:
    """A0 - B0 (B0^H B0)^{-1} B0^H A0: dynamics projected along the input range.

    Requires B0 of full column rank; the restriction of the result to
    ker B0^H reproduces the subspace reduction of the corresponding saddle
    system.
    """
    a0 = as_matrix(a0, "A0")
    b0 = as_matrix(b0, "B0")
    if a0.shape[0] != a0.shape[1]:
        raise ShapeError("A0 must be square")
    if b0.shape[0] != a0.shape[0]:
        raise ShapeError("B0 must have as many rows as A0")
    if b0.shape[1] == 0:
        raise UsageError("B0 must have at least one column")
    gram = b0.conj().T @ b0
    if not is_invertible(gram):
        raise StructureError("rank-deficient B0: the output-nulling projector is undefined")
    return a0 - b0 @ np.linalg.solve(gram, b0.conj().T @ a0)


def feedback_reduce(a0, b0, k) -> np.ndarray:
    """Collapse the output-feedback loop u = -K y, y = B0^H x1 to A0 - B0 K B0^H.

    Builds the three-block closed-loop operator
    [[A0, B0, 0], [-B0^H, 0, I], [0, -I, -K]], eliminates the two auxiliary
    blocks (their algebraic block is always invertible), and returns the
    resulting generator, which equals A0 - B0 K B0^H exactly.
    """
    a0 = as_matrix(a0, "A0")
    b0 = as_matrix(b0, "B0")
    k = as_matrix(k, "K")
    n = a0.shape[0]
    m = b0.shape[1]
    if a0.shape != (n, n) or b0.shape != (n, m) or k.shape != (m, m):
        raise ShapeError("A0 must be n x n, B0 n x m, K m x m")
    if not check_dissipative(a0):
        raise StructureError("A0 must be dissipative")
    scale = spectral_norm(k)
    if scale > 0.0 and min_herm_eig(k) < -TOL_PSD * scale:
        raise StructureError("K + K^H must be positive semidefinite")
    eye = np.eye(m, dtype=np.complex128)
    a = np.zeros((n + 2 * m, n + 2 * m), dtype=np.complex128)
    a[:n, :n] = a0
    a[:n, n : n + m] = b0
    a[n : n + m, :n] = -b0.conj().T
    a[n : n + m, n + m :] = eye
    a[n + m :, n : n + m] = -eye
    a[n + m :, n + m :] = -k
    sys = BlockDhdae(
        n1=n,
        n2=2 * m,
        E1=np.eye(n),
        Q1=np.eye(n),
        Q2=np.eye(2 * m),
        A=a,
    )
    return schur_reduce(sys).Ared


def impedance_construct(l, k0, g) -> tuple[BlockDhdae, np.ndarray]:
    """Assemble the impedance-coupled three-block system and its reduction target.

    For L coupling two energy blocks, a dissipation channel read out by K0 and
    an internal feedthrough G with NSD Hermitian part, the full operator is
    [[0, -L, 0], [L^H, G, K0^H], [0, -K0, -I]] with identity E on the energy
    blocks.  Eliminating the channel yields [[0, -L], [L^H, G - K0^H K0]],
    which is returned alongside the assembled system for cross-checking.
    """
    l = as_matrix(l, "L")
    k0 = as_matrix(k0, "K0")
    g = as_matrix(g, "G")
    nh, nv = l.shape
    if g.shape != (nv, nv):
        raise ShapeError(f"G must be {nv} x {nv}, got {g.shape}")
    if k0.shape[1] != nv:
        raise ShapeError(f"K0 must have {nv} columns, got {k0.shape}")
    nu = k0.shape[0]
    if not check_dissipative(g):
        raise StructureError("G is not dissipative: G + G^H has a positive eigenvalue")
    n1 = nh + nv
    a = np.zeros((n1 + nu, n1 + nu), dtype=np.complex128)
    a[:nh, nh:n1] = -l
    a[nh:n1, :nh] = l.conj().T
    a[nh:n1, nh:n1] = g
    a[nh:n1, n1:] = k0.conj().T
    a[n1:, nh:n1] = -k0
    a[n1:, n1:] = -np.eye(nu)
    sys = BlockDhdae(
        n1=n1,
        n2=nu,
        E1=np.eye(n1),
        Q1=np.eye(n1),
        Q2=np.eye(max(nu, 0)),
        A=a,
    )
    target = np.zeros((n1, n1), dtype=np.complex128)
    target[:nh, nh:] = -l
    target[nh:, :nh] = l.conj().T
    target[nh:, nh:] = g - k0.conj().T @ k0
    return sys, target

"""Uniform periodic grids and sparse operator assembly.

The unit cell [0,1)^d and the macroscopic box [0,L)^d share the same
vertex-centred discretization: n points per axis at coordinates j*h,
index arithmetic wrapping modulo n.  Quadrature is the rectangle rule
h^d * sum, which integrates any nonzero single Fourier mode to zero
exactly (up to round-off).

Operator assembly provides the building blocks for every stage:

* ``diffusion_matrix``   -- divergence form with face-averaged (arithmetic
  mean) coefficients on the diagonal entries of D and central composition
  for the mixed entries; symmetric, row sums zero.
* ``convection_matrix``  -- central, upwind, or skew-symmetric splitting
  of b . grad.  The skew variant takes a prescribed divergence field so
  the symmetric part of the operator is exactly -(1/2) diag(div_model),
  which downstream stages exploit to make the discrete energy balance
  and dispersion identities hold at solver precision.
* ``coupled_system`` / ``difference_coupled_system`` -- N-species block
  operators with zero-order coupling on matching nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import MultihomError


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic lattice with n points per axis.

    ``length`` is 1 for cell grids and the box edge L for macroscopic
    grids; spacing is ``length / n`` and nodes sit at j * spacing.
    """

    d: int
    n: int
    length: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise MultihomError(f"unsupported dimension {self.d}; expected 1 or 2")
        if not _is_power_of_two(self.n) or self.n < 8:
            raise MultihomError(
                f"resolution {self.n} must be a power of two >= 8")
        if self.length <= 0:
            raise MultihomError("grid length must be positive")

    @property
    def h(self):
        return self.length / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def num_nodes(self):
        return self.n ** self.d

    def axes(self):
        """1D coordinate array shared by all axes."""
        return np.arange(self.n) * self.h

    def nodes(self):
        """Node coordinates, shape (d, n, ...) matching ``shape``."""
        ax = self.axes()
        if self.d == 1:
            return ax[np.newaxis, :]
        return np.stack(np.meshgrid(ax, ax, indexing="ij"))


def build_grid(d, n):
    """Unit-cell grid; rejects d not in {1,2} and non-power-of-two n."""
    return PeriodicGrid(d=int(d), n=int(n), length=1.0)


def build_macro_grid(d, m, length):
    """Macroscopic periodic box grid with m points per axis."""
    return PeriodicGrid(d=int(d), n=int(m), length=float(length))


def cell_integrate(grid, values):
    """Rectangle-rule quadrature h^d * sum over nodes."""
    return float(np.sum(values) * grid.h ** grid.d)


# ---------------------------------------------------------------------------
# shift and difference operators (sparse, on flattened n^d nodes, C order)


def _shift_1d(n, offset):
    rows = np.arange(n)
    cols = (rows + offset) % n
    return sp.csr_matrix((np.ones(n), (rows, cols)), shape=(n, n))


def shift_matrix(grid, axis, offset):
    """Permutation mapping node j to node j + offset*e_axis (periodic)."""
    s = _shift_1d(grid.n, offset)
    if grid.d == 1:
        return s
    eye = sp.identity(grid.n, format="csr")
    return sp.kron(s, eye, format="csr") if axis == 0 else sp.kron(eye, s, format="csr")


def central_difference(grid, axis):
    """(u[j+1] - u[j-1]) / (2h) along the given axis."""
    return (shift_matrix(grid, axis, +1) - shift_matrix(grid, axis, -1)) / (2.0 * grid.h)


def forward_difference(grid, axis):
    """(u[j+1] - u[j]) / h: the gradient on the face between j and j+1."""
    return (shift_matrix(grid, axis, +1) - sp.identity(grid.num_nodes, format="csr")) / grid.h


def roll(values, axis, offset):
    """numpy roll matching the shift_matrix convention: offset +1 reads j+1."""
    return np.roll(values, -offset, axis=axis)


def gradient(grid, values):
    """Central-difference gradient, shape (d, *grid.shape)."""
    out = np.empty((grid.d,) + grid.shape)
    for k in range(grid.d):
        out[k] = (roll(values, k, +1) - roll(values, k, -1)) / (2.0 * grid.h)
    return out


def divergence(grid, vector_values):
    """Central-difference divergence of a (d, *shape) vector field."""
    out = np.zeros(grid.shape)
    for k in range(grid.d):
        out += (roll(vector_values[k], k, +1) - roll(vector_values[k], k, -1)) / (2.0 * grid.h)
    return out


def face_average(grid, values, axis):
    """Arithmetic mean of node values across the face (j, j+1) along axis."""
    return 0.5 * (values + roll(values, axis, +1))


# ---------------------------------------------------------------------------
# single-species operator blocks


def diffusion_matrix(grid, D):
    """Divergence-form block for phi -> -div(D grad phi).

    D has shape (d, d, *grid.shape); diagonal entries use the symmetric
    face form F^T diag(D_face) F, mixed entries the central composition
    G_k^T diag(D_kl) G_l.  Row sums vanish and the matrix is symmetric
    whenever D is node-wise symmetric.
    """
    n_nodes = grid.num_nodes
    A = sp.csr_matrix((n_nodes, n_nodes))
    for k in range(grid.d):
        F = forward_difference(grid, k)
        c = face_average(grid, D[k, k], k).ravel()
        A = A + F.T @ sp.diags(c) @ F
    for k in range(grid.d):
        for l in range(grid.d):
            if k == l:
                continue
            Gk = central_difference(grid, k)
            Gl = central_difference(grid, l)
            A = A + Gk.T @ sp.diags(D[k, l].ravel()) @ Gl
    return A.tocsr()


def diffusion_affine_rhs(grid, D, direction):
    """Action of the diffusion block on the affine function x_i.

    Returns the node field equal to the discrete -div(D e_i), assembled
    with exactly the same face/central structure as ``diffusion_matrix``
    so that moving it to the right-hand side keeps summation-by-parts
    identities exact.
    """
    i = direction
    out = np.zeros(grid.shape)
    c = face_average(grid, D[i, i], i)
    # F^T applied to the face field c: (c[j - e_i] - c[j]) / h
    out += (roll(c, i, -1) - c) / grid.h
    for k in range(grid.d):
        if k == i:
            continue
        # G_k^T applied to D[k, i]: minus the central difference
        out -= (roll(D[k, i], k, +1) - roll(D[k, i], k, -1)) / (2.0 * grid.h)
    return out


def convection_matrix(grid, b, stencil, div_model=None):
    """Block for phi -> b . grad phi.

    stencil:
      ``central``  second order, rows sum to zero.
      ``upwind``   first order, M-matrix compatible off-diagonals.
      ``skew``     0.5 [diag(b) G + G diag(b)] - 0.5 diag(div_model);
                   the skew part is exactly antisymmetric, so the
                   operator's symmetric part is -0.5 diag(div_model).
    """
    n_nodes = grid.num_nodes
    A = sp.csr_matrix((n_nodes, n_nodes))
    if stencil == "central":
        for k in range(grid.d):
            A = A + sp.diags(b[k].ravel()) @ central_difference(grid, k)
    elif stencil == "upwind":
        for k in range(grid.d):
            bk = b[k].ravel()
            pos = sp.diags(np.maximum(bk, 0.0))
            neg = sp.diags(np.minimum(bk, 0.0))
            back = (sp.identity(n_nodes, format="csr")
                    - shift_matrix(grid, k, -1)) / grid.h
            fwd = forward_difference(grid, k)
            A = A + pos @ back + neg @ fwd
    elif stencil == "skew":
        for k in range(grid.d):
            Bk = sp.diags(b[k].ravel())
            G = central_difference(grid, k)
            A = A + 0.5 * (Bk @ G + G @ Bk)
        if div_model is not None:
            A = A - 0.5 * sp.diags(np.asarray(div_model).ravel())
    else:
        raise MultihomError(f"unknown convection stencil {stencil!r}")
    return A.tocsr()


def assemble_cd_block(grid, b, D, convection_scale=1.0, stencil="central",
                      div_model=None, div_scale=1.0):
    """Single-species convection-diffusion block b.grad - div(D grad)."""
    A = diffusion_matrix(grid, D)
    if b is not None and np.any(b):
        A = A + convection_scale * convection_matrix(
            grid, b, stencil,
            None if div_model is None else div_scale / convection_scale * div_model)
    elif div_model is not None and stencil == "skew":
        A = A - 0.5 * div_scale * sp.diags(np.asarray(div_model).ravel())
    return A.tocsr()


# ---------------------------------------------------------------------------
# N-species block systems


def coupled_system(grid, b, D, Pi, convection_scale=1.0, reaction_scale=1.0,
                   stencil="central"):
    """Block operator of the coupled system with plain zero-order coupling.

    Row (alpha, j): b_a . grad u_a - div(D_a grad u_a)
                    + reaction_scale * sum_b Pi_ab(j) u_b(j).
    b: (N, d, *shape), D: (N, d, d, *shape), Pi: (N, N, *shape).
    """
    N = Pi.shape[0]
    blocks = [[None] * N for _ in range(N)]
    for a in range(N):
        block = assemble_cd_block(grid, b[a], D[a], convection_scale, stencil)
        block = block + reaction_scale * sp.diags(Pi[a, a].ravel())
        blocks[a][a] = block
        for bb in range(N):
            if bb != a:
                blocks[a][bb] = reaction_scale * sp.diags(Pi[a, bb].ravel())
    return sp.bmat(blocks, format="csr")


def difference_coupled_system(grid, b, D, C, convection_scale=1.0,
                              coupling_scale=1.0, stencil="skew",
                              div_model=None, div_scale=1.0):
    """Block operator with difference-form coupling.

    Row (alpha, j): b_a . grad v_a - div(D_a grad v_a)
                    + coupling_scale * sum_b C_ab(j) (v_b(j) - v_a(j)).

    With ``stencil="skew"`` the per-species divergence model defaults to
    the coupling imbalance m_a = sum_b (C_ba - C_ab), the zero-order
    expression the continuum divergence of the convective field equals.
    """
    N = C.shape[0]
    if div_model is None and stencil == "skew":
        div_model = coupling_imbalance(C)
        div_scale = coupling_scale
    blocks = [[None] * N for _ in range(N)]
    for a in range(N):
        block = assemble_cd_block(
            grid, b[a], D[a], convection_scale, stencil,
            None if div_model is None else div_model[a], div_scale)
        off_sum = np.zeros(grid.shape)
        for bb in range(N):
            if bb == a:
                continue
            off_sum += C[a, bb]
            blocks[a][bb] = coupling_scale * sp.diags(C[a, bb].ravel())
        blocks[a][a] = block - coupling_scale * sp.diags(off_sum.ravel())
    return sp.bmat(blocks, format="csr")


def coupling_imbalance(C):
    """m_a = sum_b (C_ba - C_ab): column sums minus row sums of C(y)."""
    return np.sum(C, axis=0) - np.sum(C, axis=1)


def max_positive_offdiagonal(A):
    """Largest positive off-diagonal entry of a sparse matrix (0 if none)."""
    coo = A.tocoo()
    mask = coo.row != coo.col
    if not np.any(mask):
        return 0.0
    vals = coo.data[mask]
    return float(max(vals.max(), 0.0)) if vals.size else 0.0

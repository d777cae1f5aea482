"""Problem definition: periodic coefficients, initial data, hypotheses.

A problem bundles, per species alpha, a scalar density rho_a, a velocity
field b_a, a symmetric diffusivity D_a, the reaction coupling matrix
Pi_ab, macroscopic initial data, a final time and a list of epsilon
values.  All periodic coefficients are truncated Fourier series
(:mod:`multihom.fourier`), so sampling at cell nodes or at rescaled
macroscopic nodes x/eps is exact.

Sampling validates the structural hypotheses node-wise:

* rho_a > 0,
* D_a symmetric with positive smallest eigenvalue,
* Pi_ab <= 0 for alpha != beta (cooperative coupling),
* the directed species graph with an edge (a, b) whenever Pi_ab is not
  identically zero is strongly connected (irreducible coupling).

Violations raise :class:`~multihom.errors.HypothesisViolation` naming the
hypothesis, the node and the species pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import HypothesisViolation, MultihomError
from .fourier import FourierField
from .grid import PeriodicGrid

_SYM_TOL = 1e-14


@dataclass(frozen=True)
class InitialData:
    """Macroscopic initial datum for one species.

    kind "gaussian": amplitude * exp(-|x - center|^2 / (2 width^2));
    kind "constant": the amplitude everywhere.
    """

    kind: str = "gaussian"
    amplitude: float = 1.0
    center: tuple[float, ...] = (0.5,)
    width: float = 0.05

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        if self.kind == "constant":
            return np.full(points.shape[1:], self.amplitude)
        if self.kind == "gaussian":
            c = np.asarray(self.center, dtype=float)
            r2 = np.zeros(points.shape[1:])
            for k in range(points.shape[0]):
                r2 += (points[k] - c[k]) ** 2
            return self.amplitude * np.exp(-r2 / (2.0 * self.width ** 2))
        raise MultihomError(f"unknown initial data kind {self.kind!r}")

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude,
                "center": list(self.center), "width": self.width}

    @staticmethod
    def from_dict(d):
        return InitialData(kind=d.get("kind", "gaussian"),
                           amplitude=float(d.get("amplitude", 1.0)),
                           center=tuple(float(c) for c in d.get("center", (0.5,))),
                           width=float(d.get("width", 0.05)))


@dataclass(frozen=True)
class ProblemSpec:
    """Full problem definition.

    rho[a] scalar field, b[a] tuple of d scalar fields, D[a] d x d nested
    tuple of scalar fields, Pi[a][b] scalar field, u_in[a] initial datum.
    """

    d: int
    N: int
    rho: tuple[FourierField, ...]
    b: tuple[tuple[FourierField, ...], ...]
    D: tuple[tuple[tuple[FourierField, ...], ...], ...]
    Pi: tuple[tuple[FourierField, ...], ...]
    u_in: tuple[InitialData, ...]
    T: float = 0.01
    eps_list: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.rho) != self.N or len(self.b) != self.N \
                or len(self.D) != self.N or len(self.Pi) != self.N \
                or len(self.u_in) != self.N:
            raise MultihomError("species-indexed coefficient lists must have length N")

    # ------------------------------------------------------------------ io
    def to_dict(self):
        return {
            "dimension": self.d,
            "species": self.N,
            "rho": [f.to_dict() for f in self.rho],
            "b": [[f.to_dict() for f in row] for row in self.b],
            "D": [[[f.to_dict() for f in row] for row in mat] for mat in self.D],
            "Pi": [[f.to_dict() for f in row] for row in self.Pi],
            "initial_data": [u.to_dict() for u in self.u_in],
            "final_time": self.T,
            "epsilons": list(self.eps_list),
        }

    @staticmethod
    def from_dict(data):
        return ProblemSpec(
            d=int(data["dimension"]),
            N=int(data["species"]),
            rho=tuple(FourierField.from_dict(f) for f in data["rho"]),
            b=tuple(tuple(FourierField.from_dict(f) for f in row)
                    for row in data["b"]),
            D=tuple(tuple(tuple(FourierField.from_dict(f) for f in row)
                          for row in mat) for mat in data["D"]),
            Pi=tuple(tuple(FourierField.from_dict(f) for f in row)
                     for row in data["Pi"]),
            u_in=tuple(InitialData.from_dict(u) for u in data["initial_data"]),
            T=float(data["final_time"]),
            eps_list=tuple(float(e) for e in data["epsilons"]),
        )


def save_problem(spec, path):
    with open(path, "w") as f:
        json.dump(spec.to_dict(), f, indent=1, sort_keys=True)
        f.write("\n")


def load_problem(path):
    with open(path) as f:
        return ProblemSpec.from_dict(json.load(f))


# ---------------------------------------------------------------------- sampling
@dataclass(frozen=True)
class SampledFields:
    """Node-wise coefficient arrays on a periodic grid.

    rho (N, *shape), b (N, d, *shape), D (N, d, d, *shape), Pi (N, N, *shape).
    """

    grid: PeriodicGrid
    rho: np.ndarray
    b: np.ndarray
    D: np.ndarray
    Pi: np.ndarray

    @property
    def N(self):
        return self.rho.shape[0]


def _evaluate_spec(spec, points):
    shape = points.shape[1:]
    N, d = spec.N, spec.d
    rho = np.empty((N,) + shape)
    b = np.empty((N, d) + shape)
    D = np.empty((N, d, d) + shape)
    Pi = np.empty((N, N) + shape)
    for a in range(N):
        rho[a] = spec.rho[a](points)
        for k in range(d):
            b[a, k] = spec.b[a][k](points)
        for k in range(d):
            for l in range(d):
                D[a, k, l] = spec.D[a][k][l](points)
        for bb in range(N):
            Pi[a, bb] = spec.Pi[a][bb](points)
    return rho, b, D, Pi


def _check_hypotheses(spec, grid, rho, D, Pi):
    N = spec.N
    for a in range(N):
        if np.min(rho[a]) <= 0.0:
            j = int(np.argmin(rho[a]))
            raise HypothesisViolation(
                "rho_positivity",
                f"rho[{a}] = {rho[a].ravel()[j]:.6g} <= 0 at node {j}")
        asym = np.max(np.abs(D[a] - np.swapaxes(D[a], 0, 1)))
        if asym > _SYM_TOL:
            raise HypothesisViolation(
                "diffusion_symmetry", f"D[{a}] asymmetric by {asym:.3g}")
        if spec.d == 1:
            min_eig = np.min(D[a, 0, 0])
        else:
            tr = D[a, 0, 0] + D[a, 1, 1]
            det = D[a, 0, 0] * D[a, 1, 1] - D[a, 0, 1] * D[a, 1, 0]
            disc = np.sqrt(np.maximum((tr / 2) ** 2 - det, 0.0))
            min_eig = np.min(tr / 2 - disc)
        if min_eig <= 0.0:
            raise HypothesisViolation(
                "diffusion_coercivity",
                f"smallest eigenvalue of D[{a}] is {min_eig:.6g} <= 0")
    for a in range(N):
        for bb in range(N):
            if a == bb:
                continue
            worst = np.max(Pi[a, bb])
            if worst > 0.0:
                j = int(np.argmax(Pi[a, bb]))
                raise HypothesisViolation(
                    "cooperativity",
                    f"Pi[{a}][{bb}] = {worst:.6g} > 0 at node {j}")
    if N > 1:
        adj = np.zeros((N, N))
        for a in range(N):
            for bb in range(N):
                if a != bb and np.max(np.abs(Pi[a, bb])) > 0.0:
                    adj[a, bb] = 1.0
        ncomp, _ = connected_components(sp.csr_matrix(adj),
                                        directed=True, connection="strong")
        if ncomp != 1:
            raise HypothesisViolation(
                "irreducibility",
                f"species coupling graph splits into {ncomp} strongly "
                "connected components")


def sample_fields(spec, grid):
    """Evaluate all coefficients at cell nodes and validate hypotheses."""
    if grid.d != spec.d:
        raise MultihomError("grid dimension does not match problem dimension")
    rho, b, D, Pi = _evaluate_spec(spec, grid.nodes())
    _check_hypotheses(spec, grid, rho, D, Pi)
    return SampledFields(grid=grid, rho=rho, b=b, D=D, Pi=Pi)


def sample_fields_scaled(spec, macro_grid, eps):
    """Evaluate coefficients at macroscopic nodes x -> x/eps (exact)."""
    if macro_grid.d != spec.d:
        raise MultihomError("grid dimension does not match problem dimension")
    points = macro_grid.nodes() / eps
    rho, b, D, Pi = _evaluate_spec(spec, points)
    _check_hypotheses(spec, macro_grid, rho, D, Pi)
    return SampledFields(grid=macro_grid, rho=rho, b=b, D=D, Pi=Pi)


def initial_values(spec, macro_grid):
    """Initial data sampled on the macroscopic grid, shape (N, *shape)."""
    pts = macro_grid.nodes()
    return np.stack([spec.u_in[a](pts) for a in range(spec.N)])

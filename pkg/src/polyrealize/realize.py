"""Realization of incidence relations by filled matrices.

A relation is realizable as the facet-vertex incidence of a d-polytope
exactly when its maxbiclique lattice is graded of rank d+1, diamond,
and flag connected, and the relation admits a rank-d matrix equal to 1
on incident pairs and strictly below 1 elsewhere.  This module checks
filled matrices against relations, factors them into covertex and
vertex matrices through the compact SVD, converts between the
polytope (fill 1, rank d) and cone (fill 0, rank d+1) presentations by
diagonal rescaling, and wires the combinatorial gate and the completion
search into a single realizability verdict with a re-verifiable
certificate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .complete import (
    STATUS_FOUND as COMPLETION_FOUND,
    CompletionProblem,
    complete as run_completion,
)
from .errors import (
    CapExceededError,
    DimensionMismatchError,
    NoPositiveScalingError,
    PatternViolationError,
    RankAnomalyError,
    RankMismatchError,
)
from .incidence import (
    IncidenceRelation,
    MaxbicliqueLattice,
    build_maxbiclique_lattice,
    check_diamond,
    check_flag_connected_local,
    lattice_rank,
)
from .numkernel import (
    DEFAULT_RANK_TOL,
    as_matrix,
    compact_svd,
    lp_strict_feasibility,
    numeric_rank,
)

DEFAULT_EQ_TOL = 1e-7
DEFAULT_SLACK_TOL = 1e-7

KIND_POLYTOPE = "polytope"
KIND_CONE = "cone"

REASON_NOT_GRADED = "not-graded"
REASON_RANK = "lattice-rank"
REASON_DIAMOND = "diamond"
REASON_FLAG_CONNECTIVITY = "flag-connectivity"

STATUS_REALIZED = "realized"
STATUS_REJECTED = "rejected"
STATUS_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PatternViolation:
    """One entry breaking the filled incidence pattern (1-based indices)."""

    facet: int
    vertex: int
    value: float
    kind: str  # "fill" for wrong incident entry, "slack" for weak off entry


@dataclass(frozen=True)
class PatternReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def incidence_mask(rel: IncidenceRelation) -> np.ndarray:
    """Boolean n x m mask of the incident pairs."""
    mask = np.zeros((rel.n_facets, rel.n_vertices), dtype=bool)
    for i, j in rel.incident:
        mask[i - 1, j - 1] = True
    return mask


def check_filled_incidence(
    M,
    rel: IncidenceRelation,
    fill: float,
    eq_tol: float = DEFAULT_EQ_TOL,
    slack_tol: float = DEFAULT_SLACK_TOL,
) -> PatternReport:
    """Check that M equals fill on incident pairs and stays below fill elsewhere.

    Incident entries must satisfy |M[i,j] - fill| <= eq_tol, all other
    entries M[i,j] < fill - slack_tol.  The report lists every violating
    entry.
    """
    M = as_matrix(M)
    if M.shape != (rel.n_facets, rel.n_vertices):
        raise DimensionMismatchError(
            f"matrix shape {M.shape} does not match the "
            f"{rel.n_facets} x {rel.n_vertices} relation"
        )
    mask = incidence_mask(rel)
    violations = []
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            v = M[i, j]
            if mask[i, j]:
                if abs(v - fill) > eq_tol:
                    violations.append(PatternViolation(i + 1, j + 1, float(v), "fill"))
            elif not v < fill - slack_tol:
                violations.append(PatternViolation(i + 1, j + 1, float(v), "slack"))
    return PatternReport(not violations, tuple(violations))


@dataclass(frozen=True, eq=False)
class FilledIncidenceMatrix:
    """A matrix verified to realize a relation's pattern at the given fill."""

    matrix: np.ndarray
    relation: IncidenceRelation
    fill: float
    eq_tol: float = DEFAULT_EQ_TOL
    slack_tol: float = DEFAULT_SLACK_TOL

    def __post_init__(self):
        report = check_filled_incidence(
            self.matrix, self.relation, self.fill, self.eq_tol, self.slack_tol
        )
        if not report.ok:
            head = report.violations[0]
            raise PatternViolationError(
                f"matrix is not a filled {self.fill:g}-incidence matrix: "
                f"{len(report.violations)} violations, first at "
                f"({head.facet}, {head.vertex}) value {head.value:g} [{head.kind}]",
                report.violations,
            )
        object.__setattr__(self, "matrix", as_matrix(self.matrix).copy())
        self.matrix.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Realization:
    """Vertex matrix W and covertex matrix H with H.T @ W the filled matrix.

    For polytopes (fill 1) the factors live in R^d, for cones (fill 0)
    in R^(d+1); ``dim`` is always the polytope dimension d.
    """

    dim: int
    W: np.ndarray
    H: np.ndarray
    kind: str


@dataclass(frozen=True, eq=False)
class RealizabilityVerdict:
    """Outcome of the full pipeline on one relation.

    status is "realized" with a certificate (realization + matrix) that
    re-verifies from scratch, "rejected" with the failed combinatorial
    condition, or "inconclusive" with the best completion residual; the
    numeric search never claims nonrealizability.
    """

    status: str
    d: int
    reason: str = None
    realization: Realization = None
    matrix: FilledIncidenceMatrix = None
    best_residual: float = None
    completion: object = field(default=None, repr=False)
    lattice: MaxbicliqueLattice = field(default=None, repr=False)


def facet_vertex_matrix(H, W) -> np.ndarray:
    """Matrix of inner products of covertex columns with vertex columns."""
    H = as_matrix(H, "H")
    W = as_matrix(W, "W")
    if H.shape[0] != W.shape[0]:
        raise DimensionMismatchError(
            f"H has ambient dimension {H.shape[0]}, W has {W.shape[0]}"
        )
    return H.T @ W


def realize_from_matrix(
    fim: FilledIncidenceMatrix, d: int, rank_tol: float = DEFAULT_RANK_TOL
) -> Realization:
    """Split a filled matrix into covertices and vertices via the compact SVD.

    With M = U S V.T, take H = sqrt(S) U.T and W = sqrt(S) V.T, so that
    H.T @ W reproduces M and the columns of W are the vertices of a
    centered realization (generators, for fill 0).  The numeric rank
    must equal d for fill 1 and d+1 for fill 0.
    """
    expected = d if fim.fill == 1.0 else d + 1
    svd = compact_svd(fim.matrix, rank_tol)
    if svd.rank != expected:
        raise RankMismatchError(
            f"matrix has numeric rank {svd.rank}, expected {expected}"
        )
    root = np.sqrt(svd.sigma)
    H = root[:, None] * svd.U.T
    W = root[:, None] * svd.V.T
    kind = KIND_POLYTOPE if fim.fill == 1.0 else KIND_CONE
    return Realization(d, W, H, kind)


def polytope_to_cone_matrix(fim: FilledIncidenceMatrix, rank_tol: float = DEFAULT_RANK_TOL) -> FilledIncidenceMatrix:
    """Homogenize: N = M - 1 is a filled 0-incidence matrix of rank d+1.

    Subtracting the all-ones matrix moves the supporting hyperplanes to
    homogeneous coordinates; the rank must rise by exactly one, anything
    else is flagged as an anomaly instead of silently accepted.
    """
    if fim.fill != 1.0:
        raise ValueError("polytope_to_cone_matrix needs a fill-1 matrix")
    d = numeric_rank(fim.matrix, rank_tol)
    N = fim.matrix - 1.0
    if numeric_rank(N, rank_tol) != d + 1:
        raise RankAnomalyError(
            f"subtracting ones changed rank {d} to {numeric_rank(N, rank_tol)}, "
            f"expected {d + 1}"
        )
    return FilledIncidenceMatrix(N, fim.relation, 0.0, fim.eq_tol, fim.slack_tol)


def _positive_image_vector(B: np.ndarray, seed: int) -> np.ndarray:
    """Find z with B @ z > 0 entrywise, or None.

    Solved as a strict-feasibility LP maximizing the worst entry; falls
    back to seeded sampling when the LP fails numerically.  Such z
    exists exactly when the rows of B lie in an open half space, which
    for the singular factors of a facet-ray matrix expresses that the
    cone is pointed.
    """
    k = B.shape[1]
    constraints = [(-B[l], 0.0) for l in range(B.shape[0])]
    res = lp_strict_feasibility([], constraints, dim=k)
    if res.feasible:
        z = res.witness / max(np.abs(res.witness).max(), 1e-300)
        if np.all(B @ z > 0):
            return z
    rng = np.random.default_rng(seed)
    for _ in range(500):
        z = rng.standard_normal(k)
        if np.all(B @ z > 0):
            return z
    return None


def cone_to_polytope_matrix(
    fim: FilledIncidenceMatrix,
    rank_tol: float = DEFAULT_RANK_TOL,
    seed: int = 0,
) -> FilledIncidenceMatrix:
    """Dehomogenize a filled 0-incidence matrix by diagonal rescaling.

    With N = U S V.T of rank d+1, find x, y making -U @ x and V @ y
    entrywise positive, normalize <x, S^-1 y> = 1, and return
    M = D1 N D2 + 1 with D1 = diag(-Ux)^-1, D2 = diag(Vy)^-1.
    The rank-one update cancels exactly one singular direction, so M has
    rank d and keeps the sign pattern of N shifted to fill 1.  The
    positive vectors exist whenever N is a facet-ray matrix of a pointed
    cone over a polytope; their choice picks the cutting hyperplanes.
    """
    if fim.fill != 0.0:
        raise ValueError("cone_to_polytope_matrix needs a fill-0 matrix")
    N = fim.matrix
    svd = compact_svd(N, rank_tol)
    d = svd.rank - 1
    y = _positive_image_vector(svd.V, seed)
    x = _positive_image_vector(-svd.U, seed + 1)
    if x is None or y is None:
        raise NoPositiveScalingError(
            "no positive diagonal scaling preserves the sign pattern; "
            "the matrix is not a facet-ray matrix of a cone over a polytope"
        )
    s = float(x @ (y / svd.sigma))
    if s <= 0:
        # for genuine facet-ray matrices this pairing is positive (it is
        # the inner product of an interior point with a dual interior
        # point); anything else means the input is not one
        raise NoPositiveScalingError(
            "scaling vectors pair nonpositively against the singular values"
        )
    x = x / s
    d1 = 1.0 / (-(svd.U @ x))
    d2 = 1.0 / (svd.V @ y)
    M = d1[:, None] * N * d2[None, :] + 1.0
    if numeric_rank(M, rank_tol) != d:
        raise RankAnomalyError(
            f"rescaled matrix has rank {numeric_rank(M, rank_tol)}, expected {d}"
        )
    return FilledIncidenceMatrix(M, fim.relation, 1.0, fim.eq_tol, fim.slack_tol)


def combinatorial_gate(rel: IncidenceRelation, d: int = None):
    """Run the lattice conditions; returns (lattice, d, failed_reason).

    The reason is None when the relation passes gradedness, rank d+1,
    diamond, and local flag connectivity.  When d is not supplied it is
    inferred from the lattice rank.
    """
    rel.require_nondegenerate()
    lat = build_maxbiclique_lattice(rel)
    rank = lattice_rank(lat)
    if rank is None:
        return lat, d, REASON_NOT_GRADED
    if d is None:
        d = rank - 1
    if rank != d + 1:
        return lat, d, REASON_RANK
    if not check_diamond(lat):
        return lat, d, REASON_DIAMOND
    if not check_flag_connected_local(lat):
        return lat, d, REASON_FLAG_CONNECTIVITY
    return lat, d, None


def realizability_check(
    rel: IncidenceRelation,
    d: int = None,
    *,
    margin: float = 0.1,
    max_restarts: int = 32,
    max_iters: int = 2000,
    seed: int = 0,
    eq_tol: float = DEFAULT_EQ_TOL,
    slack_tol: float = DEFAULT_SLACK_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> RealizabilityVerdict:
    """Decide realizability: combinatorial gate, then completion search.

    A failing lattice condition yields a rejection naming the condition.
    Otherwise the low-rank completion solver searches for a rank-d
    filled 1-incidence matrix; success produces a certificate holding
    the exact factors used, failure is reported as inconclusive (the
    numeric phase alone can never prove nonrealizability).
    """
    lat, d, reason = combinatorial_gate(rel, d)
    if reason is not None:
        return RealizabilityVerdict(STATUS_REJECTED, d if d is not None else -1,
                                    reason=reason, lattice=lat)
    problem = CompletionProblem(
        rel, d, margin=margin, max_restarts=max_restarts,
        max_iters=max_iters, seed=seed,
    )
    result = run_completion(problem)
    if result.status != COMPLETION_FOUND:
        return RealizabilityVerdict(
            STATUS_INCONCLUSIVE, d, best_residual=result.best_residual,
            completion=result, lattice=lat,
        )
    fim = FilledIncidenceMatrix(result.matrix, rel, 1.0, eq_tol, slack_tol)
    realization = realize_from_matrix(fim, d, rank_tol)
    return RealizabilityVerdict(
        STATUS_REALIZED, d, realization=realization, matrix=fim,
        best_residual=result.best_residual, completion=result, lattice=lat,
    )


def realization_space_dimension(rel: IncidenceRelation, d: int) -> int:
    """d(n+m) - |R|: dimension of the realization space of the combinatorial type."""
    return d * (rel.n_facets + rel.n_vertices) - len(rel.incident)


def grunbaum_oracle(
    W,
    lat: MaxbicliqueLattice,
    cap: int = 12,
    margin_tol: float = 1e-9,
) -> bool:
    """Face-by-face LP check of a vertex configuration against a lattice.

    For every proper subset F of the vertex indices, a supporting vector
    h with <h, w_j> = 1 on F and < 1 off F must exist exactly when F is
    the vertex set of some lattice element.  Exponential in the number
    of vertices, hence the cap.
    """
    W = as_matrix(W, "W")
    m = W.shape[1]
    if m > cap:
        raise CapExceededError(f"{m} vertices exceed the oracle cap of {cap}")
    face_sets = lat.vertex_sets()
    all_vertices = list(range(1, m + 1))
    for size in range(m):
        for subset in itertools.combinations(all_vertices, size):
            chosen = frozenset(subset)
            eqs = [(W[:, j - 1], 1.0) for j in subset]
            ups = [(W[:, j - 1], 1.0) for j in all_vertices if j not in chosen]
            res = lp_strict_feasibility(eqs, ups, dim=W.shape[0], margin_tol=margin_tol)
            if res.feasible != (chosen in face_sets):
                return False
    return True

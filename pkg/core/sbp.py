"""
Legendre-Gauss-Lobatto quadrature and summation-by-parts operators.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre

from core.errors import ConfigError

MIN_DEGREE = 1
MAX_DEGREE = 8
NODE_TOL = 1e-15


@dataclass(frozen=True)
class QuadratureOperator:
    """
    Nodal operators on the reference element [-1, 1].

    nodes/weights: (r+1)-point LGL rule, nodes ascending.
    Dmat: D[j, l] = L_l'(xi_j) for the Lagrange basis on the nodes.
    Bmat: diag(-1, 0, ..., 0, 1).
    vandermonde / modal_inv: P_k(xi_j) and its inverse (nodal -> Legendre modes).
    """
    r: int
    nodes: np.ndarray
    weights: np.ndarray
    Dmat: np.ndarray
    Bmat: np.ndarray
    vandermonde: np.ndarray = field(repr=False)
    modal_inv: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.r + 1

    @property
    def mass(self) -> np.ndarray:
        return np.diag(self.weights)


def _legendre_pair(r, x):
    """P_r(x) and P_{r-1}(x) by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, r + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    return p, p_prev


def lgl_nodes_weights(r: int):
    """
    Newton iteration for the roots of (1 - x^2) P_r'(x) started from the
    Chebyshev-Gauss-Lobatto points; weights 2 / (r (r+1) P_r(x)^2).
    """
    x = np.cos(np.pi * np.arange(r + 1) / r)
    for _ in range(100):
        p, p_prev = _legendre_pair(r, x)
        x_old = x
        x = x_old - (x * p - p_prev) / ((r + 1) * p)
        if np.max(np.abs(x - x_old)) <= NODE_TOL:
            break
    x = np.sort(x)
    x[0], x[-1] = -1.0, 1.0
    p, _ = _legendre_pair(r, x)
    w = 2.0 / (r * (r + 1) * p * p)
    return x, w


def build_operator(r: int) -> QuadratureOperator:
    """Builds the LGL SBP operator of polynomial degree r (1 <= r <= 8)."""
    if not isinstance(r, (int, np.integer)) or not (MIN_DEGREE <= r <= MAX_DEGREE):
        raise ConfigError(f"Polynomial degree must be an integer in [{MIN_DEGREE}, {MAX_DEGREE}], got {r}")
    r = int(r)
    nodes, weights = lgl_nodes_weights(r)
    P_r, _ = _legendre_pair(r, nodes)

    n = r + 1
    D = np.zeros((n, n))
    for j in range(n):
        for l in range(n):
            if j != l:
                D[j, l] = P_r[j] / (P_r[l] * (nodes[j] - nodes[l]))
    # Negative-sum diagonal: rows annihilate constants.
    D[np.diag_indices(n)] = -np.sum(D, axis=1)

    B = np.zeros((n, n))
    B[0, 0], B[-1, -1] = -1.0, 1.0

    V = legendre.legvander(nodes, r)
    return QuadratureOperator(
        r=r, nodes=nodes, weights=weights, Dmat=D, Bmat=B,
        vandermonde=V, modal_inv=np.linalg.inv(V),
    )


def sbp_residual(op: QuadratureOperator) -> float:
    """max |M D + D^T M - B|."""
    M = op.mass
    return float(np.max(np.abs(M @ op.Dmat + op.Dmat.T @ M - op.Bmat)))

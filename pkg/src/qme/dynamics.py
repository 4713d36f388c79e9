"""Right-hand sides of the density-matrix evolution equations.

The family of equations implemented here shares one structure: a Liouville
commutator plus occupation-dependent loss and gain built from two hermitian
relaxation operators,

    drho/dt = (1/i)[H, rho] + {rho, A_loss} - {I + s*rho, A_gain},

with s = -1 for fermions (Pauli blocking, factor 1 - n) and s = +1 for bosons
(enhancement, factor 1 + n).  The loss operator acts on particles; the gain
operator is the loss operator of holes.  Transition networks, jump-operator
sets and the linear (Markoff/Lindblad) and quasiclassical limits are all
expressed through the same builders.

Every function here is pure: plain ndarrays in, a new ndarray out.  Rates are
constant during a run; time dependence enters by rebuilding the RHS closure at
each integrator stage time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    DEFAULT_TOL,
    DensityMatrix,
    Statistics,
    as_square_matrix,
)

__all__ = [
    "Statistics",
    "TransitionNetwork",
    "DephasingRates",
    "rank_one_jumps",
    "rhs_meanfield_nonhermitian",
    "rhs_general",
    "hole_transform",
    "rhs_hole_form",
    "build_relaxation_operators",
    "rhs_nonlinear_master",
    "rhs_generalized_jumps",
    "rhs_markoff",
    "rhs_lindblad",
    "rhs_quasiclassical",
    "combined_relaxation_operator",
]


@dataclass(frozen=True)
class TransitionNetwork:
    """Orthonormal orbital set with directed jump rates.

    ``kets`` holds the orbital kets as columns (defaults to the computational
    basis).  ``rates`` maps an ordered pair ``(dest, src)`` to the nonnegative
    rate for particles to jump src -> dest; the two directions are independent
    entries.
    """

    kets: np.ndarray
    rates: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        kets = np.asarray(self.kets, dtype=complex)
        if kets.ndim != 2:
            raise ValueError(f"network kets: expected a 2-d array, got shape {kets.shape}")
        object.__setattr__(self, "kets", kets)
        gram = kets.conj().T @ kets
        defect = np.abs(gram - np.eye(kets.shape[1])).max() if kets.size else 0.0
        if defect > DEFAULT_TOL:
            raise ValueError(f"network kets: Gram matrix deviates from identity by {defect:.3e}")
        n = kets.shape[1]
        for (dest, src), w in self.rates.items():
            if dest == src:
                raise ValueError(f"rates[({dest},{src})]: self-transitions are not allowed")
            if not (0 <= dest < n and 0 <= src < n):
                raise ValueError(f"rates[({dest},{src})]: orbital index out of range for {n} orbitals")
            if w < 0:
                raise ValueError(f"rates[({dest},{src})]: rate must be nonnegative, got {w}")
        # hot-path caches: the RHS builders run once per RK stage
        object.__setattr__(
            self, "_projectors",
            tuple(np.outer(kets[:, k], kets[:, k].conj()) for k in range(n)),
        )
        object.__setattr__(self, "_rate_items", tuple(self.rates.items()))
        object.__setattr__(
            self, "_computational",
            kets.shape[0] == n and bool(np.array_equal(kets, np.eye(n))),
        )

    @classmethod
    def computational(cls, dim: int, rates: dict[tuple[int, int], float]) -> "TransitionNetwork":
        """Network whose orbitals are the computational-basis unit vectors."""
        return cls(kets=np.eye(dim, dtype=complex), rates=dict(rates))

    @property
    def dim(self) -> int:
        return self.kets.shape[0]

    @property
    def n_orbitals(self) -> int:
        return self.kets.shape[1]

    def ket(self, n: int) -> np.ndarray:
        return self.kets[:, n]

    def projector(self, n: int) -> np.ndarray:
        return self._projectors[n]

    def occupation(self, n: int, rho: np.ndarray) -> float:
        if self._computational:
            return rho[n, n].real
        v = self.kets[:, n]
        return (v.conj() @ rho @ v).real

    def rate_matrix(self) -> np.ndarray:
        """Dense w[dest, src] array (zeros where no transition)."""
        w = np.zeros((self.n_orbitals, self.n_orbitals))
        for (dest, src), value in self.rates.items():
            w[dest, src] = value
        return w


@dataclass(frozen=True)
class DephasingRates:
    """Symmetric off-diagonal decay rates Gamma[(a, b)] = Gamma[(b, a)] >= 0."""

    gamma: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        full: dict[tuple[int, int], float] = {}
        for (a, b), g in self.gamma.items():
            if a == b:
                raise ValueError(f"dephasing[({a},{b})]: diagonal entries are not allowed")
            if g < 0:
                raise ValueError(f"dephasing[({a},{b})]: rate must be nonnegative, got {g}")
            for key in ((a, b), (b, a)):
                if key in full and full[key] != g:
                    raise ValueError(
                        f"dephasing[({a},{b})]: conflicts with symmetric partner value {full[key]}"
                    )
                full[key] = g
        object.__setattr__(self, "gamma", full)

    def __bool__(self) -> bool:
        return bool(self.gamma)


def _as_state(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return as_square_matrix(rho, "rho")


def rhs_meanfield_nonhermitian(h, a_op, rho) -> np.ndarray:
    """Flow of a mean-field Hamiltonian extended by an antihermitian part iA:

        drho/dt = (1/i)[H, rho] + {rho, A}.

    A negative-definite A drains occupation; no choice of H, A can feed an
    empty orbital (the gain rate from an unoccupied orbital is exactly zero).
    """
    h = as_square_matrix(h, "H")
    a_op = as_square_matrix(a_op, "A")
    rho = _as_state(rho)
    if h.shape != rho.shape or a_op.shape != rho.shape:
        raise ValueError(f"dimension mismatch: H {h.shape}, A {a_op.shape}, rho {rho.shape}")
    return -1j * (h @ rho - rho @ h) + (rho @ a_op + a_op @ rho)


def rhs_general(h, loss_op, gain_op, rho, statistics: Statistics) -> np.ndarray:
    """Master-equation flow with separate particle loss and gain operators:

        drho/dt = (1/i)[H, rho] + {rho, A_loss} - {I + s*rho, A_gain},

    s = -1 (fermions) or +1 (bosons).  Gain through a negative-definite
    A_gain is blocked by 1 - n for fermions and enhanced by 1 + n for bosons.
    """
    h = as_square_matrix(h, "H")
    loss_op = as_square_matrix(loss_op, "loss operator")
    gain_op = as_square_matrix(gain_op, "gain operator")
    rho = _as_state(rho)
    if h.shape != rho.shape or loss_op.shape != rho.shape or gain_op.shape != rho.shape:
        raise ValueError(
            f"dimension mismatch: H {h.shape}, loss {loss_op.shape}, "
            f"gain {gain_op.shape}, rho {rho.shape}"
        )
    s = statistics.sign
    blocked = np.eye(rho.shape[0], dtype=complex) + s * rho
    return (
        -1j * (h @ rho - rho @ h)
        + (rho @ loss_op + loss_op @ rho)
        - (blocked @ gain_op + gain_op @ blocked)
    )


def hole_transform(rho: DensityMatrix) -> DensityMatrix:
    """Complement a fermionic state: occupied orbitals become vacancies,
    rho -> I - rho.  An involution."""
    if rho.statistics is not Statistics.FERMION:
        raise ValueError("hole transform is defined for fermions only")
    eye = np.eye(rho.dim, dtype=complex)
    return DensityMatrix(eye - rho.matrix, Statistics.FERMION, rho.tolerance)


def rhs_hole_form(h, loss_op, gain_op, rho_hole) -> np.ndarray:
    """The same fermionic flow as :func:`rhs_general`, written for the hole
    state rho_hole = I - rho.  The particle-gain operator acts as hole loss
    and vice versa:

        drho_hole/dt = (1/i)[H, rho_hole] + {rho_hole, A_gain}
                       - {I - rho_hole, A_loss}.

    For complementary states the two flows cancel entrywise.
    """
    h = as_square_matrix(h, "H")
    loss_op = as_square_matrix(loss_op, "loss operator")
    gain_op = as_square_matrix(gain_op, "gain operator")
    rho_hole = _as_state(rho_hole)
    if h.shape != rho_hole.shape or loss_op.shape != rho_hole.shape or gain_op.shape != rho_hole.shape:
        raise ValueError(
            f"dimension mismatch: H {h.shape}, loss {loss_op.shape}, "
            f"gain {gain_op.shape}, rho {rho_hole.shape}"
        )
    vacancies = np.eye(rho_hole.shape[0], dtype=complex) - rho_hole
    return (
        -1j * (h @ rho_hole - rho_hole @ h)
        + (rho_hole @ gain_op + gain_op @ rho_hole)
        - (vacancies @ loss_op + loss_op @ vacancies)
    )


def build_relaxation_operators(
    net: TransitionNetwork, rho, statistics: Statistics
) -> tuple[np.ndarray, np.ndarray]:
    """State-dependent loss and gain operators of a transition network.

    For each directed transition src -> dest with rate w:

        A_gain += -(w/2) * <src|rho|src>            * |dest><dest|
        A_loss += -(w/2) * (1 + s*<dest|rho|dest>)  * |src><src|

    so that each transition moves occupation at rate
    w * n_src * (1 + s*n_dest), conserving the total particle number.
    Returns ``(loss_op, gain_op)``; both are hermitian and, for admissible
    occupations, negative semidefinite.
    """
    rho = _as_state(rho)
    if net.dim != rho.shape[0]:
        raise ValueError(f"dimension mismatch: network dim {net.dim} vs state dim {rho.shape[0]}")
    s = statistics.sign
    dim = rho.shape[0]
    loss_op = np.zeros((dim, dim), dtype=complex)
    gain_op = np.zeros((dim, dim), dtype=complex)
    for (dest, src), w in net._rate_items:
        gain_op += (-0.5 * w * net.occupation(src, rho)) * net.projector(dest)
        loss_op += (-0.5 * w * (1 + s * net.occupation(dest, rho))) * net.projector(src)
    return loss_op, gain_op


def rhs_nonlinear_master(h, net: TransitionNetwork, rho, statistics: Statistics) -> np.ndarray:
    """Nonlinear master equation of a transition network: :func:`rhs_general`
    with the relaxation operators rebuilt from the current state.  Traceless;
    fermionic transitions into a full orbital are exactly forbidden."""
    loss_op, gain_op = build_relaxation_operators(net, rho, statistics)
    return rhs_general(h, loss_op, gain_op, rho, statistics)


def rank_one_jumps(net: TransitionNetwork) -> list[np.ndarray]:
    """Rank-one jump operators reproducing a transition network,

        W = sqrt(w) |src><dest|   for each directed entry (dest, src).

    Note the index placement: the gain term of :func:`rhs_lindblad` and
    :func:`rhs_generalized_jumps` sandwiches as W^dag rho W, so the ket
    carries the source orbital.
    """
    ops = []
    for (dest, src), w in net.rates.items():
        ops.append(np.sqrt(w) * np.outer(net.ket(src), net.ket(dest).conj()))
    return ops


def _check_jumps(jumps, dim: int) -> list[np.ndarray]:
    ops = []
    for k, w in enumerate(jumps):
        op = as_square_matrix(w, f"jump operator [{k}]")
        if op.shape[0] != dim:
            raise ValueError(
                f"jump operator [{k}]: dimension {op.shape[0]} does not match state dimension {dim}"
            )
        ops.append(op)
    return ops


def rhs_generalized_jumps(h, jumps, rho, statistics: Statistics) -> np.ndarray:
    """Occupation-dependent flow for an arbitrary set of jump operators:

        drho/dt = (1/i)[H, rho]
                  - (1/2) sum_l {rho, W_l (I + s*rho) W_l^dag}
                  + (1/2) sum_l {I + s*rho, W_l^dag rho W_l}.

    With rank-one jumps from :func:`rank_one_jumps` this reduces exactly to
    :func:`rhs_nonlinear_master`; in the low-density limit it reduces to
    :func:`rhs_lindblad`.
    """
    h = as_square_matrix(h, "H")
    rho = _as_state(rho)
    if h.shape != rho.shape:
        raise ValueError(f"dimension mismatch: H {h.shape} vs rho {rho.shape}")
    ops = _check_jumps(jumps, rho.shape[0])
    s = statistics.sign
    blocked = np.eye(rho.shape[0], dtype=complex) + s * rho
    out = -1j * (h @ rho - rho @ h)
    for w in ops:
        wd = w.conj().T
        drain = w @ blocked @ wd
        feed = wd @ rho @ w
        out -= 0.5 * (rho @ drain + drain @ rho)
        out += 0.5 * (blocked @ feed + feed @ blocked)
    return out


def rhs_markoff(h, net: TransitionNetwork, dephasing: DephasingRates | None, rho) -> np.ndarray:
    """Linear (low-density) master equation with optional pure dephasing:

        drho/dt = (1/i)[H, rho]
                  - (1/2) sum w {rho, |src><src|} + sum w <src|rho|src> |dest><dest|
                  - sum_{a != b} Gamma[a,b] <b|rho|a> |b><a|.

    Traceless when the dephasing rates vanish.  Dephasing decays off-diagonal
    elements without moving population; it is not combinable with the
    occupation-dependent equations here because it can push states out of the
    positive cone.
    """
    h = as_square_matrix(h, "H")
    rho = _as_state(rho)
    if h.shape != rho.shape:
        raise ValueError(f"dimension mismatch: H {h.shape} vs rho {rho.shape}")
    if net.dim != rho.shape[0]:
        raise ValueError(f"dimension mismatch: network dim {net.dim} vs state dim {rho.shape[0]}")
    out = -1j * (h @ rho - rho @ h)
    for (dest, src), w in net._rate_items:
        proj_src = net.projector(src)
        out -= (0.5 * w) * (rho @ proj_src + proj_src @ rho)
        out += (w * net.occupation(src, rho)) * net.projector(dest)
    if dephasing:
        if net._computational:
            for (a, b), g in dephasing.gamma.items():
                out[b, a] -= g * rho[b, a]
        else:
            for (a, b), g in dephasing.gamma.items():
                ket_a, ket_b = net.ket(a), net.ket(b)
                elem = ket_b.conj() @ rho @ ket_a
                out -= g * elem * np.outer(ket_b, ket_a.conj())
    return out


def rhs_lindblad(h, jumps, rho) -> np.ndarray:
    """Linear jump-operator master equation:

        drho/dt = (1/i)[H, rho] - (1/2) sum_l {rho, W_l W_l^dag}
                  + sum_l W_l^dag rho W_l.

    Traceless.  With rank-one jumps this is :func:`rhs_markoff` without
    dephasing.
    """
    h = as_square_matrix(h, "H")
    rho = _as_state(rho)
    if h.shape != rho.shape:
        raise ValueError(f"dimension mismatch: H {h.shape} vs rho {rho.shape}")
    ops = _check_jumps(jumps, rho.shape[0])
    out = -1j * (h @ rho - rho @ h)
    for w in ops:
        wd = w.conj().T
        drain = w @ wd
        out -= 0.5 * (rho @ drain + drain @ rho)
        out += wd @ rho @ w
    return out


def rhs_quasiclassical(f, w, statistics: Statistics) -> np.ndarray:
    """Occupation-number kinetics for a homogeneous system:

        df[p]/dt = sum_q w[p,q] (1 + s*f[p]) f[q] - sum_q w[q,p] (1 + s*f[q]) f[p],

    where w[dest, src] is the src -> dest rate.  The derivatives sum to zero.
    """
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    if f.ndim != 1:
        raise ValueError(f"occupations: expected a vector, got shape {f.shape}")
    if w.shape != (f.size, f.size):
        raise ValueError(f"rate matrix: expected shape {(f.size, f.size)}, got {w.shape}")
    if np.any(w < 0):
        raise ValueError("rate matrix: negative rate")
    if np.any(f < 0):
        raise ValueError("occupations: negative occupation")
    if statistics is Statistics.FERMION and np.any(f > 1):
        raise ValueError("occupations: fermion occupation exceeds 1")
    s = statistics.sign
    gain = (1 + s * f) * (w @ f)
    loss = f * (w.T @ (1 + s * f))
    return gain - loss


def combined_relaxation_operator(loss_op, gain_op, statistics: Statistics) -> np.ndarray:
    """Single operator A' = A_loss - s*A_gain that merges loss and gain:

        drho/dt = (1/i)[H, rho] + {rho, A'} - 2*A_gain

    reproduces :func:`rhs_general` identically.
    """
    loss_op = as_square_matrix(loss_op, "loss operator")
    gain_op = as_square_matrix(gain_op, "gain operator")
    if loss_op.shape != gain_op.shape:
        raise ValueError(f"dimension mismatch: {loss_op.shape} vs {gain_op.shape}")
    return loss_op - statistics.sign * gain_op

"""Apply splitting schemes to concrete dynamics.

Quantum side: stage exponentials of Hermitian parts are built from cached
eigendecompositions, so every stage is unitary to roundoff and the norm
cannot drift.  Classical side: kick and drift are the exact flows of the
potential-only and kinetic-only Hamiltonians (the generators are nilpotent),
so every composed step is symplectic.  The deliberately bad baselines
(first-order perturbative updates) are kept verbatim for comparison runs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .schemes import Scheme, coeff_value, evaluation_times


# ---------------------------------------------------------------------------
# Quantum stepping
# ---------------------------------------------------------------------------

class HermitianPart:
    """A Hermitian matrix with a cached eigendecomposition for stage factors."""

    def __init__(self, matrix: np.ndarray, label: str = ""):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hamiltonian part must be a square matrix")
        if np.linalg.norm(m - m.conj().T) > 1e-12 * max(1.0, np.linalg.norm(m)):
            raise ValueError("matrix is not Hermitian within 1e-12")
        self.matrix = m
        self.label = label
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expfactor(self, z: complex) -> np.ndarray:
        """exp(z H) through the eigendecomposition (unitary for imaginary z)."""
        phases = np.exp(z * self.eigenvalues)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T

    def reconstruction_error(self) -> float:
        rebuilt = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T
        return float(np.linalg.norm(rebuilt - self.matrix))


@dataclass
class QuantumState:
    """A complex state vector; the norm is tracked alongside."""

    vector: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=complex)
        self.norm = float(np.linalg.norm(self.vector))

    @classmethod
    def up(cls, dim: int = 2) -> "QuantumState":
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        return cls(v)


def _parts_map(scheme: Scheme, parts) -> dict[str, HermitianPart]:
    if isinstance(parts, Mapping):
        mapping = dict(parts)
    else:
        labels = [lab for lab in scheme.slots if lab != "T"]
        mapping = dict(zip(labels, parts))
    for lab, p in mapping.items():
        if not isinstance(p, HermitianPart):
            mapping[lab] = HermitianPart(p, label=lab)
    dims = {p.dim for p in mapping.values()}
    if len(dims) != 1:
        raise ValueError("Hamiltonian parts have mismatched dimensions")
    return mapping


def _bracket_matrix(tree, parts: dict[str, HermitianPart]) -> np.ndarray:
    if isinstance(tree, str):
        return parts[tree].matrix
    left = _bracket_matrix(tree[0], parts)
    right = _bracket_matrix(tree[1], parts)
    return left @ right - right @ left


def stage_unitaries(scheme: Scheme, parts, dt: float) -> list[np.ndarray]:
    """Stage matrices in application (right-to-left) order for exp(-i dt H)."""
    if "T" in scheme.slots:
        raise ValueError("scheme has a shift-time slot; use timeordered_step")
    pm = _parts_map(scheme, parts)
    mats: list[np.ndarray] = []
    for st in reversed(scheme.stages):
        c = coeff_value(st.coeff)
        if st.is_commutator():
            bracket = _bracket_matrix(st.target.tree, pm)
            arg = c * (-1j * dt) ** st.target.x_power * bracket
            mats.append(scipy.linalg.expm(arg))
        else:
            lab = scheme.slots[st.target]
            mats.append(pm[lab].expfactor(-1j * c * dt))
    return mats


def step_operator(scheme: Scheme, parts, dt: float) -> np.ndarray:
    """The full one-step propagator (product of stage exponentials)."""
    mats = stage_unitaries(scheme, parts, dt)
    out = mats[0]
    for m in mats[1:]:
        out = m @ out
    return out


def unitary_step(scheme: Scheme, parts, dt: float, psi: QuantumState) -> QuantumState:
    """One scheme step exp(-i dt H)-style applied to the state."""
    v = psi.vector
    for m in stage_unitaries(scheme, parts, dt):
        v = m @ v
    return QuantumState(v)


def perturbative_step(parts, dt: float, psi: QuantumState) -> QuantumState:
    """The norm-breaking first-order update psi <- (I - i dt (A+B)) psi."""
    mats = [p.matrix if isinstance(p, HermitianPart) else np.asarray(p, dtype=complex)
            for p in (parts.values() if isinstance(parts, Mapping) else parts)]
    h = sum(mats[1:], start=mats[0])
    v = psi.vector - 1j * dt * (h @ psi.vector)
    return QuantumState(v)


def spin_parts(gamma: float) -> dict[str, HermitianPart]:
    """The precession fixture: A = sigma_z, B = gamma * sigma_x."""
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return {"A": HermitianPart(sz, "A"), "B": HermitianPart(gamma * sx, "B")}


def precession_period(gamma: float) -> float:
    return math.pi / math.sqrt(1.0 + gamma * gamma)


def run_precession(method, gamma: float, dt: float, steps: int,
                   sample_every: int = 1000):
    """Evolve the up-spin state; record (t, <H>, ||psi||) every sample.

    ``method`` is a two-slot Scheme or the string "perturbative".  The
    energy expectation is the raw quadratic form (no renormalization), so
    the norm growth of the bad baseline shows up in the energy directly.
    """
    parts = spin_parts(gamma)
    h = parts["A"].matrix + parts["B"].matrix
    psi = QuantumState.up(2).vector
    rows = [(0.0, float((psi.conj() @ (h @ psi)).real), 1.0)]
    if isinstance(method, str):
        if method != "perturbative":
            raise ValueError(f"unknown method {method!r}")
        m_step = np.eye(2, dtype=complex) - 1j * dt * h
    else:
        m_step = step_operator(method, parts, dt)
    for k in range(1, steps + 1):
        psi = m_step @ psi
        if k % sample_every == 0 or k == steps:
            energy = float((psi.conj() @ (h @ psi)).real)
            rows.append((k * dt, energy, float(np.linalg.norm(psi))))
    return rows


def dominant_period(times: Sequence[float], values: Sequence[float]) -> float:
    """Period of the dominant oscillation via an interpolated FFT peak."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    y = y - y.mean()
    window = np.hanning(len(y))
    spec = np.abs(np.fft.rfft(y * window))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    if 0 < k < len(spec) - 1:
        # parabolic interpolation on the log magnitudes
        la, lb, lc = (math.log(max(s, 1e-300)) for s in spec[k - 1:k + 2])
        denom = la - 2 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom != 0 else 0.0
        k_interp = k + max(-0.5, min(0.5, shift))
    else:
        k_interp = float(k)
    dt_sample = t[1] - t[0]
    total = dt_sample * len(y)
    freq = k_interp / total
    return 1.0 / freq


# ---------------------------------------------------------------------------
# Classical stepping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.q))):
            raise ValueError("phase-space point has non-finite entries")


@dataclass(frozen=True)
class SeparableHamiltonian:
    """H(p, q) = K(p) + V(q) given through gradient and energy callbacks."""

    grad_k: Callable[[np.ndarray], np.ndarray]
    grad_v: Callable[[np.ndarray], np.ndarray]
    kinetic: Callable[[np.ndarray], float]
    potential: Callable[[np.ndarray], float]
    dim: int

    def energy(self, x: PhasePoint) -> float:
        return float(self.kinetic(x.p) + self.potential(x.q))


def drift(h: SeparableHamiltonian, dt: float, x: PhasePoint) -> PhasePoint:
    """Exact kinetic flow: q advances along grad K(p), p unchanged."""
    return PhasePoint(x.p, x.q + dt * h.grad_k(x.p))


def kick(h: SeparableHamiltonian, dt: float, x: PhasePoint) -> PhasePoint:
    """Exact potential flow: p absorbs -grad V(q), q unchanged."""
    return PhasePoint(x.p - dt * h.grad_v(x.q), x.q)


DEFAULT_SLOT_MAP = {"A": "drift", "B": "kick"}


def symplectic_step(scheme: Scheme, h: SeparableHamiltonian, dt: float,
                    x: PhasePoint, slot_map: Mapping[str, str] | None = None) -> PhasePoint:
    """Compose kick/drift maps per the scheme stages (right to left)."""
    smap = dict(slot_map or DEFAULT_SLOT_MAP)
    for st in reversed(scheme.stages):
        if st.is_commutator():
            raise ValueError("commutator stages are not supported in classical stepping")
        kind = smap[scheme.slots[st.target]]
        c = coeff_value(st.coeff)
        if kind == "drift":
            x = drift(h, c * dt, x)
        elif kind == "kick":
            x = kick(h, c * dt, x)
        else:
            raise ValueError(f"slot map entry must be 'drift' or 'kick', got {kind!r}")
    return x


def euler_step(h: SeparableHamiltonian, dt: float, x: PhasePoint) -> PhasePoint:
    """Simultaneous first-order update; breaks phase-space volume."""
    return PhasePoint(x.p - dt * h.grad_v(x.q), x.q + dt * h.grad_k(x.p))


def umeno_hamiltonian() -> SeparableHamiltonian:
    """K = (p1^2 + p2^2)/2, V = q1^2 q2^2 / 2 (the chaotic demo system)."""
    return SeparableHamiltonian(
        grad_k=lambda p: p,
        grad_v=lambda q: np.array([q[0] * q[1] ** 2, q[0] ** 2 * q[1]]),
        kinetic=lambda p: 0.5 * float(p @ p),
        potential=lambda q: 0.5 * float(q[0] ** 2 * q[1] ** 2),
        dim=2,
    )


UMENO_IC = PhasePoint(np.zeros(2), np.array([2.0, 1.0]))


def run_umeno(method, dt: float = 1e-4, steps: int = 1_000_000,
              sample_every: int = 1000, x0: PhasePoint = UMENO_IC):
    """Time series (t, E, q1, q2) for the chaotic two-dof demo.

    ``method`` is a two-slot Scheme (kick/drift composition) or "euler".
    """
    h = umeno_hamiltonian()
    rows = [(0.0, h.energy(x0), float(x0.q[0]), float(x0.q[1]))]
    if isinstance(method, str):
        if method != "euler":
            raise ValueError(f"unknown method {method!r}")
        stepper = None
    else:
        plan = []
        smap = DEFAULT_SLOT_MAP
        for st in reversed(method.stages):
            plan.append((smap[method.slots[st.target]], coeff_value(st.coeff) * dt))
        stepper = plan
    p1, p2 = float(x0.p[0]), float(x0.p[1])
    q1, q2 = float(x0.q[0]), float(x0.q[1])
    for k in range(1, steps + 1):
        if stepper is None:
            dp1 = -dt * q1 * q2 * q2
            dp2 = -dt * q1 * q1 * q2
            q1, q2 = q1 + dt * p1, q2 + dt * p2
            p1, p2 = p1 + dp1, p2 + dp2
        else:
            for kind, c in stepper:
                if kind == "kick":
                    p1 -= c * q1 * q2 * q2
                    p2 -= c * q1 * q1 * q2
                else:
                    q1 += c * p1
                    q2 += c * p2
        if k % sample_every == 0 or k == steps:
            energy = 0.5 * (p1 * p1 + p2 * p2) + 0.5 * q1 * q1 * q2 * q2
            rows.append((k * dt, energy, q1, q2))
    return rows


def jacobian_determinant(step: Callable[[PhasePoint], PhasePoint], x: PhasePoint,
                         h: float = 1e-6) -> float:
    """det of the phase-space Jacobian of a map, by central differences."""
    base = np.concatenate([x.p, x.q])
    n = base.size
    jac = np.zeros((n, n))
    for j in range(n):
        plus = base.copy()
        minus = base.copy()
        plus[j] += h
        minus[j] -= h
        xp = step(PhasePoint(plus[:n // 2], plus[n // 2:]))
        xm = step(PhasePoint(minus[:n // 2], minus[n // 2:]))
        jac[:, j] = (np.concatenate([xp.p, xp.q]) - np.concatenate([xm.p, xm.q])) / (2 * h)
    return float(np.linalg.det(jac))


# ---------------------------------------------------------------------------
# Time-ordered stepping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeDependentParts:
    """Matrix-valued functions of time for the two Hamiltonian pieces."""

    a: Callable[[float], np.ndarray]
    b: Callable[[float], np.ndarray]

    def sample(self, slot: str, t: float) -> np.ndarray:
        mat = np.asarray((self.a if slot == "A" else self.b)(t), dtype=complex)
        if np.linalg.norm(mat - mat.conj().T) > 1e-10 * max(1.0, np.linalg.norm(mat)):
            raise ValueError(f"part {slot} is not Hermitian at t={t}")
        return mat


def _expi(mat: np.ndarray, z: complex) -> np.ndarray:
    """exp(z * mat) for Hermitian mat, by eigendecomposition (2x2 fast path)."""
    if mat.shape == (2, 2):
        # exp(z(c0 I + v.sigma)) = e^{z c0}(cosh(z r) I + sinh(z r)/r v.sigma)
        c0 = 0.5 * (mat[0, 0] + mat[1, 1])
        m0 = mat - c0 * np.eye(2)
        r2 = m0[0, 1] * m0[1, 0] + m0[0, 0] ** 2
        r = cmath.sqrt(r2)
        zr = z * r
        if abs(zr) < 1e-12:
            ch, shr = 1.0 + zr * zr / 2, z * (1.0 + zr * zr / 6)
        else:
            ch, shr = cmath.cosh(zr), cmath.sinh(zr) / r
        return cmath.exp(z * c0) * (ch * np.eye(2) + shr * m0)
    w, v = np.linalg.eigh(mat)
    return (v * np.exp(z * w)) @ v.conj().T


def timeordered_step(scheme3: Scheme, parts: TimeDependentParts, t: float,
                     dt: float, psi: QuantumState) -> QuantumState:
    """One step of a three-slot (A, B, T) scheme on a driven system.

    The shift-time slot is consumed into stage evaluation times; each
    remaining stage applies exp(-i c dt X(t_eval)), right to left.
    """
    v = psi.vector
    for slot, c, t_eval in evaluation_times(scheme3, t, dt):
        mat = parts.sample(slot, t_eval)
        v = _expi(mat, -1j * c * dt) @ v
    return QuantumState(v)


def run_timeordered(scheme3: Scheme, parts: TimeDependentParts, t0: float,
                    dt: float, steps: int, psi: QuantumState) -> QuantumState:
    for k in range(steps):
        psi = timeordered_step(scheme3, parts, t0 + k * dt, dt, psi)
    return psi


def driven_two_level() -> TimeDependentParts:
    """A(t) = sigma_z, B(t) = cos(t) sigma_x."""
    sz = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return TimeDependentParts(a=lambda t: sz, b=lambda t: math.cos(t) * sx)


# ---------------------------------------------------------------------------
# Perturbational composition
# ---------------------------------------------------------------------------

class LogBranchError(ValueError):
    """The matrix-log eigenvalues straddle the principal branch cut."""


def _principal_log_symmetric(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    if np.any(w <= 0):
        raise LogBranchError(
            "product eigenvalues reach the branch cut; reduce x")
    return (v * np.log(w)) @ v.conj().T


def transverse_coupling_coefficient(x: float, eps: float = 1e-6) -> float:
    """First-order transverse response of the symmetric weak-field product.

    Numerically extracts the sigma_x component of dPhi/dgamma at gamma = 0,
    where exp(Phi(x, gamma)) = exp(x gamma sx/2) exp(x sz) exp(x gamma sx/2),
    via a central difference and the principal matrix logarithm, divided
    by x.  The closed form is x*coth(x).
    """
    if x == 0:
        return 1.0
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    mid = scipy.linalg.expm(x * sz)

    def sigx_component(gamma: float) -> float:
        cap = scipy.linalg.expm(0.5 * x * gamma * sx)
        phi = _principal_log_symmetric(cap @ mid @ cap)
        return float(np.trace(sx @ phi).real) / 2.0

    derivative = (sigx_component(eps) - sigx_component(-eps)) / (2 * eps)
    return derivative / x


def coth(x: float) -> float:
    return math.cosh(x) / math.sinh(x)


def perturbational_composition(x_grid: Sequence[float]) -> list[tuple[float, float, float]]:
    """Rows (x, analytic x*coth x, numerically extracted coefficient)."""
    rows = []
    for x in x_grid:
        analytic = 1.0 if x == 0 else x * coth(x)
        rows.append((float(x), analytic, transverse_coupling_coefficient(float(x))))
    return rows


# ---------------------------------------------------------------------------
# Empirical-order sweeps
# ---------------------------------------------------------------------------

def error_slope(dts: Sequence[float], errors: Sequence[float],
                floor: float = 1e-13) -> tuple[float, list[tuple[float, float]]]:
    """Log-log slope of error vs dt, clipping points below the roundoff floor."""
    pts = [(dt, e) for dt, e in zip(dts, errors) if e > floor]
    if len(pts) < 2:
        raise ValueError("not enough error points above the roundoff floor")
    lx = np.log([p[0] for p in pts])
    ly = np.log([p[1] for p in pts])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return slope, pts


def spin_error(scheme: Scheme, gamma: float, dt: float, t_final: float) -> float:
    """Final-state error vs the exact eigendecomposition evolution."""
    parts = spin_parts(gamma)
    h = HermitianPart(parts["A"].matrix + parts["B"].matrix)
    steps = int(round(t_final / dt))
    u_step = step_operator(scheme, parts, dt)
    u_total = np.linalg.matrix_power(u_step, steps)
    u_exact = h.expfactor(-1j * steps * dt)
    psi0 = QuantumState.up(2).vector
    return float(np.linalg.norm(u_total @ psi0 - u_exact @ psi0))


def hermitian_pair_error(scheme: Scheme, a: np.ndarray, b: np.ndarray,
                         dt: float, t_final: float) -> float:
    """Final-state error for arbitrary Hermitian parts (exact reference)."""
    parts = {"A": HermitianPart(a), "B": HermitianPart(b)}
    h = HermitianPart(a + b)
    steps = int(round(t_final / dt))
    u_step = step_operator(scheme, parts, dt)
    u_total = np.linalg.matrix_power(u_step, steps)
    u_exact = h.expfactor(-1j * steps * dt)
    psi0 = np.zeros(a.shape[0], dtype=complex)
    psi0[0] = 1.0
    return float(np.linalg.norm(u_total @ psi0 - u_exact @ psi0))


def driven_error(scheme3: Scheme, dt: float, t_final: float,
                 refine: int = 1024) -> float:
    """G-scheme error on the driven two-level system vs tiny-step reference.

    The reference is the second-order time-ordered scheme at dt/refine.
    """
    parts = driven_two_level()
    steps = int(round(t_final / dt))
    psi = QuantumState.up(2)
    psi = run_timeordered(scheme3, parts, 0.0, dt, steps, psi)
    from .schemes import timeordered2

    ref_scheme = timeordered2()
    fine = dt / refine
    ref = run_timeordered(ref_scheme, parts, 0.0, fine, steps * refine, QuantumState.up(2))
    return float(np.linalg.norm(psi.vector - ref.vector))

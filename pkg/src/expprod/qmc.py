"""World-line quantum Monte Carlo for the transverse-field Ising model.

The quantum partition function maps onto a classical Ising system with one
extra periodic axis of n layers: intra-layer couplings are scaled by beta/n
and the transverse field becomes a ferromagnetic inter-layer coupling
gamma_n = -log(tanh(beta*Gamma/n))/2.  Sampling is plain single-spin-flip
Metropolis on the mapped system; a pair of exact references (configuration
enumeration at finite n, dense diagonalization at n = infinity) anchors
every estimator, and a least-squares fit in 1/n extrapolates away the
finite-n systematic error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class IsingModel:
    """Transverse-field Ising instance: sites, weighted bonds, field, temperature."""

    sites: int
    bonds: tuple[tuple[int, int, float], ...]
    gamma: float
    beta: float

    def __post_init__(self):
        seen = set()
        for i, j, _ in self.bonds:
            if not (0 <= i < self.sites and 0 <= j < self.sites and i != j):
                raise ValueError(f"bond ({i},{j}) outside the site range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate bond {key}")
            seen.add(key)
        if self.gamma < 0:
            raise ValueError("transverse field must be >= 0")
        if self.beta <= 0:
            raise ValueError("inverse temperature must be positive")

    @classmethod
    def from_json(cls, doc: Mapping) -> "IsingModel":
        return cls(sites=int(doc["sites"]),
                   bonds=tuple((int(i), int(j), float(jij)) for i, j, jij in doc["bonds"]),
                   gamma=float(doc["gamma"]), beta=float(doc["beta"]))

    def to_json(self) -> dict:
        return {"sites": self.sites,
                "bonds": [[i, j, jij] for i, j, jij in self.bonds],
                "gamma": self.gamma, "beta": self.beta}

    def with_gamma(self, gamma: float) -> "IsingModel":
        return IsingModel(self.sites, self.bonds, gamma, self.beta)


class FrozenTrotterError(ValueError):
    """Gamma = 0 makes the inter-layer coupling infinite (layers lock)."""


@dataclass(frozen=True)
class TrotterCouplings:
    """Mapped couplings at Trotter number n."""

    gamma_n: float
    delta_n: float
    n: int

    @property
    def layer_weight(self) -> float:
        return self.gamma_n


def couplings(model: IsingModel, n: int) -> TrotterCouplings:
    """gamma_n = -log(tanh(beta*Gamma/n))/2, delta_n = log(sinh(2*beta*Gamma/n)/2)/2."""
    if n < 1:
        raise ValueError("Trotter number must be >= 1")
    if model.gamma == 0:
        raise FrozenTrotterError(
            "Gamma = 0: inter-layer coupling diverges; treat layers as locked")
    u = model.beta * model.gamma / n
    gamma_n = -0.5 * math.log(math.tanh(u))
    delta_n = 0.5 * math.log(0.5 * math.sinh(2 * u))
    return TrotterCouplings(gamma_n=gamma_n, delta_n=delta_n, n=n)


def coupling_derivatives(model: IsingModel, n: int) -> tuple[float, float]:
    """d(gamma_n)/dGamma and d(delta_n)/dGamma."""
    u = model.beta * model.gamma / n
    dgd = -(model.beta / n) / math.sinh(2 * u)
    ddd = (model.beta / n) / math.tanh(2 * u)
    return dgd, ddd


def sigma_x_estimator_coeffs(model: IsingModel, n: int) -> tuple[float, float]:
    """<sigma_x> per site = a * <sigma^(m) sigma^(m+1)>_site-layer-avg + b.

    Thermodynamic-derivative construction: differentiate log Z of the mapped
    system with respect to Gamma through gamma_n and delta_n.
    """
    u = model.beta * model.gamma / n
    a = -1.0 / math.sinh(2 * u)
    b = 1.0 / math.tanh(2 * u)
    return a, b


@dataclass
class WorldlineConfig:
    """Classical spin field sigma[site, layer] in {-1, +1}, periodic in layers."""

    spins: np.ndarray

    def __post_init__(self):
        self.spins = np.asarray(self.spins, dtype=np.int8)
        if self.spins.ndim != 2:
            raise ValueError("spin field must be sites x layers")
        if not np.all(np.abs(self.spins) == 1):
            raise ValueError("spins must be +-1")

    @property
    def sites(self) -> int:
        return self.spins.shape[0]

    @property
    def layers(self) -> int:
        return self.spins.shape[1]

    @classmethod
    def random(cls, sites: int, layers: int, rng: np.random.Generator) -> "WorldlineConfig":
        return cls(rng.integers(0, 2, size=(sites, layers)).astype(np.int8) * 2 - 1)


def classical_action(model: IsingModel, coup: TrotterCouplings,
                     config: WorldlineConfig) -> float:
    """Log-weight of a configuration (the constant delta_n term is dropped).

    action = (beta/n) sum_m sum_bonds J_ij s_i^m s_j^m
             + gamma_n sum_m sum_i s_i^m s_i^(m+1)
    """
    s = config.spins
    n = coup.n
    if config.layers != n or config.sites != model.sites:
        raise ValueError("configuration dimensions do not match model and n")
    intra = 0.0
    for i, j, jij in model.bonds:
        intra += jij * float(np.sum(s[i] * s[j]))
    inter = float(np.sum(s * np.roll(s, -1, axis=1)))
    return (model.beta / n) * intra + coup.gamma_n * inter


@dataclass
class ObservableStats:
    mean: float
    std_error: float
    bins: int


@dataclass
class RunStats:
    """Binned means and standard errors of the sampled observables."""

    sweeps: int
    therm: int
    n: int
    seed: int
    acceptance: float
    bond_zz: list[ObservableStats]
    layer_mag: list[ObservableStats]
    trotter_corr: ObservableStats
    diag_energy: ObservableStats
    sigma_x: ObservableStats
    final_action: float
    accumulated_action: float

    def to_json(self) -> dict:
        def obs(o: ObservableStats):
            return {"mean": o.mean, "std_error": o.std_error, "bins": o.bins}

        return {
            "sweeps": self.sweeps, "therm": self.therm, "n": self.n,
            "seed": self.seed, "acceptance": self.acceptance,
            "bond_zz": [obs(o) for o in self.bond_zz],
            "layer_mag": [obs(o) for o in self.layer_mag],
            "trotter_corr": obs(self.trotter_corr),
            "diag_energy": obs(self.diag_energy),
            "sigma_x": obs(self.sigma_x),
            "final_action": self.final_action,
            "accumulated_action": self.accumulated_action,
        }


def _binned(trace: np.ndarray, nbins: int = 20) -> ObservableStats:
    m = len(trace)
    if m < nbins:
        nbins = max(1, m)
    size = m // nbins
    trimmed = trace[m - nbins * size:]
    means = trimmed.reshape(nbins, size).mean(axis=1)
    mean = float(means.mean())
    if nbins > 1:
        err = float(means.std(ddof=1) / math.sqrt(nbins))
    else:
        err = float("inf")
    return ObservableStats(mean=mean, std_error=err, bins=nbins)


class _Sampler:
    """Single-spin-flip Metropolis on the mapped (d+1)-dimensional system."""

    def __init__(self, model: IsingModel, n: int, rng: np.random.Generator,
                 config: WorldlineConfig | None = None):
        self.model = model
        self.n = n
        self.coup = couplings(model, n)
        self.rng = rng
        self.spins = (config.spins.copy() if config is not None
                      else WorldlineConfig.random(model.sites, n, rng).spins)
        self.neighbors: list[list[tuple[int, float]]] = [[] for _ in range(model.sites)]
        for i, j, jij in model.bonds:
            self.neighbors[i].append((j, jij))
            self.neighbors[j].append((i, jij))
        self.accept = 0
        self.attempt = 0
        self.action_delta = 0.0

    def set_gamma(self, gamma: float) -> None:
        self.model = self.model.with_gamma(gamma)
        self.coup = couplings(self.model, self.n)

    def sweep(self) -> None:
        s = self.spins
        n = self.n
        kb = self.model.beta / n
        g = self.coup.gamma_n
        rand = self.rng.random(self.model.sites * n)
        idx = 0
        for i in range(self.model.sites):
            row = s[i]
            nbrs = self.neighbors[i]
            for m in range(n):
                spin = row[m]
                local = 0.0
                for j, jij in nbrs:
                    local += jij * s[j, m]
                local *= kb
                local += g * (row[m - 1] + row[(m + 1) % n])
                delta = -2.0 * spin * local
                self.attempt += 1
                if delta >= 0.0 or rand[idx] < math.exp(delta):
                    row[m] = -spin
                    self.accept += 1
                    self.action_delta += delta
                idx += 1

    def measure(self) -> dict:
        s = self.spins
        out: dict = {}
        out["bond_zz"] = [float(np.mean(s[i] * s[j])) for i, j, _ in self.model.bonds]
        out["layer_mag"] = list(np.mean(s, axis=0, dtype=float))
        out["trotter_corr"] = float(np.mean(s * np.roll(s, -1, axis=1)))
        diag = 0.0
        for i, j, jij in self.model.bonds:
            diag -= jij * float(np.mean(s[i] * s[j]))
        out["diag_energy"] = diag
        a, b = sigma_x_estimator_coeffs(self.model, self.n)
        out["sigma_x"] = a * out["trotter_corr"] + b
        return out

    def config(self) -> WorldlineConfig:
        return WorldlineConfig(self.spins.copy())


def metropolis_run(model: IsingModel, n: int, sweeps: int, therm: int,
                   seed: int) -> RunStats:
    """Sample the mapped system; one sweep is one flip attempt per spin.

    Statistical errors come from 20 equal bins of the post-thermalization
    trace; the seed fully determines the run.
    """
    if not sweeps > therm >= 0:
        raise ValueError("need sweeps > therm >= 0")
    rng = np.random.default_rng(seed)
    sampler = _Sampler(model, n, rng)
    start_action = classical_action(model, sampler.coup, sampler.config())
    nbonds = len(model.bonds)
    keep = sweeps - therm
    bond_tr = np.empty((keep, nbonds))
    mag_tr = np.empty((keep, n))
    tc_tr = np.empty(keep)
    de_tr = np.empty(keep)
    sx_tr = np.empty(keep)
    for k in range(sweeps):
        sampler.sweep()
        if k >= therm:
            m = sampler.measure()
            r = k - therm
            bond_tr[r] = m["bond_zz"]
            mag_tr[r] = m["layer_mag"]
            tc_tr[r] = m["trotter_corr"]
            de_tr[r] = m["diag_energy"]
            sx_tr[r] = m["sigma_x"]
    return RunStats(
        sweeps=sweeps, therm=therm, n=n, seed=seed,
        acceptance=sampler.accept / max(1, sampler.attempt),
        bond_zz=[_binned(bond_tr[:, b]) for b in range(nbonds)],
        layer_mag=[_binned(mag_tr[:, m]) for m in range(n)],
        trotter_corr=_binned(tc_tr),
        diag_energy=_binned(de_tr),
        sigma_x=_binned(sx_tr),
        final_action=classical_action(model, sampler.coup, sampler.config()),
        accumulated_action=start_action + sampler.action_delta,
    )


def run_traces(model: IsingModel, n: int, sweeps: int, therm: int,
               seed: int) -> dict[str, np.ndarray]:
    """Per-sweep observable traces (for CSV dumps and stationarity tests)."""
    rng = np.random.default_rng(seed)
    sampler = _Sampler(model, n, rng)
    traces: dict[str, list] = {"bond_zz": [], "trotter_corr": [], "diag_energy": [],
                               "sigma_x": [], "config_index": []}
    for k in range(sweeps):
        sampler.sweep()
        if k >= therm:
            m = sampler.measure()
            traces["bond_zz"].append(np.mean(m["bond_zz"]) if m["bond_zz"] else 0.0)
            traces["trotter_corr"].append(m["trotter_corr"])
            traces["diag_energy"].append(m["diag_energy"])
            traces["sigma_x"].append(m["sigma_x"])
            bits = (sampler.spins.reshape(-1) > 0).astype(np.int64)
            traces["config_index"].append(int((bits * (2 ** np.arange(bits.size))).sum()))
    return {k: np.asarray(v) for k, v in traces.items()}


# ---------------------------------------------------------------------------
# Exact references
# ---------------------------------------------------------------------------

_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def _site_operator(op: np.ndarray, site: int, sites: int) -> np.ndarray:
    out = np.array([[1.0]])
    for k in range(sites):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def hamiltonian_parts(model: IsingModel) -> tuple[np.ndarray, np.ndarray]:
    """Dense A (diagonal Ising) and B (transverse field) with H = A + B."""
    dim = 2 ** model.sites
    a = np.zeros((dim, dim))
    for i, j, jij in model.bonds:
        a -= jij * _site_operator(_PAULI_Z, i, model.sites) @ _site_operator(
            _PAULI_Z, j, model.sites)
    b = np.zeros((dim, dim))
    for i in range(model.sites):
        b -= model.gamma * _site_operator(_PAULI_X, i, model.sites)
    return a, b


@dataclass
class ExactObservables:
    z: float
    bond_zz: list[float]
    trotter_corr: float | None
    diag_energy: float
    sigma_x: float


def exact_reference(model: IsingModel, n: int | None = None) -> ExactObservables:
    """Exact observables: enumeration at finite n, diagonalization at n = None.

    Finite n sums all 2^(sites*n) world-line configurations (capped at 24
    spins); the quantum reference diagonalizes the dense Hamiltonian
    (capped at 2^sites = 4096).
    """
    if n is None:
        return _exact_quantum(model)
    return _exact_finite_n(model, n)


def _exact_quantum(model: IsingModel) -> ExactObservables:
    dim = 2 ** model.sites
    if dim > 4096:
        raise ValueError("diagonalization capped at 2^sites <= 4096")
    a, b = hamiltonian_parts(model)
    w, v = np.linalg.eigh(a + b)
    w0 = w - w.min()
    boltz = np.exp(-model.beta * w0)
    z_shifted = float(boltz.sum())

    def thermal(op: np.ndarray) -> float:
        return float(np.einsum("ij,ji->", (v * boltz) @ v.conj().T, op).real / z_shifted)

    bond_zz = []
    for i, j, _ in model.bonds:
        op = _site_operator(_PAULI_Z, i, model.sites) @ _site_operator(_PAULI_Z, j, model.sites)
        bond_zz.append(thermal(op))
    diag_energy = thermal(a)
    sx = 0.0
    for i in range(model.sites):
        sx += thermal(_site_operator(_PAULI_X, i, model.sites))
    z = z_shifted * math.exp(-model.beta * w.min())
    return ExactObservables(z=z, bond_zz=bond_zz, trotter_corr=None,
                            diag_energy=diag_energy, sigma_x=sx / model.sites)


def _exact_finite_n(model: IsingModel, n: int) -> ExactObservables:
    nspin = model.sites * n
    if nspin > 24:
        raise ValueError("finite-n enumeration capped at sites*n <= 24")
    coup = couplings(model, n)
    count = 1 << nspin
    chunk = min(count, 1 << 20)
    nbonds = len(model.bonds)
    z_acc = 0.0
    zz_acc = np.zeros(nbonds)
    tc_acc = 0.0
    # spin (i, m) lives at bit i*n + m; chunks keep memory flat
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count), dtype=np.int64)
        spins = [(((idx >> k) & 1).astype(np.float64) * 2 - 1) for k in range(nspin)]

        def bit(i: int, m: int) -> np.ndarray:
            return spins[i * n + (m % n)]

        action = np.zeros(idx.size)
        for m in range(n):
            for i, j, jij in model.bonds:
                action += (model.beta / n) * jij * (bit(i, m) * bit(j, m))
            for i in range(model.sites):
                action += coup.gamma_n * (bit(i, m) * bit(i, m + 1))
        weights = np.exp(action)
        z_acc += float(weights.sum())
        for bidx, (i, j, _) in enumerate(model.bonds):
            acc = np.zeros(idx.size)
            for m in range(n):
                acc += bit(i, m) * bit(j, m)
            zz_acc[bidx] += float(np.dot(weights, acc / n))
        tc = np.zeros(idx.size)
        for i in range(model.sites):
            for m in range(n):
                tc += bit(i, m) * bit(i, m + 1)
        tc_acc += float(np.dot(weights, tc / (model.sites * n)))
    const = math.exp(nspin * coup.delta_n) if nspin * coup.delta_n > -700 else 0.0
    z = z_acc * const  # restore the dropped delta_n constant for the true Z
    bond_zz = list(zz_acc / z_acc)
    trotter_corr = tc_acc / z_acc
    diag_energy = -sum(jij * zz for (_, _, jij), zz in zip(model.bonds, bond_zz))
    a, b = sigma_x_estimator_coeffs(model, n)
    sigma_x = a * trotter_corr + b
    return ExactObservables(z=z, bond_zz=bond_zz, trotter_corr=trotter_corr,
                            diag_energy=diag_energy, sigma_x=sigma_x)


def matrix_trace_z(model: IsingModel, n: int) -> float:
    """Z_n by the dense product trace Tr[(e^{-beta A/n} e^{-beta B/n})^n]."""
    a, b = hamiltonian_parts(model)
    import scipy.linalg

    ea = scipy.linalg.expm(-(model.beta / n) * a)
    eb = scipy.linalg.expm(-(model.beta / n) * b)
    return float(np.trace(np.linalg.matrix_power(ea @ eb, n)).real)


def matrix_trace_bond_zz(model: IsingModel, n: int) -> list[float]:
    """Finite-n <sigma_z sigma_z> per bond by operator insertion in the trace.

    Works at any n (the enumeration cap does not apply); by layer cyclicity
    a single insertion equals the layer average.
    """
    a, b = hamiltonian_parts(model)
    import scipy.linalg

    ea = scipy.linalg.expm(-(model.beta / n) * a)
    eb = scipy.linalg.expm(-(model.beta / n) * b)
    tn = np.linalg.matrix_power(ea @ eb, n)
    z = float(np.trace(tn).real)
    out = []
    for i, j, _ in model.bonds:
        op = _site_operator(_PAULI_Z, i, model.sites) @ _site_operator(_PAULI_Z, j, model.sites)
        out.append(float(np.trace(op @ tn).real) / z)
    return out


# ---------------------------------------------------------------------------
# Trotter extrapolation
# ---------------------------------------------------------------------------

@dataclass
class ExtrapolationResult:
    c0: float
    c1: float
    c2: float
    c0_std_error: float
    residuals: list[float]
    dominant_power: int
    n_list: list[int]
    values: list[float]
    errors: list[float]


def extrapolate_values(n_list: Sequence[int], values: Sequence[float],
                       errors: Sequence[float] | None = None) -> ExtrapolationResult:
    """Least-squares fit value(n) = c0 + c1/n + c2/n^2 with error propagation."""
    ns = [int(n) for n in n_list]
    if len(ns) < 3:
        raise ValueError("need at least 3 Trotter numbers to extrapolate")
    if len(set(ns)) != len(ns):
        raise ValueError("Trotter numbers must be distinct")
    y = np.asarray(values, dtype=float)
    design = np.column_stack([np.ones(len(ns)),
                              1.0 / np.asarray(ns, dtype=float),
                              1.0 / np.asarray(ns, dtype=float) ** 2])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coeffs
    resid = list(y - fitted)
    pinv = np.linalg.pinv(design)
    if errors is None:
        errs = [0.0] * len(ns)
        c0_err = 0.0
    else:
        errs = [float(e) for e in errors]
        c0_err = float(np.sqrt(np.sum((pinv[0] * np.asarray(errs)) ** 2)))
    nmax = max(ns)
    contrib1 = abs(coeffs[1]) / nmax
    contrib2 = abs(coeffs[2]) / nmax ** 2
    dominant = 1 if contrib1 >= contrib2 else 2
    return ExtrapolationResult(
        c0=float(coeffs[0]), c1=float(coeffs[1]), c2=float(coeffs[2]),
        c0_std_error=c0_err, residuals=resid, dominant_power=dominant,
        n_list=ns, values=list(map(float, y)), errors=errs)


def trotter_extrapolate(model: IsingModel, n_list: Sequence[int], sweeps: int,
                        seed: int, therm: int | None = None,
                        observable: str = "bond_zz") -> ExtrapolationResult:
    """Extrapolate a QMC observable to n -> infinity.

    ``sweeps = 0`` uses the exact finite-n enumeration instead of sampling
    (no statistical error); otherwise one independent chain per n.
    """
    values, errors = [], []
    for k, n in enumerate(n_list):
        if sweeps == 0:
            ref = exact_reference(model, n)
            if observable == "bond_zz":
                values.append(float(np.mean(ref.bond_zz)))
            elif observable == "sigma_x":
                values.append(ref.sigma_x)
            else:
                values.append(ref.diag_energy)
            errors.append(0.0)
        else:
            th = therm if therm is not None else sweeps // 5
            stats = metropolis_run(model, int(n), sweeps, th, seed + k)
            if observable == "bond_zz":
                vals = np.array([o.mean for o in stats.bond_zz])
                errs = np.array([o.std_error for o in stats.bond_zz])
                values.append(float(vals.mean()))
                errors.append(float(np.sqrt(np.sum(errs ** 2)) / len(errs)))
            elif observable == "sigma_x":
                values.append(stats.sigma_x.mean)
                errors.append(stats.sigma_x.std_error)
            else:
                values.append(stats.diag_energy.mean)
                errors.append(stats.diag_energy.std_error)
    return extrapolate_values(list(n_list), values, errors if sweeps else None)


# ---------------------------------------------------------------------------
# Annealing
# ---------------------------------------------------------------------------

@dataclass
class AnnealResult:
    energy: float
    configuration: np.ndarray
    gamma_floor_hit: bool
    stage_energies: list[float]
    seed: int


def diagonal_energy(model: IsingModel, layer: np.ndarray) -> float:
    """Classical Ising energy -sum J_ij s_i s_j of one layer."""
    e = 0.0
    for i, j, jij in model.bonds:
        e -= jij * layer[i] * layer[j]
    return float(e)


def anneal(model: IsingModel, n: int, gamma_schedule: Sequence[float],
           sweeps_per_stage: int, seed: int,
           gamma_floor: float = 1e-6) -> AnnealResult:
    """Quantum annealing on the mapped system: ramp the field down stagewise.

    The schedule must be strictly decreasing; a final Gamma of 0 is clamped
    to a small floor (the inter-layer coupling diverges at 0).  Returns the
    best layer's diagonal energy and configuration.
    """
    sched = [float(g) for g in gamma_schedule]
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise ValueError("gamma schedule must be strictly decreasing")
    floor_hit = False
    clamped = []
    for g in sched:
        if g <= 0:
            warnings.warn("gamma schedule reached 0; clamping to the floor")
            g = gamma_floor
            floor_hit = True
        clamped.append(g)
    rng = np.random.default_rng(seed)
    sampler = _Sampler(model.with_gamma(clamped[0]), n, rng)
    stage_energies = []
    for g in clamped:
        sampler.set_gamma(g)
        for _ in range(sweeps_per_stage):
            sampler.sweep()
        best = min(diagonal_energy(model, sampler.spins[:, m]) for m in range(n))
        stage_energies.append(best)
    energies = [diagonal_energy(model, sampler.spins[:, m]) for m in range(n)]
    best_layer = int(np.argmin(energies))
    return AnnealResult(energy=float(energies[best_layer]),
                        configuration=sampler.spins[:, best_layer].copy(),
                        gamma_floor_hit=floor_hit,
                        stage_energies=stage_energies, seed=seed)


def ground_energy_enumeration(model: IsingModel) -> float:
    """Brute-force minimum of the diagonal energy over all 2^sites layers."""
    best = math.inf
    for code in range(1 << model.sites):
        layer = np.array([1 if (code >> i) & 1 else -1 for i in range(model.sites)])
        best = min(best, diagonal_energy(model, layer))
    return best


def anneal_schedule(g_start: float = 2.5, g_end: float = 1e-4,
                    stages: int = 14) -> list[float]:
    """Geometric field ramp; the tiny end value freezes the Trotter direction."""
    ratio = (g_end / g_start) ** (1.0 / (stages - 1))
    return [g_start * ratio ** k for k in range(stages)]


def ferromagnetic_chain(sites: int, beta: float = 8.0, gamma: float = 2.5) -> IsingModel:
    bonds = tuple((i, i + 1, 1.0) for i in range(sites - 1))
    return IsingModel(sites=sites, bonds=bonds, gamma=gamma, beta=beta)


def frustrated_square(beta: float = 16.0, gamma: float = 2.5) -> IsingModel:
    """Four sites with competing couplings and a genuine single-flip trap.

    Greedy descent from a quarter of the configurations ends in a local
    minimum two energy units above the ground state, so an instant cold
    quench is measurably worse than a slow field ramp.
    """
    bonds = ((0, 1, -2.0), (1, 2, -2.0), (2, 3, -2.0), (3, 0, -2.0),
             (0, 2, -2.0), (1, 3, -1.0))
    return IsingModel(sites=4, bonds=bonds, gamma=gamma, beta=beta)

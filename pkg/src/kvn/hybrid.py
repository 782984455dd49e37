"""
Unitary hybrid dynamics on H_q (x) H_c under K = H_q + L_c + K_i.

The state lives on the (q, x, k) grid. Every piece of the generator is a
product of per-axis factors on distinct axes, so the Strang splitting only
ever applies exact phases in mixed representations.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from src.logger import setup_logger
from src.kvn.algebra.expr import GENERATORS, PAIRS, UNOBSERVABLE, Exponents, OperatorExpr, exact_number, polynomial_expr
from src.kvn.algebra.heisenberg import heisenberg_rhs
from src.kvn.classical import HamiltonianSpec, liouvillian_expr, liouvillian_generators
from src.kvn.errors import ConfigurationError, ParameterError, ShapeError
from src.kvn.grids import GUARD_LIMIT, Grid1D, StateVector, classical_marginal, gaussian_state, inner_product
from src.kvn.observables import MixedDensities, expr_expectation, monomial_operator
from src.kvn.operators import OperatorSpec, apply_operator, expectation
from src.kvn.quantum import quantum_generators
from src.kvn.splitting import SubGenerator, evolve
from src.kvn.trajectory import Trajectory
from src.kvn.utils import central_difference

# Setup logger
logger = setup_logger(__name__)

HYBRID_AXES = ("q", "x", "k")
HYBRID_COLUMNS = ["t", "mean_q", "mean_p", "mean_x", "mean_k", "mean_px", "mean_pk", "norm"]
ENERGY_COLUMNS = ["energy_q", "energy_c", "energy_total"]
RATE_COLUMNS = ["rhs_q", "rhs_p", "rhs_x", "rhs_k", "rhs_Hq", "rhs_Hc"]
PRODUCT_COLUMNS = ["mean_q_times_k", "mean_p_times_pk", "mean_p_times_x"]
COUPLING_KINDS = ("none", "observable", "boost")


@dataclass(frozen=True)
class InteractionTerm:
    """
    coefficient * q^a p^b x^c k^d p_x^e p_k^f with at most one member per canonical pair.

    The quantum factor is 1, q or p; the classical factor is any product that
    stays diagonal in one mixed representation.
    """
    coefficient: float
    exponents: Exponents

    def __post_init__(self):
        exponents = tuple(int(e) for e in self.exponents)
        if len(exponents) != len(GENERATORS) or min(exponents) < 0:
            raise ConfigurationError(f"invalid interaction exponents {self.exponents}")
        if exponents[0] + exponents[1] > 1:
            raise ConfigurationError("the quantum factor of an interaction must be 1, q or p")
        for a, b in PAIRS:
            if exponents[a] and exponents[b]:
                raise ConfigurationError(
                    f"interaction uses both {GENERATORS[a]} and {GENERATORS[b]} and is not exactly exponentiable")
        object.__setattr__(self, "exponents", exponents)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def observable_only(self) -> bool:
        """True iff the classical factor contains neither p_x nor p_k."""
        return all(self.exponents[i] == 0 for i in UNOBSERVABLE)

    def to_operator_spec(self) -> OperatorSpec:
        return monomial_operator(self.exponents, self.coefficient)

    def to_expr(self) -> OperatorExpr:
        return OperatorExpr({self.exponents: exact_number(self.coefficient)})

    def describe(self) -> str:
        return str(self.to_expr())

    @classmethod
    def from_expr(cls, expression: OperatorExpr, parameters: Optional[Mapping] = None) -> List["InteractionTerm"]:
        """
        Split an expression into interaction terms.

        Raises:
            ConfigurationError: If a monomial is complex or not exactly exponentiable
        """
        terms = []
        for exponents, coefficient in expression.numeric_terms(parameters):
            if abs(coefficient.imag) > 0:
                raise ConfigurationError(f"interaction coefficient {coefficient} is not real")
            terms.append(cls(coefficient.real, exponents))
        return terms


def observable_coupling(c: float) -> InteractionTerm:
    """K_i = c q x."""
    return InteractionTerm(c, (1, 0, 1, 0, 0, 0))


def boost_coupling(c: float) -> InteractionTerm:
    """K_i = -c q p_k."""
    return InteractionTerm(-c, (1, 0, 0, 0, 0, 1))


def coupling_terms(c: float, kind: str) -> List[InteractionTerm]:
    """
    Interaction terms for a named coupling kind.

    Raises:
        ParameterError: If the kind is not none, observable or boost
    """
    if kind == "none":
        return []
    if kind == "observable":
        return [observable_coupling(c)]
    if kind == "boost":
        return [boost_coupling(c)]
    raise ParameterError(f"unsupported coupling kind '{kind}', expected one of {COUPLING_KINDS}")


@dataclass
class HybridGenerator:
    """K = H_q + L_c + sum of interaction terms."""
    quantum: HamiltonianSpec
    classical: HamiltonianSpec
    interactions: List[InteractionTerm] = field(default_factory=list)

    def sub_generators(self) -> List[SubGenerator]:
        """V(q), T(p), drift, kick, then each interaction term."""
        generators = quantum_generators(self.quantum) + liouvillian_generators(self.classical)
        for index, term in enumerate(self.interactions):
            generators.append(SubGenerator(f"K_i[{index}] {term.describe()}", term.to_operator_spec()))
        return generators

    def quantum_energy_expr(self) -> OperatorExpr:
        return polynomial_expr(self.quantum.kinetic, "p") + polynomial_expr(self.quantum.potential, "q")

    def classical_energy_expr(self) -> OperatorExpr:
        return polynomial_expr(self.classical.kinetic, "k") + polynomial_expr(self.classical.potential, "x")

    def interaction_expr(self) -> OperatorExpr:
        total = OperatorExpr.zero()
        for term in self.interactions:
            total = total + term.to_expr()
        return total

    def to_expr(self) -> OperatorExpr:
        return self.quantum_energy_expr() + liouvillian_expr(self.classical) + self.interaction_expr()

    def check_self_adjoint(self, grids: Sequence[Grid1D], samples: int = 3, seed: int = 0,
                           workers: Optional[int] = None) -> None:
        """
        Check that every sub-generator has real expectations on random packets.

        Raises:
            SelfAdjointnessError: If an expectation has an imaginary part above 1e-10
        """
        rng = np.random.default_rng(seed)
        grids = tuple(grids)
        for _ in range(samples):
            centers = [rng.uniform(-0.2, 0.2) * g.length for g in grids]
            momenta = [rng.uniform(-1.0, 1.0) for _ in grids]
            state = gaussian_state(grids, centers, [1.0] * len(grids), momenta)
            for generator in self.sub_generators():
                if not generator.operator.is_zero:
                    expectation(generator.operator, state, workers)


@dataclass
class EnergyLedger:
    """<H_q>, <H_c> and their sum per saved time, with central-difference rates."""
    times: np.ndarray
    energy_q: np.ndarray
    energy_c: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.energy_q + self.energy_c

    def rates(self) -> Dict[str, np.ndarray]:
        return {
            "t": self.times[1:-1],
            "energy_q": central_difference(self.times, self.energy_q),
            "energy_c": central_difference(self.times, self.energy_c),
            "total": central_difference(self.times, self.total),
        }

    def drift(self) -> float:
        return float(np.max(np.abs(self.total - self.total[0])))

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory) -> "EnergyLedger":
        return cls(trajectory.times, trajectory.column("energy_q"), trajectory.column("energy_c"))


@dataclass
class HybridRun:
    """Result of evolve_hybrid."""
    trajectory: Trajectory
    ledger: EnergyLedger
    final: StateVector
    ordering: List[dict]
    dt: float
    snapshots: List[StateVector] = field(default_factory=list)
    marginals: List[np.ndarray] = field(default_factory=list)


class HybridObservables:
    """Symbolic observables and their Heisenberg right-hand sides, evaluated per saved state."""

    def __init__(self, generator: HybridGenerator):
        self.generator = generator
        k_expr = generator.to_expr()
        self.expressions: Dict[str, OperatorExpr] = {
            name: OperatorExpr.generator(symbol)
            for name, symbol in (("mean_q", "q"), ("mean_p", "p"), ("mean_x", "x"),
                                 ("mean_k", "k"), ("mean_px", "p_x"), ("mean_pk", "p_k"))
        }
        h_q = generator.quantum_energy_expr()
        h_c = generator.classical_energy_expr()
        self.expressions["energy_q"] = h_q
        self.expressions["energy_c"] = h_c
        self.expressions["mean_q_times_k"] = OperatorExpr.from_word(["q", "k"])
        self.expressions["mean_p_times_pk"] = OperatorExpr.from_word(["p", "p_k"])
        self.expressions["mean_p_times_x"] = OperatorExpr.from_word(["p", "x"])
        for name, symbol in (("rhs_q", "q"), ("rhs_p", "p"), ("rhs_x", "x"), ("rhs_k", "k")):
            self.expressions[name] = heisenberg_rhs(k_expr, OperatorExpr.generator(symbol))
        self.expressions["rhs_Hq"] = heisenberg_rhs(k_expr, h_q)
        self.expressions["rhs_Hc"] = heisenberg_rhs(k_expr, h_c)
        logger.debug("Heisenberg right-hand sides: " + ", ".join(
            f"{name}={self.expressions[name]}" for name in RATE_COLUMNS))

    def evaluate(self, state: StateVector, workers: Optional[int] = None) -> Dict[str, float]:
        cache = MixedDensities(state, workers)
        values = {name: expr_expectation(expr, state, cache=cache, workers=workers)
                  for name, expr in self.expressions.items()}
        values["norm"] = state.norm()
        values["energy_total"] = values["energy_q"] + values["energy_c"]
        return values


def evolve_hybrid(initial: StateVector, generator: HybridGenerator, duration: float, dt: float,
                  save_every: int = 1, keep_snapshots: bool = False, keep_marginals: bool = False,
                  workers: Optional[int] = None, guard_limit: float = GUARD_LIMIT) -> HybridRun:
    """
    Strang-split evolution i dPsi/dt = K Psi on the (q, x, k) grid.

    Each saved row holds the first moments of all six generators, the norm,
    both sector energies and the expectations of the symbolic Heisenberg
    right-hand sides of q, p, x, k, H_q and H_c.

    Args:
        initial: Normalized state on (q, x, k)
        generator: Hybrid generator
        duration: Total time T
        dt: Time step
        save_every: Steps between saved rows
        keep_snapshots: Keep the saved states
        keep_marginals: Keep the classical marginal f(x, k) at saved times
        workers: FFT worker threads
        guard_limit: Boundary-mass limit

    Returns:
        HybridRun with trajectory, energy ledger and final state

    Raises:
        ShapeError: If the state is not on (q, x, k)
        ConfigurationError: If an interaction term is not exactly exponentiable
        GuardViolation: If mass reaches a boundary
    """
    if initial.labels != HYBRID_AXES:
        raise ShapeError(f"hybrid state must live on {HYBRID_AXES}, got {initial.labels}")
    observables = HybridObservables(generator)
    trajectory = Trajectory(HYBRID_COLUMNS + ENERGY_COLUMNS + PRODUCT_COLUMNS + RATE_COLUMNS)
    snapshots: List[StateVector] = []
    marginals: List[np.ndarray] = []

    def record(t: float, state: StateVector) -> None:
        trajectory.append(t=t, **observables.evaluate(state, workers))
        if keep_snapshots:
            snapshots.append(state)
        if keep_marginals:
            marginals.append(classical_marginal(state).values)

    logger.info(f"Hybrid evolution: T={duration}, dt={dt}, grid {initial.shape}, "
                f"K_i=[{', '.join(t.describe() for t in generator.interactions)}]")
    result = evolve(initial, generator.sub_generators(), duration, dt, save_every,
                    record, workers=workers, guard_limit=guard_limit)
    ledger = EnergyLedger.from_trajectory(trajectory)
    logger.debug(f"Hybrid run finished: {result.n_steps} steps, energy drift {ledger.drift():.3e}")
    return HybridRun(trajectory, ledger, result.final, result.ordering, result.dt, snapshots, marginals)


@dataclass
class EnergyRateReport:
    """
    Residuals of the sector energy rate identities on interior saved times.

    residual_c and residual_q are d<H_c>/dt and d<H_q>/dt minus the
    symbolically derived rate for the coupling kind.
    """
    kind: str
    times: np.ndarray
    residual_c: np.ndarray
    residual_q: np.ndarray
    total_drift: float
    drift_growing: bool
    energy_q_variation: float
    definitions: Dict[str, str]

    @property
    def max_residual_c(self) -> float:
        return float(np.max(np.abs(self.residual_c)))

    @property
    def max_residual_q(self) -> float:
        return float(np.max(np.abs(self.residual_q)))

    def exceeds(self, baseline_drift: float, factor: float = 10.0) -> bool:
        """Drift above factor x a decoupled-run bound and still growing."""
        return self.total_drift > factor * baseline_drift and self.drift_growing

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "max_residual_c": self.max_residual_c,
            "max_residual_q": self.max_residual_q,
            "total_energy_drift": self.total_drift,
            "drift_growing": self.drift_growing,
            "energy_q_variation": self.energy_q_variation,
            "definitions": self.definitions,
        }


def energy_rates_check(ledger: EnergyLedger, trajectory: Trajectory, c: float, kind: str) -> EnergyRateReport:
    """
    Check the energy rate identities of the canonical couplings.

    boost (K_i = -c q p_k): d<H_c>/dt = -c<qk>, d<H_q>/dt = c<p p_k>;
    observable (K_i = c q x): d<H_c>/dt = 0, d<H_q>/dt = -c<p x>;
    none: both rates vanish.

    Raises:
        ParameterError: If the kind is unsupported or the rows do not align
    """
    if kind not in COUPLING_KINDS:
        raise ParameterError(f"unsupported coupling kind '{kind}', expected one of {COUPLING_KINDS}")
    if ledger.times.shape != trajectory.times.shape or np.any(ledger.times != trajectory.times):
        raise ParameterError("energy ledger and trajectory rows are not aligned")
    rates = ledger.rates()
    inner = slice(1, -1)
    if kind == "boost":
        residual_c = rates["energy_c"] + c * trajectory.column("mean_q_times_k")[inner]
        residual_q = rates["energy_q"] - c * trajectory.column("mean_p_times_pk")[inner]
        definitions = {"c": "d<H_c>/dt + c<q k>", "q": "d<H_q>/dt - c<p p_k>"}
    elif kind == "observable":
        residual_c = rates["energy_c"]
        residual_q = rates["energy_q"] + c * trajectory.column("mean_p_times_x")[inner]
        definitions = {"c": "d<H_c>/dt", "q": "d<H_q>/dt + c<p x>"}
    else:
        residual_c = rates["energy_c"]
        residual_q = rates["energy_q"]
        definitions = {"c": "d<H_c>/dt", "q": "d<H_q>/dt"}

    deviation = np.abs(ledger.total - ledger.total[0])
    half = deviation.size // 2
    drift_growing = bool(half > 0 and np.max(deviation[half:]) > np.max(deviation[:half + 1]))
    variation = float(np.max(ledger.energy_q) - np.min(ledger.energy_q))
    report = EnergyRateReport(kind, rates["t"], residual_c, residual_q, float(np.max(deviation)),
                              drift_growing, variation, definitions)
    logger.info(f"Energy rates ({kind}, c={c}): max |res_c|={report.max_residual_c:.3e}, "
                f"max |res_q|={report.max_residual_q:.3e}, drift={report.total_drift:.3e}")
    return report


@dataclass
class DeviationReport:
    """
    Residuals of the coupled-oscillator equations of motion on hybrid expectations.

    residuals[name] is evaluated on interior saved times; differences[name]
    is |<name>(t) - reference(t)| on all saved times; taylor[name] is the
    first-order prediction t * |residual at t=0| of the early departure.
    """
    times: np.ndarray
    residuals: Dict[str, np.ndarray]
    differences: Dict[str, np.ndarray]
    taylor: Dict[str, np.ndarray]
    definitions: Dict[str, str]

    def max_residual(self, name: Optional[str] = None) -> float:
        names = [name] if name else list(self.residuals)
        return float(max(np.max(np.abs(self.residuals[n])) for n in names))

    def max_difference(self, name: Optional[str] = None) -> float:
        names = [name] if name else list(self.differences)
        return float(max(np.max(self.differences[n]) for n in names))

    def to_dict(self) -> dict:
        return {
            "definitions": self.definitions,
            "max_residual": {name: self.max_residual(name) for name in self.residuals},
            "max_difference": {name: self.max_difference(name) for name in self.differences},
        }


EOM_DEFINITIONS = {
    "x": "d<x>/dt - <k>",
    "k": "d<k>/dt + <x> + c<q>",
    "q": "d<q>/dt - <p>",
    "p": "d<p>/dt + <q> + c<x>",
}


def eom_deviation(trajectory: Trajectory, reference: Trajectory, c: float,
                  initial_tolerance: float = 1e-6) -> DeviationReport:
    """
    Compare hybrid expectations with the coupled-oscillator equations of motion.

    Args:
        trajectory: Hybrid trajectory (with rhs_* columns)
        reference: Output of classical_reference on the same saved times
        c: Coupling constant of the reference equations
        initial_tolerance: Allowed mismatch of the initial means

    Raises:
        ParameterError: If the time grids or initial means differ
    """
    times = trajectory.times
    if times.shape != reference.times.shape or np.max(np.abs(times - reference.times)) > 1e-9:
        raise ParameterError("hybrid trajectory and reference have different time grids")
    means = {name: trajectory.column(f"mean_{name}") for name in ("q", "p", "x", "k")}
    reference_means = {name: reference.column(name) for name in ("q", "p", "x", "k")}
    for name in means:
        if abs(means[name][0] - reference_means[name][0]) > initial_tolerance:
            raise ParameterError(
                f"initial <{name}> differs: {means[name][0]} vs reference {reference_means[name][0]}")

    targets = {
        "x": means["k"],
        "k": -means["x"] - c * means["q"],
        "q": means["p"],
        "p": -means["q"] - c * means["x"],
    }
    residuals = {name: central_difference(times, means[name]) - targets[name][1:-1] for name in targets}
    differences = {name: np.abs(means[name] - reference_means[name]) for name in means}
    taylor = {}
    for name in targets:
        column = f"rhs_{name}"
        initial_rate = trajectory.column(column)[0] if column in trajectory.columns else targets[name][0]
        taylor[name] = times * abs(initial_rate - targets[name][0])
    return DeviationReport(times[1:-1], residuals, differences, taylor, dict(EOM_DEFINITIONS))


def symbolic_rate_check(trajectory: Trajectory) -> Dict[str, float]:
    """
    Max |finite-difference rate - <symbolic Heisenberg right-hand side>| per observable.
    """
    times = trajectory.times
    pairs = {"rhs_q": "mean_q", "rhs_p": "mean_p", "rhs_x": "mean_x", "rhs_k": "mean_k",
             "rhs_Hq": "energy_q", "rhs_Hc": "energy_c"}
    result = {}
    for rhs, column in pairs.items():
        rate = central_difference(times, trajectory.column(column))
        result[rhs] = float(np.max(np.abs(rate - trajectory.column(rhs)[1:-1])))
    return result


def sector_commutativity(state: StateVector, workers: Optional[int] = None) -> float:
    """|<q x> - <x q>| with the two factors applied in either order."""
    q_then_x = OperatorSpec.coordinate("x").times(OperatorSpec.coordinate("q"))
    x_then_q = OperatorSpec.coordinate("q").times(OperatorSpec.coordinate("x"))
    first = inner_product(state, apply_operator(q_then_x, state, workers))
    second = inner_product(state, apply_operator(x_then_q, state, workers))
    return abs(first - second)


def marginal_isolation_profile(first: HybridRun, second: HybridRun) -> np.ndarray:
    """Max abs difference between the classical marginals of two runs at each saved time."""
    if len(first.marginals) != len(second.marginals) or not first.marginals:
        raise ParameterError("both runs need classical marginal histories of the same length")
    return np.array([np.max(np.abs(a - b)) for a, b in zip(first.marginals, second.marginals)])


def marginal_isolation(first: HybridRun, second: HybridRun) -> float:
    """Max abs difference between the classical marginal histories of two runs."""
    return float(np.max(marginal_isolation_profile(first, second)))


def product_initial_state(grids: Sequence[Grid1D], q0: float, p0: float, x0: float, k0: float,
                          width: float = 1.0) -> StateVector:
    """
    Gaussian product state on (q, x, k).

    The quantum factor carries mean momentum p0; the classical factor is real
    and nonnegative, centred at (x0, k0) with density variance width^2/2.
    """
    labels = tuple(g.label for g in grids)
    if labels != HYBRID_AXES:
        raise ShapeError(f"hybrid grids must be {HYBRID_AXES}, got {labels}")
    return gaussian_state(grids, [q0, x0, k0], [width] * 3, [p0, 0.0, 0.0])

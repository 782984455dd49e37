"""
Scenario registry: builds the objects a resolved configuration describes,
runs them, and collects the rows and summary a run emits.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from src.logger import setup_logger
from src.kvn import __version__
from src.kvn.algebra.expr import MAX_DEGREE
from src.kvn.algebra.heisenberg import (
    commutator,
    coupled_generator,
    eom_compare,
    isolation_check,
    jacobi_residual,
    oscillator_targets,
    random_observable_polynomial,
    symbolic_c,
)
from src.kvn.algebra.oracle import MatrixOracle, commutator_agreement
from src.kvn.algebra.parser import parse
from src.kvn.bases import ModeBasis, build_basis
from src.kvn.classical import FLOW_COLUMNS, ClassicalRun, HamiltonianSpec, evolve_classical, hamilton_check
from src.kvn.defaults import DEFAULT_TOLERANCES, SCENARIO_NAMES
from src.kvn.errors import ConfigurationError, UnknownScenarioError
from src.kvn.grids import Grid1D, StateVector, gaussian_state
from src.kvn.husimi import DiagnosticGrid, correspondence_compare, husimi_l1
from src.kvn.hybrid import (
    HybridGenerator,
    coupling_terms,
    energy_rates_check,
    eom_deviation,
    evolve_hybrid,
    marginal_isolation_profile,
    product_initial_state,
    sector_commutativity,
    symbolic_rate_check,
)
from src.kvn.measurement import (
    AncillaEnvironment,
    MeasurementChain,
    Partition,
    PointerScheme,
    condition,
    outcome_probabilities,
    premeasure,
)
from src.kvn.quantum import ehrenfest_check, evolve_quantum, sharpness_report
from src.kvn.reference import analytic_uncoupled, classical_reference, normal_mode_frequencies
from src.kvn.tomography import (
    born_rule_check,
    collect,
    conditional_consistency,
    extract_kraus,
    extract_povm,
    random_pure_inputs,
    unsharpness_gap,
)
from src.kvn.trajectory import Trajectory

# Setup logger
logger = setup_logger(__name__)

MAX_REPORTED_WARNINGS = 5

# Strang splitting makes <H> oscillate at O(dt^2); the energy tolerance is stated at this step
ENERGY_REFERENCE_DT = 1e-3


@dataclass
class ScenarioResult:
    """Rows and summary of one scenario run; ``details`` keeps the in-memory objects."""
    columns: List[str]
    rows: List[List[Any]]
    summary: Dict[str, Any]
    ordering: List[dict] = field(default_factory=list)
    artifacts: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    runner: Callable[[Dict[str, Any]], ScenarioResult]


# -- builders -------------------------------------------------------------------

def build_grids(config: Dict[str, Any], labels: Sequence[str]) -> tuple:
    grids = config.get("grids", {})
    missing = [label for label in labels if label not in grids]
    if missing:
        raise ConfigurationError(f"scenario '{config['scenario']}' needs grids for {missing}")
    return tuple(Grid1D.from_config(label, grids[label]) for label in labels)


def build_hamiltonian(config: Dict[str, Any]) -> HamiltonianSpec:
    settings = config.get("hamiltonian", {})
    return HamiltonianSpec(tuple(settings.get("kinetic", (0.0, 0.0, 0.5))),
                           tuple(settings.get("potential", (0.0, 0.0, 0.5))))


def tolerances(config: Dict[str, Any]) -> Dict[str, float]:
    merged = dict(DEFAULT_TOLERANCES)
    merged.update(config.get("tolerances", {}))
    return merged


def conserved_energy_bound(config: Dict[str, Any]) -> float:
    """Energy tolerance scaled by (dt / 1e-3)^2 for steps coarser than the reference step."""
    scale = max(1.0, (float(config["dt"]) / ENERGY_REFERENCE_DT) ** 2)
    return tolerances(config)["energy_conserved"] * scale


def _initial(config: Dict[str, Any], key: str, default: float = 0.0) -> float:
    return float(config.get("initial", {}).get(key, default))


# -- classical ------------------------------------------------------------------

def classical_analytic(config: Dict[str, Any], times: np.ndarray) -> Optional[np.ndarray]:
    """Exact mean trajectory (x, k) for the harmonic and free scenarios."""
    x0, k0 = _initial(config, "x0"), _initial(config, "k0")
    if config["scenario"] == "classical-ho":
        return analytic_uncoupled(x0, k0, times)
    if config["scenario"] == "classical-free":
        return np.column_stack([x0 + k0 * times, np.full_like(times, k0)])
    return None


def run_classical(config: Dict[str, Any]) -> ScenarioResult:
    grids = build_grids(config, ("x", "k"))
    hamiltonian = build_hamiltonian(config)
    width = _initial(config, "width", 1.0)
    initial = gaussian_state(grids, [_initial(config, "x0"), _initial(config, "k0")], [width, width])
    run = evolve_classical(initial, hamiltonian, config["T"], config["dt"], config["save_every"],
                           workers=config.get("fft_workers"))
    trajectory = run.trajectory
    limits = tolerances(config)
    report = hamilton_check(trajectory)
    norm_drift = float(np.max(np.abs(trajectory.column("norm") - 1.0)))
    summary = {
        "final": trajectory.last(),
        "norm_drift": norm_drift,
        "hamilton_residual_x": report.max_x,
        "hamilton_residual_k": report.max_k,
        "verdicts": {
            "norm_conserved": norm_drift < limits["norm"],
            "hamilton_ok": report.max_residual < limits["hamilton_residual"],
        },
    }
    analytic = classical_analytic(config, trajectory.times)
    if analytic is not None:
        error = float(max(np.max(np.abs(trajectory.column("mean_x") - analytic[:, 0])),
                          np.max(np.abs(trajectory.column("mean_k") - analytic[:, 1]))))
        summary["max_mean_error"] = error
        summary["verdicts"]["mean_ok"] = error < limits["mean_error"]
    # quadratic flows are linear in the saved means; higher degrees need the flow columns
    quadratic = all(not any(coefficients[3:]) for coefficients in (hamiltonian.kinetic, hamiltonian.potential))
    extra = {} if quadratic else {name: trajectory.column(name) for name in FLOW_COLUMNS}
    columns, rows = with_columns(trajectory, extra)
    return ScenarioResult(columns, rows, summary, run.ordering, details={"run": run, "hamilton": report})


# -- quantum --------------------------------------------------------------------

def _diagnostic(config: Dict[str, Any]) -> tuple:
    settings = config.get("diagnostic", {"n": 64, "extent": 8.0, "s": 1.0})
    return DiagnosticGrid.square(int(settings["n"]), float(settings["extent"])), float(settings["s"])


def matched_classical_run(config: Dict[str, Any], hamiltonian: HamiltonianSpec, width: float,
                          on_save: Optional[Callable[[float, StateVector], None]] = None) -> ClassicalRun:
    """Classical run whose Liouville density is the Wigner function of the Gaussian start."""
    q_grid = build_grids(config, ("q",))[0]
    grids = (Grid1D(q_grid.n, q_grid.origin, q_grid.length, "x"), Grid1D(q_grid.n, q_grid.origin, q_grid.length, "k"))
    initial = gaussian_state(grids, [_initial(config, "q0"), _initial(config, "p0")], [width, 1.0 / width])
    return evolve_classical(initial, hamiltonian, config["T"], config["dt"], config["save_every"],
                            keep_snapshots=False, workers=config.get("fft_workers"), on_save=on_save)


def with_columns(trajectory: Trajectory, extra: Dict[str, Sequence[float]]) -> tuple:
    """CSV columns and rows of a trajectory followed by per-row inputs of the summary verdicts."""
    names = list(extra)
    rows = [row + [float(extra[name][i]) for name in names]
            for i, row in enumerate(trajectory.rows(trajectory.csv_columns))]
    return trajectory.csv_columns + names, rows


def run_quantum(config: Dict[str, Any]) -> ScenarioResult:
    grids = build_grids(config, ("q",))
    hamiltonian = build_hamiltonian(config)
    width = _initial(config, "width", 1.0)
    q0, p0 = _initial(config, "q0"), _initial(config, "p0")
    initial = gaussian_state(grids, [q0], [width], [p0])
    compare_phase_space = config["scenario"] == "quantum-ho"
    run = evolve_quantum(initial, hamiltonian, config["T"], config["dt"], config["save_every"],
                         keep_snapshots=compare_phase_space, workers=config.get("fft_workers"))
    trajectory = run.trajectory
    times = trajectory.times
    limits = tolerances(config)
    norm_drift = float(np.max(np.abs(trajectory.column("norm") - 1.0)))
    ehrenfest = ehrenfest_check(trajectory)
    sharpness = sharpness_report(trajectory)
    summary = {
        "final": trajectory.last(),
        "norm_drift": norm_drift,
        "ehrenfest_residual": ehrenfest.max_residual,
        "sharpness": sharpness.to_dict(),
        "verdicts": {
            "norm_conserved": norm_drift < limits["norm"],
            "ehrenfest_ok": ehrenfest.max_residual < limits["hamilton_residual"],
        },
    }
    details = {"run": run, "ehrenfest": ehrenfest}
    extra: Dict[str, Sequence[float]] = {}
    if compare_phase_space:
        analytic = analytic_uncoupled(q0, p0, times)
        error = float(np.max(np.abs(trajectory.column("mean_q") - analytic[:, 0])))
        summary["max_mean_error"] = error
        summary["verdicts"]["mean_ok"] = error < limits["mean_error"]
        grid, s = _diagnostic(config)
        distances: List[float] = []
        warnings: List[str] = []

        # classical states are compared as they are saved; only the quantum history is kept
        def compare(t: float, state: StateVector) -> None:
            distance, missing = husimi_l1(run.snapshots[len(distances)], state, grid, s)
            distances.append(distance)
            warnings.extend(missing)

        classical = matched_classical_run(config, hamiltonian, width, on_save=compare)
        report = correspondence_compare(trajectory, classical.trajectory, husimi_distances=distances)
        run.snapshots.clear()
        summary["correspondence_mean_deviation"] = report.max_mean_deviation
        summary["max_husimi_l1"] = report.max_l1
        summary["final_husimi_l1"] = distances[-1]
        summary["husimi_warning_count"] = len(warnings)
        summary["husimi_warnings"] = warnings[:MAX_REPORTED_WARNINGS]
        summary["verdicts"]["husimi_ok"] = report.max_l1 < limits["husimi_l1"]
        details["correspondence"] = report
        extra["husimi_l1"] = report.husimi_l1
    elif config["scenario"] == "quantum-free":
        law = width ** 2 / 2.0 + times ** 2 / (2.0 * width ** 2)
        error = float(np.max(np.abs(trajectory.column("var_q") - law)))
        summary["max_variance_error"] = error
        summary["verdicts"]["variance_ok"] = error < limits["variance_error"]
    columns, rows = with_columns(trajectory, extra)
    return ScenarioResult(columns, rows, summary, run.ordering, details=details)


# -- hybrid ---------------------------------------------------------------------

def hybrid_generator(config: Dict[str, Any], c: Optional[float] = None) -> HybridGenerator:
    coupling = config.get("coupling", {})
    c = float(coupling.get("c", 0.0)) if c is None else c
    hamiltonian = build_hamiltonian(config)
    return HybridGenerator(hamiltonian, hamiltonian, coupling_terms(c, coupling.get("kind", "none")))


def run_hybrid(config: Dict[str, Any]) -> ScenarioResult:
    grids = build_grids(config, ("q", "x", "k"))
    coupling = config.get("coupling", {})
    c = float(coupling.get("c", 0.0))
    kind = coupling.get("kind", "none")
    means = {key: _initial(config, key) for key in ("q0", "p0", "x0", "k0")}
    initial = product_initial_state(grids, means["q0"], means["p0"], means["x0"], means["k0"],
                                    _initial(config, "width", 1.0))
    workers = config.get("fft_workers")
    generator = hybrid_generator(config, c)
    generator.check_self_adjoint(grids, workers=workers)
    keep_marginals = kind == "observable"
    run = evolve_hybrid(initial, generator, config["T"], config["dt"], config["save_every"],
                        keep_marginals=keep_marginals, workers=workers)
    if c != 0.0 and kind != "none":
        baseline = evolve_hybrid(initial, hybrid_generator(config, 0.0), config["T"], config["dt"],
                                 config["save_every"], keep_marginals=keep_marginals, workers=workers)
    else:
        baseline = run
    trajectory = run.trajectory
    limits = tolerances(config)
    reference = classical_reference(c, means["q0"], means["p0"], means["x0"], means["k0"],
                                    config["T"], config["dt"], config["save_every"])
    rates = energy_rates_check(run.ledger, trajectory, c, kind)
    baseline_drift = baseline.ledger.drift()
    deviation = eom_deviation(trajectory, reference, c)
    symbolic = symbolic_rate_check(trajectory)
    energy_bound = conserved_energy_bound(config)
    norm_drift = float(np.max(np.abs(trajectory.column("norm") - 1.0)))
    summary = {
        "final": trajectory.last(),
        "coupling": {"c": c, "kind": kind},
        "norm_drift": norm_drift,
        "total_energy_drift": rates.total_drift,
        "conserved_energy_bound": energy_bound,
        "baseline_energy_drift": baseline_drift,
        "energy_rates": rates.to_dict(),
        "eom_deviation": deviation.to_dict(),
        "symbolic_rate_agreement": symbolic,
        "sector_commutativity": sector_commutativity(run.final, workers),
        "reference_mode_frequencies": normal_mode_frequencies(
            classical_reference(c, means["q0"], means["p0"], means["x0"], means["k0"], config["T"], config["dt"])),
        "verdicts": {
            "norm_conserved": norm_drift < limits["norm"],
            "energy_conserved": rates.total_drift < energy_bound,
            "rate_identities_hold": max(rates.max_residual_c, rates.max_residual_q) < limits["rate_identity"],
            "heisenberg_rates_match": max(symbolic.values()) < limits["rate_identity"],
        },
    }
    extra: Dict[str, Sequence[float]] = {
        "baseline_mean_p": baseline.trajectory.column("mean_p"),
        "baseline_energy_total": baseline.trajectory.column("energy_total"),
    }
    if kind == "observable":
        profile = marginal_isolation_profile(run, baseline)
        isolation = float(np.max(profile))
        p_deviation = float(np.max(np.abs(trajectory.column("mean_p") - baseline.trajectory.column("mean_p"))))
        extra["marginal_isolation"] = profile
        summary["marginal_isolation"] = isolation
        summary["quantum_p_deviation"] = p_deviation
        summary["verdicts"]["classical_sector_isolated"] = isolation < limits["isolation"]
    if kind == "boost":
        profile = c * (trajectory.column("mean_pk") + trajectory.column("mean_x"))[1:-1]
        mismatch = float(np.max(np.abs(deviation.residuals["p"] - profile)))
        summary["p_residual_profile_mismatch"] = mismatch
        summary["verdicts"]["unobservable_term_detected"] = mismatch < limits["rate_identity"]
        if c != 0.0:
            summary["verdicts"]["energy_flow"] = rates.exceeds(baseline_drift)
    columns, rows = with_columns(trajectory, extra)
    return ScenarioResult(columns, rows, summary, run.ordering,
                          details={"run": run, "baseline": baseline, "reference": reference,
                                   "rates": rates, "deviation": deviation})


# -- measurement ----------------------------------------------------------------

def build_basis_from_config(config: Dict[str, Any], grid: Grid1D) -> ModeBasis:
    settings = config.get("basis", {})
    pointer = config.get("pointer", {})
    return build_basis(grid, settings.get("family", "packets"), int(settings.get("size", 2)),
                       float(pointer.get("packet_offset", 5.0)), float(pointer.get("width", 1.0)))


def build_chain(config: Dict[str, Any]) -> MeasurementChain:
    q_grid, x_grid, k_grid = build_grids(config, ("q", "x", "k"))
    basis = build_basis_from_config(config, q_grid)
    dimension = int(config.get("basis", {}).get("dimension", basis.size))
    width = _initial(config, "width", 1.0)
    pointer = gaussian_state((x_grid, k_grid), [_initial(config, "x0"), _initial(config, "k0")], [width, width])
    scheme = PointerScheme.from_config(config["pointer"], basis)
    partition = Partition.from_config((x_grid, k_grid), config["partition"])
    environment = AncillaEnvironment.from_config(config.get("environment"), dimension, len(partition.labels))
    return MeasurementChain(pointer, scheme, partition, basis, dimension, environment,
                            workers=config.get("fft_workers"))


def _input_coefficients(config: Dict[str, Any], dimension: int) -> np.ndarray:
    amplitudes = np.zeros(dimension, dtype=np.complex128)
    given = config.get("initial", {}).get("amplitudes", [1.0])
    amplitudes[:min(dimension, len(given))] = given[:dimension]
    return amplitudes / np.linalg.norm(amplitudes)


def run_premeasure(config: Dict[str, Any]) -> ScenarioResult:
    chain = build_chain(config)
    coefficients = _input_coefficients(config, chain.dimension)
    psi_q = chain.input_state(coefficients)
    result = premeasure(psi_q, chain.pointer, chain.scheme, chain.workers)
    probabilities = outcome_probabilities(result.state, chain.partition)
    projectors = chain.scheme.projector_matrices(chain.basis, chain.dimension)
    rows, conditionals = [], {}
    for label in chain.partition.labels:
        weight = result.amplitudes.get(label, float("nan"))
        fidelity = float("nan")
        if probabilities[label] > 1e-12:
            outcome = condition(result.state, label, chain.partition, chain.basis, chain.dimension)
            conditionals[label] = outcome
            if label in projectors:
                target = projectors[label] @ coefficients
                if np.linalg.norm(target) > 0:
                    fidelity = outcome.density.fidelity_with(target)
        rows.append([label, probabilities[label], weight, fidelity])
    summary = {
        "probabilities": probabilities,
        "branch_amplitudes": result.amplitudes,
        "pointer_overlap": result.pointer_overlap,
        "norm": result.state.norm(),
        "verdicts": {
            "complete": abs(sum(probabilities.values()) - 1.0) < 1e-10,
            "pointers_orthogonal": result.orthogonal,
        },
    }
    return ScenarioResult(["outcome", "probability", "branch_amplitude", "fidelity"], rows, summary,
                          details={"chain": chain, "result": result, "conditionals": conditionals})


def _matrix_rows(label: str, matrix: np.ndarray) -> List[List[Any]]:
    return [[label, i, j, float(matrix[i, j].real), float(matrix[i, j].imag)]
            for i in range(matrix.shape[0]) for j in range(matrix.shape[1])]


def run_povm(config: Dict[str, Any]) -> ScenarioResult:
    chain = build_chain(config)
    limits = tolerances(config)
    data = collect(chain, ())
    povm = extract_povm(chain, data, limits["povm_completeness"], limits["povm_positivity"])
    born = born_rule_check(chain, povm, int(config.get("samples", 20)), int(config.get("seed", 0)))
    projectors = chain.scheme.projector_matrices(chain.basis, chain.dimension)
    oracle = {label: float(np.max(np.abs(povm.elements[label] - projectors[label])))
              for label in povm.labels if label in projectors}
    rows = [row for label in povm.labels for row in _matrix_rows(label, povm.elements[label])]
    summary = {
        "completeness_error": povm.completeness_error,
        "min_eigenvalue": povm.min_eigenvalue,
        "born_rule_deviation": born,
        "projection_oracle_deviation": oracle,
        "unsharpness_gap": {label: unsharpness_gap(povm.elements[label]) for label in povm.labels},
        "verdicts": {
            "complete": povm.completeness_error < limits["povm_completeness"],
            "positive": povm.min_eigenvalue >= -limits["povm_positivity"],
            "born_rule": born < limits["born_rule"],
        },
    }
    return ScenarioResult(["outcome", "i", "j", "re", "im"], rows, summary,
                          artifacts={"povm.json": povm.to_dict()}, details={"chain": chain, "povm": povm})


def run_kraus(config: Dict[str, Any]) -> ScenarioResult:
    chain = build_chain(config)
    limits = tolerances(config)
    data = collect(chain)
    povm = extract_povm(chain, data, limits["povm_completeness"], limits["povm_positivity"])
    kraus = extract_kraus(chain, data=data, povm=povm, kraus_tolerance=limits["kraus_consistency"])
    probe = random_pure_inputs(chain.dimension, 1, int(config.get("seed", 0)))[0]
    consistency = {}
    rho = np.outer(probe, np.conj(probe))
    for label in kraus.operators:
        if povm.probability(rho, label) > 1e-12:
            consistency[label] = conditional_consistency(chain, kraus, label, probe)
    rows = []
    for label, operators in kraus.operators.items():
        for index, operator in enumerate(operators):
            rows.extend(_matrix_rows(f"{label}/{index}", operator))
    summary = {
        "choi_rank": kraus.ranks,
        "consistency_error": kraus.consistency_error,
        "conditional_trace_distance": consistency,
        "verdicts": {
            "kraus_consistent": max(kraus.consistency_error.values()) < limits["kraus_consistency"],
            "prediction_matches": all(v < 1e-6 for v in consistency.values()),
        },
    }
    return ScenarioResult(["operator", "i", "j", "re", "im"], rows, summary,
                          artifacts={"kraus.json": kraus.to_dict(), "povm.json": povm.to_dict()},
                          details={"chain": chain, "povm": povm, "kraus": kraus})


# -- algebra --------------------------------------------------------------------

def run_algebra(config: Dict[str, Any]) -> ScenarioResult:
    rng = np.random.default_rng(int(config.get("seed", 0)))
    samples = int(config.get("samples", 200))
    rows = []
    failures = 0
    for index in range(samples):
        interaction = random_observable_polynomial(rng)
        verdict = isolation_check(interaction)
        failures += 0 if verdict.isolating else 1
        rows.append([index, interaction.degree, verdict.isolating, str(interaction)])
    c = symbolic_c()
    witnesses = {
        "q*px": isolation_check(parse("q*px")),
        "-c*q*pk": isolation_check(parse("-c*q*pk", {"c": c})),
    }
    eom = eom_compare(coupled_generator(c, "boost"), oscillator_targets(c))
    oracle = MatrixOracle(16)
    states = oracle.band_limited_states(2, 5, rng)
    pairs = [("q", "p"), ("x", "px"), ("k", "pk"), ("q*x", "p*px"), ("q^2", "p^2"), ("x*k", "px*pk")]
    agreement = max(commutator_agreement(oracle, parse(a), parse(b), commutator(parse(a), parse(b)), states)
                    for a, b in pairs)
    jacobi = jacobi_residual(parse("q*p + x"), parse("k*pk"), parse("p^2 + px")).is_zero
    summary = {
        "random_interactions": samples,
        "non_isolating_random": failures,
        "witnesses": {name: verdict.to_dict() for name, verdict in witnesses.items()},
        "eom": eom.to_dict(),
        "oracle_commutator_deviation": agreement,
        "jacobi_holds": jacobi,
        "max_degree": MAX_DEGREE,
        "verdicts": {
            "observable_interactions_isolate": failures == 0,
            "witnesses_non_isolating": not any(w.isolating for w in witnesses.values()),
            "oracle_agrees": agreement < 1e-8,
        },
    }
    return ScenarioResult(["index", "degree", "isolating", "interaction"], rows, summary,
                          details={"eom": eom, "witnesses": witnesses})


SCENARIOS: Dict[str, Scenario] = {
    "classical-ho": Scenario("classical-ho", "Koopman evolution of a Gaussian density in the harmonic oscillator; "
                             "compared with the analytic rotation and Hamilton's equations.", run_classical),
    "classical-free": Scenario("classical-free", "Free-particle Koopman evolution: the density shears, "
                               "<x> moves at constant <k>.", run_classical),
    "classical-quartic": Scenario("classical-quartic", "Koopman evolution in V = x^4/4; "
                                  "checked against Hamilton's equations on expectations.", run_classical),
    "quantum-ho": Scenario("quantum-ho", "Coherent state in the harmonic oscillator; means, Ehrenfest "
                           "residuals and Husimi vs smoothed Liouville density.", run_quantum),
    "quantum-free": Scenario("quantum-free", "Free Gaussian packet; variance spreads as (1 + t^2)/2.", run_quantum),
    "hybrid-obs": Scenario("hybrid-obs", "Quantum and classical oscillators coupled by c q x; the classical "
                           "marginal ignores the quantum sector while the quantum sector is driven.", run_hybrid),
    "hybrid-boost": Scenario("hybrid-boost", "Oscillators coupled by -c q p_k; the quantum equation acquires "
                             "an unobservable term and total energy drifts.", run_hybrid),
    "premeasure": Scenario("premeasure", "Entangle a quantum superposition with a classical pointer and "
                           "read out a phase-space partition.", run_premeasure),
    "povm-extract": Scenario("povm-extract", "Tomographic reconstruction of the POVM induced by the "
                             "pointer chain.", run_povm),
    "kraus-extract": Scenario("kraus-extract", "Tomographic reconstruction of the conditional maps, their "
                              "Choi matrices and Kraus factors.", run_kraus),
    "algebra-check": Scenario("algebra-check", "Symbolic isolation, Heisenberg equations and matrix-oracle "
                              "cross-checks; no grid work.", run_algebra),
}


def get_scenario(name: str) -> Scenario:
    """
    Raises:
        UnknownScenarioError: With the registered names
    """
    if name not in SCENARIOS:
        raise UnknownScenarioError(name, list(SCENARIO_NAMES))
    return SCENARIOS[name]


def explain(name: str) -> str:
    scenario = get_scenario(name)
    return f"{scenario.name}: {scenario.description}"


def build_manifest(config: Dict[str, Any], result: ScenarioResult, seconds: float) -> Dict[str, Any]:
    return {
        "config": config,
        "ordering": result.ordering,
        "version": __version__,
        "wall_clock_seconds": seconds,
        "tolerances": tolerances(config),
    }


def execute(config: Dict[str, Any]) -> tuple:
    """Run a resolved configuration; returns (result, manifest)."""
    scenario = get_scenario(config["scenario"])
    logger.info(f"Running scenario '{scenario.name}'")
    started = time.perf_counter()
    result = scenario.runner(config)
    seconds = time.perf_counter() - started
    logger.info(f"Scenario '{scenario.name}' finished in {seconds:.2f} s")
    return result, build_manifest(config, result, seconds)

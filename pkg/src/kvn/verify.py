"""
Acceptance suites: each criterion runs a scenario (or a symbolic check) and
compares one measured value against its bound.
"""

import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import sympy

from src.logger import setup_logger
from src.kvn.algebra.expr import OperatorExpr
from src.kvn.algebra.heisenberg import coupled_generator, eom_compare, oscillator_targets, symbolic_c
from src.kvn.defaults import defaults_for, merge_config
from src.kvn.errors import ParameterError
from src.kvn.grids import Grid1D
from src.kvn.hybrid import energy_rates_check, evolve_hybrid, product_initial_state
from src.kvn.measurement import Partition, phase_invariance_check, random_density_state
from src.kvn.scenarios import (
    build_chain,
    build_grids,
    hybrid_generator,
    run_algebra,
    run_classical,
    run_hybrid,
    run_kraus,
    run_povm,
    run_quantum,
)
from src.kvn.tomography import extract_povm, unsharpness_gap

# Setup logger
logger = setup_logger(__name__)

BELOW = "<"
ABOVE = ">"
AT_LEAST = ">="


@dataclass
class CriterionResult:
    """One acceptance criterion: measured value against its bound."""
    suite: str
    name: str
    measured: float
    tolerance: float
    comparison: str = BELOW

    @property
    def passed(self) -> bool:
        if math.isnan(self.measured):
            return False
        if self.comparison == BELOW:
            return self.measured < self.tolerance
        if self.comparison == ABOVE:
            return self.measured > self.tolerance
        return self.measured >= self.tolerance

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.suite}: {self.name}: {self.measured:.3e} {self.comparison} {self.tolerance:.1e}"


def scenario_config(name: str, dt: Optional[float] = None, **overrides: Any) -> Dict[str, Any]:
    config = merge_config(defaults_for(name), overrides)
    if dt is not None:
        config["dt"] = dt
    return config


def _flag(value: bool) -> float:
    return 1.0 if value else 0.0


# -- suites ---------------------------------------------------------------------

def classical_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """Koopman harmonic oscillator against the analytic flow."""
    result = run_classical(scenario_config("classical-ho", dt))
    summary = result.summary
    return [
        CriterionResult("classical", "max mean-trajectory error", summary["max_mean_error"], 1e-6),
        CriterionResult("classical", "norm drift", summary["norm_drift"], 1e-10),
        CriterionResult("classical", "Hamilton-check residual",
                        max(summary["hamilton_residual_x"], summary["hamilton_residual_k"]), 1e-5),
    ]


def quantum_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """Coherent-state mean and free-packet variance law."""
    oscillator = run_quantum(scenario_config("quantum-ho", dt))
    free = run_quantum(scenario_config("quantum-free", dt))
    return [
        CriterionResult("quantum", "<q>(t) - q0 cos t", oscillator.summary["max_mean_error"], 1e-6),
        CriterionResult("quantum", "variance law (1 + t^2)/2", free.summary["max_variance_error"], 1e-5),
        CriterionResult("quantum", "max Husimi L1 vs smoothed Liouville over saved times",
                        oscillator.summary["max_husimi_l1"], 1e-3),
    ]


def isolation_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """Observable coupling leaves the classical marginal untouched but drives the quantum sector."""
    result = run_hybrid(scenario_config("hybrid-obs", dt))
    return [
        CriterionResult("isolation", "classical marginal vs c=0 run", result.summary["marginal_isolation"], 1e-9),
        CriterionResult("isolation", "quantum <p> deviation from c=0 run",
                        result.summary["quantum_p_deviation"], 1e-2, ABOVE),
    ]


def algebra_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """Symbolic isolation verdicts, exact witnesses and the matrix-oracle cross-check."""
    result = run_algebra(defaults_for("algebra-check"))
    summary = result.summary
    c = symbolic_c()
    q = OperatorExpr.generator("q")
    witnesses = result.details["witnesses"]
    witness_q_px = witnesses["q*px"].witness_x == q * sympy.I
    witness_boost = witnesses["-c*q*pk"].witness_k == q * (-sympy.I * c)
    return [
        CriterionResult("algebra", "random observable interactions not isolating",
                        float(summary["non_isolating_random"]), 0.5),
        CriterionResult("algebra", "witness [x, q px] = i q", _flag(witness_q_px), 1.0, AT_LEAST),
        CriterionResult("algebra", "witness [k, -c q pk] = -i c q", _flag(witness_boost), 1.0, AT_LEAST),
        CriterionResult("algebra", "symbolic vs matrix commutators", summary["oracle_commutator_deviation"], 1e-8),
    ]


def correspondence_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """Boost coupling: derived equations hold numerically and the p equation departs from the classical one."""
    result = run_hybrid(scenario_config("hybrid-boost", dt))
    rates = result.summary["symbolic_rate_agreement"]
    c = symbolic_c()
    report = eom_compare(coupled_generator(c, "boost"), oscillator_targets(c))
    p_equation = report.entries["p"].derived == (-OperatorExpr.generator("q") + OperatorExpr.generator("p_k") * c)
    return [
        CriterionResult("correspondence", "derived dp/dt = -q + c p_k", _flag(p_equation), 1.0, AT_LEAST),
        CriterionResult("correspondence", "Heisenberg rates vs finite differences",
                        max(rates[name] for name in ("rhs_q", "rhs_p", "rhs_x", "rhs_k")), 1e-4),
        CriterionResult("correspondence", "p residual vs c(<p_k> + <x>)",
                        result.summary["p_residual_profile_mismatch"], 1e-4),
    ]


def _boost_residual(config: Dict[str, Any], dt: float, duration: float) -> float:
    grids = build_grids(config, ("q", "x", "k"))
    initial_settings = config["initial"]
    initial = product_initial_state(grids, initial_settings["q0"], initial_settings["p0"],
                                    initial_settings["x0"], initial_settings["k0"], initial_settings["width"])
    c = float(config["coupling"]["c"])
    run = evolve_hybrid(initial, hybrid_generator(config), duration, dt, workers=config.get("fft_workers"))
    report = energy_rates_check(run.ledger, run.trajectory, c, "boost")
    return max(report.max_residual_c, report.max_residual_q)


def energy_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """Rate identities of the boost coupling, energy flow, and second-order convergence of the residuals."""
    config = scenario_config("hybrid-boost", dt)
    result = run_hybrid(config)
    rates = result.details["rates"]
    baseline = result.summary["baseline_energy_drift"]
    step = float(config["dt"])
    coarse = _boost_residual(config, step, 2.0)
    fine = _boost_residual(config, step / 2.0, 2.0)
    order = math.log2(coarse / fine) if fine > 0.0 else float("nan")
    return [
        CriterionResult("energy", "d<H_c>/dt + c<q k>", rates.max_residual_c, 1e-4),
        CriterionResult("energy", "d<H_q>/dt - c<p p_k>", rates.max_residual_q, 1e-4),
        CriterionResult("energy", "total drift / (10 x c=0 drift)",
                        rates.total_drift / (10.0 * baseline) if baseline > 0 else float("inf"), 1.0, ABOVE),
        CriterionResult("energy", "total drift still growing", _flag(rates.drift_growing), 1.0, AT_LEAST),
        CriterionResult("energy", "observed order of rate residuals", order, 1.8, AT_LEAST),
    ]


def _phase_space_grids(n: int = 16, half_width: float = 6.0) -> tuple:
    return tuple(Grid1D.symmetric(label, n, half_width) for label in ("x", "k", "x2", "k2"))


def measurement_suite(dt: Optional[float] = None) -> List[CriterionResult]:
    """POVM and Kraus reconstruction of the sign-of-q chain, unsharp pointers and phase invariance."""
    povm_result = run_povm(defaults_for("povm-extract"))
    povm = povm_result.details["povm"]
    kraus_result = run_kraus(defaults_for("kraus-extract"))
    projector_error = float(np.max(np.abs(povm.elements["L"] - np.diag([1.0, 0.0]))))

    overlapping = scenario_config("povm-extract", pointer={"shifts": [-0.5, 0.5]})
    unsharp = extract_povm(build_chain(overlapping))
    gap = min(unsharpness_gap(element) for element in unsharp.elements.values())

    grids = _phase_space_grids()
    state = random_density_state(grids, np.random.default_rng(7))
    partition = Partition.half_planes(grids[:2], "x").product(Partition.half_planes(grids[2:], "x2"))
    invariance = phase_invariance_check(state, partition, trials=100, seed=11)
    return [
        CriterionResult("measurement", "E_L - diag(1, 0)", projector_error, 1e-6),
        CriterionResult("measurement", "POVM completeness", povm.completeness_error, 1e-8),
        CriterionResult("measurement", "Kraus consistency", max(kraus_result.details["kraus"].consistency_error.values()), 1e-7),
        CriterionResult("measurement", "Born rule on 20 random inputs", povm_result.summary["born_rule_deviation"], 1e-7),
        CriterionResult("measurement", "overlapping pointer unsharpness gap", gap, 0.05, AT_LEAST),
        CriterionResult("measurement", "phase-field change of outcome statistics", invariance.max_deviation, 1e-12),
    ]


SUITES: Dict[str, Callable[[Optional[float]], List[CriterionResult]]] = {
    "classical": classical_suite,
    "quantum": quantum_suite,
    "isolation": isolation_suite,
    "algebra": algebra_suite,
    "correspondence": correspondence_suite,
    "energy": energy_suite,
    "measurement": measurement_suite,
}


def run_verify(suite: str = "all", dt: Optional[float] = None) -> List[CriterionResult]:
    """
    Run one suite, or all of them, and log every criterion.

    Args:
        suite: Suite name or "all"
        dt: Step override for the grid-evolution suites

    Returns:
        Criterion results in run order

    Raises:
        ParameterError: If the suite is unknown
    """
    if suite != "all" and suite not in SUITES:
        raise ParameterError(f"unknown verify suite '{suite}'; known: all, {', '.join(SUITES)}")
    names = list(SUITES) if suite == "all" else [suite]
    results: List[CriterionResult] = []
    for name in names:
        started = time.perf_counter()
        logger.info(f"Verify suite '{name}'" + (f" with dt={dt}" if dt is not None else ""))
        suite_results = SUITES[name](dt)
        for result in suite_results:
            (logger.info if result.passed else logger.error)(result.describe())
        logger.info(f"Suite '{name}' finished in {time.perf_counter() - started:.1f} s")
        results.extend(suite_results)
    failed = sum(1 for r in results if not r.passed)
    logger.info(f"Verify: {len(results) - failed}/{len(results)} criteria passed")
    return results


def all_passed(results: List[CriterionResult]) -> bool:
    return all(result.passed for result in results)

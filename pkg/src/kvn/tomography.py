"""
Tomographic extraction of POVM elements and Kraus matrices from a measurement chain.

Every quantity is reconstructed from chain runs on the informationally
complete input family e_i, (e_i + e_j)/sqrt(2), (e_i + i e_j)/sqrt(2).
The Choi matrix uses the column-stacking convention

    J = sum_k vec(A_k) vec(A_k)^dagger,   vec(A)[a*D + i] = A[i, a]
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.logger import setup_logger
from src.kvn.errors import ExtractionFailure
from src.kvn.measurement import MeasurementChain

# Setup logger
logger = setup_logger(__name__)

COMPLETENESS_TOLERANCE = 1e-8
POSITIVITY_TOLERANCE = 1e-8
CHOI_TOLERANCE = 1e-7
KRAUS_TOLERANCE = 1e-7
EIGENVALUE_CUTOFF = 1e-9


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(matrix).T.reshape(-1)


def unvec(vector: np.ndarray, dimension: int) -> np.ndarray:
    return np.asarray(vector).reshape(dimension, dimension).T


def _complex_pairs(matrix: np.ndarray) -> List[List[List[float]]]:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(matrix)]


@dataclass(frozen=True)
class TomographyInput:
    """One probe state: its name and coefficients in the truncated basis."""
    name: str
    kind: str
    indices: Tuple[int, ...]
    coefficients: np.ndarray = field(compare=False)

    @property
    def density(self) -> np.ndarray:
        return np.outer(self.coefficients, np.conj(self.coefficients))


def tomography_inputs(dimension: int) -> List[TomographyInput]:
    """e_i for every i, then (e_i + e_j)/sqrt(2) and (e_i + i e_j)/sqrt(2) for i < j."""
    inputs = []
    for i in range(dimension):
        vector = np.zeros(dimension, dtype=np.complex128)
        vector[i] = 1.0
        inputs.append(TomographyInput(f"e{i}", "basis", (i,), vector))
    for i in range(dimension):
        for j in range(i + 1, dimension):
            plus = np.zeros(dimension, dtype=np.complex128)
            plus[i] = plus[j] = 1.0 / math.sqrt(2.0)
            phase = np.zeros(dimension, dtype=np.complex128)
            phase[i] = 1.0 / math.sqrt(2.0)
            phase[j] = 1j / math.sqrt(2.0)
            inputs.append(TomographyInput(f"(e{i}+e{j})/sqrt2", "real", (i, j), plus))
            inputs.append(TomographyInput(f"(e{i}+ie{j})/sqrt2", "imaginary", (i, j), phase))
    return inputs


@dataclass
class TomographyData:
    """Outcome probabilities and conditional maps for every probe state."""
    dimension: int
    labels: tuple
    inputs: List[TomographyInput]
    probabilities: List[Dict[str, float]]
    maps: List[Dict[str, np.ndarray]]


def collect(chain: MeasurementChain, labels: Optional[Sequence[str]] = None) -> TomographyData:
    """
    Run the chain once per probe state.

    Args:
        chain: Measurement chain
        labels: Outcomes whose conditional maps are kept (all by default)
    """
    labels = tuple(labels) if labels is not None else chain.labels
    inputs = tomography_inputs(chain.dimension)
    probabilities, maps = [], []
    for probe in inputs:
        output = chain.run(probe.coefficients)
        probabilities.append(output.probabilities())
        maps.append({label: output.conditional_map(label) for label in labels})
    logger.debug(f"Collected {len(inputs)} tomography runs (D={chain.dimension})")
    return TomographyData(chain.dimension, chain.labels, inputs, probabilities, maps)


@dataclass
class PovmSet:
    """Per outcome a D x D Hermitian effect E_mu with sum_mu E_mu = 1."""
    elements: Dict[str, np.ndarray]
    completeness_error: float
    min_eigenvalue: float

    @property
    def labels(self) -> List[str]:
        return list(self.elements)

    @property
    def dimension(self) -> int:
        return next(iter(self.elements.values())).shape[0]

    def probability(self, rho: np.ndarray, label: str) -> float:
        return float(np.real(np.trace(rho @ self.elements[label])))

    def to_dict(self) -> dict:
        return {
            "outcomes": [{"label": label, "matrix": _complex_pairs(matrix),
                          "eigenvalues": [float(v) for v in scipy.linalg.eigvalsh(matrix)]}
                         for label, matrix in self.elements.items()],
            "metrics": {"completeness_error": self.completeness_error,
                        "min_eigenvalue": self.min_eigenvalue},
        }


def extract_povm(chain: MeasurementChain, data: Optional[TomographyData] = None,
                 completeness_tolerance: float = COMPLETENESS_TOLERANCE,
                 positivity_tolerance: float = POSITIVITY_TOLERANCE) -> PovmSet:
    """
    Reconstruct E_mu from p(mu | rho_s) = tr(rho_s E_mu) over the probe states.

    Raises:
        ExtractionFailure: If sum_mu E_mu deviates from 1 or an eigenvalue is negative beyond tolerance
    """
    data = data or collect(chain, ())
    dimension = data.dimension
    # tr(rho E) = vec_row(rho^T) . vec_row(E)
    design = np.array([probe.density.T.ravel() for probe in data.inputs])
    elements = {}
    for label in data.labels:
        observed = np.array([p[label] for p in data.probabilities], dtype=np.complex128)
        solution, *_ = np.linalg.lstsq(design, observed, rcond=None)
        matrix = solution.reshape(dimension, dimension)
        elements[label] = 0.5 * (matrix + matrix.conj().T)

    deficit = sum(elements.values()) - np.eye(dimension)
    completeness = float(np.max(np.abs(deficit)))
    smallest = float(min(np.min(scipy.linalg.eigvalsh(m)) for m in elements.values()))
    povm = PovmSet(elements, completeness, smallest)
    logger.info(f"POVM extracted: D={dimension}, completeness error {completeness:.3e}, "
                f"min eigenvalue {smallest:.3e}")
    if completeness > completeness_tolerance:
        raise ExtractionFailure(f"POVM elements do not sum to identity (deficit {completeness:.3e})", completeness)
    if smallest < -positivity_tolerance:
        raise ExtractionFailure(f"POVM element has negative eigenvalue {smallest:.3e}", smallest)
    return povm


def conditional_map_matrices(data: TomographyData, label: str) -> Dict[Tuple[int, int], np.ndarray]:
    """Lambda_mu(|a><b|) for every a, b, by polarization over the probe states."""
    images: Dict[Tuple[int, int], np.ndarray] = {}
    real_parts: Dict[Tuple[int, int], np.ndarray] = {}
    imaginary_parts: Dict[Tuple[int, int], np.ndarray] = {}
    for probe, maps in zip(data.inputs, data.maps):
        if probe.kind == "basis":
            images[(probe.indices[0], probe.indices[0])] = maps[label]
        elif probe.kind == "real":
            real_parts[probe.indices] = maps[label]
        else:
            imaginary_parts[probe.indices] = maps[label]
    for (a, b), plus in real_parts.items():
        average = 0.5 * (images[(a, a)] + images[(b, b)])
        image = plus - average + 1j * (imaginary_parts[(a, b)] - average)
        images[(a, b)] = image
        images[(b, a)] = image.conj().T
    return images


def choi_matrix(images: Dict[Tuple[int, int], np.ndarray], dimension: int) -> np.ndarray:
    """J[a*D + i, b*D + j] = Lambda(|a><b|)[i, j]."""
    choi = np.zeros((dimension * dimension, dimension * dimension), dtype=np.complex128)
    for (a, b), image in images.items():
        choi[a * dimension:(a + 1) * dimension, b * dimension:(b + 1) * dimension] = image
    return 0.5 * (choi + choi.conj().T)


def choi_to_kraus(choi: np.ndarray, dimension: int, cutoff: float = EIGENVALUE_CUTOFF) -> Tuple[List[np.ndarray], np.ndarray]:
    """Kraus factors sqrt(lambda) unvec(v) for eigenvalues above the cutoff, and the spectrum."""
    eigenvalues, vectors = scipy.linalg.eigh(choi)
    operators = [math.sqrt(value) * unvec(vector, dimension)
                 for value, vector in zip(eigenvalues, vectors.T) if value > cutoff]
    return operators, eigenvalues


@dataclass
class KrausSet:
    """Per outcome the Kraus matrices A_mu_i with their Choi spectrum."""
    operators: Dict[str, List[np.ndarray]]
    choi_eigenvalues: Dict[str, np.ndarray]
    consistency_error: Dict[str, float]

    def rank(self, label: str) -> int:
        return len(self.operators[label])

    @property
    def ranks(self) -> Dict[str, int]:
        return {label: self.rank(label) for label in self.operators}

    def effect(self, label: str) -> np.ndarray:
        return sum(a.conj().T @ a for a in self.operators[label])

    def apply(self, label: str, rho: np.ndarray) -> np.ndarray:
        """Lambda_mu(rho) = sum_i A rho A^dagger (unnormalized)."""
        dimension = rho.shape[0]
        result = np.zeros((dimension, dimension), dtype=np.complex128)
        for a in self.operators[label]:
            result = result + a @ rho @ a.conj().T
        return result

    def to_dict(self) -> dict:
        return {
            "outcomes": [{"label": label,
                          "choi_rank": self.rank(label),
                          "kraus": [_complex_pairs(a) for a in operators],
                          "choi_eigenvalues": [float(v) for v in self.choi_eigenvalues[label]],
                          "consistency_error": self.consistency_error[label]}
                         for label, operators in self.operators.items()],
        }


def extract_kraus(chain: MeasurementChain, labels: Optional[Sequence[str]] = None,
                  data: Optional[TomographyData] = None, povm: Optional[PovmSet] = None,
                  choi_tolerance: float = CHOI_TOLERANCE,
                  kraus_tolerance: float = KRAUS_TOLERANCE) -> KrausSet:
    """
    Reconstruct the conditional maps, their Choi matrices and Kraus factors.

    Raises:
        ExtractionFailure: If a Choi matrix has an eigenvalue below -1e-7 or
            sum_i A^dagger A deviates from E_mu by 1e-7 or more
    """
    labels = tuple(labels) if labels is not None else chain.labels
    data = data or collect(chain, labels)
    povm = povm or extract_povm(chain, data)
    dimension = data.dimension
    operators, spectra, errors = {}, {}, {}
    for label in labels:
        choi = choi_matrix(conditional_map_matrices(data, label), dimension)
        kraus, eigenvalues = choi_to_kraus(choi, dimension)
        if eigenvalues[0] < -choi_tolerance:
            raise ExtractionFailure(f"Choi matrix of '{label}' is not positive (eigenvalue {eigenvalues[0]:.3e})",
                                    float(eigenvalues[0]))
        effect = sum((a.conj().T @ a for a in kraus), np.zeros((dimension, dimension), dtype=np.complex128))
        error = float(np.max(np.abs(effect - povm.elements[label])))
        if error >= kraus_tolerance:
            raise ExtractionFailure(f"Kraus factors of '{label}' miss E_mu by {error:.3e}", error)
        operators[label] = kraus
        spectra[label] = eigenvalues
        errors[label] = error
        logger.info(f"Kraus extraction '{label}': Choi rank {len(kraus)}, consistency {error:.3e}")
    return KrausSet(operators, spectra, errors)


def predict_conditional(kraus: KrausSet, label: str, rho: np.ndarray) -> np.ndarray:
    """Normalized post-measurement state A rho A^dagger / p_mu."""
    image = kraus.apply(label, rho)
    probability = float(np.real(np.trace(image)))
    if probability <= 1e-12:
        raise ExtractionFailure(f"outcome '{label}' has structurally zero probability", probability)
    return image / probability


def random_pure_inputs(dimension: int, count: int, seed: int = 0) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        vector = rng.normal(size=dimension) + 1j * rng.normal(size=dimension)
        states.append(vector / np.linalg.norm(vector))
    return states


def born_rule_check(chain: MeasurementChain, povm: PovmSet, samples: int = 20, seed: int = 0) -> float:
    """Max |p_mu simulated - tr(rho E_mu)| over random pure inputs."""
    largest = 0.0
    for vector in random_pure_inputs(povm.dimension, samples, seed):
        rho = np.outer(vector, np.conj(vector))
        simulated = chain.probabilities(vector)
        for label in povm.labels:
            largest = max(largest, abs(simulated[label] - povm.probability(rho, label)))
    logger.info(f"Born rule over {samples} random inputs: max deviation {largest:.3e}")
    return largest


def conditional_consistency(chain: MeasurementChain, kraus: KrausSet, label: str,
                            coefficients: Sequence[complex]) -> float:
    """Trace distance between the Kraus prediction and the simulated conditional state."""
    vector = np.asarray(coefficients, dtype=np.complex128)
    vector = vector / np.linalg.norm(vector)
    simulated = chain.conditional_map(vector, label)
    simulated = simulated / np.real(np.trace(simulated))
    predicted = predict_conditional(kraus, label, np.outer(vector, np.conj(vector)))
    difference = 0.5 * (simulated - predicted + (simulated - predicted).conj().T)
    return 0.5 * float(np.sum(np.abs(scipy.linalg.eigvalsh(difference))))


def unsharpness_gap(element: np.ndarray) -> float:
    """Smallest distance of an effect's eigenvalues from {0, 1}."""
    eigenvalues = scipy.linalg.eigvalsh(element)
    return float(np.min(np.minimum(np.abs(eigenvalues), np.abs(1.0 - eigenvalues))))

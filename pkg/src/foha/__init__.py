"""Fourth-order hierarchical sparse arrays: design, analysis and DOA simulation."""

__version__ = "0.1.0"

from .coarray import (BOTH_FORMS, Form, LagSet, SensorArray, central_consecutive,
                      cross_sum, diff2, fodca, holes, sum2)
from .designs import (FohaDesign, FohaParams, GeneratorKind, build_foha_cna,
                      build_foha_general, build_foha_na, design_from_json,
                      optimize_foha)
from .metrics import (CouplingModel, coupling_leakage, coupling_matrix,
                      leakage_decomposition, reference_coupling_model, redundancy)
from .music import (DoaResult, VirtualLagVector, estimate_doa, music_estimate,
                    population_lag_vector, sample_cumulant, virtual_lag_vector)
from .reconstruct import check_reconstruction, foha_reconstruction
from .signals import Modulation, SimScenario, SourceConfig, generate_snapshots

__all__ = [name for name in dir() if not name.startswith("_")]

"""Numerical periodic homogenization of Schrodinger equations with a large oscillating potential."""

from .cell import (CoefficientField, CorrectorSet, EtaField, PeriodicGrid, PotentialField, cell_residual,
                   energy_form, solve_corrector, solve_eta, validate_coefficient, validate_potential)
from .descriptors import CoefficientDescriptor, PotentialDescriptor, SourceDescriptor, StateDescriptor
from .effective import (EffectiveModel, effective_drift, effective_model, effective_potential_shift,
                        effective_tensor)
from .estimator import Homogenizer
from .fine import FineProblem, WaveField, energy_norms, mass_history, solve_fine
from .harness import ConvergenceReport, SweepConfig, emit_report, load_config, run_pipeline
from .macro import MacroProblem, operator_spectrum_check, solve_homogenized
from .twoscale import (CorrectorReconstruction, SlowFactor, TestFunction, TrigPolynomial, corrector_pairing,
                       first_order_field, limit_pairing, limit_system_residual, reconstruct_u1,
                       space_time_l2_error, two_scale_pairing)

__version__ = "0.1.0"
